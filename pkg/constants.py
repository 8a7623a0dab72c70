"""
Project-wide constants.

This module centralizes tolerances, defaults and the code layout so that
every numeric choice is tunable from one place.
"""

import math

# -----------------------------
# Error polynomials
# -----------------------------
POLY_VARIABLES = ("px", "py", "pz")
POLY_PRUNE_EPSILON = 1e-12
MAX_ORDER = 2
DEFAULT_ORDER = 1

# Rational reconstruction for printing (continued fractions)
RATIONAL_MAX_DENOMINATOR = 64
RATIONAL_MATCH_TOLERANCE = 1e-6

# -----------------------------
# State vectors
# -----------------------------
MAX_STATEVECTOR_QUBITS = 16
UNITARY_TOLERANCE = 1e-12
NORMALIZATION_TOLERANCE = 1e-10

# Members with squared norm below this are dropped.
ENSEMBLE_COMPRESSION_FLOOR = 1e-20
# Gram eigenvalues below this fraction of the largest one are round-off.
ENSEMBLE_RELATIVE_FLOOR = 1e-12

# -----------------------------
# Noise engine
# -----------------------------
PAULI_LABELS = ("x", "y", "z")
DEFAULT_WORKERS = 1
WORKER_QUEUE_DEPTH = 4
PROGRESS_LOG_EVERY = 500

# -----------------------------
# Dense oracle
# -----------------------------
ORACLE_MAX_QUBITS = 8
ORACLE_BOUND_FACTOR = 100.0
ORACLE_CHECK_PROBABILITIES = (1e-3, 1e-4)
ORACLE_CHECK_ORDERS = (1, 2)
ORACLE_ROUNDOFF_FLOOR = 1e-14

# -----------------------------
# Steane [7,1,3] layout (1-indexed supports)
# -----------------------------
CODE_LENGTH = 7
GENERATOR_SUPPORTS = (
    (4, 5, 6, 7),
    (2, 3, 6, 7),
    (1, 3, 5, 7),
)

# Gate encoder wiring: logical fan-out, pivot Hadamards, pivot fan-outs.
# Every pivot starts on qubit 7; pivots 4 and 5 end on the information qubit.
ENCODER_LOGICAL_FANOUT = (1, (2, 3))
ENCODER_PIVOTS = (
    (4, (7, 2, 1)),
    (5, (7, 3, 1)),
    (6, (7, 3, 2)),
)

# Shor-state verification pairs (0-indexed within the ancilla block)
SHOR_VERIFICATION_PAIRS = {
    4: ((0, 3),),
    7: ((0, 2), (2, 4), (4, 6)),
}
SYNDROME_REPETITIONS = 2

# -----------------------------
# Register layout of the T-gate pipelines
# -----------------------------
THETA_REGISTER = tuple(range(0, 7))
ANCILLA_BLOCK = tuple(range(7, 14))
VERIFY_QUBIT = 14
PIPELINE_QUBITS = 15

# -----------------------------
# Protocols
# -----------------------------
DEFAULT_ALPHA = math.pi / 5
DEFAULT_BETA = math.pi / 7
DEFAULT_PROJECTION_ROUNDS = 2
SWEEP_GRID_POINTS = 8
USABILITY_TOLERANCE = 1e-9

# -----------------------------
# Tomography
# -----------------------------
KRAUS_EIGENVALUE_FLOOR = -1e-8
KRAUS_COMPLETENESS_TOLERANCE = 1e-6

# -----------------------------
# CLI / reports
# -----------------------------
JSON_SCHEMA_VERSION = 1
COMPARISON_TOLERANCE = 1e-6
REFERENCE_TABLES_FILE = "data/reference_tables.json"
FULL_PIPELINE_ENV = "STEANE_FULL_PIPELINES"
OUTPUT_FORMATS = ("json", "csv", "markdown")
EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_SIMULATION_ERROR = 2
