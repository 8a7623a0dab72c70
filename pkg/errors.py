"""
Exception hierarchy.

Every error raised on purpose by the simulator derives from SimulationError so
the CLI can report it with the failing pipeline named.
"""


class SimulationError(RuntimeError):
    pass


class OrderMismatchError(SimulationError, ValueError):
    """Two polynomials truncated at different orders were combined."""


class VanishingSeriesError(SimulationError, ZeroDivisionError):
    """Series division by a polynomial whose constant term is zero."""


class QubitIndexError(SimulationError, IndexError):
    pass


class ArityError(SimulationError, ValueError):
    pass


class OrderTooHighError(SimulationError, ValueError):
    pass


class InvalidPostSelectionError(SimulationError):
    """The noiseless run of a circuit is never accepted."""


class CircuitValidationError(SimulationError, ValueError):
    pass


class OracleSizeError(SimulationError, ValueError):
    pass


class NonPhysicalMapError(SimulationError):
    """A chi matrix has an eigenvalue below the clipping floor."""


class RankDeficientFitError(SimulationError):
    pass


class ConfigError(SimulationError, ValueError):
    pass
