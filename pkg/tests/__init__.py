"""
Unit tests package.

Tests MUST NOT run the first-order 15-qubit pipelines unless
STEANE_FULL_PIPELINES=1 is set.
"""
