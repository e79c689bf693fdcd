"""
Exception types shared by the simulator library, the batch runner and the CLI.
"""
from typing import List, Optional


class HSwarmError(Exception):
    """Base class for every error raised by the library."""


class InvalidArgumentError(HSwarmError, ValueError):
    """An operation received an argument outside its domain."""


class DegenerateGeometryError(HSwarmError):
    """Sensor and target are too close for the observation model to be linearized."""


class NumericalDegeneracyError(HSwarmError):
    """A matrix that must be inverted is singular or badly conditioned."""


class ConfigError(HSwarmError):
    """
    An experiment document could not be parsed or failed validation.

    Args:
        problems: Every violated invariant, one message per entry
        line: 1-based line of a YAML syntax error, if known
    """

    def __init__(self, problems: List[str], line: Optional[int] = None):
        self.problems = list(problems)
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + "; ".join(self.problems))
