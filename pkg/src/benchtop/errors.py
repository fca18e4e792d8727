"""Exception hierarchy shared by every subsystem.

Each error class maps to one CLI exit code (see cli.py): configuration and
usage problems exit 2, a missing upstream artifact exits 3, checksum or size
mismatches exit 4, and non-finite numerics exit 5.
"""


class BenchtopError(Exception):
    """Base class for all package errors."""


class ShapeError(BenchtopError):
    """Operand shapes violate an operation's contract."""


class ContractError(BenchtopError):
    """A precondition other than a shape/dimension constraint was violated."""


class ConfigError(BenchtopError):
    """Invalid configuration key, value, or flag combination."""


class NonFiniteError(BenchtopError):
    """A primitive produced NaN or Inf; never silently tolerated."""


class MissingGradientError(BenchtopError):
    """Optimizer stepped over a managed parameter whose gradient is unset."""


class MissingArtifactError(BenchtopError):
    """A pipeline stage input does not exist.

    ``producer`` names the command that creates the missing artifact.
    """

    def __init__(self, message, producer=None):
        super().__init__(message)
        self.producer = producer


class ChecksumError(BenchtopError):
    """An artifact's size or checksum does not match its manifest."""


class GenerationError(BenchtopError):
    """Demo generation exceeded its attempt budget without enough successes."""
