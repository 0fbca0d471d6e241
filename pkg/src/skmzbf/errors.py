"""Exception hierarchy shared by every module of the package."""


class ZbfError(Exception):
    """Base class for all package errors."""


class DimensionError(ZbfError, ValueError):
    """Array shapes or ambient dimensions do not agree."""


class ParameterError(ZbfError, ValueError):
    """A scalar or structural parameter is out of its admissible range."""


class MixedOrderError(ZbfError, ValueError):
    """A quadratic-only operation received kernels of another order."""


class EmptyUnsafeError(ZbfError, ValueError):
    """Synthesis was requested without any unsafe samples."""


class NotCoveredError(ZbfError):
    """Unsafe samples fall outside the Gaussian cover (or map too close to the origin).

    ``indices`` lists the offending unsafe-sample indices when known.
    """

    def __init__(self, message, indices=()):
        super().__init__(message)
        self.indices = list(indices)


class SolverError(ZbfError, ArithmeticError):
    """Numerical breakdown inside the simplex solver."""


class FormatError(ZbfError, ValueError):
    """A model document, dataset file or scene file is malformed."""


class ConfigError(ZbfError, ValueError):
    """A run configuration fails schema validation."""
