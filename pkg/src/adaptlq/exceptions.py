"""Exception hierarchy shared across the package."""


class LqError(ValueError):
    """Base class for all errors raised by adaptlq."""


class DataError(LqError):
    """Malformed input data (parse failures, ragged rows, non-finite values)."""


class KernelError(LqError):
    """Kernel evaluated at an invalid argument (zero-norm spatial sign, wrong arity)."""


class GuardExceeded(LqError):
    """Brute-force enumeration would exceed the tuple-count guard."""


class DegenerateVarianceError(LqError):
    """A variance estimate is zero or negative, so no normal p-value can be formed."""
