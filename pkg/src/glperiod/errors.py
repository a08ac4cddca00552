"""Exception types shared across the package."""


class GLPeriodError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(GLPeriodError):
    """Invalid run configuration (CLI exit code 2)."""


class ZeroModeViolation(GLPeriodError):
    """The mean (xi = 0) frequency mode is too large for the inverse period
    multiplier; the input violates the odd-forcing requirement."""


class SeamDecayViolation(GLPeriodError):
    """A spatial profile does not decay at the periodic seam x = -L/2."""


class OddnessViolation(GLPeriodError):
    """A field required to satisfy f(-x) = -f(x) fails the lattice check."""


class NonFiniteField(GLPeriodError):
    """A field acquired non-finite values (iteration or time-stepping
    escaped its stability region)."""
