"""Exception hierarchy shared by the library and the command line."""


class SLPError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(SLPError, ValueError):
    """Malformed or invalid configuration (CLI exit code 2)."""


class NumericalError(SLPError, ArithmeticError):
    """A numerical routine failed to converge or hit a singular system (CLI exit code 3)."""


class SpreadError(NumericalError):
    """The spread equation could not be bracketed or solved."""


class EmptyBinError(NumericalError):
    """A Lepski bin at some resolution level holds no observations."""

    def __init__(self, tau: int, bin_index: int):
        self.tau = tau
        self.bin_index = bin_index
        super().__init__(f"empty bin at resolution level tau={tau}, bin index {bin_index}")
