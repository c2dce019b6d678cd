"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class HsadError(Exception):
    """Base class for all errors raised by hsad."""


class ParameterError(HsadError, ValueError):
    """Invalid argument, shape or parameter combination."""


class FormatError(HsadError, ValueError):
    """Malformed, truncated or unsupported file content."""


class NumericalError(HsadError, ArithmeticError):
    """A factorization failed even after the documented fallback."""
