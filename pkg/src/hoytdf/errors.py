"""Exception hierarchy shared by every module."""


class HoytDFError(Exception):
    """Base class for all package errors."""


class DomainError(HoytDFError, ValueError):
    """An argument lies outside the domain of the operation."""


class NumericError(HoytDFError, ArithmeticError):
    """A numerical procedure failed to reach its tolerance.

    The best available estimate and its error bound are kept so callers can
    decide whether the result is still usable.
    """

    def __init__(self, message, estimate=float("nan"), bound=float("inf")):
        super().__init__(f"{message} (estimate={estimate!r}, bound={bound!r})")
        self.estimate = estimate
        self.bound = bound


class ResourceError(HoytDFError, RuntimeError):
    """The request would need an unreasonable amount of work or memory."""


class ConfigError(HoytDFError, ValueError):
    """A sweep configuration could not be parsed or validated."""

    def __init__(self, message, key=None, line=None):
        where = []
        if key is not None:
            where.append(f"key {key!r}")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.key = key
        self.line = line
