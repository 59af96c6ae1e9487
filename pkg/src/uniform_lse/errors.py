"""Exception types shared across the package."""


class UniformLseError(Exception):
    """Base class for all package-specific errors."""


class TooFewPoints(UniformLseError, ValueError):
    """Fewer than three observations; the fit and theta estimate need n >= 3."""


class CollinearDesign(UniformLseError, ValueError):
    """All covariate values coincide (or nearly so); det(X'X) is not usable."""


class DatasetFormatError(UniformLseError, ValueError):
    """Malformed input table. Carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DegenerateSum(UniformLseError, ValueError):
    """Every weight of the uniform sum is zero; the sum is the constant 0."""


class ExactModeTooLarge(UniformLseError, ValueError):
    """More nonzero weights than the exact 2^m enumeration cap allows."""


class GridTooCoarse(UniformLseError, ValueError):
    """Convolution grid step too large for the narrowest box (need >= 8 cells)."""


class MismatchedDesign(UniformLseError, ValueError):
    """Replicates were generated with resampled x; an x-conditional law does not apply."""


class DomainError(UniformLseError, ValueError):
    """Argument outside the mathematical domain (e.g. quantile level not in (0,1))."""
