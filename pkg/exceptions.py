class BarycenterError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(BarycenterError, ValueError):
    """Input outside the domain of an operation (boundary points, bad matrices, malformed documents)."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field

    def __str__(self):
        message = super().__str__()
        if self.field:
            return f"{self.field}: {message}"
        return message


class DimensionMismatchError(ValidationError):
    pass


class DegenerateInputError(ValidationError):
    """A closed form degenerates for these inputs."""


class DegenerateRegionError(BarycenterError):
    """Sampling a region failed: empty bounding box or too few accepted points."""


class ConvergenceError(BarycenterError):
    def __init__(self, message, trace=None, result=None):
        super().__init__(message)
        self.trace = list(trace or [])
        self.result = result
