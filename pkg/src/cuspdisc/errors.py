"""Exception types shared across the package."""


class DomainError(ValueError):
    """A point fell outside the validity domain of a function or model."""

    def __init__(self, message, z=None):
        super().__init__(message if z is None else f"{message} (offending z = {z!r})")
        self.z = z


class ParameterError(ValueError):
    """Invalid construction parameters (violated calibration inequality etc.)."""


class ConvergenceError(RuntimeError):
    def __init__(self, message, contraction=None):
        super().__init__(message)
        self.contraction = contraction


class RegularityError(RuntimeError):
    """Spectral data decays too slowly for a derivative at the vertex to be trusted."""


class UnsupportedOperation(RuntimeError):
    pass
