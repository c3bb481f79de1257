"""Exception types shared across the toolkit."""


class EdgeListError(ValueError):
    """Malformed or empty edge-list input."""


class ParameterError(ValueError):
    """Diffusion or run parameter outside its admissible range."""


class StructureError(ValueError):
    """Input graph/scenario set does not have the structure an operation requires."""


class CapExceeded(RuntimeError):
    """A configured enumeration cap would be exceeded; carries a size estimate."""

    def __init__(self, message: str, estimate: float):
        super().__init__(message)
        self.estimate = estimate
