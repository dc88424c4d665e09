class ArtifactError(Exception):
    """Base class for all errors raised by the package."""


class DomainError(ArtifactError, ValueError):
    pass


class ConvergenceError(ArtifactError):
    def __init__(self, message, largest_rho=None):
        super().__init__(message)
        self.largest_rho = largest_rho


class DegenerateInputError(ArtifactError, ValueError):
    pass


class PrecisionError(ArtifactError):
    pass


class InfeasibleError(ArtifactError):
    def __init__(self, message, best_height=None):
        super().__init__(message)
        self.best_height = best_height


class InsufficientDataError(ArtifactError):
    pass


class CapError(ArtifactError):
    pass


class CalibrationError(ArtifactError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class PreconditionError(ArtifactError, ValueError):
    pass
