"""Exception hierarchy. Each class carries the CLI exit code of its error class."""


class BlaschkeLabError(Exception):
    exit_code = 1


class ResourceError(BlaschkeLabError):
    """A size cap (FFT grid, refinement budget) was hit before tolerance was met."""

    exit_code = 1


class ValidationError(BlaschkeLabError, ValueError):
    exit_code = 2


class MonomialError(ValidationError):
    """The Blaschke product is a power of z, so its phase has no inflections."""


class ConfigurationError(ValidationError):
    pass


class InsufficientDataError(ValidationError):
    pass


class ResolutionError(ResourceError):
    """Two located phase inflections are too close for the sampling grid."""


class CertificateInvalidError(BlaschkeLabError):
    exit_code = 3


class SearchFailure(BlaschkeLabError):
    exit_code = 4

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])


class FitFailure(SearchFailure):
    def __init__(self, message, best_error=None, degree=None):
        super().__init__(message)
        self.best_error = best_error
        self.degree = degree


class BoundUnavailableError(SearchFailure):
    pass
