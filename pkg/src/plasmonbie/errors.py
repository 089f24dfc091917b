"""Exception and warning types shared by all modules."""


class PlasmonError(Exception):
    """Base class for numerical and input failures raised by this package."""


class InvalidGeometryError(PlasmonError, ValueError):
    pass


class ConfigurationError(PlasmonError, ValueError):
    pass


class GeometryScaleError(PlasmonError):
    """The H* Gram matrix is not positive definite for this curve."""


class UnderResolutionError(PlasmonError):
    """A discrete identity failed by more than its tolerance; increase N."""


class NearSingularError(PlasmonError):
    def __init__(self, message, distance):
        super().__init__(message)
        self.distance = distance


class DegeneracyError(PlasmonError):
    pass


class PrecisionError(PlasmonError):
    pass


class PoleProximityError(PlasmonError):
    pass


class UnsupportedDimensionError(PlasmonError, ValueError):
    pass


class ResolutionError(PlasmonError):
    pass


class ConditionWarning(UserWarning):
    """An input sits where an asymptotic formula is known to be unreliable."""


class DomainWarning(UserWarning):
    """Evaluation point outside the region where an expansion is valid."""
