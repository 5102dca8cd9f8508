"""Exception hierarchy shared by all modules."""


class OrthoTopoError(Exception):
    """Base class for every error raised by the package."""


class EmptyRegion(OrthoTopoError):
    """A node-selection region contains no mesh node."""


class DegenerateRadius(OrthoTopoError):
    """A loaded node sits on the axis used to orient a tangential force."""


class NearSingular(OrthoTopoError):
    """The compliance block is too ill-conditioned to invert safely."""


class KappaOutOfRange(OrthoTopoError):
    """Poisson-sum parameter outside the open interval (-2, 2)."""


class SingularSystem(OrthoTopoError):
    """The reduced stiffness system cannot be factorized (rigid-body motion left)."""


class NonConvergence(OrthoTopoError):
    """An iterative procedure ran out of iterations."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class IrreparableElement(OrthoTopoError):
    """Thermodynamic admissibility could not be restored inside the bound box."""


class ConfigError(OrthoTopoError):
    """Invalid run configuration; ``errors`` lists one message per offending field."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
