"""Exception hierarchy shared by the laboratory modules."""


class HamlabError(Exception):
    """Base class for every error raised by hamlab."""


class InvalidSystemError(HamlabError, ValueError):
    pass


class CriticalPointError(HamlabError, ValueError):
    """Raised when a quantity is undefined at a critical point of H."""


class StiffnessError(HamlabError, RuntimeError):
    """Adaptive integrator step size underflowed."""


class ToleranceError(HamlabError, RuntimeError):
    """A requested accuracy could not be reached."""


class NonCompactLevelSetError(HamlabError, ValueError):
    pass


class MethodUnavailableError(HamlabError, ValueError):
    """The requested method does not apply to this system (caller should fall back)."""


class DeformationRejected(HamlabError, ValueError):
    """A deformation failed one of the catalog screens."""


class ConvergenceError(HamlabError, RuntimeError):
    pass


class StructureError(HamlabError, ValueError):
    """Invalid Hermitian structure or operator incompatible with it."""


class WeightOverflowError(HamlabError, OverflowError):
    pass


class ConfigError(HamlabError, ValueError):
    pass
