"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: ValidationError -> 2, the infeasibility
signals -> 3, NumericalError -> 4.
"""


class CavityError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(CavityError, ValueError):
    """Invalid input: bad field value, unknown key, malformed unit suffix."""


class UnknownQuantityError(ValidationError):
    """A sweep or plot asked for a quantity the engine does not compute."""


class UnstableGeometryError(CavityError):
    """The (possibly misaligned) cavity does not support a stable mode."""


class InvalidCapError(CavityError):
    """Mirror diameter exceeds 2R: no spherical cap exists."""


class DegenerateCavityError(CavityError):
    """Zero total round-trip loss: cavity decay and finesse are undefined."""


class LosslessCavityError(CavityError):
    """Zero intrinsic loss: intrinsic cooperativity is unbounded."""


class NoFeasibleLengthError(CavityError):
    """No cavity length satisfies the clipping-loss threshold."""


class NoFeasibleDesignError(CavityError):
    """The constrained design optimisation found no feasible point."""


class NumericalError(CavityError):
    """A numerical routine failed to converge or exhausted its budget."""


class StepSizeUnderflowError(NumericalError):
    """Adaptive integrator step size collapsed below the resolvable scale."""


class ConvergenceError(NumericalError):
    """Iterative search terminated without meeting its agreement criterion."""
