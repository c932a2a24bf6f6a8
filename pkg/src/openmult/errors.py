"""Exception hierarchy shared by all openmult modules."""


class OpenMultError(Exception):
    """Base class for all library errors."""


class DomainMismatch(OpenMultError):
    """Two functions live on different domains."""


class PreconditionViolated(OpenMultError):
    """An operation was called outside its admissible input region."""

    def __init__(self, message, *, bound=None, value=None, limit=None):
        super().__init__(message)
        self.bound = bound
        self.value = value
        self.limit = limit


class PerturbationTooLarge(PreconditionViolated):
    """The prescribed perturbation exceeds the certified radius."""


class EqualModulusRoots(OpenMultError):
    """Quadratic root selection is undefined: both roots have the same modulus."""


class ZeroArgument(OpenMultError):
    """A nonzero complex argument was required."""


class NonUnimodularInput(OpenMultError):
    """A value expected on the unit circle was not unimodular."""


class CoverInfeasible(OpenMultError):
    """The grid is too coarse to place sublevel-cover seams; refine the grid."""


class BoundaryMismatch(OpenMultError):
    """Prescribed boundary data is inconsistent with the target product."""


class NormBudgetExceeded(OpenMultError):
    """Input data exceeds the norm budget of a factorization step."""


class VertexInconsistency(OpenMultError):
    """Edge-local construction disagrees with the pinned vertex values."""


class DegeneratePair(OpenMultError):
    """The pair is not jointly non-degenerate."""


class ClaimViolation(OpenMultError):
    """A per-iteration invariant of the inversion scheme failed."""

    def __init__(self, iteration, which, message=""):
        super().__init__(f"claim {which} failed at iteration {iteration}" + (f": {message}" if message else ""))
        self.iteration = iteration
        self.which = which


class NonConvergence(OpenMultError):
    """The iterative scheme hit its iteration cap before reaching tolerance."""
