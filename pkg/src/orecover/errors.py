"""Exception hierarchy shared by all solver modules."""


class OrecoverError(Exception):
    """Base class for all solver-level failures."""


class InvalidProblem(OrecoverError):
    """Problem data violates a structural invariant (shapes, finiteness, kernels)."""


class RankDeficient(OrecoverError):
    """Observation matrix is not surjective (redundant observations)."""


class NotPositiveDefinite(OrecoverError):
    """A matrix required to be symmetric positive definite is not."""


class Infeasible(OrecoverError):
    """The dominance program has no feasible multiplier pair."""


class Unbounded(OrecoverError):
    """A worst-case supremum is infinite (error form alive on unconstrained directions)."""


class SingularRegularizer(OrecoverError):
    """The weighted Gram operator of a regularization map is singular."""


class InfeasibleConstraint(OrecoverError):
    """Equality-constraint right-hand side outside the constraint map's range."""


class IllPosed(OrecoverError):
    """A constrained least-squares problem has no unique minimizer."""


class DegenerateParameters(OrecoverError):
    """Extremal-point construction requires both multipliers strictly positive."""


class NoUnitEigenvalue(OrecoverError):
    """Top pencil eigenvalue is not 1, so no extremal point is certified."""


class PremiseViolated(OrecoverError):
    """Certification premises (strict feasibility / definite combination) fail."""


class IoFailure(OrecoverError):
    """File could not be read or written."""
