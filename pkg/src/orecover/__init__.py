"""Worst-case optimal recovery for model sets given by the intersection of two
centered hyperellipsoids, with scenario reductions, certificates, and
brute-force cross-checks."""

__version__ = "0.1.0"

from .dominance import (  # noqa: F401
    DominanceProblem,
    ExtremalPoint,
    ParamCertificate,
    n_ellipsoid_diagnostic,
    phi,
    sdominance_solve,
    sprocedure_certify,
)
from .errors import OrecoverError  # noqa: F401
from .oracle import OracleReport, l1_worstcase_vertex, sup_quadratic_two_ellipsoids  # noqa: F401
from .recovery import (  # noqa: F401
    ProblemSpec,
    RadiusCertificate,
    RecoveryMap,
    constrained_lsq,
    regularization_map,
    restrict_grams,
    solve_radius,
    worst_case_error_dual,
)
