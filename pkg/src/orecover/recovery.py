"""Two-hyperellipsoid recovery problems: restriction to the observation kernel,
radius-of-information certificates, and constrained-regularization maps.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .dominance import (
    DominanceProblem,
    ExtremalPoint,
    ParamCertificate,
    extremal_point,
    sdominance_solve,
)
from .errors import (
    DegenerateParameters,
    IllPosed,
    InfeasibleConstraint,
    InvalidProblem,
    NotPositiveDefinite,
    NoUnitEigenvalue,
    SingularRegularizer,
    Unbounded,
)
from .linalg import (
    DEFAULT_RANK_TOL,
    as_matrix,
    as_vector,
    gen_eig_max,
    orthonormal_nullspace,
    pseudo_inverse,
    solve_spd,
)

SCENARIOS = ("exact", "two-space", "l2", "mixed", "l1")
# scenarios whose (R, S) pair already lives on the ambient space
_CANONICAL = ("exact", "two-space")


@dataclass(frozen=True)
class ProblemSpec:
    """One recovery problem: observation map, quantity of interest, ellipsoid
    maps, levels, and a scenario tag deciding how the pieces are interpreted.

    For the canonical scenarios ("exact", "two-space") the model set is
    {||R f|| <= epsilon, ||S f|| <= eta} on R^n.  For "l2" S acts on the data
    space R^m, for "mixed" the kernel/bounded split maps s_prime/s_double_prime
    act on R^m, and for "l1" only R is used.
    """

    n: int
    Lambda: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    S: np.ndarray
    epsilon: float
    eta: float
    scenario: str
    s_prime: np.ndarray = None
    s_double_prime: np.ndarray = None

    @classmethod
    def build(
        cls,
        Lambda,
        Q,
        R=None,
        S=None,
        epsilon=1.0,
        eta=1.0,
        scenario="exact",
        s_prime=None,
        s_double_prime=None,
    ):
        Lambda = as_matrix(Lambda, "Lambda")
        m, n = Lambda.shape
        Q = as_matrix(Q, "Q")
        if Q.shape[1] != n:
            raise InvalidProblem(f"Q must have {n} columns, got {Q.shape[1]}")
        if scenario not in SCENARIOS:
            raise InvalidProblem(f"unknown scenario {scenario!r}")
        if not (epsilon > 0 and eta > 0):
            raise InvalidProblem("epsilon and eta must be positive")
        pseudo_inverse(Lambda)  # surjectivity check; raises RankDeficient

        if R is None:
            raise InvalidProblem("R is required")
        R = as_matrix(R, "R")
        if R.shape[1] != n:
            raise InvalidProblem(f"R must have {n} columns, got {R.shape[1]}")

        if scenario in _CANONICAL:
            S = as_matrix(S, "S")
            if S.shape[1] != n:
                raise InvalidProblem(f"S must have {n} columns, got {S.shape[1]}")
            if orthonormal_nullspace(np.vstack([R, S, Lambda])).shape[1] > 0:
                raise InvalidProblem(
                    "ker(R), ker(S) and ker(Lambda) intersect nontrivially; "
                    "every recovery map would have infinite worst-case error"
                )
        elif scenario == "l2":
            S = as_matrix(S, "S")
            if S.shape[1] != m:
                raise InvalidProblem(f"l2 scenario: S must act on R^{m}, got {S.shape[1]} columns")
            if orthonormal_nullspace(np.vstack([R, S @ Lambda])).shape[1] > 0:
                raise InvalidProblem("ker(R) and ker(S Lambda) intersect nontrivially")
        elif scenario == "mixed":
            if s_prime is None or s_double_prime is None:
                raise InvalidProblem("mixed scenario needs s_prime and s_double_prime")
            s_prime = as_matrix(s_prime, "s_prime")
            s_double_prime = as_matrix(s_double_prime, "s_double_prime")
            if s_prime.shape[1] != m or s_double_prime.shape[1] != m:
                raise InvalidProblem("mixed scenario: split maps must act on R^m")
            S = np.zeros((0, n))
        elif scenario == "l1":
            S = np.zeros((0, n))
        return cls(n, Lambda, Q, R, S, float(epsilon), float(eta), scenario, s_prime, s_double_prime)

    @property
    def m(self):
        return self.Lambda.shape[0]

    def effective_forms(self):
        """Level-folded ellipsoid maps (R/epsilon, S/eta) for canonical scenarios."""
        if self.scenario not in _CANONICAL:
            raise InvalidProblem(f"scenario {self.scenario!r} has no canonical form pair")
        return self.R / self.epsilon, self.S / self.eta


@dataclass(frozen=True)
class RecoveryMap:
    """Linear estimate map D (data -> object) together with Q D.

    kind records how the map was built; interpolating marks maps satisfying
    Lambda D = Id, which holds for every constrained-regularization map on
    exact data but not for the scenario-native maps.
    """

    D: np.ndarray
    QD: np.ndarray
    a: float
    b: float
    kind: str
    interpolating: bool

    def apply(self, y):
        y = as_vector(y, "observation vector")
        if y.size != self.D.shape[1]:
            raise InvalidProblem(f"observation vector must have length {self.D.shape[1]}")
        return self.D @ y


@dataclass(frozen=True)
class RadiusCertificate:
    radius_sq: float
    params: ParamCertificate
    map: RecoveryMap
    extremal: ExtremalPoint = None
    extremal_ambient: np.ndarray = None
    oracle_lb: float = None


def _restrict_with_basis(spec):
    effR, effS = spec.effective_forms()
    N = orthonormal_nullspace(spec.Lambda)
    RN, SN, QN = effR @ N, effS @ N, spec.Q @ N
    problem = DominanceProblem.build(
        RN.T @ RN, SN.T @ SN, QN.T @ QN, labels=("R'", "S'", "Q'")
    )
    return problem, N


def restrict_grams(spec):
    """Gram matrices of the level-folded forms on an orthonormal basis of
    ker(Lambda); the dominance problem whose optimum is the squared radius."""
    problem, _ = _restrict_with_basis(spec)
    return problem


def _svd_ops(M, rtol=DEFAULT_RANK_TOL):
    """(pseudo-inverse, orthonormal kernel basis) with one shared rank cut."""
    if M.shape[0] == 0:
        return np.zeros((M.shape[1], 0)), np.eye(M.shape[1])
    U, s, Vt = np.linalg.svd(M, full_matrices=True)
    cut = rtol * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > cut))
    pinv = Vt[:rank].T @ (U[:, :rank].T / s[:rank, None])
    kernel = Vt[rank:].T.copy()
    return pinv, kernel


def lexi_lsq_matrix(stage1, constraint=None, stage2=None):
    """Matrix X of the (possibly lexicographic) constrained least squares
    x(y) = argmin ||A1 x - T1 y|| s.to B x = TB y, ties broken by then
    minimizing ||A2 x - T2 y|| over the stage-one solution set.

    Every block is a matrix so the result is a single linear map y -> x.  When
    both stages leave slack the pseudo-inverse picks the minimum-norm
    representative, keeping the output deterministic.
    """
    A1, T1 = stage1
    if constraint is not None:
        B, TB = constraint
        Bdag, NB = _svd_ops(B)
        xbar = Bdag @ TB
    else:
        n = A1.shape[1]
        xbar = np.zeros((n, T1.shape[1]))
        NB = np.eye(n)
    M1 = A1 @ NB
    M1dag, K = _svd_ops(M1)
    X = xbar + NB @ (M1dag @ (T1 - A1 @ xbar))
    if stage2 is not None and K.shape[1] > 0:
        A2, T2 = stage2
        M2 = A2 @ NB @ K
        M2dag, _ = _svd_ops(M2)
        X = X + NB @ K @ (M2dag @ (T2 - A2 @ X))
    return X


def constrained_lsq(A, a_vec, B, b_vec, rtol=DEFAULT_RANK_TOL):
    """Minimizer of ||A x - a_vec||^2 subject to B x = b_vec.

    Solved by restriction to the constraint nullspace: with xbar a particular
    solution, x = xbar - N_B (A N_B)^+ (A xbar - a_vec).  Requires b_vec in
    range(B) and A of full column rank on ker(B); otherwise the minimizer is
    not unique and the problem is rejected.
    """
    A = as_matrix(A, "objective matrix")
    a_vec = as_vector(a_vec, "objective target")
    B = as_matrix(B, "constraint matrix") if np.size(B) else np.zeros((0, A.shape[1]))
    b_vec = as_vector(b_vec, "constraint rhs")
    if B.shape[0] != b_vec.size:
        raise InvalidProblem("constraint rhs length must match the constraint row count")
    if B.shape[0]:
        Bdag, NB = _svd_ops(B, rtol)
        xbar = Bdag @ b_vec
        if np.linalg.norm(B @ xbar - b_vec) > 1e-8 * (1.0 + np.linalg.norm(b_vec)):
            raise InfeasibleConstraint("constraint right-hand side is outside range(B)")
    else:
        xbar = np.zeros(A.shape[1])
        NB = np.eye(A.shape[1])
    if NB.shape[1] == 0:
        return xbar
    ANB = A @ NB
    s = np.linalg.svd(ANB, compute_uv=False)
    if s.size < ANB.shape[1] or s[-1] <= rtol * max(1.0, s[0]):
        raise IllPosed("objective matrix is rank deficient on the constraint nullspace")
    z, *_ = np.linalg.lstsq(ANB, A @ xbar - a_vec, rcond=None)
    return xbar - NB @ z


def regularization_map(spec, a, b):
    """Constrained-regularization recovery map for weights a, b >= 0.

    For a, b > 0 this is the closed form
        D = pinv(L) - N [a Gr + b Gs]^{-1} (a (RN)^T R + b (SN)^T S) pinv(L),
    with N an orthonormal basis of ker(Lambda) and Gr, Gs the nullspace Grams.
    For a = 0 or b = 0 the map is the continuity limit: lexicographic
    minimization of the surviving seminorm first, then the vanished one over
    the remaining slack.  Always satisfies Lambda D = Id.
    """
    if a < 0 or b < 0:
        raise InvalidProblem("weights must be nonnegative")
    Ldag = pseudo_inverse(spec.Lambda)
    N = orthonormal_nullspace(spec.Lambda)
    if N.shape[1] == 0:
        return _finish_interpolating(spec, Ldag, a, b, "exact-inverse")
    effR, effS = spec.effective_forms()
    if a > 0 and b > 0:
        RN, SN = effR @ N, effS @ N
        G = a * (RN.T @ RN) + b * (SN.T @ SN)
        try:
            correction = solve_spd(G, a * (RN.T @ effR) + b * (SN.T @ effS))
        except NotPositiveDefinite as exc:
            raise SingularRegularizer(
                "weighted nullspace Gram is singular; kernel condition violated"
            ) from exc
        D = Ldag - N @ (correction @ Ldag)
        kind = "tikhonov"
    elif a > 0:
        D = _limit_interpolant(spec.Lambda, Ldag, N, effR, effS)
        kind = "limit-b0"
    elif b > 0:
        D = _limit_interpolant(spec.Lambda, Ldag, N, effS, effR)
        kind = "limit-a0"
    else:
        raise InvalidProblem("a = b = 0 is only allowed when ker(Lambda) is trivial")
    return _finish_interpolating(spec, D, a, b, kind)


def _limit_interpolant(Lambda, Ldag, N, primary, secondary):
    """Interpolating map minimizing the primary seminorm, then the secondary
    one among primary minimizers (the vanishing-weight limit)."""
    m = Lambda.shape[0]
    return lexi_lsq_matrix(
        (primary, np.zeros((primary.shape[0], m))),
        constraint=(Lambda, np.eye(m)),
        stage2=(secondary, np.zeros((secondary.shape[0], m))),
    )


def _finish_interpolating(spec, D, a, b, kind):
    resid = np.abs(spec.Lambda @ D - np.eye(spec.m)).max()
    if resid > 1e-8:
        raise SingularRegularizer(f"interpolation failed: ||Lambda D - I|| = {resid:.3e}")
    return RecoveryMap(D, spec.Q @ D, float(a), float(b), kind, True)


def _endpoint_extremal(form_active, coeff, form_inactive, C, tol=1e-6):
    """Worst-case direction when only one constraint is active (a=0 or b=0)."""
    w, V = np.linalg.eigh(form_active)
    cut = DEFAULT_RANK_TOL * max(w[-1], 0.0)
    pos = w > cut
    if not np.any(pos):
        return None
    Vp, wp = V[:, pos], w[pos]
    Cr = Vp.T @ C @ Vp
    scal = 1.0 / np.sqrt(wp)
    Mstd = (Cr * scal).T * scal
    _, u = np.linalg.eigh(0.5 * (Mstd + Mstd.T))
    v = Vp @ (scal * u[:, -1])
    qa = float(v @ form_active @ v)
    if qa <= 0:
        return None
    h = v / np.sqrt(qa)
    other = float(h @ form_inactive @ h)
    if other > 1.0 + tol:
        return None
    return h


def certificate_extremal(problem, cert, tol=1e-6):
    """Extremal point for a dominance certificate, with endpoint fallback.

    Interior certificates (a, b > 0) use the pencil eigenvector construction;
    endpoint certificates fall back to the single-ellipsoid extremizer of the
    active form.  Returns None when no certified point exists (e.g. C = 0).
    """
    if cert.lambda_sharp <= 0.0 or problem.dim == 0:
        return None
    if cert.a_sharp > 1e-12 * cert.lambda_sharp and cert.b_sharp > 1e-12 * cert.lambda_sharp:
        try:
            return extremal_point(problem, cert, tol)
        except (DegenerateParameters, NoUnitEigenvalue, NotPositiveDefinite):
            return None
    if cert.b_sharp > 0:
        h = _endpoint_extremal(problem.B, cert.b_sharp, problem.A, problem.C, tol)
        if h is None:
            return None
        resid = float(
            np.linalg.norm((cert.a_sharp * problem.A + cert.b_sharp * problem.B - problem.C) @ h)
        )
        return ExtremalPoint(h, float(np.sqrt(max(h @ problem.A @ h, 0.0))), 1.0, resid)
    h = _endpoint_extremal(problem.A, cert.a_sharp, problem.B, problem.C, tol)
    if h is None:
        return None
    resid = float(
        np.linalg.norm((cert.a_sharp * problem.A + cert.b_sharp * problem.B - problem.C) @ h)
    )
    return ExtremalPoint(h, 1.0, float(np.sqrt(max(h @ problem.B @ h, 0.0))), resid)


def solve_radius(spec, tol=1e-9):
    """Radius-of-information certificate for a canonical two-ellipsoid spec.

    radius_sq is reported as a_sharp + b_sharp from the dominance solve (the
    certificate's source of truth); re-evaluating the worst-case error of the
    returned map through the dual is a consistency check, not the definition.
    """
    N = orthonormal_nullspace(spec.Lambda)
    if N.shape[1] == 0:
        D = pseudo_inverse(spec.Lambda)
        params = ParamCertificate(0.0, 0.0, 0.5, 0.0, 0.0, 0.0)
        rmap = RecoveryMap(D, spec.Q @ D, 0.0, 0.0, "exact-inverse", True)
        return RadiusCertificate(0.0, params, rmap)
    problem, N = _restrict_with_basis(spec)
    params = sdominance_solve(problem, tol)
    rmap = regularization_map(spec, params.a_sharp, params.b_sharp)
    ext = certificate_extremal(problem, params)
    ambient = N @ ext.h if ext is not None else None
    return RadiusCertificate(params.a_sharp + params.b_sharp, params, rmap, ext, ambient)


def worst_case_error_dual(M, spec, tol=1e-9):
    """sup of ||M f||^2 over the model set, via dominance on the full space.

    M must be the error map of a linear recovery (Q - something * Lambda).
    Directions in ker(R) and ker(S) simultaneously are admissible at any
    scale, so M must vanish there or the supremum is infinite.  For ambient
    dimension < 3 the dominance reformulation carries a dimension caveat and
    should be cross-checked against the brute-force oracle.
    """
    M = as_matrix(M, "error map")
    effR, effS = spec.effective_forms()
    if M.shape[1] != spec.n:
        raise InvalidProblem("error map must act on the ambient space")
    A, B, C = effR.T @ effR, effS.T @ effS, M.T @ M
    K = orthonormal_nullspace(np.vstack([effR, effS]))
    if K.shape[1] > 0:
        if np.abs(M @ K).max() > 1e-8 * (1.0 + np.abs(M).max()):
            raise Unbounded("error map is alive on the unconstrained kernel directions")
        P = orthonormal_nullspace(K.T)
        A, B, C = P.T @ A @ P, P.T @ B @ P, P.T @ C @ P
    if A.shape[0] < 3:
        warnings.warn(
            "ambient dimension < 3: dominance-dual exactness is not guaranteed; "
            "cross-check with the oracle",
            stacklevel=2,
        )
    problem = DominanceProblem.build(A, B, C, labels=("R*R", "S*S", "M*M"))
    cert = sdominance_solve(problem, tol)
    return cert.a_sharp + cert.b_sharp
