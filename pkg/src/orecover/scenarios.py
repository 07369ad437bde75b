"""Scenario reductions: two-space approximability, l2-inaccurate data, and
mixed accurate / l2-inaccurate data, each compiled to a canonical
two-ellipsoid problem on an extended space plus a native recovery map.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleConstraint, InvalidProblem
from .linalg import as_matrix, as_vector, orthonormal_nullspace, solve_spd
from .recovery import ProblemSpec, RecoveryMap, lexi_lsq_matrix, solve_radius


@dataclass(frozen=True)
class TwoSpaceSpec:
    """Approximability model: dist(f, V) <= epsilon and dist(f, W) <= eta."""

    V: np.ndarray  # orthonormal columns spanning the first subspace
    W: np.ndarray
    epsilon: float
    eta: float
    Lambda: np.ndarray
    Q: np.ndarray

    @classmethod
    def build(cls, V, W, epsilon, eta, Lambda, Q):
        V = as_matrix(V, "V")
        W = as_matrix(W, "W")
        Lambda = as_matrix(Lambda, "Lambda")
        Q = as_matrix(Q, "Q")
        n = Lambda.shape[1]
        for name, M in (("V", V), ("W", W)):
            if M.shape[0] != n:
                raise InvalidProblem(f"{name} must have {n} rows")
            if M.shape[1] and np.abs(M.T @ M - np.eye(M.shape[1])).max() > 1e-10:
                raise InvalidProblem(f"{name} must have orthonormal columns")
        if not (epsilon > 0 and eta > 0):
            raise InvalidProblem("epsilon and eta must be positive")
        return cls(V, W, float(epsilon), float(eta), Lambda, Q)


@dataclass(frozen=True)
class ExtendedSpec:
    """A scenario compiled to a canonical spec on an extended space, with the
    embedding of native objects and the projection extracting them back."""

    problem: ProblemSpec
    lift_f: np.ndarray  # native f -> extended coordinates
    project_f: np.ndarray  # extended coordinates -> native f
    native_m: int


def two_space_problem(ts):
    """Compile a two-space model to a canonical spec (no space extension).

    The ellipsoid maps are the orthogonal projectors onto the complements of V
    and W; the level fold built into the canonical solve realizes the change of
    variables a = c * epsilon^2, b = d * eta^2, so the returned back-map
    divides the multipliers by the squared levels.
    """
    n = ts.Lambda.shape[1]
    P_V = np.eye(n) - ts.V @ ts.V.T
    P_W = np.eye(n) - ts.W @ ts.W.T
    spec = ProblemSpec.build(
        ts.Lambda, ts.Q, R=P_V, S=P_W, epsilon=ts.epsilon, eta=ts.eta, scenario="two-space"
    )

    def back_map(a, b):
        return a / ts.epsilon**2, b / ts.eta**2

    return spec, back_map


def l2_inaccurate_problem(spec):
    """Compile an l2-inaccurate-data problem to the extended space H x R^m.

    The compound object is (f, e); observations become exact on the extended
    space via Lambda~ (f, e) = Lambda f + e, the model ellipsoid constrains f
    and the uncertainty ellipsoid constrains e.  Returns the extension and a
    builder mapping scenario weights (c, d) to the native recovery map.
    """
    if spec.scenario != "l2":
        raise InvalidProblem("l2_inaccurate_problem needs an l2-scenario spec")
    n, m = spec.n, spec.m
    L, Q, R, S = spec.Lambda, spec.Q, spec.R, spec.S
    Lt = np.hstack([L, np.eye(m)])
    Qt = np.hstack([Q, np.zeros((Q.shape[0], m))])
    Rt = np.hstack([R, np.zeros((R.shape[0], m))])
    St = np.hstack([np.zeros((S.shape[0], n)), S])
    ext_problem = ProblemSpec.build(
        Lt, Qt, R=Rt, S=St, epsilon=spec.epsilon, eta=spec.eta, scenario="exact"
    )
    lift = np.vstack([np.eye(n), np.zeros((m, n))])
    ext = ExtendedSpec(ext_problem, lift, lift.T, m)

    def builder(c, d):
        return _l2_native_map(spec, c, d)

    return ext, builder


def _l2_native_map(spec, c, d):
    """Matrix of argmin_f c ||R f||^2 + d ||S (y - Lambda f)||^2.

    For d = 0 the data term vanishes and the map is the weight limit: the
    minimizer of the data misfit over ker(R) (the zero map when R is
    injective).  For c = 0 the misfit is minimized first and the model
    seminorm breaks ties.
    """
    if c < 0 or d < 0 or (c == 0 and d == 0):
        raise InvalidProblem("weights must be nonnegative and not both zero")
    n, m = spec.n, spec.m
    L, R, S = spec.Lambda, spec.R, spec.S
    SL = S @ L
    if c > 0 and d > 0:
        G = c * (R.T @ R) + d * (SL.T @ SL)
        D = solve_spd(G, d * (SL.T @ S))
        kind = "l2-native"
    elif c > 0:
        D = lexi_lsq_matrix(
            (R, np.zeros((R.shape[0], m))),
            stage2=(SL, S),
        )
        kind = "l2-native-limit-d0"
    else:
        D = lexi_lsq_matrix(
            (SL, S),
            stage2=(R, np.zeros((R.shape[0], m))),
        )
        kind = "l2-native-limit-c0"
    return RecoveryMap(D, spec.Q @ D, c * spec.epsilon**2, d * spec.eta**2, kind, False)


def mixed_problem(spec):
    """Compile a mixed accurate / l2-inaccurate problem.

    The uncertainty lives in ker(s_prime) with an l2 bound through
    s_double_prime; the extension pairs f with coordinates of that kernel.
    The native map interpolates the exact part (s_prime Lambda f = s_prime y)
    and regularizes the rest.
    """
    if spec.scenario != "mixed":
        raise InvalidProblem("mixed_problem needs a mixed-scenario spec")
    n, m = spec.n, spec.m
    L, Q, R = spec.Lambda, spec.Q, spec.R
    Sp, Spp = spec.s_prime, spec.s_double_prime
    E = orthonormal_nullspace(Sp)  # m x k basis of the exact-part kernel
    k = E.shape[1]
    Lt = np.hstack([L, E])
    Qt = np.hstack([Q, np.zeros((Q.shape[0], k))])
    Rt = np.hstack([R, np.zeros((R.shape[0], k))])
    St = np.hstack([np.zeros((Spp.shape[0], n)), Spp @ E])
    ext_problem = ProblemSpec.build(
        Lt, Qt, R=Rt, S=St, epsilon=spec.epsilon, eta=spec.eta, scenario="exact"
    )
    lift = np.vstack([np.eye(n), np.zeros((k, n))])
    ext = ExtendedSpec(ext_problem, lift, lift.T, m)

    def builder(c, d):
        return _mixed_native_map(spec, c, d)

    return ext, builder


def _mixed_native_map(spec, c, d):
    """Matrix of argmin_f c ||R f||^2 + d ||S''(y - Lambda f)||^2 subject to
    S' Lambda f = S' y, with lexicographic weight limits for c = 0 or d = 0.

    The matrix uses the minimum-norm feasibility projection of S' y onto
    range(S' Lambda); apply_mixed checks actual feasibility per observation.
    """
    if c < 0 or d < 0 or (c == 0 and d == 0):
        raise InvalidProblem("weights must be nonnegative and not both zero")
    m = spec.m
    L, R = spec.Lambda, spec.R
    Sp, Spp = spec.s_prime, spec.s_double_prime
    SppL = Spp @ L
    constraint = (Sp @ L, Sp)
    zero_r = np.zeros((R.shape[0], m))
    if c > 0 and d > 0:
        D = lexi_lsq_matrix(
            (np.vstack([np.sqrt(c) * R, np.sqrt(d) * SppL]),
             np.vstack([zero_r, np.sqrt(d) * Spp])),
            constraint=constraint,
        )
        kind = "mixed-native"
    elif c > 0:
        D = lexi_lsq_matrix((R, zero_r), constraint=constraint, stage2=(SppL, Spp))
        kind = "mixed-native-limit-d0"
    else:
        D = lexi_lsq_matrix((SppL, Spp), constraint=constraint, stage2=(R, zero_r))
        kind = "mixed-native-limit-c0"
    return RecoveryMap(D, spec.Q @ D, c * spec.epsilon**2, d * spec.eta**2, kind, False)


def apply_mixed(spec, rmap, y, rtol=1e-8):
    """Apply a mixed-scenario map, enforcing feasibility of the exact part."""
    y = as_vector(y, "observation vector")
    f = rmap.apply(y)
    Sp = spec.s_prime
    resid = np.linalg.norm(Sp @ (spec.Lambda @ f) - Sp @ y)
    if resid > rtol * (1.0 + np.linalg.norm(Sp @ y)):
        raise InfeasibleConstraint(
            "exact-part data s_prime y is outside range(s_prime Lambda)"
        )
    return f


@dataclass(frozen=True)
class ScenarioSolution:
    """Radius certificate of a compiled scenario plus its native map."""

    radius_sq: float
    c_sharp: float
    d_sharp: float
    params: object  # ParamCertificate of the extended dominance solve
    native_map: RecoveryMap
    extended: ExtendedSpec
    extended_map: RecoveryMap


def solve_two_space(ts, tol=1e-9):
    spec, back = two_space_problem(ts)
    cert = solve_radius(spec, tol)
    c, d = back(cert.params.a_sharp, cert.params.b_sharp)
    return cert, (c, d)


def solve_l2(spec, tol=1e-9):
    ext, builder = l2_inaccurate_problem(spec)
    cert = solve_radius(ext.problem, tol)
    c = cert.params.a_sharp / spec.epsilon**2
    d = cert.params.b_sharp / spec.eta**2
    native = builder(c, d)
    return ScenarioSolution(cert.radius_sq, c, d, cert.params, native, ext, cert.map)


def solve_mixed(spec, tol=1e-9):
    ext, builder = mixed_problem(spec)
    cert = solve_radius(ext.problem, tol)
    c = cert.params.a_sharp / spec.epsilon**2
    d = cert.params.b_sharp / spec.eta**2
    native = builder(c, d)
    return ScenarioSolution(cert.radius_sq, c, d, cert.params, native, ext, cert.map)
