import warnings

import numpy as np
import pytest

from orecover.dominance import (
    DominanceProblem,
    extremal_point,
    n_ellipsoid_diagnostic,
    phi,
    sdominance_solve,
    sprocedure_certify,
)
from orecover.errors import (
    DegenerateParameters,
    InvalidProblem,
    PremiseViolated,
)
from orecover.linalg import orthonormal_nullspace
from orecover.oracle import sup_quadratic_ellipsoids, sup_quadratic_two_ellipsoids


def random_problem(seed, p_hi=4):
    rng = np.random.default_rng(seed)
    p = int(rng.integers(1, p_hi + 1))
    Xa = rng.standard_normal((p + 1, p))
    Xb = rng.standard_normal((p + 1, p))
    Xc = rng.standard_normal((p, p))
    return DominanceProblem.build(Xa.T @ Xa, Xb.T @ Xb, Xc.T @ Xc)


# ---------------------------------------------------------------- phi


def test_phi_examples():
    prob = DominanceProblem.build([[1.0]], [[1.0]], [[1.0]])
    for tau in (0.1, 0.5, 0.9):
        assert abs(phi(prob, tau) - 1.0) < 1e-14
    prob = DominanceProblem.build([[1.0]], [[4.0]], [[1.0]])
    # scalar formula 1 / ((1 - tau) + 4 tau)
    assert abs(phi(prob, 0.5) - 0.4) < 1e-14
    prob = DominanceProblem.build([[1.0]], [[4.0]], [[0.0]])
    assert phi(prob, 0.3) == 0.0


def test_phi_convexity_seeded():
    for seed in range(50):
        rng = np.random.default_rng(900 + seed)
        prob = random_problem(seed)
        t1, t2 = rng.uniform(0.01, 0.99, size=2)
        mid = phi(prob, 0.5 * (t1 + t2))
        assert mid <= 0.5 * (phi(prob, t1) + phi(prob, t2)) + 1e-9


# ---------------------------------------------------------------- solve


def test_solve_flat_tie_midpoint():
    cert = sdominance_solve(DominanceProblem.build([[1.0]], [[1.0]], [[1.0]]))
    assert abs(cert.lambda_sharp - 1.0) < 1e-12
    assert abs(cert.a_sharp - 0.5) < 1e-9
    assert abs(cert.b_sharp - 0.5) < 1e-9


def test_solve_endpoint_snap():
    # two-variable check: min a+b subject to a + 4b >= 1 has optimum (0, 1/4)
    cert = sdominance_solve(DominanceProblem.build([[1.0]], [[4.0]], [[1.0]]))
    assert cert.tau_sharp == 1.0
    assert cert.a_sharp == 0.0
    assert abs(cert.b_sharp - 0.25) < 1e-12
    assert abs(cert.lambda_sharp - 0.25) < 1e-12


def test_solve_zero_objective():
    cert = sdominance_solve(DominanceProblem.build([[1.0]], [[2.0]], [[0.0]]))
    assert cert.a_sharp == 0.0 and cert.b_sharp == 0.0


def test_certificate_feasibility_and_grid_optimality():
    for seed in range(25):
        prob = random_problem(seed)
        cert = sdominance_solve(prob)
        trace_c = float(np.trace(prob.C))
        assert cert.psd_residual >= -1e-8 * (1.0 + trace_c)
        grid = np.linspace(1e-6, 1 - 1e-6, 200)
        vals = [phi(prob, t) for t in grid]
        assert min(vals) >= cert.lambda_sharp - 1e-6 * (1.0 + cert.lambda_sharp)


def test_strong_duality_against_oracle():
    # sup h C h over the two-ellipsoid intersection equals the certified optimum
    for seed in range(20):
        prob = random_problem(seed, p_hi=4)
        cert = sdominance_solve(prob)
        rep = sup_quadratic_two_ellipsoids(prob.A, prob.B, prob.C, budget=10_000, seed=seed)
        opt = cert.a_sharp + cert.b_sharp
        assert rep.best_value <= opt * (1 + 1e-9) + 1e-12
        assert rep.best_value >= opt - 1e-3 * (1.0 + opt)


def test_invalid_problems_rejected():
    with pytest.raises(InvalidProblem):
        DominanceProblem.build([[0.0]], [[0.0]], [[1.0]])  # shared kernel
    with pytest.raises(InvalidProblem):
        DominanceProblem.build([[1.0, 0.5], [0.4, 1.0]], np.eye(2), np.eye(2))
    with pytest.raises(InvalidProblem):
        DominanceProblem.build(-np.eye(2), np.eye(2), np.eye(2))


# ---------------------------------------------------------------- extremal


def test_extremal_trivial_identity():
    prob = DominanceProblem.build([[1.0]], [[1.0]], [[1.0]])
    cert = sdominance_solve(prob)
    ext = extremal_point(prob, cert)
    assert abs(abs(ext.h[0]) - 1.0) < 1e-10
    assert abs(ext.a_seminorm - 1.0) < 1e-10
    assert abs(ext.b_seminorm - 1.0) < 1e-10
    assert ext.stationarity_residual < 1e-10


def test_extremal_flat_two_dim():
    # grid-oracle cross-check on the flat instance: optimum 2.5 at h = (1, 0)
    A, B, C = np.diag([1.0, 1.0]), np.diag([1.0, 4.0]), np.diag([2.5, 2.5])
    prob = DominanceProblem.build(A, B, C)
    cert = sdominance_solve(prob)
    assert abs(cert.a_sharp + cert.b_sharp - 2.5) < 1e-9
    ext = extremal_point(prob, cert)
    assert abs(abs(ext.h[0]) - 1.0) < 1e-6 and abs(ext.h[1]) < 1e-6
    assert abs(ext.a_seminorm - 1.0) < 1e-6 and abs(ext.b_seminorm - 1.0) < 1e-6
    # 400 x 400 polar grid over the feasible set
    th = np.linspace(0, np.pi, 400, endpoint=False)
    X = np.stack([np.cos(th), np.sin(th)], axis=1)
    den = np.maximum(np.einsum("kp,pq,kq->k", X, A, X), np.einsum("kp,pq,kq->k", X, B, X))
    vals = np.einsum("kp,pq,kq->k", X, C, X) / den
    assert abs(vals.max() - 2.5) < 1e-3 * 2.5


def test_extremal_identity_pencil():
    prob = DominanceProblem.build(np.eye(3), np.eye(3), 2.0 * np.eye(3))
    cert = sdominance_solve(prob)
    ext = extremal_point(prob, cert)
    assert ext.stationarity_residual < 1e-8


def test_extremal_degenerate_rejected():
    prob = DominanceProblem.build([[1.0]], [[4.0]], [[1.0]])
    cert = sdominance_solve(prob)
    with pytest.raises(DegenerateParameters):
        extremal_point(prob, cert)


def test_extremal_properties_seeded():
    hits = 0
    for seed in range(30):
        prob = random_problem(seed)
        cert = sdominance_solve(prob)
        lam = cert.lambda_sharp
        if cert.a_sharp <= 1e-8 * lam or cert.b_sharp <= 1e-8 * lam or lam == 0.0:
            continue
        ext = extremal_point(prob, cert)
        hits += 1
        assert abs(ext.a_seminorm - 1.0) < 1e-6
        assert abs(ext.b_seminorm - 1.0) < 1e-6
        assert ext.stationarity_residual <= 1e-6 * max(1.0, np.abs(prob.C).max())
    assert hits >= 5  # interior optima do occur in the seeded family


# ---------------------------------------------------------------- diagnostic


def test_diagnostic_two_forms_always_exact():
    for seed in range(10):
        prob = random_problem(seed, p_hi=4)
        res = n_ellipsoid_diagnostic([prob.A, prob.B], prob.C, tol=1e-6)
        assert res.verdict == "Exact"


def test_diagnostic_identity_three_forms():
    res = n_ellipsoid_diagnostic([np.eye(3)] * 3, np.eye(3), tol=1e-8)
    assert res.verdict == "Exact"


def test_diagnostic_projectors_not_exact_with_gap():
    # multispace-style instance: scaled projector forms on ker(Lambda)
    rng = np.random.default_rng(103)
    n = 4
    Lam = rng.standard_normal((1, n))
    N = orthonormal_nullspace(Lam)
    forms = []
    for _ in range(3):
        M = rng.standard_normal((n, 2))
        V, _ = np.linalg.qr(M)
        P = np.eye(n) - V @ V.T
        PN = P @ N
        forms.append(PN.T @ PN)
    C = N.T @ N
    res = n_ellipsoid_diagnostic(forms, C, tol=1e-4)
    assert res.verdict == "NotExact"
    rep = sup_quadratic_ellipsoids(forms, C, budget=20_000, seed=1)
    assert (res.value - rep.best_value) / res.value > 1e-3


def test_diagnostic_aligned_instance_exact():
    # non-projector forms constructed to share a common active extremizer
    rng = np.random.default_rng(77)
    p = 4
    h0 = rng.standard_normal(p)
    forms = []
    for _ in range(3):
        M = rng.standard_normal((p, p))
        A = M.T @ M + 0.3 * np.eye(p)
        forms.append(A / float(h0 @ A @ h0))
    w = np.array([0.5, 1.2, 0.8])
    T = sum(wi * Ai for wi, Ai in zip(w, forms))
    C = np.outer(T @ h0, T @ h0) / float(h0 @ T @ h0)
    res = n_ellipsoid_diagnostic(forms, C, tol=1e-6)
    assert res.verdict == "Exact"
    assert abs(res.value - w.sum()) < 1e-6 * w.sum()


# ---------------------------------------------------------------- s-procedure


def test_sprocedure_unit_ball_certificate():
    q = (np.eye(3), -1.0)
    out = sprocedure_certify(q, q, q)
    assert out.status == "certified"
    a1, a2 = out.multipliers
    assert a1 >= 0 and a2 >= 0
    assert abs(a1 + a2 - 1.0) < 1e-9


def test_sprocedure_weighted_certificate():
    # certificate (0, 0.25): 0.25 * q2 - q0 is diagonally nonnegative
    out = sprocedure_certify(
        (np.diag([0.0, 1.0, 0.0]), -0.25),
        (np.eye(3), -1.0),
        (np.diag([1.0, 4.0, 0.0]), -1.0),
    )
    assert out.status == "certified"
    a1, a2 = out.multipliers
    assert abs(a1) < 1e-9 and abs(a2 - 0.25) < 1e-9
    assert np.all(0.25 * np.diag([1.0, 4.0, 0.0]) - np.diag([0.0, 1.0, 0.0]) >= -1e-12)


def test_sprocedure_refuted():
    out = sprocedure_certify(
        (np.eye(3), 0.0), (-np.eye(3), -1.0), (-np.eye(3), -1.0)
    )
    assert out.status == "refuted"
    x = out.witness
    assert float(x @ x) > 0.0  # any nonzero point violates the implication


def test_sprocedure_low_dimension_warns():
    with pytest.warns(UserWarning):
        sprocedure_certify((np.eye(2), -1.0), (np.eye(2), -1.0), (np.eye(2), -1.0))


def test_sprocedure_premise_violated():
    # constraints with empty strict interior: q1 = ||x||^2 + 1 <= 0 never holds
    with pytest.raises(PremiseViolated):
        sprocedure_certify((np.eye(3), 0.0), (np.eye(3), 1.0), (np.eye(3), -1.0))


def test_sprocedure_certificates_verified_against_oracle():
    # whenever a certificate comes back, the implication really holds
    for seed in range(8):
        rng = np.random.default_rng(1200 + seed)
        X1 = rng.standard_normal((4, 3))
        X2 = rng.standard_normal((4, 3))
        A1, A2 = X1.T @ X1, X2.T @ X2
        X0 = rng.standard_normal((3, 3))
        A0 = X0.T @ X0
        gamma = float(np.linalg.eigvalsh(A0)[-1] * rng.uniform(0.5, 3.0))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            out = sprocedure_certify((A0, -gamma), (A1, -1.0), (A2, -1.0))
        rep = sup_quadratic_two_ellipsoids(A1, A2, A0, budget=4000, seed=seed)
        if out.status == "certified":
            a1, a2 = out.multipliers
            comb = a1 * A1 + a2 * A2 - A0
            assert np.linalg.eigvalsh(comb)[0] >= -1e-8 * (1 + np.abs(A0).max())
            assert a1 + a2 <= gamma + 1e-8 * (1 + gamma)
            assert rep.best_value <= gamma * (1 + 1e-6) + 1e-9
        else:
            assert rep.best_value > gamma * (1 - 1e-3)
