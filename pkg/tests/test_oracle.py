import numpy as np

from orecover.ell1 import l1_optimal_solve
from orecover.oracle import (
    l1_worstcase_vertex,
    sup_quadratic_ellipsoids,
    sup_quadratic_two_ellipsoids,
)
from conftest import random_l1_spec


def test_scalar_example():
    rep = sup_quadratic_two_ellipsoids([[1.0]], [[4.0]], [[1.0]], budget=2000, seed=1)
    assert abs(rep.best_value - 0.25) < 1e-9
    assert abs(abs(rep.best_point[0]) - 0.5) < 1e-6


def test_unit_balls_give_top_eigenvalue():
    rng = np.random.default_rng(5)
    for trial in range(5):
        p = int(rng.integers(2, 7))
        X = rng.standard_normal((p, p))
        C = X.T @ X
        rep = sup_quadratic_two_ellipsoids(np.eye(p), np.eye(p), C, budget=10_000, seed=trial)
        top = np.linalg.eigvalsh(C)[-1]
        assert rep.best_value <= top * (1 + 1e-12)
        assert rep.best_value >= top * (1 - 1e-6)


def test_zero_objective():
    rep = sup_quadratic_two_ellipsoids(np.eye(3), np.eye(3), np.zeros((3, 3)))
    assert rep.best_value == 0.0


def test_feasibility_of_reported_point():
    rng = np.random.default_rng(9)
    for trial in range(10):
        p = int(rng.integers(2, 6))
        Xa = rng.standard_normal((p + 1, p))
        Xb = rng.standard_normal((p + 1, p))
        Xc = rng.standard_normal((p, p))
        A, B, C = Xa.T @ Xa, Xb.T @ Xb, Xc.T @ Xc
        rep = sup_quadratic_two_ellipsoids(A, B, C, budget=3000, seed=trial)
        x = rep.best_point
        assert x @ A @ x <= 1.0 + 1e-12
        assert x @ B @ x <= 1.0 + 1e-12
        assert abs(x @ C @ x - rep.best_value) < 1e-9 * (1 + abs(rep.best_value))


def test_determinism():
    rng = np.random.default_rng(2)
    A = np.eye(4)
    Xb = rng.standard_normal((5, 4))
    B = Xb.T @ Xb
    Xc = rng.standard_normal((4, 4))
    C = Xc.T @ Xc
    r1 = sup_quadratic_two_ellipsoids(A, B, C, budget=5000, seed=123)
    r2 = sup_quadratic_two_ellipsoids(A, B, C, budget=5000, seed=123)
    assert r1.best_value == r2.best_value
    assert np.array_equal(r1.best_point, r2.best_point)
    r3 = sup_quadratic_two_ellipsoids(A, B, C, budget=5000, seed=124)
    assert r3.best_value != r1.best_value or not np.array_equal(r3.best_point, r1.best_point)


def test_basis_lift():
    basis = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    rep = sup_quadratic_two_ellipsoids(np.eye(2), np.eye(2), np.diag([1.0, 2.0]), basis=basis)
    assert rep.best_point.shape == (3,)
    assert abs(rep.best_point[2]) < 1e-12


def test_three_forms():
    # intersection of three aligned ellipsoids: value set by the tightest
    forms = [np.eye(3), 2.0 * np.eye(3), 4.0 * np.eye(3)]
    rep = sup_quadratic_ellipsoids(forms, np.eye(3), budget=4000, seed=0)
    assert abs(rep.best_value - 0.25) < 1e-6


def test_l1_vertex_matches_certificate():
    spec = random_l1_spec(4, eta=1e-2)
    sol = l1_optimal_solve(spec)
    rep = l1_worstcase_vertex(spec.Q @ sol.map.D, spec, budget=10_000, seed=3)
    assert rep.method == "VertexEnum"
    if sol.verdict == "Holds":
        assert rep.best_value <= sol.radius_sq * (1 + 1e-8)
        assert rep.best_value >= sol.radius_sq * (1 - 2e-3)
    else:
        assert rep.best_value <= sol.upper_sq * (1 + 1e-6)


def test_l1_vertex_zero_map_axis_independent():
    # D = 0 and Q = Id: the worst case is the model's own radius, no axis effect
    spec = random_l1_spec(6, eta=0.3)
    q = spec.Q.shape[0]
    D0 = np.zeros((q, spec.m))
    rep = l1_worstcase_vertex(D0, spec, budget=6000, seed=5)
    # sup ||Q f||^2 over ||R f|| <= eps
    from orecover.linalg import gen_eig_max

    val, _ = gen_eig_max(spec.Q.T @ spec.Q, spec.R.T @ spec.R / spec.epsilon**2)
    assert rep.best_value <= val * (1 + 1e-9)
    assert rep.best_value >= val * (1 - 2e-3)
