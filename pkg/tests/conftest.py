import numpy as np
import pytest

from orecover.recovery import ProblemSpec


def random_canonical_spec(seed, n_lo=3, n_hi=8, m_hi=5, q_identity=None):
    """Random full-rank two-ellipsoid spec on R^n with surjective observations."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_lo, n_hi + 1))
    m = int(rng.integers(1, min(n, m_hi) + 1))
    Lam = rng.standard_normal((m, n))
    R = rng.standard_normal((n, n)) + 0.5 * np.eye(n)
    S = rng.standard_normal((n, n)) + 0.5 * np.eye(n)
    if q_identity is None:
        q_identity = bool(rng.integers(0, 2))
    Q = np.eye(n) if q_identity else rng.standard_normal((n, n))
    return ProblemSpec.build(Lam, Q, R=R, S=S)


def random_l1_spec(seed, eta=1e-2, n_lo=2, n_hi=5, m_hi=4, epsilon=1.0):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_lo, n_hi + 1))
    m = int(rng.integers(1, min(n, m_hi) + 1))
    Lam = rng.standard_normal((m, n))
    R = rng.standard_normal((n, n)) + 0.6 * np.eye(n)
    Q = np.eye(n) if seed % 2 == 0 else rng.standard_normal((rng.integers(1, n + 1), n))
    return ProblemSpec.build(Lam, Q, R=R, epsilon=epsilon, eta=eta, scenario="l1")


@pytest.fixture
def e1_spec():
    """The hand instance: Lambda=[1 0], R=I, S=diag(1,2), Q=I."""
    return ProblemSpec.build(
        [[1.0, 0.0]], np.eye(2), R=np.eye(2), S=np.diag([1.0, 2.0])
    )
