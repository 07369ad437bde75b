"""Independent brute-force estimators for constrained quadratic suprema.

These estimators validate solver certificates from below: every reported value
is attained by an explicitly feasible point, so oracle <= certified optimum up
to rounding.  They are sampling + ascent based and never reuse the solver's
own machinery.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix


@dataclass(frozen=True)
class OracleReport:
    best_value: float
    best_point: np.ndarray
    samples: int
    method: str  # "Grid", "MultiStartAscent", or "VertexEnum"
    seed: int


def _form_values(forms, X):
    """Row-wise quadratic form values; returns (len(forms), k)."""
    return np.stack([np.einsum("kp,pq,kq->k", X, A, X) for A in forms])


def _evaluate(forms, C, X):
    """Objective x^T C x / max_i x^T A_i x for unit rows of X (radial scaling)."""
    M = _form_values(forms, X)
    den = M.max(axis=0)
    num = np.einsum("kp,pq,kq->k", X, C, X)
    vals = np.where(den > 1e-300, num / np.maximum(den, 1e-300), -np.inf)
    return vals, M, den


def _normalize_rows(X):
    nrm = np.linalg.norm(X, axis=1, keepdims=True)
    nrm[nrm == 0.0] = 1.0
    return X / nrm


def _ascend(forms, C, X, steps):
    """Vectorized projected ascent of the scaled objective on the unit sphere.

    Near ties of the two largest constraint forms the gradient is projected
    onto the tie manifold's tangent, with a small correction step back toward
    the manifold, since the maximizer generically sits on the tie.
    """
    k, p = X.shape
    X = _normalize_rows(X)
    vals, M, den = _evaluate(forms, C, X)
    step = np.full(k, 0.25)
    AX = None
    for _ in range(steps):
        AX = np.stack([X @ A for A in forms])  # (n_forms, k, p)
        CX = X @ C
        num = np.einsum("kp,kp->k", X, CX)
        order = np.argsort(M, axis=0)
        act = order[-1]
        rows = np.arange(k)
        Aact = AX[act, rows]
        safe_den = np.maximum(den, 1e-300)
        G = (2.0 / safe_den[:, None]) * (CX - (num / safe_den)[:, None] * Aact)
        # project onto the sphere tangent
        G -= np.einsum("kp,kp->k", G, X)[:, None] * X
        if len(forms) > 1:
            snd = order[-2]
            Msnd = M[snd, rows]
            tie = (den - Msnd) < 0.05 * np.maximum(den, 1e-300)
            if np.any(tie):
                U = Aact - AX[snd, rows]
                U -= np.einsum("kp,kp->k", U, X)[:, None] * X
                unorm = np.linalg.norm(U, axis=1)
                usable = tie & (unorm > 1e-14)
                if np.any(usable):
                    Un = U[usable] / unorm[usable, None]
                    Gu = G[usable]
                    Gu -= np.einsum("kp,kp->k", Gu, Un)[:, None] * Un
                    corr = -((den - Msnd)[usable] / (2.0 * unorm[usable]))
                    G[usable] = Gu + corr[:, None] * Un
        cand = _normalize_rows(X + step[:, None] * G)
        cvals, cM, cden = _evaluate(forms, C, cand)
        better = cvals > vals
        X[better] = cand[better]
        vals[better] = cvals[better]
        M[:, better] = cM[:, better]
        den[better] = cden[better]
        step[better] = np.minimum(step[better] * 1.3, 2.0)
        step[~better] *= 0.5
        np.clip(step, 1e-13, None, out=step)
    return X, vals


def polish_direction(forms, C, x0, steps=120):
    """Refine one direction by the same projected ascent used by the oracle.

    Returns the feasibly scaled point attaining the refined value; used by the
    minimax solver to sharpen attaining directions recovered from certificate
    residuals.  Deterministic (no randomness involved).
    """
    forms = [as_matrix(A, "constraint form") for A in forms]
    C = as_matrix(C, "objective form")
    x0 = np.asarray(x0, dtype=float).reshape(1, -1)
    if np.linalg.norm(x0) == 0.0:
        x0 = np.ones_like(x0)
    X, _ = _ascend(forms, C, _normalize_rows(x0.copy()), steps)
    x = X[0]
    den = max(float(max(x @ A @ x for A in forms)), 1e-300)
    return x / np.sqrt(den)


def sup_quadratic_ellipsoids(forms, C, basis=None, budget=10_000, seed=42):
    """Lower bound on sup x^T C x over the intersection {x^T A_i x <= 1, all i}.

    Directions are explored by bulk random sampling plus multi-start projected
    gradient ascent with optimal radial scaling t(x) = 1 / max_i sqrt(x^T A_i x).
    All randomness comes from one generator drawn in a fixed order, so results
    depend only on (budget, seed), not on scheduling.
    """
    forms = [as_matrix(A, "constraint form") for A in forms]
    C = as_matrix(C, "objective form")
    p = C.shape[0]
    if basis is not None:
        basis = as_matrix(basis, "subspace basis")
    if p == 0 or float(np.abs(C).max()) == 0.0:
        point = np.zeros(basis.shape[0] if basis is not None else p)
        return OracleReport(0.0, point, 0, "Grid", seed)

    rng = np.random.default_rng(seed)
    if p == 1:
        X = np.array([[1.0]])
        n_samp = 1
        method = "Grid"
    elif p == 2:
        n_samp = max(64, budget // 2)
        th = np.linspace(0.0, np.pi, n_samp, endpoint=False)
        X = np.stack([np.cos(th), np.sin(th)], axis=1)
        method = "Grid"
    else:
        n_samp = max(256, budget // 2)
        X = rng.standard_normal((n_samp, p))
        method = "MultiStartAscent"
    X = _normalize_rows(X)
    vals, _, _ = _evaluate(forms, C, X)

    starts = min(32, max(8, budget // 400))
    top = np.argsort(vals)[::-1][:starts]
    seeds = [X[top]]
    eigvecs = np.linalg.eigh(0.5 * (C + C.T))[1][:, ::-1][:, : min(4, p)].T
    seeds.append(eigvecs)
    total = sum(0.5 * (A + A.T) for A in forms)
    seeds.append(np.linalg.eigh(total)[1][:, : min(2, p)].T)
    X0 = np.vstack(seeds)

    steps = max(100, budget // (2 * max(1, X0.shape[0])))
    Xf, vf = _ascend(forms, C, X0.copy(), steps)

    allX = np.vstack([X, Xf])
    allv = np.concatenate([vals, vf])
    ibest = int(np.argmax(allv))
    x = allX[ibest]
    den = max(float(max(x @ A @ x for A in forms)), 1e-300)
    point = x / np.sqrt(den) * (1.0 - 1e-13)
    value = float(point @ C @ point)
    if basis is not None:
        point = basis @ point
    return OracleReport(value, point, int(n_samp + Xf.shape[0] * steps), method, seed)


def sup_quadratic_two_ellipsoids(A, B, C, basis=None, budget=10_000, seed=42):
    """Two-constraint specialization of sup_quadratic_ellipsoids."""
    return sup_quadratic_ellipsoids([A, B], C, basis=basis, budget=budget, seed=seed)


def l1_worstcase_vertex(D, spec, budget=10_000, seed=42):
    """Worst-case squared error of a linear map D (already composed with the
    quantity-of-interest map) under the ell-1 observation-uncertainty model.

    For linear maps the supremum over the l1 ball is attained at a scaled
    canonical basis vector, so the problem reduces to one two-ellipsoid
    supremum per observation axis; the max over axes is returned.
    """
    from .ell1 import build_axis  # local import to keep module layering acyclic

    D = as_matrix(D, "recovery map")
    m = spec.Lambda.shape[0]
    best = None
    for j in range(m):
        axis = build_axis(spec, j)
        E = axis.Q_j - D @ axis.Gamma
        report = sup_quadratic_ellipsoids(
            [axis.R_j.T @ axis.R_j, axis.S_tilde.T @ axis.S_tilde],
            E.T @ E,
            budget=budget,
            seed=seed + j,
        )
        if best is None or report.best_value > best.best_value:
            best = OracleReport(
                report.best_value, report.best_point, report.samples, "VertexEnum", seed
            )
    return best
