"""Recovery from l1-bounded observation errors: per-axis lower bounds, the
cross-axis error table, the checkable optimality condition with its optimal
map, a subgradient minimax solver over linear maps, and SDPA export of the
equivalent semidefinite program.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dominance import DominanceProblem, attain_point, sdominance_solve
from .errors import InvalidProblem, IoFailure, Unbounded
from .linalg import as_matrix, orthonormal_nullspace, pseudo_inverse
from .oracle import polish_direction
from .recovery import RecoveryMap, lexi_lsq_matrix

CONDITION_SLACK = 1e-8  # additive slack scale for the optimality condition


def _axis_workers(count):
    raw = os.environ.get("ORECOVER_THREADS", "").strip()
    if not raw:
        return 1
    try:
        k = int(raw)
    except ValueError:
        return 1
    return max(1, min(k, count))


def _map_axes(fn, count):
    """Run fn over axis indices, optionally in parallel; results keep order."""
    workers = _axis_workers(count)
    if workers <= 1:
        return [fn(j) for j in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, range(count)))


@dataclass(frozen=True)
class ExtendedAxisMaps:
    """Block maps on the compound space (h, theta) in R^(n+1) for one axis."""

    j: int
    u_j: np.ndarray  # preimage with Lambda u_j = e_j
    Gamma: np.ndarray  # [Lambda | 0]
    Q_j: np.ndarray  # [Q | -Q u_j]
    R_j: np.ndarray  # (1/eps) [R | -R u_j]
    S_tilde: np.ndarray  # (1/eta) [0 | 1]


@dataclass
class L1Workspace:
    """Per-axis data for the l1 scenario.

    u holds the observation preimages as columns of pinv(Lambda); lb_prime the
    per-axis squared lower bounds; params the scenario weights (c_j, d_j); k
    the argmax axis (ties to the lowest index).  maps and the M table fill
    lazily: column k always, the full table only on demand.
    """

    u: np.ndarray
    lb_prime: np.ndarray
    params: list
    extended_params: list
    k: int
    maps: dict = field(default_factory=dict)
    M: dict = field(default_factory=dict)
    condition_holds: bool = None
    condition_margin: float = None


def _require_injective_R(spec):
    K = orthonormal_nullspace(spec.R)
    if K.shape[1] > 0:
        raise Unbounded(
            "R must be injective for the l1 machinery: the cross-axis suprema "
            f"quantify over the whole space and ker(R) has dimension {K.shape[1]}"
        )


def build_axis(spec, j):
    """Extended block maps for observation axis j (0-based)."""
    m, n = spec.Lambda.shape
    if not 0 <= j < m:
        raise InvalidProblem(f"axis index {j} out of range for m={m}")
    Ldag = pseudo_inverse(spec.Lambda)
    u_j = Ldag[:, j]
    Gamma = np.hstack([spec.Lambda, np.zeros((m, 1))])
    Q_j = np.hstack([spec.Q, -(spec.Q @ u_j)[:, None]])
    R_j = np.hstack([spec.R, -(spec.R @ u_j)[:, None]]) / spec.epsilon
    S_tilde = np.zeros((1, n + 1))
    S_tilde[0, n] = 1.0 / spec.eta
    return ExtendedAxisMaps(j, u_j, Gamma, Q_j, R_j, S_tilde)


def _axis_kernel_basis(spec):
    """Orthonormal basis of ker(Gamma) = ker(Lambda) x R in compound coords."""
    N = orthonormal_nullspace(spec.Lambda)
    p = N.shape[1]
    n = spec.n
    NG = np.zeros((n + 1, p + 1))
    NG[:n, :p] = N
    NG[n, p] = 1.0
    return NG


def solve_lb_all(spec, tol=1e-9):
    """Per-axis lower bounds lb'_j with their weights, and the selected axis.

    Each axis solves the dominance program of the compound forms restricted to
    ker(Gamma); the weights transform back by c = a / eps^2, d = b / eta^2.
    """
    if spec.scenario != "l1":
        raise InvalidProblem("solve_lb_all needs an l1-scenario spec")
    _require_injective_R(spec)
    m = spec.m
    NG = _axis_kernel_basis(spec)

    def one(j):
        axis = build_axis(spec, j)
        RN = axis.R_j @ NG
        SN = axis.S_tilde @ NG
        QN = axis.Q_j @ NG
        problem = DominanceProblem.build(
            RN.T @ RN, SN.T @ SN, QN.T @ QN, labels=("R_axis", "S_axis", "Q_axis")
        )
        return sdominance_solve(problem, tol)

    certs = _map_axes(one, m)
    lb = np.array([c.a_sharp + c.b_sharp for c in certs])
    params = [(c.a_sharp / spec.epsilon**2, c.b_sharp / spec.eta**2) for c in certs]
    extended = [(c.a_sharp, c.b_sharp) for c in certs]
    k = int(np.argmax(lb))  # argmax with ties broken at the lowest index
    Ldag = pseudo_inverse(spec.Lambda)
    return L1Workspace(Ldag, lb, params, extended, k)


def axis_map(spec, j, c, d):
    """Recovery map interpolating every observation except axis j, which is
    fit in least squares with weight d against the model seminorm with
    weight c; weight limits are lexicographic as usual."""
    if c < 0 or d < 0 or (c == 0 and d == 0):
        raise InvalidProblem("weights must be nonnegative and not both zero")
    m, n = spec.Lambda.shape
    others = [i for i in range(m) if i != j]
    B = spec.Lambda[others]
    TB = np.eye(m)[others]
    lam_j = spec.Lambda[j : j + 1]
    e_j = np.eye(m)[j : j + 1]
    R = spec.R
    zero_r = np.zeros((R.shape[0], m))
    constraint = (B, TB) if others else None
    if c > 0 and d > 0:
        D = lexi_lsq_matrix(
            (np.vstack([np.sqrt(c) * R, np.sqrt(d) * lam_j]),
             np.vstack([zero_r, np.sqrt(d) * e_j])),
            constraint=constraint,
        )
        kind = "axis"
    elif c > 0:
        D = lexi_lsq_matrix((R, zero_r), constraint=constraint, stage2=(lam_j, e_j))
        kind = "axis-limit-d0"
    else:
        D = lexi_lsq_matrix((lam_j, e_j), constraint=constraint, stage2=(R, zero_r))
        kind = "axis-limit-c0"
    resid = np.abs(B @ D - TB).max() if others else 0.0
    if resid > 1e-8:
        raise InvalidProblem(f"axis map failed to interpolate: residual {resid:.3e}")
    return RecoveryMap(D, spec.Q @ D, c * spec.epsilon**2, d * spec.eta**2, kind, False)


def _get_axis_map(spec, ws, j):
    if j not in ws.maps:
        c, d = ws.params[j]
        ws.maps[j] = axis_map(spec, j, c, d)
    return ws.maps[j]


def _error_dominance(spec, axis, D_full):
    """Dominance problem of the axis-i error of a full (already Q-composed)
    linear map on the whole compound space."""
    E = axis.Q_j - D_full @ axis.Gamma
    return DominanceProblem.build(
        axis.R_j.T @ axis.R_j,
        axis.S_tilde.T @ axis.S_tilde,
        E.T @ E,
        labels=("R_axis", "S_axis", "error"),
    ), E


def compute_M(spec, ws, i, j, tol=1e-9):
    """Cross-axis worst-case entry: the axis-i worst squared error of the
    axis-j regularization map, solved on the whole compound space."""
    _require_injective_R(spec)
    key = (i, j)
    if key in ws.M:
        return ws.M[key]
    rmap = _get_axis_map(spec, ws, j)
    axis = build_axis(spec, i)
    problem, _ = _error_dominance(spec, axis, spec.Q @ rmap.D)
    cert = sdominance_solve(problem, tol)
    ws.M[key] = cert.a_sharp + cert.b_sharp
    return ws.M[key]


@dataclass(frozen=True)
class L1Solution:
    verdict: str  # "Holds" or "BestEffort"
    radius_sq: float  # certified when Holds, else the valid lower bound
    upper_sq: float  # worst-case of the returned map (valid upper bound)
    map: RecoveryMap
    workspace: L1Workspace


def l1_optimal_solve(spec, tol=1e-9, full_table=False):
    """Solve the l1 scenario end to end.

    Computes every lb'_j, builds the map of the selected axis k, and evaluates
    the table column M[:, k].  If M[i, k] <= M[k, k] for all i (within a small
    additive slack) the map is optimal and the squared radius equals lb'_k;
    otherwise the result is best-effort with lb'_k a valid lower bound and
    max_i M[i, k] a valid upper bound for the returned map.
    """
    ws = solve_lb_all(spec, tol)
    k = ws.k
    _get_axis_map(spec, ws, k)
    column = _map_axes(lambda i: compute_M(spec, ws, i, k, tol), spec.m)
    if full_table:
        for j in range(spec.m):
            for i in range(spec.m):
                compute_M(spec, ws, i, j, tol)
    M_kk = ws.M[(k, k)]
    slack = CONDITION_SLACK * (1.0 + M_kk)
    margin = float(max(column) - M_kk)
    ws.condition_holds = bool(margin <= slack)
    ws.condition_margin = margin
    rmap = ws.maps[k]
    upper = float(max(column))
    if ws.condition_holds:
        return L1Solution("Holds", float(ws.lb_prime[k]), upper, rmap, ws)
    return L1Solution("BestEffort", float(ws.lb_prime[k]), upper, rmap, ws)


def _axis_value_and_subgradient(spec, axis, D, tol):
    """Exact axis worst-case value of D plus a subgradient at the attaining
    direction (recovered from the certificate's residual kernel and polished
    by a short ascent)."""
    problem, E = _error_dominance(spec, axis, D)
    cert = sdominance_solve(problem, tol)
    value = cert.a_sharp + cert.b_sharp
    g0, _ = attain_point(problem, cert)
    g = polish_direction(
        [problem.A, problem.B], problem.C, g0, steps=120
    )
    err = E @ g
    grad = -2.0 * np.outer(err, axis.Gamma @ g)
    return value, grad


def minimax_linear(spec, ws, iters=100, tol=1e-9):
    """Minimize the full l1 worst-case error over all linear recovery maps.

    The objective F(D) = max_i (axis-i worst-case of D) is convex in D; each
    axis value is evaluated exactly through the dominance dual and
    differentiated through an attaining direction.  Subgradient descent with a
    Polyak step (target max_j lb'_j when the optimality condition holds, else
    diminishing steps) starts from the selected axis map; only improving
    iterates are accepted, so reported values are non-increasing.

    Returns (D_best, value_best, history of accepted values).
    """
    m = spec.m
    axes = [build_axis(spec, i) for i in range(m)]
    D = (spec.Q @ _get_axis_map(spec, ws, ws.k).D).copy()

    def evaluate(Dmat):
        pairs = _map_axes(lambda i: _axis_value_and_subgradient(spec, axes[i], Dmat, tol), m)
        values = np.array([p[0] for p in pairs])
        worst = int(np.argmax(values))
        return float(values[worst]), pairs[worst][1]

    target = float(ws.lb_prime.max())
    best_F, grad = evaluate(D)
    best_D = D.copy()
    history = [best_F]
    rho = 0.1 * np.linalg.norm(best_D) + 0.1
    F, cur = best_F, D
    hit_max = True
    for t in range(1, iters + 1):
        if best_F - target <= tol * (1.0 + target):
            hit_max = False  # already at the universal lower bound
            break
        gnorm_sq = float(np.sum(grad * grad))
        if gnorm_sq <= 1e-300:
            hit_max = False
            break
        if ws.condition_holds:
            step = max(F - target, 0.0) / gnorm_sq
        else:
            step = rho / (np.sqrt(t) * np.sqrt(gnorm_sq))
        cur = cur - step * grad
        F, grad = evaluate(cur)
        if F < best_F:
            best_F, best_D = F, cur.copy()
            history.append(best_F)
    return best_D, best_F, history, hit_max


# ---------------------------------------------------------------------------
# SDPA sparse export of the linear-minimax semidefinite program
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SdpaProgram:
    mdim: int
    blockstruct: tuple
    objective: tuple
    entries: tuple  # (matno, block, i, j, value) with i <= j, 1-based


def _fmt17(x):
    return format(float(x), ".17g")


def sdpa_program(spec, ws=None):
    """Assemble the semidefinite program whose optimal value is the minimal
    worst-case error among linear maps, in primal form
    minimize c^T x  s.to  sum_k x_k F_k - F_0 >= 0 (block diagonal).

    Variables: x = [gamma, a_1, b_1, ..., a_m, b_m, D entries (q x m,
    row-major)].  One PSD block of size q + n + 1 per axis encodes the Schur
    complement of the axis error bound; a diagonal block of size 3m encodes
    a_i + b_i <= gamma and the sign constraints.
    """
    _require_injective_R(spec)
    m, n = spec.Lambda.shape
    q = spec.Q.shape[0]
    size = q + n + 1
    mdim = 1 + 2 * m + q * m
    blockstruct = tuple([size] * m + [-3 * m])
    objective = tuple([1.0] + [0.0] * (mdim - 1))
    entries = []

    def add(matno, blk, i, j, val):
        if val != 0.0:
            if i > j:
                i, j = j, i
            entries.append((matno, blk, i, j, float(val)))

    for idx in range(m):
        axis = build_axis(spec, idx)
        blk = idx + 1
        # constant part F0 = -[[I, Q_i], [Q_i^T, 0]]
        for r in range(q):
            add(0, blk, r + 1, r + 1, -1.0)
            for s in range(n + 1):
                add(0, blk, r + 1, q + s + 1, -axis.Q_j[r, s])
        # a_i multiplies the axis model Gram in the lower-right corner
        var_a = 2 + 2 * idx
        G = axis.R_j.T @ axis.R_j
        for s1 in range(n + 1):
            for s2 in range(s1, n + 1):
                add(var_a, blk, q + s1 + 1, q + s2 + 1, G[s1, s2])
        # b_i multiplies the uncertainty Gram (single corner entry)
        var_b = 3 + 2 * idx
        add(var_b, blk, q + n + 1, q + n + 1, 1.0 / spec.eta**2)
        # linear block: gamma - a_i - b_i >= 0, a_i >= 0, b_i >= 0
        slot = 3 * idx + 1
        add(1, m + 1, slot, slot, 1.0)
        add(var_a, m + 1, slot, slot, -1.0)
        add(var_b, m + 1, slot, slot, -1.0)
        add(var_a, m + 1, slot + 1, slot + 1, 1.0)
        add(var_b, m + 1, slot + 2, slot + 2, 1.0)
    # D entries couple the off-diagonal error block in every axis block
    for r in range(q):
        for cidx in range(m):
            var = 1 + 2 * m + r * m + cidx + 1
            for blk in range(1, m + 1):
                for s in range(n):
                    add(var, blk, r + 1, q + s + 1, -spec.Lambda[cidx, s])
    dedup = {}
    for matno, blk, i, j, val in entries:
        dedup[(matno, blk, i, j)] = val
    ordered = tuple(
        (k[0], k[1], k[2], k[3], v) for k, v in sorted(dedup.items()) if v != 0.0
    )
    return SdpaProgram(mdim, blockstruct, objective, ordered)


def render_sdpa(program):
    """Canonical SDPA sparse text (.dat-s) for a program."""
    lines = [
        f"{program.mdim} = mDIM",
        f"{len(program.blockstruct)} = nBLOCK",
        " ".join(str(int(b)) for b in program.blockstruct) + " = bLOCKsTRUCT",
        " ".join(_fmt17(c) for c in program.objective),
    ]
    for matno, blk, i, j, val in program.entries:
        lines.append(f"{matno} {blk} {i} {j} {_fmt17(val)}")
    return "\n".join(lines) + "\n"


def parse_sdpa(text):
    """Parse canonical SDPA sparse text back into an SdpaProgram."""
    raw = [
        ln.split("*", 1)[0].split('"', 1)[0].strip()
        for ln in text.splitlines()
    ]
    raw = [ln for ln in raw if ln]
    mdim = int(raw[0].split("=")[0].strip())
    nblock = int(raw[1].split("=")[0].strip())
    struct = tuple(int(tok) for tok in raw[2].split("=")[0].split())
    if len(struct) != nblock:
        raise InvalidProblem("block structure length does not match nBLOCK")
    objective = tuple(float(tok) for tok in raw[3].replace(",", " ").split())
    if len(objective) != mdim:
        raise InvalidProblem("objective length does not match mDIM")
    entries = []
    for ln in raw[4:]:
        toks = ln.replace(",", " ").split()
        if len(toks) != 5:
            raise InvalidProblem(f"malformed entry line: {ln!r}")
        entries.append((int(toks[0]), int(toks[1]), int(toks[2]), int(toks[3]), float(toks[4])))
    return SdpaProgram(mdim, struct, objective, tuple(entries))


def export_sdpa(spec, ws=None, path=None):
    """Write the linear-minimax semidefinite program in SDPA sparse format."""
    program = sdpa_program(spec, ws)
    text = render_sdpa(program)
    if path is not None:
        try:
            with open(path, "w", encoding="ascii") as fh:
                fh.write(text)
        except OSError as exc:
            raise IoFailure(f"could not write {path}: {exc}") from exc
    return text
