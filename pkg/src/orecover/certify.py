"""Orchestration of the scenario solvers into certificate documents, plus the
oracle cross-check, minimax, diagnostic, and SDPA export entry points shared
by the HTTP service and the command-line client.
"""

import numpy as np

from . import __version__
from .dominance import ParamCertificate, n_ellipsoid_diagnostic
from .ell1 import export_sdpa, l1_optimal_solve, minimax_linear, solve_lb_all
from .errors import InvalidProblem
from .files import ProblemFile, matrix_rows, parse_problem, _matrix_field
from .linalg import as_vector, orthonormal_nullspace
from .oracle import l1_worstcase_vertex, sup_quadratic_two_ellipsoids
from .recovery import solve_radius
from .scenarios import l2_inaccurate_problem, mixed_problem, solve_l2, solve_mixed, two_space_problem


def _map_block(rmap):
    return {
        "D": matrix_rows(rmap.D),
        "QD": matrix_rows(rmap.QD),
        "kind": rmap.kind,
        "interpolating": bool(rmap.interpolating),
    }


def _residuals_block(params, rmap, spec_for_interp=None):
    interp = None
    if spec_for_interp is not None and rmap.interpolating:
        interp = float(
            np.abs(spec_for_interp.Lambda @ rmap.D - np.eye(spec_for_interp.Lambda.shape[0])).max()
        )
    return {
        "psd_residual": float(params.psd_residual),
        "tau_tolerance": float(params.tau_tolerance),
        "interpolation": interp,
    }


def _extremal_block(cert):
    if cert.extremal is None or cert.extremal_ambient is None:
        return None
    return {
        "h_ambient": [float(v) for v in cert.extremal_ambient],
        "a_seminorm": float(cert.extremal.a_seminorm),
        "b_seminorm": float(cert.extremal.b_seminorm),
        "stationarity_residual": float(cert.extremal.stationarity_residual),
    }


def _base_certificate(pf, scenario, radius_sq, params, c_sharp, d_sharp, map_block,
                      residuals, extremal=None, l1=None):
    return {
        "tool": "orecover",
        "version": __version__,
        "input_hash": pf.input_hash,
        "scenario": scenario,
        "radius_sq": float(radius_sq),
        "a_sharp": float(params.a_sharp),
        "b_sharp": float(params.b_sharp),
        "tau_sharp": float(params.tau_sharp),
        "c_sharp": None if c_sharp is None else float(c_sharp),
        "d_sharp": None if d_sharp is None else float(d_sharp),
        "map": map_block,
        "l1": l1,
        "residuals": residuals,
        "extremal": extremal,
        "oracle": None,
    }


def solve_problem_file(pf, full_m_table=False):
    """Dispatch a parsed problem on its scenario and assemble the certificate."""
    if pf.scenario == "exact":
        cert = solve_radius(pf.spec, pf.tol)
        return _base_certificate(
            pf, "exact", cert.radius_sq, cert.params, None, None,
            _map_block(cert.map), _residuals_block(cert.params, cert.map, pf.spec),
            _extremal_block(cert),
        )
    if pf.scenario == "two-space":
        spec, back = two_space_problem(pf.two_space)
        cert = solve_radius(spec, pf.tol)
        c, d = back(cert.params.a_sharp, cert.params.b_sharp)
        return _base_certificate(
            pf, "two-space", cert.radius_sq, cert.params, c, d,
            _map_block(cert.map), _residuals_block(cert.params, cert.map, spec),
            _extremal_block(cert),
        )
    if pf.scenario == "l2":
        sol = solve_l2(pf.spec, pf.tol)
        return _base_certificate(
            pf, "l2", sol.radius_sq, sol.params, sol.c_sharp, sol.d_sharp,
            _map_block(sol.native_map), _residuals_block(sol.params, sol.native_map),
        )
    if pf.scenario == "mixed":
        sol = solve_mixed(pf.spec, pf.tol)
        return _base_certificate(
            pf, "mixed", sol.radius_sq, sol.params, sol.c_sharp, sol.d_sharp,
            _map_block(sol.native_map), _residuals_block(sol.params, sol.native_map),
        )
    if pf.scenario == "l1":
        sol = l1_optimal_solve(pf.spec, pf.tol, full_table=full_m_table)
        ws = sol.workspace
        k = ws.k
        a_k, b_k = ws.extended_params[k]
        c_k, d_k = ws.params[k]
        tau_k = b_k / (a_k + b_k) if (a_k + b_k) > 0 else 0.5
        params_k = ParamCertificate(a_k, b_k, tau_k, a_k + b_k, 0.0, 0.0)
        column = [float(ws.M[(i, k)]) for i in range(pf.spec.m)]
        l1_block = {
            "verdict": sol.verdict,
            "k": int(k),
            "lb_prime": [float(v) for v in ws.lb_prime],
            "M_column": column,
            "condition_margin": float(ws.condition_margin),
            "upper_sq": float(sol.upper_sq),
        }
        if full_m_table:
            l1_block["M_table"] = [
                [float(ws.M[(i, j)]) for j in range(pf.spec.m)] for i in range(pf.spec.m)
            ]
        return _base_certificate(
            pf, "l1", sol.radius_sq, params_k, c_k, d_k,
            _map_block(sol.map), {"psd_residual": 0.0, "tau_tolerance": 0.0, "interpolation": None},
            l1=l1_block,
        )
    raise InvalidProblem(f"unsupported scenario {pf.scenario!r}")


def apply_certificate(cert_doc, y):
    """Evaluate the certificate's recovery map: returns D y and Q D y."""
    y = as_vector(y, "observation vector")
    try:
        D = np.asarray(cert_doc["map"]["D"], dtype=float)
        QD = np.asarray(cert_doc["map"]["QD"], dtype=float)
    except (KeyError, TypeError) as exc:
        raise InvalidProblem("certificate does not carry a recovery map") from exc
    if y.size != D.shape[1]:
        raise InvalidProblem(f"observation vector must have length {D.shape[1]}, got {y.size}")
    return {
        "f_hat": [float(v) for v in D @ y],
        "q_hat": [float(v) for v in QD @ y],
    }


def _oracle_forms(pf, cert_doc):
    """(constraint forms, error form, certificate value) for the oracle check."""
    QD = np.asarray(cert_doc["map"]["QD"], dtype=float)
    value = float(cert_doc["radius_sq"])
    if pf.scenario in ("exact", "two-space"):
        spec = pf.spec if pf.scenario == "exact" else two_space_problem(pf.two_space)[0]
        effR, effS = spec.effective_forms()
        E = spec.Q - QD @ spec.Lambda
        return [effR.T @ effR, effS.T @ effS], E.T @ E, value
    if pf.scenario == "l2":
        ext, _ = l2_inaccurate_problem(pf.spec)
        effR, effS = ext.problem.effective_forms()
        E = np.hstack([pf.spec.Q - QD @ pf.spec.Lambda, -QD])
        return [effR.T @ effR, effS.T @ effS], E.T @ E, value
    if pf.scenario == "mixed":
        ext, _ = mixed_problem(pf.spec)
        effR, effS = ext.problem.effective_forms()
        Ebasis = orthonormal_nullspace(pf.spec.s_prime)
        E = np.hstack([pf.spec.Q - QD @ pf.spec.Lambda, -QD @ Ebasis])
        return [effR.T @ effR, effS.T @ effS], E.T @ E, value
    raise InvalidProblem(f"no oracle reduction for scenario {pf.scenario!r}")


def oracle_check(pf, cert_doc, budget=10_000, seed=None, rel_tol=1e-6):
    """Run the scenario-matched brute-force oracle against a certificate.

    The oracle reports a feasible (hence lower-bounding) value; sound
    certificates satisfy oracle <= certificate within rel_tol.  For l1
    best-effort certificates the claimed value is the upper bound carried by
    the certificate, since radius_sq is only a lower bound there.
    """
    if cert_doc.get("input_hash") != pf.input_hash:
        raise InvalidProblem("certificate input_hash does not match the problem file")
    if seed is None:
        seed = pf.seed
    if pf.scenario == "l1":
        QD = np.asarray(cert_doc["map"]["QD"], dtype=float)
        report = l1_worstcase_vertex(QD, pf.spec, budget=budget, seed=seed)
        value = float(cert_doc["radius_sq"])
        l1_block = cert_doc.get("l1") or {}
        if l1_block.get("verdict") == "BestEffort":
            value = float(l1_block["upper_sq"])
    else:
        forms, Cerr, value = _oracle_forms(pf, cert_doc)
        report = sup_quadratic_two_ellipsoids(
            forms[0], forms[1], Cerr, budget=budget, seed=seed
        )
    gap = value - report.best_value
    sound = report.best_value <= value * (1.0 + rel_tol) + 1e-12
    return {
        "oracle_value": float(report.best_value),
        "certificate_value": float(value),
        "gap": float(gap),
        "sound": bool(sound),
        "method": report.method,
        "samples": int(report.samples),
        "seed": int(seed),
        "budget": int(budget),
    }


def minimax_for_problem(pf, iters=80):
    """Best linear map by subgradient minimax for an l1 problem."""
    if pf.scenario != "l1":
        raise InvalidProblem("minimax requires an l1-scenario problem")
    sol = l1_optimal_solve(pf.spec, pf.tol)
    D, value, history, hit_max = minimax_linear(pf.spec, sol.workspace, iters=iters, tol=pf.tol)
    return {
        "value": float(value),
        "D": matrix_rows(D),
        "accepted_values": [float(v) for v in history],
        "hit_max_iterations": bool(hit_max),
        "condition_verdict": sol.verdict,
        "lb_max": float(sol.workspace.lb_prime.max()),
        "upper_start": float(sol.upper_sq),
    }


def sdpa_for_problem(pf):
    if pf.scenario != "l1":
        raise InvalidProblem("SDPA export requires an l1-scenario problem")
    return export_sdpa(pf.spec)


def diagnose_forms(doc):
    """n-ellipsoid exactness diagnostic from a document with a form list.

    Expects keys dim, Lambda, Q, Rs (list of matrices on the ambient space)
    and optional tol; the forms are restricted to ker(Lambda) and the verdict
    reports whether the worst-case value is attained (sup = inf).
    """
    if not isinstance(doc, dict):
        raise InvalidProblem("diagnostic document must be a JSON object")
    try:
        dim = int(doc["dim"])
    except (KeyError, TypeError, ValueError):
        raise InvalidProblem("field 'dim' must be an integer") from None
    Lambda = _matrix_field(doc.get("Lambda"), "Lambda", cols=dim)
    Q = _matrix_field(doc.get("Q"), "Q", cols=dim)
    rs = doc.get("Rs")
    if not isinstance(rs, list) or len(rs) < 2:
        raise InvalidProblem("field 'Rs' must list at least two matrices")
    tol = float(doc.get("tol", 1e-4))
    N = orthonormal_nullspace(Lambda)
    if N.shape[1] == 0:
        raise InvalidProblem("ker(Lambda) is trivial; nothing to diagnose")
    forms = []
    for i, Rm in enumerate(rs):
        R = _matrix_field(Rm, f"Rs[{i}]", cols=dim)
        RN = R @ N
        forms.append(RN.T @ RN)
    QN = Q @ N
    res = n_ellipsoid_diagnostic(forms, QN.T @ QN, tol=tol)
    return {
        "verdict": res.verdict,
        "value": float(res.value),
        "coefficients": [float(c) for c in res.coefficients],
        "seminorms": [float(s) for s in res.seminorms],
    }


def problem_from_document(doc):
    return parse_problem(doc)
