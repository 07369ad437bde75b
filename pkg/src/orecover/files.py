"""Problem/certificate file handling: schema validation, canonical JSON with
fixed float formatting, and input hashing.
"""

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidProblem
from .recovery import ProblemSpec
from .scenarios import TwoSpaceSpec

SCENARIO_TAGS = ("exact", "two-space", "l2", "mixed", "l1")


def format_float(x):
    """Fixed 17-significant-digit decimal rendering (round-trips float64)."""
    x = float(x)
    if x != x or x in (float("inf"), float("-inf")):
        raise InvalidProblem("non-finite value cannot be serialized")
    return format(x, ".17g")


def canonical_json(obj):
    """Deterministic JSON: insertion-ordered objects, floats at 17 digits."""
    out = []
    _write_json(obj, out)
    return "".join(out)


def _write_json(obj, out):
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(",")
            out.append(json.dumps(str(k)))
            out.append(":")
            _write_json(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = obj.tolist() if isinstance(obj, np.ndarray) else obj
        out.append("[")
        for i, v in enumerate(seq):
            if i:
                out.append(",")
            _write_json(v, out)
        out.append("]")
    else:
        raise InvalidProblem(f"cannot serialize object of type {type(obj).__name__}")


def _matrix_field(data, name, rows=None, cols=None):
    if data is None:
        raise InvalidProblem(f"missing required field {name!r}")
    try:
        M = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidProblem(f"field {name!r} is not a numeric array: {exc}") from exc
    if M.ndim != 2:
        raise InvalidProblem(f"field {name!r} must be a rectangular array of rows")
    if rows is not None and M.shape[0] != rows:
        raise InvalidProblem(f"field {name!r} must have {rows} rows, got {M.shape[0]}")
    if cols is not None and M.shape[1] != cols:
        raise InvalidProblem(f"field {name!r} must have {cols} columns, got {M.shape[1]}")
    return M


def matrix_rows(M):
    return [list(map(float, row)) for row in np.asarray(M, dtype=float)]


@dataclass(frozen=True)
class ProblemFile:
    """A parsed, validated problem with its normalized payload and hash."""

    scenario: str
    dim: int
    payload: dict
    tol: float
    seed: int
    spec: ProblemSpec = None
    two_space: TwoSpaceSpec = None

    @property
    def input_hash(self):
        return hashlib.sha256(canonical_json(self.payload).encode("ascii")).hexdigest()


def parse_problem(doc):
    """Validate a problem document (dict) and compile its solver objects."""
    if not isinstance(doc, dict):
        raise InvalidProblem("problem document must be a JSON object")
    known = {
        "dim", "scenario", "Lambda", "Q", "R", "S", "V", "W",
        "Sprime", "Sdoubleprime", "epsilon", "eta", "tol", "seed",
    }
    unknown = set(doc) - known
    if unknown:
        raise InvalidProblem(f"unknown problem fields: {sorted(unknown)}")
    scenario = doc.get("scenario")
    if scenario not in SCENARIO_TAGS:
        raise InvalidProblem(f"field 'scenario' must be one of {SCENARIO_TAGS}, got {scenario!r}")
    try:
        dim = int(doc["dim"])
    except (KeyError, TypeError, ValueError):
        raise InvalidProblem("field 'dim' must be an integer") from None
    Lambda = _matrix_field(doc.get("Lambda"), "Lambda", cols=dim)
    m = Lambda.shape[0]
    Q = _matrix_field(doc.get("Q"), "Q", cols=dim)
    epsilon = float(doc.get("epsilon", 1.0))
    eta = float(doc.get("eta", 1.0))
    tol = float(doc.get("tol", 1e-9))
    seed = int(doc.get("seed", 42))
    if tol <= 0:
        raise InvalidProblem("field 'tol' must be positive")

    payload = {"dim": dim, "scenario": scenario, "Lambda": matrix_rows(Lambda), "Q": matrix_rows(Q)}
    spec = None
    two_space = None
    if scenario == "exact":
        R = _matrix_field(doc.get("R"), "R", cols=dim)
        S = _matrix_field(doc.get("S"), "S", cols=dim)
        payload["R"] = matrix_rows(R)
        payload["S"] = matrix_rows(S)
        spec = ProblemSpec.build(Lambda, Q, R=R, S=S, epsilon=epsilon, eta=eta, scenario="exact")
    elif scenario == "two-space":
        V = _matrix_field(doc.get("V"), "V", rows=dim)
        W = _matrix_field(doc.get("W"), "W", rows=dim)
        payload["V"] = matrix_rows(V)
        payload["W"] = matrix_rows(W)
        two_space = TwoSpaceSpec.build(V, W, epsilon, eta, Lambda, Q)
    elif scenario == "l2":
        R = _matrix_field(doc.get("R"), "R", cols=dim)
        S = _matrix_field(doc.get("S"), "S", cols=m)
        payload["R"] = matrix_rows(R)
        payload["S"] = matrix_rows(S)
        spec = ProblemSpec.build(Lambda, Q, R=R, S=S, epsilon=epsilon, eta=eta, scenario="l2")
    elif scenario == "mixed":
        R = _matrix_field(doc.get("R"), "R", cols=dim)
        Sp = _matrix_field(doc.get("Sprime"), "Sprime", cols=m)
        Spp = _matrix_field(doc.get("Sdoubleprime"), "Sdoubleprime", cols=m)
        payload["R"] = matrix_rows(R)
        payload["Sprime"] = matrix_rows(Sp)
        payload["Sdoubleprime"] = matrix_rows(Spp)
        spec = ProblemSpec.build(
            Lambda, Q, R=R, epsilon=epsilon, eta=eta, scenario="mixed",
            s_prime=Sp, s_double_prime=Spp,
        )
    elif scenario == "l1":
        R = _matrix_field(doc.get("R"), "R", cols=dim)
        payload["R"] = matrix_rows(R)
        spec = ProblemSpec.build(Lambda, Q, R=R, epsilon=epsilon, eta=eta, scenario="l1")
    payload["epsilon"] = epsilon
    payload["eta"] = eta
    payload["tol"] = tol
    payload["seed"] = seed
    return ProblemFile(scenario, dim, payload, tol, seed, spec, two_space)


def serialize_problem(pf):
    """Normalized problem document; parse(serialize(p)) == p field for field."""
    return dict(pf.payload)


def load_problem(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InvalidProblem(f"cannot read problem file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidProblem(
            f"problem file {path} is not valid JSON (line {exc.lineno}, column {exc.colno}): {exc.msg}"
        ) from exc
    return parse_problem(doc)
