"""Command-line client for the recovery service.

Every subcommand is a thin HTTP client: it reads JSON files, posts them to the
service, and writes the response.  By default the service app is mounted
in-process (no server needed); pass --server URL to talk to a running one.

Exit codes: 0 success, 1 error, 2 best-effort l1 certificate (optimality
condition failed), 3 oracle soundness violation.
"""

import argparse
import asyncio
import json
import sys

import httpx

from .files import canonical_json


def _post(path, payload, server=None):
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            resp = client.post(path, json=payload)
        return resp.status_code, resp.json()

    from .service import create_app

    async def go():
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
            transport=transport, base_url="http://orecover.local", timeout=None
        ) as client:
            return await client.post(path, json=payload)

    resp = asyncio.run(go())
    return resp.status_code, resp.json()


def _load_json(path, what):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise SystemExit(f"error: cannot read {what} {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise SystemExit(
            f"error: {what} {path} is not valid JSON "
            f"(line {exc.lineno}, column {exc.colno}): {exc.msg}"
        )


def _emit(doc, json_out=None):
    text = canonical_json(doc) + "\n"
    if json_out:
        with open(json_out, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fail(body):
    detail = body.get("detail", body) if isinstance(body, dict) else body
    if isinstance(detail, dict) and "error" in detail:
        print(f"error: {detail['error']}: {detail.get('message', '')}", file=sys.stderr)
    else:
        print(f"error: {detail}", file=sys.stderr)
    return 1


def _problem_payload(args):
    doc = _load_json(args.problem, "problem file")
    if not isinstance(doc, dict):
        raise SystemExit("error: problem file must contain a JSON object")
    if getattr(args, "tol", None) is not None:
        doc["tol"] = args.tol
    if getattr(args, "seed", None) is not None:
        doc["seed"] = args.seed
    return doc


def cmd_radius(args):
    payload = {"problem": _problem_payload(args), "full_m_table": args.full_m_table}
    status, body = _post("/radius", payload, args.server)
    if status != 200:
        return _fail(body)
    _emit(body, args.json_out)
    l1 = body.get("l1")
    if l1 and l1.get("verdict") == "BestEffort":
        return 2
    return 0


def cmd_apply(args):
    cert = _load_json(args.certificate, "certificate file")
    payload = {"certificate": cert, "y": [float(v) for v in args.y]}
    status, body = _post("/apply", payload, args.server)
    if status != 200:
        return _fail(body)
    _emit(body, args.json_out)
    return 0


def cmd_oracle(args):
    payload = {
        "problem": _problem_payload(args),
        "certificate": _load_json(args.certificate, "certificate file"),
        "budget": args.budget,
    }
    if args.seed is not None:
        payload["seed"] = args.seed
    status, body = _post("/oracle", payload, args.server)
    if status != 200:
        return _fail(body)
    _emit(body, args.json_out)
    return 0 if body.get("sound") else 3


def cmd_export_sdpa(args):
    payload = {"problem": _problem_payload(args)}
    status, body = _post("/export-sdpa", payload, args.server)
    if status != 200:
        return _fail(body)
    try:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(body["text"])
    except OSError as exc:
        print(f"error: IoFailure: cannot write {args.out}: {exc}", file=sys.stderr)
        return 1
    return 0


def cmd_minimax(args):
    payload = {"problem": _problem_payload(args), "iters": args.iters}
    status, body = _post("/minimax", payload, args.server)
    if status != 200:
        return _fail(body)
    _emit(body, args.json_out)
    return 0


def cmd_diagnose(args):
    doc = _load_json(args.problem, "diagnostic file")
    if args.tol is not None:
        doc["tol"] = args.tol
    status, body = _post("/diagnose-n", doc, args.server)
    if status != 200:
        return _fail(body)
    _emit(body, args.json_out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="orecover",
        description="Worst-case optimal recovery certificates over two-ellipsoid models",
    )
    parser.add_argument("--server", help="base URL of a running service (default: in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("radius", help="solve a problem file and emit its certificate")
    p.add_argument("problem")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--full-M-table", dest="full_m_table", action="store_true")
    p.add_argument("--json-out", default=None)
    p.set_defaults(fn=cmd_radius)

    p = sub.add_parser("apply", help="apply a certificate's recovery map to observations")
    p.add_argument("certificate")
    p.add_argument("y", nargs="+", type=float, help="observation vector entries")
    p.add_argument("--json-out", default=None)
    p.set_defaults(fn=cmd_apply)

    p = sub.add_parser("oracle", help="cross-check a certificate against the brute-force oracle")
    p.add_argument("problem")
    p.add_argument("certificate")
    p.add_argument("--budget", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--json-out", default=None)
    p.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("export-sdpa", help="write the l1 linear-minimax SDP in SDPA sparse format")
    p.add_argument("problem")
    p.add_argument("out")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_export_sdpa)

    p = sub.add_parser("minimax", help="subgradient minimax over linear maps (l1 scenario)")
    p.add_argument("problem")
    p.add_argument("--iters", type=int, default=80)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--json-out", default=None)
    p.set_defaults(fn=cmd_minimax)

    p = sub.add_parser("diagnose-n", help="test sup=inf exactness for an n-ellipsoid instance")
    p.add_argument("problem")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--json-out", default=None)
    p.set_defaults(fn=cmd_diagnose)

    return parser


def main(argv=None):
    # argparse exits 2 on usage errors, which would collide with the
    # best-effort exit code; remap usage failures to 1 and keep --help at 0
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.fn(args)
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
            return 1
        return 1 if exc.code is None else exc.code
    except httpx.HTTPError as exc:
        print(f"error: transport failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
