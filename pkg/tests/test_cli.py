import json

import numpy as np
import pytest

from orecover.cli import main


def write_json(path, doc):
    path.write_text(json.dumps(doc), encoding="utf-8")


@pytest.fixture
def e1_file(tmp_path):
    path = tmp_path / "e1.json"
    write_json(
        path,
        {
            "dim": 2,
            "scenario": "exact",
            "Lambda": [[1.0, 0.0]],
            "Q": [[1.0, 0.0], [0.0, 1.0]],
            "R": [[1.0, 0.0], [0.0, 1.0]],
            "S": [[1.0, 0.0], [0.0, 2.0]],
        },
    )
    return path


@pytest.fixture
def l1_file(tmp_path):
    path = tmp_path / "l1.json"
    write_json(
        path,
        {
            "dim": 2,
            "scenario": "l1",
            "Lambda": [[1.0, 0.0]],
            "Q": [[1.0, 0.0], [0.0, 1.0]],
            "R": [[1.0, 0.0], [0.0, 1.0]],
            "eta": 0.5,
        },
    )
    return path


def test_radius_writes_certificate(e1_file, tmp_path, capsys):
    out = tmp_path / "cert.json"
    code = main(["radius", str(e1_file), "--json-out", str(out)])
    assert code == 0
    cert = json.loads(out.read_text())
    assert abs(cert["radius_sq"] - 0.25) < 1e-9
    assert cert["scenario"] == "exact"


def test_radius_byte_identical_reruns(e1_file, tmp_path):
    out1, out2 = tmp_path / "c1.json", tmp_path / "c2.json"
    assert main(["radius", str(e1_file), "--json-out", str(out1)]) == 0
    assert main(["radius", str(e1_file), "--json-out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_radius_rank_deficient_exit_1(tmp_path, capsys):
    path = tmp_path / "bad.json"
    write_json(
        path,
        {
            "dim": 2,
            "scenario": "exact",
            "Lambda": [[1.0, 0.0], [2.0, 0.0]],
            "Q": [[1.0, 0.0], [0.0, 1.0]],
            "R": [[1.0, 0.0], [0.0, 1.0]],
            "S": [[1.0, 0.0], [0.0, 2.0]],
        },
    )
    code = main(["radius", str(path)])
    assert code == 1
    assert "RankDeficient" in capsys.readouterr().err


def test_radius_invalid_json_reports_line(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"dim": 2,\n  "scenario": }', encoding="utf-8")
    code = main(["radius", str(path)])
    assert code == 1
    err = capsys.readouterr().err
    assert "line 2" in err


def test_apply_command(e1_file, tmp_path, capsys):
    out = tmp_path / "cert.json"
    main(["radius", str(e1_file), "--json-out", str(out)])
    code = main(["apply", str(out), "3.0"])
    assert code == 0
    body = json.loads(capsys.readouterr().out)
    assert np.allclose(body["f_hat"], [3.0, 0.0])
    assert np.allclose(body["q_hat"], [3.0, 0.0])
    code = main(["apply", str(out), "1.0", "2.0"])
    assert code == 1  # wrong observation length


def test_oracle_command_and_tampering(e1_file, tmp_path, capsys):
    out = tmp_path / "cert.json"
    main(["radius", str(e1_file), "--json-out", str(out)])
    code = main(["oracle", str(e1_file), str(out), "--budget", "10000"])
    assert code == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["gap"] <= 1e-3
    cert = json.loads(out.read_text())
    cert["radius_sq"] /= 2
    bad = tmp_path / "tampered.json"
    bad.write_text(json.dumps(cert), encoding="utf-8")
    assert main(["oracle", str(e1_file), str(bad)]) == 3


def test_l1_verdict_exit_codes(l1_file, tmp_path):
    # single-axis l1 condition always holds: exit 0
    assert main(["radius", str(l1_file), "--json-out", str(tmp_path / "c.json")]) == 0


def test_l1_best_effort_exit_2(tmp_path):
    rng = np.random.default_rng(0)
    n, m = 4, 3
    Lam = rng.standard_normal((m, n))
    R = rng.standard_normal((n, n)) + 0.6 * np.eye(n)
    path = tmp_path / "l1big.json"
    write_json(
        path,
        {
            "dim": n,
            "scenario": "l1",
            "Lambda": Lam.tolist(),
            "Q": np.eye(n).tolist(),
            "R": R.tolist(),
            "eta": 0.8,
        },
    )
    code = main(["radius", str(path), "--json-out", str(tmp_path / "c.json")])
    assert code == 2
    cert = json.loads((tmp_path / "c.json").read_text())
    assert cert["l1"]["verdict"] == "BestEffort"


def test_export_sdpa_command(l1_file, tmp_path):
    out = tmp_path / "prog.dat-s"
    assert main(["export-sdpa", str(l1_file), str(out)]) == 0
    assert out.read_text().splitlines()[0] == "5 = mDIM"
    # non-l1 input is a usage error (exit 1)
    e1 = tmp_path / "e1.json"
    write_json(
        e1,
        {
            "dim": 2,
            "scenario": "exact",
            "Lambda": [[1.0, 0.0]],
            "Q": [[1.0, 0.0], [0.0, 1.0]],
            "R": [[1.0, 0.0], [0.0, 1.0]],
            "S": [[1.0, 0.0], [0.0, 2.0]],
        },
    )
    assert main(["export-sdpa", str(e1), str(tmp_path / "x.dat-s")]) == 1


def test_export_sdpa_unwritable_path(l1_file, tmp_path):
    assert main(["export-sdpa", str(l1_file), str(tmp_path / "no-dir" / "x.dat-s")]) == 1


def test_minimax_command(l1_file, capsys):
    assert main(["minimax", str(l1_file), "--iters", "2"]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["condition_verdict"] == "Holds"


def test_diagnose_command(tmp_path, capsys):
    path = tmp_path / "diag.json"
    write_json(
        path,
        {
            "dim": 2,
            "Lambda": [[1.0, 0.0]],
            "Q": [[1.0, 0.0], [0.0, 1.0]],
            "Rs": [[[1.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 2.0]]],
        },
    )
    assert main(["diagnose-n", str(path)]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["verdict"] == "Exact"  # two forms are always exact


def test_usage_error_exit_1():
    assert main(["radius"]) == 1
    assert main(["no-such-command"]) == 1
