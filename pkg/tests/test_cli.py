from __future__ import annotations

import json
import subprocess
import sys

import pytest

from holonomy_lab.cli import main, parse_grid


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def records(text):
    return json.loads(text)["records"]


@pytest.mark.parametrize(
    "argv",
    [
        "verify-ricci --n 2 --alpha 0.7 --r 1.5,2,3",
        "verify-ricci --n 1 --alpha 1 --r 2",
        "verify-kahler --n 3 --alpha 1/3 --exact",
        "verify-kahler --n 1 --alpha 0 --exact",
        "ode --n 2 --alpha 0.9 --r0 1.001 --r1 4 --tol 1e-10",
        "ode --n 1 --alpha 0 --r0 1.01 --r1 5",
        "boundary --n 1 --alpha 0.5",
        "boundary --n 3 --alpha 0",
        "identities --n 1",
    ],
)
def test_examples_pass(capsys, argv):
    code, out, _ = run(capsys, *argv.split())
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == 1 and doc["summary"]["total"] == doc["summary"]["passed"] > 0


@pytest.mark.parametrize(
    "argv, dim",
    [
        ("holonomy --n 1 --alpha 0.5 --points 1.3,2.1,3.7", 15),
        ("holonomy --n 1 --alpha 1 --points 1.5,2.5", 10),
        ("holonomy --n 2 --alpha 1 --points 2,3", 21),
    ],
)
def test_holonomy_examples(capsys, argv, dim):
    code, out, _ = run(capsys, *argv.split())
    assert code == 0
    rec = records(out)[0]
    assert rec["check"] == "holonomy_dim" and rec["value"] == dim


def test_ode_refit(capsys):
    code, out, _ = run(capsys, "ode", "--n", "1", "--alpha", "0.5", "--r0", "1.5", "--u0", "0.9")
    assert code == 0
    detail = records(out)[0]["detail"]
    assert detail["C"] != detail["C_canonical"]


def test_boundary_flag(capsys):
    code, out, _ = run(capsys, "boundary", "--n", "2", "--alpha", "1")
    rec = records(out)[0]
    assert code == 0 and rec["value"] == 2.0 and rec["detail"]["flag"] == "hyperkahler bolt"


def test_bad_profile(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": 1, "alpha": "1/2", "expr": "1 - r**-2", "samples": [{"r": 1.5}, {"r": 2}]}))
    code, out, _ = run(capsys, "verify-ricci", "--profile", str(bad))
    assert code == 1
    by_check = {}
    for rec in records(out):
        by_check.setdefault(rec["check"], []).append(rec)
    assert not any(r["pass"] for r in by_check["ricci_flat"])
    comps = by_check["ricci_flat"][0]["detail"]["components"]
    assert all(abs(comps[k]) > 1e-3 for k in ("R_a", "R_b", "R_c"))
    assert all(r["pass"] for r in by_check["ricci_products_agree"])
    assert all(r["pass"] for r in by_check["ricci_products_equal_minus_Qtilde"])


def test_profile_export_roundtrip(capsys, tmp_path):
    path = tmp_path / "p.json"
    assert main(["profile", "--n", "2", "--alpha", "1/3", "--r", "1.5,2", "--out", str(path)]) == 0
    code, out, _ = run(capsys, "verify-ricci", "--profile", str(path))
    assert code == 0 and len(records(out)) == 6


def test_corrupted_kahler(capsys):
    code, out, _ = run(capsys, "verify-kahler", "--n", "2", "--alpha", "1/2", "--corrupt", "swap")
    assert code == 1
    rec = records(out)[0]
    assert rec["check"] == "d_omega_zero" and not rec["pass"] and rec["detail"]["residual"]


@pytest.mark.parametrize(
    "argv",
    [
        "verify-ricci --n 1 --alpha 2 --r 2",
        "verify-ricci --n 1 --alpha 0.5 --r 0.5,2",
        "verify-ricci --n 1 --alpha 0.5 --r 2 --ricci-tol -1",
        "verify-ricci --n 0 --alpha 0.5",
        "verify-ricci --alpha 0.5",
        "holonomy --n 1 --alpha x",
        "ode --n 1 --alpha 0.5 --r0 3 --r1 2",
        "verify-ricci --n 1 --alpha 0.5 --r 1:2:0",
    ],
)
def test_usage_errors(capsys, argv):
    code, out, err = run(capsys, *argv.split())
    assert code == 2 and out == "" and "error" in err


def test_argparse_usage_exit(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2


def test_missing_profile_file(capsys, tmp_path):
    code, _, err = run(capsys, "verify-ricci", "--profile", str(tmp_path / "nope.json"))
    assert code == 2


def test_formats(capsys):
    for fmt in ("csv", "text"):
        code, out, _ = run(capsys, "boundary", "--n", "1", "--alpha", "1/2", "--format", fmt)
        assert code == 0 and "boundary_slope" in out
    assert out.strip().endswith("1/1 passed")


def test_out_file(capsys, tmp_path):
    path = tmp_path / "r.json"
    assert main(["boundary", "--n", "1", "--alpha", "1/2", "--out", str(path)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(path.read_text())["command"] == "boundary"


def test_deterministic_across_thread_counts(monkeypatch, capsys):
    argv = ["verify-ricci", "--n", "2", "--alpha", "0.4", "--r", "1.1:4:6"]
    outs = []
    for threads in ("1", "4", "1"):
        monkeypatch.setenv("HOLONOMY_LAB_THREADS", threads)
        code, out, _ = run(capsys, *argv)
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1] == outs[2]
    assert [r["params"]["r"] for r in records(outs[0])] == parse_grid("1.1:4:6")


def test_bad_thread_env(monkeypatch, capsys):
    monkeypatch.setenv("HOLONOMY_LAB_THREADS", "many")
    code, _, _ = run(capsys, "verify-ricci", "--n", "1", "--alpha", "0.5", "--r", "2,3")
    assert code == 2


def test_grid_parsing():
    assert parse_grid("1.5,2,3") == [1.5, 2.0, 3.0]
    assert parse_grid("1:2:3") == [1.0, 1.5, 2.0]
    assert parse_grid("2:5:1") == [2.0]


def test_structure_dump(capsys):
    code, out, _ = run(capsys, "structure", "--n", "1")
    doc = json.loads(out)
    assert code == 0 and doc["n"] == 1 and len(doc["generators"]) == 9


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "holonomy_lab", "boundary", "--n", "1", "--alpha", "0", "--format", "text"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0 and "PASS boundary_slope" in proc.stdout
