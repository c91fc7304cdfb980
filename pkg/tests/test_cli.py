from __future__ import annotations

import json
import subprocess
import sys
from fractions import Fraction

import pytest

from gkpz import core
from gkpz.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_enumerate_text(capsys):
    code, out, _ = run(capsys, "enumerate")
    assert code == EXIT_OK
    assert out.splitlines()[0] == "negative multi-indices at delta = 1 (limit)"
    assert "|beta| = -3/2 (limit-negative): 1" in out
    assert "  N0^4*Q0^3" in out
    assert out.rstrip().endswith("total: 29")


def test_enumerate_strict(capsys):
    code, out, _ = run(capsys, "enumerate", "--strict")
    assert code == EXIT_OK and out.rstrip().endswith("total: 11")
    assert "limit-negative" not in out


def test_enumerate_json_fields(capsys):
    code, out, _ = run(capsys, "enumerate", "--delta", "3/4", "--format", "json")
    doc = json.loads(out)
    assert code == EXIT_OK
    assert doc["schema_version"] == 1 and doc["command"] == "enumerate"
    assert doc["parameters"] == {"delta": "3/4", "limit": True}
    payload = doc["payload"]
    assert payload["total"] == 49
    rec = payload["groups"][0]["elements"][0]
    assert set(rec) == {"beta", "homogeneity", "noises", "fertility", "sigma_factor", "limit_negative"}
    assert rec["beta"] == "N0" and rec["homogeneity"] == "-13/8"


def test_enumerate_latex(capsys):
    code, out, _ = run(capsys, "enumerate", "--format", "latex")
    assert code == EXIT_OK
    assert out.startswith("\\begin{tabular}")
    assert r"$(-\frac{3}{2})^-$ & $z_{(\Xi,0)}$ & 1 \\" in out


def test_reduced_with_fibers(capsys):
    code, out, _ = run(capsys, "reduced", "--with-fibers", "--format", "json")
    payload = json.loads(out)["payload"]
    assert code == EXIT_OK and payload["total"] == 17
    sizes = {e["beta"]: e["fiber_size"] for g in payload["groups"] for e in g["elements"]}
    assert sizes["N0^4*Q0*Q1"] == 3 and sizes["N0^2*N1^2*Q0"] == 4
    code, out, _ = run(capsys, "reduced", "--even")
    assert out.rstrip().endswith("total: 12")
    code, out, _ = run(capsys, "reduced", "--with-fibers", "--format", "latex")
    assert "Fiber" in out


def test_geo_commands(capsys):
    assert run(capsys, "geo", "dim", "--noises", "5")[1] == "5\n"
    assert run(capsys, "geo", "basis", "--noises", "2")[1] == "N0*N1 + 1/2*N0^2*Q0\n"
    code, out, _ = run(capsys, "geo", "xi")
    assert code == EXIT_OK and out.startswith("geometric dimension: 6")
    doc = json.loads(run(capsys, "geo", "xi", "--even", "--format", "json")[1])
    assert doc["payload"]["dimension"] == 4
    doc = json.loads(run(capsys, "geo", "basis", "--noises", "4", "--format", "json")[1])
    assert doc["payload"]["rank"] == 7 and len(doc["payload"]["columns"]) == 10


def test_geo_usage_errors(capsys):
    code, _, err = run(capsys, "geo", "dim")
    assert code == EXIT_USAGE and "--noises" in err
    with pytest.raises(SystemExit) as info:
        main(["geo", "dim", "--noises", "1"])
    assert info.value.code == EXIT_USAGE


def test_counterterms(capsys):
    code, out, _ = run(capsys, "counterterms", "--gaussian")
    assert code == EXIT_OK
    assert "C[N0*N1] / 1 * s(0)·s(1)" in out
    assert out.rstrip().endswith("total: 12")
    rows = json.loads(run(capsys, "counterterms", "--format", "json")[1])["payload"]["rows"]
    assert len(rows) == 17
    assert {"beta", "constant", "upsilon", "ito", "geometric", "limit_negative"} <= set(rows[0])
    assert "tabular" in run(capsys, "counterterms", "--format", "latex")[1]


def test_fiber(capsys):
    code, out, _ = run(capsys, "fiber", "N0^4*Q0^3")
    lines = out.splitlines()
    assert code == EXIT_OK and lines[-1] == "size: 2"
    assert "Xi0(I1:Xi,I1:Xi0(I1:Xi,I1:Xi0(I1:Xi,I1:Xi)))" in lines
    code, _, err = run(capsys, "fiber", "X0,0")
    assert code == EXIT_USAGE and "position 0" in err
    code, _, err = run(capsys, "fiber", "N0*L0")
    assert code == EXIT_USAGE


@pytest.mark.parametrize("delta", ["0", "3/2", "0.5", "x"])
def test_bad_delta_is_usage_error(delta):
    with pytest.raises(SystemExit) as info:
        main(["enumerate", "--delta", delta])
    assert info.value.code == EXIT_USAGE


def test_limit_and_strict_are_exclusive():
    with pytest.raises(SystemExit) as info:
        main(["enumerate", "--limit", "--strict"])
    assert info.value.code == EXIT_USAGE


def test_output_is_deterministic(capsys):
    for argv in (["enumerate", "--format", "json"], ["reduced", "--with-fibers"], ["geo", "xi"]):
        assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_verify_passes(capsys):
    code, out, err = run(capsys, "verify", "--max-noises", "4")
    assert code == EXIT_OK, err
    assert out.rstrip().endswith("13/13 checks passed")
    assert all(line.startswith("PASS ") for line in out.splitlines()[:-1])


def test_verify_reports_corrupted_constant(capsys, monkeypatch):
    monkeypatch.setattr(core, "CRITICAL_REGULARITY", Fraction(-5, 2))
    code, out, err = run(capsys, "verify", "--max-noises", "4")
    assert code == EXIT_FAIL
    assert "FAIL negative-set" in out
    assert "negative-set" in err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "gkpz", "geo", "dim", "--noises", "3"], capture_output=True, text=True
    )
    assert proc.returncode == 0 and proc.stdout == "2\n"
