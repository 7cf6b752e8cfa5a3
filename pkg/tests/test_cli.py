from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from gammastack.cli import data_path, main


def run_cli(*args) -> tuple[int, str, str]:
    proc = subprocess.run(
        [sys.executable, "-m", "gammastack.cli", *args],
        capture_output=True,
        text=True,
    )
    return proc.returncode, proc.stdout, proc.stderr


def test_validate_bundled_ok():
    for name in ("abelian", "axb", "sl2-weyl", "trivial-que", "abelian-que", "sl2-que"):
        code = main(["validate", str(data_path(f"{name}.glb"))])
        assert code == 0, name


def test_validate_accepts_bundled_shortnames():
    assert main(["validate", "axb.glb"]) == 0


def test_validate_corrupted_exits_1_naming_condition(tmp_path, capsys):
    text = data_path("axb.glb").read_text(encoding="utf-8")
    bad = tmp_path / "bad.glb"
    bad.write_text(text.replace("term -2 x y", "term -1 x y"), encoding="utf-8")
    code = main(["validate", str(bad)])
    out = capsys.readouterr().out
    assert code == 1
    assert "condition-a" in out


def test_parse_error_exit_2(tmp_path):
    f = tmp_path / "broken.glb"
    f.write_text("[algebra]\ndim 2\nlabels x y\nbracket x q = 1 x\n", encoding="utf-8")
    code, out, err = run_cli("validate", str(f))
    assert code == 2
    assert "line 4" in err


def test_missing_file_exit_2():
    code, _out, err = run_cli("validate", "/nonexistent/nope.glb")
    assert code == 2


def test_quantize_without_quantum_data_exit_2():
    code, _out, err = run_cli("quantize", str(data_path("axb.glb")))
    assert code == 2
    assert "no quantum data" in err


def test_stack_certificate_written_and_valid(tmp_path):
    out = tmp_path / "cert.json"
    code = main(["stack", str(data_path("axb.glb")), "--degree", "3", "--out", str(out)])
    assert code == 0
    cert = json.loads(out.read_text())
    assert cert["valid"] is True
    assert cert["kind"] == "poisson_stack_certificate"
    assert cert["schema_version"] == 1


def test_quantize_certificate(tmp_path):
    out = tmp_path / "qcert.json"
    code = main(
        ["quantize", str(data_path("abelian-que.glb")), "--hbar", "3", "--pbw", "4", "--out", str(out)]
    )
    assert code == 0
    cert = json.loads(out.read_text())
    assert cert["valid"] is True
    assert cert["kind"] == "quantum_stack_certificate"


def test_admissibilize_command(capsys):
    code = main(["admissibilize", str(data_path("abelian-que.glb")), "--target", "s"])
    out = capsys.readouterr().out
    assert code == 0
    assert "gauge element b[s]" in out
    assert "admissible twist F'[s]" in out


def test_certificates_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["stack", str(data_path("axb.glb")), "--degree", "3", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.json"
    assert (
        main(["stack", str(data_path("axb.glb")), "--degree", "3", "--threads", "4", "--out", str(c)])
        == 0
    )
    assert a.read_bytes() == c.read_bytes()


def test_stack_sl2_weyl_via_cli(tmp_path):
    out = tmp_path / "sl2-cert.json"
    code = main(["stack", str(data_path("sl2-weyl.glb")), "--degree", "3", "--out", str(out)])
    assert code == 0
    cert = json.loads(out.read_text())
    assert cert["valid"] is True
    assert len(cert["gauge_elements"]) == 64


def test_stack_on_invalid_problem_exit_1(tmp_path):
    text = data_path("axb.glb").read_text(encoding="utf-8")
    bad = tmp_path / "bad.glb"
    bad.write_text(text.replace("term -2 x y", "term -1 x y"), encoding="utf-8")
    code, _out, err = run_cli("stack", str(bad), "--degree", "3")
    assert code == 1
    assert "condition-a" in err


def test_quantize_truncation_overrides(tmp_path):
    """Down-truncation in hbar is a congruence (still valid); requesting more
    hbar orders than the file provides fails honestly with a recorded reason."""
    out2 = tmp_path / "m2.json"
    code = main(
        ["quantize", str(data_path("abelian-que.glb")), "--hbar", "2", "--pbw", "4", "--out", str(out2)]
    )
    assert code == 0
    assert json.loads(out2.read_text())["valid"] is True
    out4 = tmp_path / "m4.json"
    code = main(
        ["quantize", str(data_path("abelian-que.glb")), "--hbar", "4", "--pbw", "6", "--out", str(out4)]
    )
    assert code == 1
    cert = json.loads(out4.read_text())
    assert cert["valid"] is False
    assert cert["failures"]


def test_golden_certificates_stable(tmp_path):
    """Certificate formats are pinned against golden files."""
    golden = Path(__file__).parent / "golden"
    out = tmp_path / "stack.json"
    assert main(["stack", str(data_path("axb.glb")), "--degree", "3", "--out", str(out)]) == 0
    assert out.read_bytes() == (golden / "axb-stack-N3.json").read_bytes()
    out = tmp_path / "quantum.json"
    assert main(["quantize", str(data_path("trivial-que.glb")), "--out", str(out)]) == 0
    assert out.read_bytes() == (golden / "trivial-quantum.json").read_bytes()
