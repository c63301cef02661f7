import json
import subprocess
import sys

import pytest

from ttpoly.cli import main
from ttpoly.instances import generate, parse_robinx

from conftest import FIXTURES


def run(capsys, *argv: str) -> tuple[int, str, str]:
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_round_trip(tmp_path, capsys):
    path = tmp_path / "line6.xml"
    code, _, _ = run(capsys, "gen", "line", "6", "-o", str(path))
    assert code == 0
    inst = parse_robinx(path)
    assert inst.n == 6 and inst.d == generate("line", 6).d
    code, out, _ = run(capsys, "gen", "incr", "4")
    assert code == 0 and "<Instance>" in out


def test_build_reports_sizes(capsys):
    code, out, _ = run(capsys, "build", "circ4")
    assert code == 0 and out.startswith("CIRC4: 120 variables, 380 constraints")
    code, out, _ = run(capsys, "build", "circ4", "--flow")
    assert code == 0 and "+24 constraints relative to preset base" in out
    code, out, _ = run(capsys, "build", "con8", "--hsrt-flow")
    assert "+16 constraints relative to preset base" in out
    code, out, _ = run(capsys, "build", "con4", "--preset", "plain")
    assert "CON4: 120 variables, 296 constraints, 1200 nonzeros" in out


def test_build_export_to_stdout_keeps_report_on_stderr(capsys):
    code, out, err = run(capsys, "build", "con4", "--export", "lp")
    assert code == 0 and out.rstrip().endswith("End") and "variables" in err


def test_build_export_files(tmp_path, capsys):
    for fmt in ("lp", "mps"):
        path = tmp_path / f"m.{fmt}"
        assert run(capsys, "build", "con4", "--export", fmt, "-o", str(path))[0] == 0
        assert path.stat().st_size > 0


def test_build_from_xml_file(capsys):
    code, out, _ = run(capsys, "build", str(FIXTURES / "circ4_onebased.xml"), "--preset", "plain")
    assert code == 0 and "120 variables" in out


@pytest.mark.parametrize("argv, pct", [
    (("lp", "circ4"), "20.0%"),
    (("lp", "con4", "--flow"), "82.4%"),
    (("lp", "con4", "--flow", "--preset", "plain"), "82.4%"),
    (("lp", "con4", "--preset", "full", "--hsrt-flow"), "94.1%"),
    (("lp", "line4", "--hsrt-flow", "--mode", "float"), "33.3%"),
])
def test_lp_percentages(capsys, argv, pct):
    code, out, _ = run(capsys, *argv)
    assert code == 0 and f"LP bound / best: {pct}" in out


def test_lp_best_override(capsys):
    code, out, _ = run(capsys, "lp", "con4", "--best", "16")
    assert code == 0 and "LP bound 4," in out and "LP bound / best: 25.0%" in out


def test_lp_external(capsys, monkeypatch, scipy_solver_cmd):
    monkeypatch.delenv("TTP_EXT_SOLVER", raising=False)
    code, out, err = run(capsys, "lp", "con4", "--mode", "external")
    assert code == 3 and "TTP_EXT_SOLVER" in out + err
    code, out, _ = run(capsys, "lp", "con4", "--preset", "full", "--hsrt-flow", "--mode", "external",
                       "--solver-cmd", scipy_solver_cmd)
    assert code == 0 and "94.1%" in out
    code, _, err = run(capsys, "lp", "con4", "--mode", "external", "--solver-cmd", "false {lp}")
    assert code == 3


def test_ip4(capsys):
    code, out, _ = run(capsys, "ip4", "con4")
    assert code == 0 and "17" in out
    assert run(capsys, "ip4", "con6")[0] == 2


def test_usage_errors(capsys):
    assert run(capsys, "build", "nosuch4")[0] == 2
    assert run(capsys, "build", "con5")[0] == 2
    assert run(capsys, "build", str(FIXTURES / "malformed.xml"))[0] == 2
    assert run(capsys, "build", str(FIXTURES / "missing_pair.xml"))[0] == 2
    assert run(capsys, "build", "con4", "--hsrt-flow", "--preset", "plain")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "table3", "--best", "garbage")[0] == 2


def test_verify_pass_fail_and_json(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "--suite", "dimension")
    assert code == 0 and "3/3 claims pass" in out
    code, out, _ = run(capsys, "verify", "--suite", "dimension", "--inject-invalid")
    assert code == 1 and "FAIL" in out and "corrupted_nonpositive" in out
    report = tmp_path / "report.json"
    code, out, _ = run(capsys, "verify", "--suite", "redundancy", "--json", str(report))
    assert code == 0 and json.loads(report.read_text())["all_pass"]


def test_table2(capsys):
    code, out, _ = run(capsys, "table2", "--max-n", "6")
    assert code == 0 and "FAIL" not in out and out.count("PASS") == 10


def test_table3_single_family(capsys):
    code, out, _ = run(capsys, "table3", "--families", "line", "--variant", "plain", "--mode", "float")
    assert code == 0 and "9/9 cells within 0.05 percentage points" in out


def test_table3_needs_best_for_larger_instances(capsys):
    code, out, err = run(capsys, "table3", "--families", "con", "--max-n", "6", "--variant", "plain",
                         "--mode", "float")
    assert code == 0
    assert "CON6: skipped, pass --best CON6=VALUE" in out
    assert "9/9 cells within 0.05 percentage points, 1 instances skipped" in out


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ttpoly.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "table3" in proc.stdout
