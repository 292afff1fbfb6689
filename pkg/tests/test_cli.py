import re
import subprocess
import sys
from pathlib import Path

import pytest

from potx.cli import run

ROOT = Path(__file__).resolve().parents[1]
CORPUS = ROOT / "corpus"
DATA = Path(__file__).parent / "data"


def call(capsys, *argv):
    code = run([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_check_fig2(capsys):
    code, out, _ = call(capsys, "check", CORPUS / "fig2.potx")
    assert code == 0
    assert "models: 4 extero, 1 intro, 1 bridge" in out
    assert "observers: 3 valid, 0 with violations" in out


def test_check_fig2_machine(capsys):
    code, out, _ = call(capsys, "check", CORPUS / "fig2.potx", "--format", "machine")
    assert code == 0
    assert sum(ln.startswith("CLASS ") for ln in out.splitlines()) == 6
    assert "RESULT ok" in out


def test_check_missing_flag(capsys):
    code, out, _ = call(capsys, "check", CORPUS / "fig2_no_experimentable.potx", "--format", "machine")
    assert code == 1
    violations = [ln for ln in out.splitlines() if ln.startswith("VIOLATION")]
    assert violations == ["VIOLATION h ExperimentabilityMissing -"]


def test_garbage_reports_position(capsys):
    code, out, err = call(capsys, "check", DATA / "garbage.potx")
    assert code == 2
    assert re.search(r"garbage\.potx:1:1: expected system", err)
    assert out == ""


def test_bad_physicality_position(capsys):
    code, _, err = call(capsys, "classify", DATA / "bad_physicality.potx")
    assert code == 2
    assert "bad_physicality.potx:3:11:" in err


def test_missing_file(capsys):
    code, _, err = call(capsys, "check", CORPUS / "nope.potx")
    assert code == 2 and "nope.potx" in err


def test_unresolved_reference_exits_one(tmp_path, capsys):
    path = tmp_path / "ghost.potx"
    path.write_text("system s {\n  measure m\n  model f { in: m; out: ghost }\n}\n")
    code, _, err = call(capsys, "check", path)
    assert code == 1
    assert "ghost" in err and "ghost.potx:3:" in err


def test_usage_errors(capsys):
    assert call(capsys)[0] == 2
    assert call(capsys, "frobnicate", "x")[0] == 2
    assert call(capsys, "infer", CORPUS / "chain.potx")[0] == 2
    assert call(capsys, "export", CORPUS / "fig2.potx", "--format", "machine")[0] == 2


def test_gaps_scenario2(capsys):
    code, out, _ = call(capsys, "gaps", CORPUS / "scenario2.potx",
                        "--deploy", "matching_tool,technical_system")
    assert code == 1
    assert "GAP mental_overburden required=4 experimentable=true" in out
    assert re.search(r"^SUGGEST mental_overburden level=4 cover=\S+$", out, re.M)


def test_gaps_scenario1(capsys):
    code, out, _ = call(capsys, "gaps", CORPUS / "scenario1.potx", "--deploy", "supervisor_l3",
                        "--format", "machine")
    assert code == 1
    assert out.splitlines()[0] == "GAP task_knowledge required=4 experimentable=true"


def test_gaps_full_stack(capsys):
    code, out, _ = call(capsys, "gaps", CORPUS / "fig2.potx", "--deploy", "i,g,h")
    assert code == 0
    assert "no gaps" in out


def test_gaps_unknown_observer(capsys):
    code, _, err = call(capsys, "gaps", CORPUS / "fig2.potx", "--deploy", "zz")
    assert code == 2 and "zz" in err


def test_gaps_without_targets(tmp_path, capsys):
    path = tmp_path / "t.potx"
    path.write_text("system s { measure m }\n")
    assert call(capsys, "gaps", path)[0] == 2


def test_infer_chain(capsys):
    code, out, _ = call(capsys, "infer", CORPUS / "chain.potx", "--query", "B")
    assert code == 0
    assert out == "low: 0.410000\nhigh: 0.590000\n"


def test_infer_evidence_on_query(capsys):
    code, out, _ = call(capsys, "infer", CORPUS / "chain.potx", "--query", "B", "--evidence", "B=high")
    assert code == 0
    assert "high: 1.000000" in out


def test_infer_opaque(capsys):
    code, out, _ = call(capsys, "infer", CORPUS / "fig2.potx", "--deploy", "g",
                        "--query", "work_engagement")
    assert code == 1
    assert out.strip() == "opaque: work_engagement"


def test_infer_bad_evidence(capsys):
    assert call(capsys, "infer", CORPUS / "chain.potx", "--query", "B", "--evidence", "A")[0] == 2
    assert call(capsys, "infer", CORPUS / "chain.potx", "--query", "B", "--evidence", "A=mid")[0] == 2


def test_export_fig2(capsys):
    code, out, _ = call(capsys, "export", CORPUS / "fig2.potx", "--format", "dot")
    assert code == 0
    clusters = re.findall(r"subgraph (cluster_\w+)", out)
    assert {"cluster_extero", "cluster_border", "cluster_intro"} <= set(clusters)
    observers = {c.split("__")[-1] for c in clusters if "__" in c}
    assert observers == {"g", "h", "i"}
    assert '"rgb_r" [shape=box, style=rounded' in out
    assert '"blood_color" [shape=octagon' in out
    assert out.count("{") == out.count("}")


def test_export_empty_system(tmp_path, capsys):
    path = tmp_path / "empty.potx"
    path.write_text("system empty {}\n")
    code, out, _ = call(capsys, "export", path)
    assert code == 0
    assert out.startswith('digraph "empty" {')
    assert out.count("subgraph cluster_") == 3
    assert out.count("{") == out.count("}")


def test_quiet_suppresses_output(capsys):
    code, out, _ = call(capsys, "--quiet", "gaps", CORPUS / "fig2.potx", "--deploy", "g")
    assert code == 1 and out == ""
    code, out, _ = call(capsys, "check", CORPUS / "fig2.potx", "--quiet")
    assert code == 0 and out == ""


def test_color_only_when_asked(capsys, monkeypatch):
    path = CORPUS / "fig2.potx"
    assert "\x1b[" not in call(capsys, "check", path)[1]
    monkeypatch.setenv("POTX_COLOR", "1")
    assert "\x1b[32mPASS" in call(capsys, "check", path)[1]


@pytest.mark.parametrize("command", ["classify", "regions"])
def test_machine_formats(capsys, command):
    code, out, _ = call(capsys, command, CORPUS / "fig2.potx", "--format", "machine")
    assert code == 0
    assert all(re.match(r"^[A-Z]+ ", ln) for ln in out.splitlines())


def test_regions_attribution(capsys):
    code, out, _ = call(capsys, "regions", CORPUS / "fig2.potx", "--deploy", "g", "--format", "machine")
    assert code == 0
    assert "NODE work_engagement opaque" in out
    assert "NODE fatigue_bridge transparent=g level=3" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "potx", "infer", str(CORPUS / "chain.potx"),
                           "--query", "B"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("low: 0.410000")
