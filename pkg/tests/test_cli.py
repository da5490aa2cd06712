import io
import json
import os
from pathlib import Path

import pytest

from trasdim.cli import parse_scales, parse_tuples, run

HERE = Path(__file__).parent
DATA = HERE / "data"
GOLDEN = HERE / "golden"

# set TRASDIM_REGEN_GOLDEN=1 to rewrite the golden reports after an intended change
CASES = {
    "ord_pair": ["ord", "--input", "family_pair.json"],
    "derive_pair": ["derive", "--input", "family_pair.json", "--sigma", "1"],
    "chain_pair": ["chain", "--input", "family_pair.json", "--k", "1"],
    "components_path30": ["components", "--input", "path30.json", "--scale", "2"],
    "decompose_path30": ["decompose", "--input", "path30.json", "--slots", "2,3", "--bound", "5"],
    "trasdim_path60": ["trasdim", "--input", "path60.json", "--scales", "2..6", "--bound", "12"],
    "family_request": ["trasdim", "--input", "request_path60.json"],
    "derive_f_path60": ["derive-f", "--input", "path60.json", "--scales", "2..6", "--bound", "12"],
    "profile_ones_path30": ["profile-check", "--input", "path30.json", "--scales", "2..8", "--bound", "5",
                            "--profile", "ones_profile.json", "--tuples", "2,3;2,7;2,8"],
    "strategy_min_oracle": ["strategy-check", "--input", "min_oracle.json", "--strategy", "identity_strategy.json",
                            "--truncation", "10"],
}


def invoke(argv):
    out = io.StringIO()
    code = run(argv, out=out)
    return code, out.getvalue()


def in_data(argv):
    # file operands are relative to tests/data
    fixed = list(argv)
    for i, a in enumerate(fixed):
        if a.endswith(".json"):
            fixed[i] = str(DATA / a)
    return fixed


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden_reports(name):
    code, text = invoke(in_data(CASES[name]))
    assert code == 0
    path = GOLDEN / f"{name}.json"
    if os.environ.get("TRASDIM_REGEN_GOLDEN"):
        path.write_text(text)
    assert text == path.read_text()
    again = invoke(in_data(CASES[name]))[1]
    assert again == text


def test_report_contents():
    report = json.loads(invoke(in_data(CASES["ord_pair"]))[1])
    assert report["schema"] == "1" and report["result"]["int"] == 1
    report = json.loads(invoke(in_data(CASES["components_path30"]))[1])
    assert report["result"]["count"] == 1
    assert report["result"]["components"][0]["diameter"] == 29
    report = json.loads(invoke(in_data(CASES["trasdim_path60"]))[1])
    assert report["result"]["ord"] == 1
    assert report["truncation"] == {"scales": [2, 3, 4, 5, 6], "B": 12, "points": 61}
    assert report["input"]["digest"].startswith("sha256:")
    report = json.loads(invoke(in_data(CASES["profile_ones_path30"]))[1])
    assert report["result"]["failures"] == [[2, 8]]


def test_request_and_flags_agree():
    a = json.loads(invoke(in_data(CASES["family_request"]))[1])
    b = json.loads(invoke(in_data(CASES["trasdim_path60"]))[1])
    assert a["result"] == b["result"]


def test_unknown_exit_code():
    code, text = invoke(["trasdim", "--input", '{"kind": "grid", "size": 12}', "--scales", "3..5",
                         "--bound", "3", "--budget", "100"])
    assert code == 2
    report = json.loads(text)
    assert report["status"] == "Unknown" and report["truncation"]["B"] == 3


def test_input_errors(capsys):
    assert invoke(["ord", "--input", '{"ground": [1], "members": [[1], [2]]}'])[0] == 1
    assert invoke(["ord", "--input", '{"ground": [1],\n "members": [[1]}'])[0] == 1
    assert "line 2 column" in capsys.readouterr().err
    assert invoke(["ord", "--input", str(DATA / "missing.json")])[0] == 1
    assert invoke(["components", "--input", '{"kind": "torus"}', "--scale", "2"])[0] == 1
    assert invoke(["trasdim", "--input", '{"kind": "path", "size": 3}', "--bound", "1"])[0] == 1
    assert invoke(["trasdim", "--input", '{"op": "family", "space": {"kind": "path", "size": 3}}',
                   "--scales", "1", "--bound", "1"])[0] == 1


def test_table_format():
    code, text = invoke(in_data(CASES["trasdim_path60"]) + ["--format", "table"])
    assert code == 0
    assert "result.ord: 1" in text.splitlines()


def test_seed_replaces_generated_space_seed():
    base = ["decompose", "--input", '{"kind": "random", "n": 8, "seed": 1}', "--slots", "2", "--bound", "2"]
    a = json.loads(invoke(base + ["--seed", "5"])[1])
    assert a["input"]["doc"]["seed"] == 5


def test_help_lists_formats(capsys):
    with pytest.raises(SystemExit):
        run(["--help"])
    out = capsys.readouterr().out
    for word in ("family", "space", "request", "profile", "strategy", "2..6"):
        assert word in out


def test_parsers():
    assert parse_scales("2..5") == [2, 3, 4, 5]
    assert parse_scales("4,2") == [4, 2]
    assert parse_tuples("2,3;3,4") == [(2, 3), (3, 4)]
