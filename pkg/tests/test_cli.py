import json
import math
import os
import subprocess
import sys
from pathlib import Path

import pytest

from cohenlab.cli import main

GOLDEN = Path(__file__).parent / "golden"
REGEN = os.environ.get("COHENLAB_REGEN_GOLDEN") == "1"
VOLATILE = {"timestamp", "wallTime"}

ONES = "[[1,1],[1,1]]"
J = "[[0,1],[0,0]]"

CASES = {
    "compute_norm_ones": (["compute", "--functional", "norm", "--p", "2", "--matrix", ONES], 0),
    "compute_norm1_weighted": (["compute", "--functional", "norm", "--p", "1", "--matrix", J,
                                "--weights", "[2,1]"], 0),
    "compute_specrad_identity": (["compute", "--functional", "specrad", "--matrix", "[[1,0],[0,1]]"], 0),
    "compute_numrad_jordan": (["compute", "--functional", "numrad", "--matrix", J], 0),
    "check_mixed_example2": (["check", "mixed", "--matrix", J, "--symbol", "[0.5,1]"], 1),
    "check_numrad_corollary_example1": (["check", "numrad-corollary", "--unchecked", "--matrix", ONES,
                                         "--symbol", "[1,-1]"], 1),
    "check_cohen_example1": (["check", "cohen", "--unchecked", "--matrix", ONES, "--symbol", "[1,-1]"], 1),
    "check_norm_corollary_identity": (["check", "norm-corollary", "--p", "2", "--matrix", ONES,
                                       "--symbol", "[1,1]"], 0),
    "check_norm_example1": (["check", "norm", "--matrix", ONES, "--symbols", "[[1,-1],[1,-1]]"], 0),
    "check_numrad_right": (["check", "numrad", "--side", "right", "--matrix", ONES,
                            "--symbols", "[[2,2],[1,1]]"], 0),
    "check_cohen_multi": (["check", "cohen-multi", "--matrix", ONES,
                           "--symbols", "[[2,0.5],[0.5,2],[1,1]]"], 0),
    "check_rank_one": (["check", "rank-one", "--u", "[1,1]", "--v", "[1,1]", "--phi", "[2,0.5]"], 0),
    "replicate_example1": (["replicate", "example1"], 0),
    "replicate_example2": (["replicate", "example2", "--d", "0.5"], 0),
    "replicate_rank_one_const": (["replicate", "rank-one", "--phi-const", "1"], 0),
    "fuzz_mixed_region": (["fuzz", "mixed-region", "--seed", "7", "--trials", "30",
                           "--max-witnesses", "3"], 0),
    "fuzz_norm_left": (["fuzz", "norm-left", "--seed", "1", "--trials", "20", "--m", "3"], 0),
}


def run(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def strip(obj):
    if isinstance(obj, dict):
        return {k: strip(v) for k, v in obj.items() if k not in VOLATILE}
    if isinstance(obj, list):
        return [strip(v) for v in obj]
    return obj


def assert_close(actual, expected, path="$"):
    if isinstance(expected, dict):
        assert isinstance(actual, dict) and set(actual) == set(expected), path
        for k in expected:
            assert_close(actual[k], expected[k], f"{path}.{k}")
    elif isinstance(expected, list):
        assert isinstance(actual, list) and len(actual) == len(expected), path
        for i, (a, e) in enumerate(zip(actual, expected)):
            assert_close(a, e, f"{path}[{i}]")
    elif isinstance(expected, float) and not isinstance(expected, bool):
        assert isinstance(actual, (int, float)), path
        assert math.isclose(actual, expected, rel_tol=1e-9, abs_tol=1e-12), f"{path}: {actual} != {expected}"
    else:
        assert actual == expected, f"{path}: {actual!r} != {expected!r}"


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden(name, capsys):
    args, want = CASES[name]
    code, out, err = run(args, capsys)
    assert code == want, err
    data = strip(json.loads(out))
    path = GOLDEN / f"{name}.json"
    if REGEN:
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    assert_close(data, json.loads(path.read_text()))


@pytest.mark.parametrize("name", ["compute_numrad_jordan", "check_mixed_example2", "fuzz_mixed_region"])
def test_byte_identical_reruns(name, capsys):
    args, _ = CASES[name]
    outs = []
    for _ in range(2):
        _, out, _ = run(args, capsys)
        outs.append(json.dumps(strip(json.loads(out)), sort_keys=True))
    assert outs[0] == outs[1]


def test_manifest(capsys):
    _, out, _ = run(CASES["compute_norm_ones"][0], capsys)
    man = json.loads(out)["manifest"]
    assert man["command"] == "compute" and man["inputs"]["matrix"] == ONES
    assert man["config"]["functional"] == "norm" and man["version"] and man["timestamp"]


def test_values_from_spec_examples(capsys):
    assert json.loads(run(CASES["compute_norm_ones"][0], capsys)[1])["value"] == pytest.approx(2.0)
    assert json.loads(run(CASES["compute_specrad_identity"][0], capsys)[1])["value"] == pytest.approx(1.0)
    assert json.loads(run(CASES["compute_numrad_jordan"][0], capsys)[1])["value"] == pytest.approx(0.5)
    rep = json.loads(run(CASES["check_mixed_example2"][0], capsys)[1])["report"]
    assert rep["marginRatio"] == pytest.approx(0.5)
    rep = json.loads(run(CASES["check_norm_corollary_identity"][0], capsys)[1])["report"]
    assert rep["marginRatio"] == pytest.approx(1.0)


@pytest.mark.parametrize("args", [
    ["fuzz", "norm-left", "--trials", "0"],
    ["fuzz", "norm-left", "--dim-min", "5", "--dim-max", "2"],
    ["fuzz", "no-such-suite"],
    ["check", "no-such-inequality", "--matrix", ONES],
    ["check", "cohen", "--matrix", ONES, "--symbol", "[1,-1]"],
    ["check", "numrad", "--matrix", "[[1,-1],[1,1]]", "--symbols", "[[1,1]]"],
    ["check", "mixed", "--matrix", J],
    ["check", "rank-one", "--u", "[1,1]"],
    ["compute", "--functional", "norm", "--matrix", "[[1,2],[3]]"],
    ["compute", "--functional", "norm", "--matrix", "not json"],
    ["compute", "--functional", "norm", "--p", "0.5", "--matrix", ONES],
    ["compute", "--functional", "norm", "--matrix", ONES, "--weights", "[1,0]"],
    ["compute", "--functional", "numrad"],
    ["compute", "--functional", "bogus", "--matrix", ONES],
    ["replicate", "example2", "--d", "1.5"],
    [],
])
def test_exit_two(args, capsys):
    try:
        code = main(args)
    except SystemExit as exc:
        code = exc.code
    _, err = capsys.readouterr()
    assert code == 2 and err.strip()


def test_general_p_is_labelled_lower_bound(capsys):
    code, out, _ = run(["compute", "--functional", "norm", "--p", "4", "--matrix", ONES], capsys)
    data = json.loads(out)
    assert code == 0 and data["convergence"]["lowerBound"] is True
    assert data["value"] == pytest.approx(2.0, abs=1e-9)


def test_csv(capsys):
    code, out, _ = run(CASES["check_mixed_example2"][0] + ["--format", "csv"], capsys)
    lines = out.strip().splitlines()
    assert code == 1 and lines[0] == "name,lhs,rhsProduct,marginRatio,satisfied"
    assert lines[1].startswith("mixed,") and lines[1].endswith(",False")


def test_fuzz_out_and_violations_file(tmp_path, capsys):
    out = tmp_path / "res.json"
    code, stdout, _ = run(["fuzz", "mixed-region", "--seed", "7", "--trials", "20", "--out", str(out)], capsys)
    assert code == 0 and stdout == ""
    data = json.loads(out.read_text())
    viol = json.loads((tmp_path / "res.json.violations.json").read_text())
    assert data["violationCount"] > 0 and viol == data["violations"]


def test_no_violations_file_when_clean(tmp_path, capsys):
    out = tmp_path / "res.json"
    code, _, _ = run(["fuzz", "norm-left", "--trials", "5", "--out", str(out)], capsys)
    assert code == 0 and out.exists() and not (tmp_path / "res.json.violations.json").exists()


def test_unexpected_outcome_exits_one(capsys):
    # tolerance 1 accepts every margin, so the expected mixed-region violations cannot appear
    code, out, _ = run(["fuzz", "mixed-region", "--trials", "10", "--tol", "1"], capsys)
    data = json.loads(out)
    assert code == 1 and data["violationCount"] == 0 and not data["outcomeMatchesExpectation"]


def test_matrix_from_file_and_stdin(tmp_path):
    path = tmp_path / "a.json"
    path.write_text(json.dumps({"n": 2, "entries": [[[0, 0], [1, 0]], [[0, 0], [0, 0]]]}))
    env = {**os.environ, "COHENLAB_THREADS": "1"}
    for src, stdin in ((str(path), None), ("-", J)):
        proc = subprocess.run([sys.executable, "-m", "cohenlab", "compute", "--functional", "numrad",
                               "--matrix", src], input=stdin, capture_output=True, text=True, env=env)
        assert proc.returncode == 0, proc.stderr
        assert json.loads(proc.stdout)["value"] == pytest.approx(0.5)
