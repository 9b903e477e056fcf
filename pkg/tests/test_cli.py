import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from taflab import schemas
from taflab.cli import INVALID, OK, UNDECIDED, build_parser, main, run
from oracles import brute_ideals

REF = '{"builder": {"kind": "refinement", "base": 1, "factor": 2}, "depth": 5}'
REF3 = '{"builder": {"kind": "refinement", "base": 1, "factor": 3}, "depth": 3}'
STD = '{"builder": {"kind": "standard", "base": 1, "factor": 2}, "depth": 5}'
EX13 = '{"builder": {"kind": "example_1_3"}, "depth": 6}'
E_CHAIN = json.dumps({"units": [f"1:1:{2 ** n}" for n in range(1, 7)]})
SQRT2 = json.dumps({"T": [[[1, 0], [1, 0]], [[1, 0], [1, 0]]], "sigma": [[2, 3]]})
DIAG = json.dumps({"interval": {"units": ["1:1:1"] * 5}})


def report_ok(verb, report):
    jsonschema.validate(report, schemas.REPORTS["error" if "error" in report else verb])


def tiny_custom(images):
    return json.dumps({"levels": [[2], [4]], "images": {"1": images}})


GOOD_IMAGES = {"1:1:1": ["1:1:1", "1:2:2"], "1:2:2": ["1:3:3", "1:4:4"], "1:1:2": ["1:1:3", "1:2:4"]}


class TestGolden:
    def test_ideal_counts(self):
        for pres, level, n in ((REF, 3, 4), (REF3, 2, 3), (REF, 2, 2)):
            report, code = run(["ideals", "--pres", pres, "--level", str(level), "--count"])
            assert code == OK and report["count"] == len(brute_ideals((n,)))
        assert run(["ideals", "--pres", REF, "--level", "3", "--count"])[0]["count"] == 42
        assert run(["ideals", "--pres", REF3, "--level", "2", "--count"])[0]["count"] == 14

    def test_ideal_listing(self):
        report, code = run(["ideals", "--pres", REF, "--level", "2"])
        assert code == OK and report["count"] == 5
        assert len({json.dumps(i) for i in report["ideals"]}) == 5

    def test_chain_check(self):
        report, code = run(["chain", "check", "--pres", EX13, "--file", E_CHAIN, "--depth", "5"])
        assert code == OK
        assert report["mi_chain"] is True and report["condition_c"] == "in_up_to:5"
        assert report["condition_c_detail"]["status"] == "in_up_to"

    def test_distance(self):
        report, code = run(["distance", "--file", SQRT2])
        assert code == OK
        assert report["distance"] == pytest.approx(1.41421356, abs=1e-8)
        assert report["nearest"]["achieved"] == pytest.approx(np.sqrt(2), abs=1e-6)

    def test_validate_builders(self):
        report, code = run(["validate", "--pres", '{"builder": {"kind": "example_1_3"}, "depth": 4}'])
        assert code == OK and report["levels"] == [[2, 2], [4, 4], [8, 8], [16, 16]]
        report, code = run(["validate", "--pres", REF])
        assert code == OK and report["levels"] == [[1], [2], [4], [8], [16]]

    def test_validate_custom(self):
        report, code = run(["validate", "--pres", tiny_custom(GOOD_IMAGES)])
        assert code == OK and report["ok"]

    def test_malformed_key_names_pointer(self):
        bad = dict(GOOD_IMAGES)
        bad["1-1-2"] = bad.pop("1:1:2")
        report, code = run(["validate", "--pres", tiny_custom(bad)])
        assert code == INVALID and report["pointer"] == "/images/1"
        assert "1-1-2" in report["message"]

    def test_bad_images_fail_validation(self):
        bad = dict(GOOD_IMAGES, **{"1:1:2": ["1:1:4"]})
        report, code = run(["validate", "--pres", tiny_custom(bad)])
        assert code == INVALID and not report["ok"] and report["failures"]

    def test_mic_dot_edges(self):
        dot, code = run(["mic", "--pres", REF, "--level", "2", "--dot"])
        assert code == OK and dot.startswith("digraph")
        assert sum("->" in line for line in dot.splitlines()) == 5

    def test_mic_counts(self):
        report, code = run(["mic", "--pres", REF, "--level", "2"])
        assert code == OK and report["pairs"] == 5 and report["classes"] == 3

    def test_cocycle_certified_only_when_assumed(self):
        report, code = run(["cocycle", "--pres", STD, "--file", DIAG, "--assume-stationary"])
        assert code == OK and report["finiteness"]["verdict"] == "finite"
        report, code = run(["cocycle", "--pres", STD, "--file", DIAG])
        assert code == UNDECIDED and report["finiteness"]["verdict"] == "unknown"

    def test_presentation_key_in_file(self):
        data = json.loads(E_CHAIN)
        data["presentation"] = json.loads(EX13)
        report, code = run(["chain", "check", "--file", json.dumps(data), "--depth", "5"])
        assert code == OK and report["condition_c"] == "in_up_to:5"

    def test_file_paths(self, tmp_path):
        pres, chain = tmp_path / "pres.json", tmp_path / "chain.json"
        pres.write_text(EX13)
        chain.write_text(E_CHAIN)
        report, code = run(["chain", "check", "--pres", str(pres), "--file", str(chain), "--depth", "5"])
        assert code == OK and report["mi_chain"]


ND = json.dumps({"a": {"first": 1, "prefix": [0], "cycle": [1]},
                 "b": {"first": 1, "prefix": [1, 1], "cycle": [0]}})
FINITE_PAIR = json.dumps({"a": {"units": ["1:1:1", "1:1:1"]}, "b": {"units": ["1:1:1", "1:2:2"]}})
CHAIN2 = json.dumps({"start_level": 2, "units": ["1:1:2", "1:1:3", "1:1:5", "1:1:9"]})

# every exit code, including the argparse usage error
CASES = [
    ("validate", ["validate", "--pres", REF], OK),
    ("validate", ["validate", "--pres", '{"builder": {"kind": "bogus"}}'], INVALID),
    ("ideals", ["ideals", "--pres", REF, "--level", "2"], OK),
    ("ideals", ["ideals", "--pres", REF, "--level", "9"], INVALID),
    ("ideals", ["ideals", "--pres", REF], INVALID),
    ("ideals", ["ideals", "--level", "2"], INVALID),
    ("mi", ["mi", "--pres", REF, "--level", "2", "--file", '{"generators": ["1:1:2"]}'], OK),
    ("mi", ["mi", "--pres", REF, "--level", "2", "--file", '{"generators": ["1:2:1"]}'], INVALID),
    ("mi", ["mi", "--pres", REF, "--level", "2", "--file", '{"nothing": 1}'], INVALID),
    ("chain", ["chain", "check", "--pres", EX13, "--file", E_CHAIN, "--depth", "5", "--level", "2"], OK),
    ("chain", ["chain", "--pres", EX13, "--file", '{"units": ["1:2:1"]}'], INVALID),
    ("cmi", ["cmi", "--pres", REF, "--file", CHAIN2, "--depth", "5"], OK),
    ("interval", ["interval", "--pres", REF, "--file", CHAIN2, "--depth", "5"], OK),
    ("interval", ["interval", "--pres", REF, "--file", '{"units": ["1:1:1", "1:1:2"]}'], INVALID),
    ("classify", ["classify", "--pres", REF, "--file", ND, "--depth", "5"], OK),
    ("classify", ["classify", "--pres", REF, "--file", FINITE_PAIR, "--depth", "2"], UNDECIDED),
    ("classify", ["classify", "--pres", EX13, "--file", ND], INVALID),
    ("nestrep", ["nestrep", "--pres", REF, "--file", CHAIN2, "--level", "3", "--depth", "4"], OK),
    ("distance", ["distance", "--file", SQRT2], OK),
    ("distance", ["distance", "--file", json.dumps({"T": [[[1, 0]]], "J": {"thresholds": [[2]]}})], OK),
    ("distance", ["distance", "--file", json.dumps({"T": [[[1, 0]]]})], INVALID),
    ("distance", ["distance", "--file", json.dumps({"T": [[[1, 0], [1, 0]]], "sigma": [[1]]})], INVALID),
    ("distance", ["distance", "--trials", "5", "--size", "4", "--seed", "1"], OK),
    ("mic", ["mic", "--pres", REF, "--level", "2"], OK),
    ("cocycle", ["cocycle", "--pres", STD, "--file", DIAG, "--assume-stationary"], OK),
    ("cocycle", ["cocycle", "--pres", STD, "--file", DIAG], UNDECIDED),
    ("cocycle", ["cocycle", "--pres", STD, "--file", '{"cocycle": {"labels": {"1": {"1:1:1": 1}}}}'], INVALID),
    ("cocycle", ["cocycle", "--pres", REF, "--file", "/nonexistent/input.json"], INVALID),
    ("validate", ["validate", "--pres", "{not json"], INVALID),
]


@pytest.mark.parametrize("verb,argv,code", CASES, ids=[f"{c[0]}-{i}" for i, c in enumerate(CASES)])
def test_exit_codes_and_schemas(verb, argv, code):
    report, got = run(argv)
    assert got == code, report
    assert isinstance(report, dict)
    report_ok(verb, report)
    json.dumps(report)


def test_every_verb_covered():
    verbs = set(build_parser()._subparsers._group_actions[0].choices)
    assert verbs == {c[0] for c in CASES}
    for code in (OK, INVALID, UNDECIDED):
        assert any(c[2] == code for c in CASES)


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as err:
        run(["ideals", "--level", "two"])
    assert err.value.code == INVALID


def test_seed_reproducible():
    argv = ["distance", "--trials", "10", "--size", "5"]
    a = run(argv + ["--seed", "7"])[0]
    b = run(argv + ["--seed", "7"])[0]
    assert a == b and a["trials"]["seed"] == 7
    assert a["trials"]["worst_gap"] <= 1e-6


def test_ideal_cap(monkeypatch):
    monkeypatch.setenv("TAFLAB_MAX_IDEALS", "10")
    report, code = run(["ideals", "--pres", REF, "--level", "3"])
    assert code == INVALID and report["error"] == "CapacityError"


def test_main_prints_json(capsys):
    assert main(["ideals", "--pres", REF, "--level", "2", "--count"]) == OK
    assert json.loads(capsys.readouterr().out)["count"] == 5


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "taflab.cli", "ideals", "--pres", REF, "--level", "3", "--count"],
                          capture_output=True, text=True)
    assert proc.returncode == OK and json.loads(proc.stdout)["count"] == 42
