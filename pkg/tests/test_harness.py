import csv
import json
import math

import numpy as np
import pytest

from bwk.core import save_instance
from bwk.harness.cli import main
from bwk.harness.config import ExperimentConfig, load_config, resolve_instances, save_config
from bwk.harness.plots import line_chart
from bwk.harness.runner import RUN_COLUMNS, SUMMARY_COLUMNS, fmt, run_experiment, write_csv
from bwk.harness.stats import azuma_halfwidth, chernoff_halfwidth, mean_std_stderr
from bwk.harness.suites import CRITERIA, SUITES, Check, verify
from bwk.instances import construct_log_family


def read_rows(path):
    with open(path, newline="") as f:
        return [r for r in csv.reader(line for line in f if not line.startswith("#"))]


# statistics

def test_azuma_examples():
    assert azuma_halfwidth(1e4, 1, 0.01) == pytest.approx(303.5, abs=0.05)
    assert azuma_halfwidth(1e4, 1, 1.0) == 0.0
    assert azuma_halfwidth(1e4, 2, 0.01) == pytest.approx(2 * azuma_halfwidth(1e4, 1, 0.01))
    with pytest.raises(ValueError):
        azuma_halfwidth(10, 1, 0.0)


def test_chernoff_examples():
    assert chernoff_halfwidth(100, 1, math.exp(-1)) == pytest.approx(30.0)
    assert chernoff_halfwidth(0, 1, 0.1) == 0.0
    assert chernoff_halfwidth(400, 1, 0.1) == pytest.approx(2 * chernoff_halfwidth(100, 1, 0.1))


def test_mean_std_stderr_order_invariant():
    vals = np.random.default_rng(0).random(101)
    a, b = mean_std_stderr(vals), mean_std_stderr(vals[::-1])
    assert a == b
    m, s, se = mean_std_stderr([1.0, 3.0])
    assert (m, s, se) == (2.0, pytest.approx(math.sqrt(2)), pytest.approx(1.0))


# config

def _cfg(tmp_path, **kw):
    base = dict(name="t", instance={"family": "log", "T": 64, "B": 16}, replicates=3, out_dir=str(tmp_path))
    base.update(kw)
    return ExperimentConfig(**base)


def test_config_roundtrip_and_validation(tmp_path):
    cfg = _cfg(tmp_path, params={"kappa": 3.0})
    save_config(cfg, tmp_path / "c.json")
    back = load_config(tmp_path / "c.json")
    assert back.to_dict() == cfg.to_dict()
    for bad in (dict(algorithm="x"), dict(replicates=0), dict(params={"delta": 1.5}), dict(instance={})):
        with pytest.raises(ValueError):
            _cfg(tmp_path, **bad)
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"name": "a", "instance": {"file": "x"}, "bogus": 1})


def test_resolve_instance_forms(tmp_path):
    fam, members = resolve_instances(_cfg(tmp_path, instance={"family": "log", "T": 64, "B": 16, "members": [2, 4]}))
    assert fam.kind == "log" and [i for i, _ in members] == [1, 3]
    save_instance(construct_log_family(64, 16)[0], tmp_path / "one.json")
    cfg = ExperimentConfig.from_dict({"name": "f", "instance": {"file": "one.json"}}, base_dir=str(tmp_path))
    fam, members = resolve_instances(cfg)
    assert fam is None and len(members) == 1
    _, members = resolve_instances(_cfg(tmp_path, instance={"stochastic": {"arms": [[0.5, 0.5]], "T": 10, "B": 5},
                                                            "dummy": True, "null": True}))
    inst = members[0][1]
    assert inst.K == 2 and inst.d == 2 and inst.dummy_resource == 1 and inst.null_arm == 1


# runner

def test_fmt_and_csv(tmp_path):
    assert fmt(None) == "" and fmt(True) == "1" and fmt(0.1 + 0.2) == "0.3"
    write_csv(tmp_path / "x.csv", ["a", "b"], [[1, 2.5]], timestamp=False)
    assert (tmp_path / "x.csv").read_bytes() == b"a,b\n1,2.5\n"


def test_replicates_one_gives_one_row(tmp_path):
    cfg = _cfg(tmp_path, instance={"family": "log", "T": 64, "B": 16, "members": [1]}, replicates=1)
    out = run_experiment(cfg, timestamp=False)
    rows = read_rows(out["runs"])
    assert rows[0] == RUN_COLUMNS + ["consumption_1"] and len(rows) == 2


def test_rerun_byte_identical(tmp_path):
    cfg = _cfg(tmp_path)
    a = run_experiment(cfg, timestamp=False, out_dir=str(tmp_path / "a"))
    b = run_experiment(cfg, timestamp=False, out_dir=str(tmp_path / "b"))
    for key in ("runs", "summary"):
        assert open(a[key], "rb").read() == open(b[key], "rb").read()
    c = run_experiment(cfg, timestamp=True, out_dir=str(tmp_path / "c"))
    lines = open(c["summary"]).read().splitlines()
    assert lines[0].startswith("# generated") and lines[1:] == open(a["summary"]).read().splitlines()


def test_log_family_one_summary_row_per_member(tmp_path):
    out = run_experiment(_cfg(tmp_path, replicates=2), timestamp=False, plots=True)
    rows = read_rows(out["summary"])
    assert rows[0] == SUMMARY_COLUMNS and len(rows) == 1 + 4
    assert len(read_rows(out["runs"])) == 1 + 4 * 2
    assert open(out["plot"]).read().startswith("<svg")


def test_highprob_writes_phases(tmp_path):
    cfg = _cfg(tmp_path, algorithm="highprob", replicates=2,
               instance={"pricing": {"prices": [0.3, 0.6], "valuation": {"dist": "uniform", "low": 0, "high": 1},
                                     "T": 256, "B": 100}})
    with pytest.warns(RuntimeWarning):
        out = run_experiment(cfg, timestamp=False)
    assert len(read_rows(out["phases"])) >= 3


def test_line_chart(tmp_path):
    line_chart(tmp_path / "p.svg", {"a": ([1, 2, 3], [1, 4, 9])}, title="t", xlabel="x", ylabel="y")
    svg = (tmp_path / "p.svg").read_text()
    assert "<polyline" in svg and "</svg>" in svg


# suites and CLI

def test_suite_registry():
    assert set(CRITERIA) == set(range(1, 15))
    assert set(SUITES["all"]) == set(range(1, 15))
    with pytest.raises(KeyError):
        verify("nope")


def test_check_line_format():
    c = Check(3, "x", "m", "t", True, 0.5, {})
    assert c.line().startswith("[PASS] criterion  3 x:")


def test_cli_verify_small_suite(tmp_path, capsys):
    assert main(["verify", "simple-lb", "--out", str(tmp_path / "r.json")]) == 0
    assert "[PASS] criterion  3 " in capsys.readouterr().out
    assert json.loads((tmp_path / "r.json").read_text())[0]["passed"] is True
    assert main(["verify", "nope"]) == 2


def test_cli_bench(capsys):
    assert main(["bench", "log", "--T", "64", "--B", "16", "--no-timestamp"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("family,member") and len(lines) == 5
    assert lines[1].split(",")[5] == fmt(16 / 64 * 16 * 2 / 2)


def test_cli_run_and_validate(tmp_path, capsys):
    cfg = _cfg(tmp_path, replicates=1)
    save_config(cfg, tmp_path / "c.json")
    assert main(["run", str(tmp_path / "c.json"), "--no-timestamp", "--seed", "2"]) == 0
    assert "wrote" in capsys.readouterr().out
    save_instance(construct_log_family(64, 16)[0], tmp_path / "i.json")
    assert main(["instance", "validate", str(tmp_path / "i.json")]) == 0
    with pytest.raises(SystemExit):
        main(["run", str(tmp_path / "c.json"), "--replicates", "0"])
