import csv
import io
import json

import numpy as np
import pytest

from dihedral_bridge.errors import ParameterError
from dihedral_bridge.harness import DEFAULT_THRESHOLDS, EXPERIMENTS, RunConfig, run
from dihedral_bridge.harness.cli import main
from dihedral_bridge.report import ExperimentReport, emit_report, splitmix64, trial_seed

# cheap settings per experiment for plumbing tests
SMALL = {
    "roundtrip-cube": ({}, 20),
    "roundtrip-ball": ({}, 2),
    "edcp2lwe-stats": ({}, 30),
    "decisional-e2l": ({"batch": 10, "planted_batches": 2}, 30),
    "decisional-l2e": ({}, 10),
    "grid-claims": ({"claim2_matrices": 2}, 50),
    "ball-claims": ({}, 6),
    "variant-conversions": ({}, 20),
    "dcp-chain": ({}, 20),
    "math-checks": ({"sampler_draws": 1000, "minima_trials": 5, "shots_per_trial": 2}, 20),
}


def test_every_experiment_has_small_settings():
    assert set(SMALL) == set(EXPERIMENTS)


def test_splitmix_known_values():
    # reference outputs of the splitmix64 generator seeded with 0
    assert splitmix64(0) == 0xE220A8397B1DCDAF
    assert splitmix64(0x9E3779B97F4A7C15) == 0x6E789E6AA1B965F4
    assert trial_seed(1, 0) != trial_seed(1, 1)


def test_trials_must_be_positive():
    with pytest.raises(ParameterError):
        run(RunConfig("grid-claims", trials=0))
    assert main(["grid-claims", "--trials", "0"]) == 2


def test_unknown_keys_rejected():
    with pytest.raises(ParameterError):
        run(RunConfig("ball-claims", params={"radius": 3}))
    with pytest.raises(ParameterError):
        run(RunConfig("ball-claims", thresholds={"nope": 1}))
    with pytest.raises(ParameterError):
        run(RunConfig("no-such-experiment"))
    assert main(["ball-claims", "--param", "radius=3"]) == 2
    assert main(["ball-claims", "--param", "R"]) == 2
    assert main(["not-an-experiment"]) == 2


def test_param_coercion():
    with pytest.raises(ParameterError):
        run(RunConfig("ball-claims", params={"L": "four"}, trials=3))
    rep = run(RunConfig("ball-claims", params={"L": "2", "m_values": "1,2"}, trials=4))
    assert rep.config["params"]["L"] == 2 and rep.config["params"]["m_values"] == (1, 2)


def test_thread_env_validated(monkeypatch):
    monkeypatch.setenv("DIHEDRAL_BRIDGE_THREADS", "0")
    with pytest.raises(ParameterError):
        run(RunConfig("ball-claims", trials=3))


@pytest.mark.parametrize("name", sorted(SMALL))
def test_small_runs_are_deterministic(name):
    params, trials = SMALL[name]
    a = run(RunConfig(name, params=dict(params), seed=5, trials=trials))
    b = run(RunConfig(name, params=dict(params), seed=5, trials=trials))
    assert len(a.trials) == trials
    assert json.dumps(a.to_dict()["aggregates"]) == json.dumps(b.to_dict()["aggregates"])
    assert a.to_dict()["trials"] == b.to_dict()["trials"]


def test_pool_matches_serial(monkeypatch):
    params, trials = SMALL["variant-conversions"]
    serial = run(RunConfig("variant-conversions", params=dict(params), seed=3, trials=trials))
    monkeypatch.setenv("DIHEDRAL_BRIDGE_THREADS", "4")
    pooled = run(RunConfig("variant-conversions", params=dict(params), seed=3, trials=trials))
    assert serial.to_dict()["aggregates"] == pooled.to_dict()["aggregates"]
    assert serial.to_dict()["trials"] == pooled.to_dict()["trials"]


def test_seed_changes_trials():
    a = run(RunConfig("dcp-chain", seed=1, trials=10))
    b = run(RunConfig("dcp-chain", seed=2, trials=10))
    assert a.to_dict()["trials"] != b.to_dict()["trials"]


def test_report_serialization():
    rep = run(RunConfig("ball-claims", seed=1, trials=6))
    text = emit_report(rep, "json", None)
    assert text == emit_report(rep, "json", None)
    back = ExperimentReport.from_json(text)
    assert back.to_dict() == rep.to_dict()
    assert list(json.loads(text)) == ["config", "trials", "aggregates", "pass", "wall_time_ms"]
    rows = list(csv.reader(io.StringIO(emit_report(rep, "csv", None))))
    assert len(rows) - 1 == 6 + 1  # header, one row per trial, summary
    assert rows[-1][0] == "summary"
    with pytest.raises(ValueError):
        emit_report(rep, "xml", None)


def test_cli_writes_file_and_exit_codes(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["ball-claims", "--trials", "6", "--seed", "2", "--out-path", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["pass"] is True and len(data["trials"]) == 6
    # an unreachable floor turns the same run into a threshold failure
    code = main(["ball-claims", "--trials", "6", "--seed", "2", "--out-path", str(out),
                 "--threshold", "ball_ratio_floor=1.01"])
    assert code == 1
    assert json.loads(out.read_text())["pass"] is False
    assert main(["ball-claims", "--trials", "6", "--out", "csv"]) == 0
    assert capsys.readouterr().out.splitlines()[-1].startswith("summary")


def test_thresholds_overridable():
    rep = run(RunConfig("ball-claims", trials=6, thresholds={"ball_ratio_floor": 0.99}))
    assert rep.config["thresholds"]["ball_ratio_floor"] == 0.99
    assert set(rep.config["thresholds"]) == set(DEFAULT_THRESHOLDS)


def test_pass_is_function_of_aggregates():
    exp = EXPERIMENTS["grid-claims"]
    rep = run(RunConfig("grid-claims", params={"claim2_matrices": 2}, trials=40, seed=4))
    params = rep.config["params"]
    ctx = exp.setup(params, 4, 40)
    agg, ok = exp.summarize(ctx, rep.trials, rep.config["thresholds"])
    assert ok == rep.passed
    assert json.dumps(agg, default=str) == json.dumps(rep.aggregates, default=str)


def test_trial_records_use_own_generators():
    rep = run(RunConfig("edcp2lwe-stats", seed=9, trials=5))
    rep2 = run(RunConfig("edcp2lwe-stats", seed=9, trials=8))
    # the first five trials do not depend on how many follow
    assert rep.to_dict()["trials"] == rep2.to_dict()["trials"][:5]
    assert np.isfinite(rep.wall_time_ms)
