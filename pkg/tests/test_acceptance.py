"""Acceptance criteria 1-13, each at its stated tolerance and run through the public entry points."""
import json
import time

import numpy as np
import pytest

from dihedral_bridge.core_math import GaussianParam, poisson_check, tail_bound, tail_ratio
from dihedral_bridge.harness import RunConfig, run

SEED = 20261017
_REPORTS: dict[str, tuple[RunConfig, dict]] = {}


def run_logged(name: str, **kw):
    cfg = RunConfig(name, seed=SEED, **kw)
    rep = run(cfg)
    _REPORTS[name] = (cfg, rep.to_dict()["aggregates"])
    return rep


@pytest.fixture(scope="module")
def math_report():
    return run_logged("math-checks")


def test_criterion_01_poisson(record_criterion):
    t = time.perf_counter()
    worst = 0.0
    for r in (0.5, 1.0, 3.0):
        for u in (0.0, 0.25, 0.5):
            for scale in (1.0, 2.0):
                lhs, rhs = poisson_check(r, u, scale)
                worst = max(worst, abs(lhs - rhs) / abs(rhs))
    elapsed = time.perf_counter() - t
    ok = worst <= 1e-9 and elapsed < 1.0
    record_criterion(1, ok, f"max relative error {worst:.2e} (<= 1e-9), {elapsed:.3f} s")
    assert ok


def test_criterion_02_tail(record_criterion):
    t = time.perf_counter()
    worst = 0.0
    bad = []
    for r in (0.5, 1.0, 2.0, 4.0, 8.0):
        for kappa in (1, 4, 16, 64):
            ratio, bound = tail_ratio(GaussianParam(r, kappa)), tail_bound(r, kappa)
            worst = max(worst, ratio / bound)
            if not ratio < bound:
                bad.append((r, kappa))
    elapsed = time.perf_counter() - t
    ok = not bad and elapsed < 1.0
    record_criterion(2, ok, f"20 grid points, max ratio/bound {worst:.3g}, violations {bad}, {elapsed:.3f} s")
    assert ok


def test_criterion_03_simulator(math_report, record_criterion):
    a = math_report.aggregates
    thr = math_report.config["thresholds"]
    unitary = max(a["qft_norm_error"], a["qft_involution_error"], a["qft_matrix_error"])
    secs = math_report.wall_time_ms / 1000
    ok = (unitary <= thr["unitary_tol"] and a["born_chi2_p"] > 0.001 and a["born_shots"] >= 10**5
          and secs < 30)
    record_criterion(3, ok, f"unitarity/involution error {unitary:.1e}, Born chi2 p={a['born_chi2_p']:.3f} over "
                            f"{a['born_shots']} shots, suite {secs:.1f} s")
    assert ok


def test_criterion_04_rejection(math_report, record_criterion):
    rej = math_report.aggregates["rejection"]
    trials = math_report.config["trials"]
    secs = math_report.wall_time_ms / 1000
    ok = len(rej) == 5 and all(v["ok"] for v in rej.values()) and trials >= 10**4 and secs < 30
    detail = ", ".join(f"{k} {v['rate']:.4f}/{v['expected']:.4f}" for k, v in rej.items())
    record_criterion(4, ok, f"{trials} trials, empirical/expected: {detail}")
    assert ok


def test_criterion_05_grid(record_criterion):
    rep = run_logged("grid-claims")
    a = rep.aggregates
    secs = rep.wall_time_ms / 1000
    ok = rep.passed and rep.config["trials"] >= 10**4 and secs < 120
    record_criterion(5, ok, f"claim 1 rate {a['claim1_rate']:.4f} >= {a['claim1_floor']:.4f}; claim 2 "
                            f"{a['claim2_violations']} violations over {a['claim2_pairs']} pairs "
                            f"({a['claim2_matrices']} matrices), {secs:.1f} s")
    assert ok


def test_criterion_06_ball(record_criterion):
    rep = run_logged("ball-claims")
    secs = rep.wall_time_ms / 1000
    ok = rep.passed and secs < 60 and all(f"m{m}" in rep.aggregates for m in (1, 2, 3))
    detail = ", ".join(f"m={k[1:]} min ratio {v['min_ratio_in_span']:.3f} monotone={v['monotone']}"
                       for k, v in rep.aggregates.items())
    record_criterion(6, ok, f"{detail}, {secs:.1f} s")
    assert ok


def test_criterion_07_edcp_to_lwe(record_criterion):
    rep = run_logged("edcp2lwe-stats")
    a = rep.aggregates
    secs = rep.wall_time_ms / 1000
    ok = rep.passed and rep.config["trials"] >= 10**4 and secs < 120
    record_criterion(7, ok, f"a' chi2 p={a['a_chi2_p']:.3f}, error TV {a['error_tv']:.4f} vs D(N/r), "
                            f"raw circuit TV {a['raw_error_tv']:.4f} vs D(N/(sqrt2 r)), {secs:.1f} s")
    assert ok


def test_criterion_08_decisional_e2l(record_criterion):
    rep = run_logged("decisional-e2l")
    a = rep.aggregates
    secs = rep.wall_time_ms / 1000
    ok = rep.passed and secs < 60
    record_criterion(8, ok, f"null chi2 p: a {a['a_chi2_p']:.3f}, b {a['b_chi2_p']:.3f}, joint "
                            f"{a['joint_chi2_p']:.3f}; planted advantage {a.get('advantage')}, {secs:.1f} s")
    assert ok


def test_criterion_09_cube(record_criterion):
    rep = run_logged("roundtrip-cube")
    a = rep.aggregates
    secs = rep.wall_time_ms / 1000
    ok = rep.passed and secs < 300
    record_criterion(9, ok, f"success {a['success_rate']:.4f} >= {a['rate_floor']:.4f}, "
                            f"{a['verified']}/{a['successes']} verified, {secs:.1f} s")
    assert ok


def test_criterion_10_round_trip(record_criterion):
    rep = run_logged("roundtrip-ball")
    a = rep.aggregates
    secs = rep.wall_time_ms / 1000
    ok = rep.passed and rep.config["trials"] == 100 and secs < 600
    record_criterion(10, ok, f"recovered s0 in {a['recovery_rate']:.2f} of 100 runs (needs >= 0.80); ball step "
                             f"{a['ball_success_rate']:.2f}, LWE noise width {a['lwe_noise_width']:.0f} "
                             f"mod {rep.config['params']['q']}, {secs:.1f} s")
    assert ok


def test_criterion_11_decisional_l2e(record_criterion):
    rep = run_logged("decisional-l2e")
    a = rep.aggregates
    secs = rep.wall_time_ms / 1000
    ok = rep.passed and secs < 120
    record_criterion(11, ok, f"support-1 rate {a['support_one_rate']:.4f}, j TV {a.get('j_tv', float('nan')):.4f}"
                             f" vs rho_r^2, {secs:.1f} s")
    assert ok


def test_criterion_12_variants(record_criterion):
    var = run_logged("variant-conversions")
    dcp = run_logged("dcp-chain")
    secs = (var.wall_time_ms + dcp.wall_time_ms) / 1000
    a, d = var.aggregates, dcp.aggregates
    ok = var.passed and dcp.passed and secs < 300
    record_criterion(12, ok, f"verified/accepted g2u {a['g2u']['verified']}/{a['g2u']['accepted']}, chain "
                             f"{a['chain']['verified']}/{a['chain']['accepted']}, self-reduce "
                             f"{a['self_g']['verified']}/{a['self_g']['accepted']} and "
                             f"{a['self_u']['verified']}/{a['self_u']['accepted']}; Pr[v=1] "
                             f"{d['narrow_v1_rate']:.4f} >= {d['narrow_floor']:.4f}; DCP "
                             f"{d['narrow']['verified']}+{d['wide']['verified']} verified, {secs:.1f} s")
    assert ok


def test_criterion_13_determinism(record_criterion):
    names = ["math-checks", "grid-claims", "ball-claims", "edcp2lwe-stats", "decisional-e2l", "roundtrip-cube",
             "roundtrip-ball", "decisional-l2e", "variant-conversions", "dcp-chain"]
    mismatched = []
    for name in names:
        if name not in _REPORTS:
            run_logged(name)
        cfg, first = _REPORTS[name]
        again = run(RunConfig(cfg.experiment, dict(cfg.params), cfg.seed, cfg.trials)).to_dict()["aggregates"]
        if json.dumps(first) != json.dumps(again):
            mismatched.append(name)
    ok = not mismatched
    record_criterion(13, ok, f"{len(names)} suites rerun with seed {SEED}; mismatched: {mismatched or 'none'}")
    assert ok
