from __future__ import annotations

import json
import math
from dataclasses import replace

import numpy as np
import pytest

from ringcavity.dynamics import PropagatorSettings, evolve
from ringcavity.errors import BasisTooSmallError, ConfigError, ProtocolNotApplicableError
from ringcavity.protocols import (
    SCENARIOS,
    Threshold,
    build_scenario,
    compute_metric,
    is_odd_quarter_wave,
    run_detuning_gate_sweep,
    run_scenario,
    stirap_detuning_scan,
    sweep,
)

HALF_PI = math.pi / 2
FAST = PropagatorSettings(dt=1e-2, stride=10)


def _period(times, signal):
    x = signal - signal.mean()
    k = np.flatnonzero((x[:-1] < 0) & (x[1:] >= 0))
    crossings = times[k] - x[k] * (times[k + 1] - times[k]) / (x[k + 1] - x[k])
    return float(np.diff(crossings).mean())


def test_registry_ids():
    assert set(SCENARIOS) == {"transport", "transfer", "gate-sweep", "remote6", "stirap", "stirap-scan", "multi-exc"}


def test_unknown_scenario_and_parameter():
    with pytest.raises(ConfigError):
        build_scenario("teleport")
    with pytest.raises(ConfigError):
        build_scenario("transport", {"theta": 1.0})


@pytest.mark.parametrize("dphi, expected", [(HALF_PI, True), (-HALF_PI, True), (3 * HALF_PI, True), (math.pi, False), (0.3, False)])
def test_odd_quarter_wave(dphi, expected):
    assert is_odd_quarter_wave(dphi) is expected


def test_threshold_ops():
    assert Threshold("a", "F_max:x", ">=", 0.5).holds(0.5)
    assert not Threshold("a", "F_max:x", "<", 0.5).holds(0.5)
    with pytest.raises(ValueError):
        Threshold("a", "F_max:x", "~", 0.5)


def test_transport_groups_spins():
    report = run_scenario(build_scenario("transport"))
    assert report.passed
    assert report.outcome("odd_spins_isolated")["value"] < 1e-8


def test_transport_off_quarter_wave_spreads():
    report = run_scenario(build_scenario("transport", {"dphi": 0.3}))
    assert report.passed
    assert report.outcome("all_spins_participate")["value"] > 0.01


def test_entangled_transfer_fidelity():
    report = run_scenario(build_scenario("transfer"))
    assert report.passed
    f, t = report.peaks["psi1"]
    assert f >= 0.999
    assert report.to_dict()["outcomes"]["timing_resolution"] == pytest.approx(0.1)


def test_group_oscillations_synchronous():
    cfg = build_scenario("transfer", {"t_final": 40.0}, PropagatorSettings(dt=1e-3, stride=10))
    traj = evolve(cfg.initial(), cfg.spec, cfg.t_final, cfg.settings)
    p = traj.spin_populations
    even = _period(traj.times, p[:, 0] + p[:, 2])
    odd = _period(traj.times, p[:, 1] + p[:, 3])
    assert abs(even - odd) / even < 1e-3


@pytest.mark.parametrize("theta, quiet", [(HALF_PI, "max_n_ccw"), (-HALF_PI, "max_n_cw")])
def test_directional_transfer(theta, quiet):
    report = run_scenario(build_scenario("transfer", {"theta": theta}))
    assert report.peaks["psi1"][0] >= 0.999
    assert compute_metric(report.trajectory, quiet) < 1e-8


@pytest.mark.parametrize("n", [3, 5])
def test_odd_chains_refused(n):
    with pytest.raises(ProtocolNotApplicableError):
        build_scenario("transfer", {"n_spins": n})


def test_multi_excitation_cutoff_guard():
    with pytest.raises(BasisTooSmallError):
        build_scenario("multi-exc", {"cutoff": 1})
    with pytest.raises(ConfigError):
        build_scenario("multi-exc", {"variant": "C"})


@pytest.mark.parametrize("variant", ["A", "B"])
def test_multi_excitation(variant):
    report = run_scenario(build_scenario("multi-exc", {"variant": variant}))
    assert report.passed, report.outcomes


def test_gate_blocks_transfer():
    report = run_scenario(build_scenario("gate-sweep", {"delta_a": 10.0}))
    assert report.passed
    assert report.peaks["psi1"][0] < 0.01


def test_gate_open_at_zero_detuning():
    report = run_scenario(build_scenario("gate-sweep", {"delta_a": 0.0}))
    assert report.outcome("open_gate")["passed"]


@pytest.mark.parametrize("scenario, spins", [("gate-sweep", "2,3"), ("remote6", "3,4")])
def test_detuned_pair_freeze_out(scenario, spins):
    report = run_scenario(build_scenario(scenario, {"delta_a": 10.0}))
    assert compute_metric(report.trajectory, f"max_pop:{spins}") < 1e-3


def test_remote_transfer():
    report = run_scenario(build_scenario("remote6"))
    assert report.outcome("minus_sign_target")["passed"]
    assert report.peaks["psi05"][0] > 0.999
    assert report.outcome("detuned_pair_leakage")["value"] < 1e-3


def test_stirap_final_fidelity():
    report = run_scenario(build_scenario("stirap"))
    assert report.final["psi1"] > 0.999


@pytest.mark.parametrize("ratio", [0.5, 0.7, 1.0, 1.2, 1.4])
def test_stirap_robustness(ratio):
    report = run_scenario(build_scenario("stirap", {"delta0": 10.0, "delta1": 10.0 * ratio}))
    assert report.final["psi1"] > 0.995


def test_stirap_without_detuning_matches_free_transfer():
    s = PropagatorSettings(dt=1e-3, stride=100)
    a = run_scenario(build_scenario("stirap", {"delta0": 0.0, "delta1": 0.0}, s))
    b = run_scenario(build_scenario("transfer", {}, s))
    assert a.final["psi1"] == pytest.approx(float(b.trajectory.fidelity("psi1")[-1]), abs=1e-12)


def test_metric_errors():
    cfg = replace(build_scenario("transport", {}, FAST), convergence_check=False)
    traj = run_scenario(cfg).trajectory
    with pytest.raises(ConfigError):
        compute_metric(traj, "entropy")
    with pytest.raises(ConfigError):
        compute_metric(traj, "group_drift:0,2")


def test_report_json_round_trip():
    report = run_scenario(build_scenario("transfer"))
    text = report.to_json()
    back = json.loads(text)
    assert back == json.loads(json.dumps(report.to_dict()))
    assert json.dumps(back, sort_keys=True, indent=2) + "\n" == text
    assert {"scenario", "config", "thresholds", "outcomes", "pass"} <= set(back)
    assert back["config"]["simulation"]["dt"] == 1e-3


def test_sweep_independent_of_workers():
    grid = np.linspace(0, 15, 7)
    one = sweep("gate-sweep", "delta_a", grid, settings=FAST, workers=1)
    many = sweep("gate-sweep", "delta_a", grid, settings=FAST, workers=3)
    assert one.to_csv() == many.to_csv()
    assert len(one.to_csv().splitlines()) == 8


def test_sweep_rejects_unknown_parameter():
    with pytest.raises(ConfigError):
        sweep("gate-sweep", "theta", [0.0])
    with pytest.raises(ConfigError):
        sweep("gate-sweep", "delta_a", [])


def test_detuning_gate_sweep():
    res = run_detuning_gate_sweep()
    assert len(res.values) == 31
    assert res.all_passed
    high = res.metric_values[res.values > 7.5]
    assert high.max() < 0.01


def test_stirap_scan_reports_curve():
    res = stirap_detuning_scan(np.array([5.0, 10.0, 15.0]))
    assert len(res.metric_values) == 3
    assert {c["name"] for c in res.checks} == {"optimum_delta", "delta_10_fidelity"}
