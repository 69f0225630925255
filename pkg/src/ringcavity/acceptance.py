"""Built-in acceptance suite.

Each ``criterion_*`` function returns a :class:`CriterionResult` holding one
or more numbered checks.  :func:`run_all` runs the lot and prints one line per
criterion; it backs both ``ringcavity check`` and the test suite.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from typing import Callable, TextIO

import numpy as np

from .dynamics import evolve, one_shot
from .model import (
    BasisSpec,
    DetuningSchedule,
    QuantumState,
    SpinArray,
    SystemSpec,
    build_fock_hamiltonian,
    build_single_excitation_hamiltonian,
)
from .protocols import (
    build_scenario,
    run_detuning_gate_sweep,
    run_scenario,
    spins_term,
)
from .spectral import (
    chain_singular_values,
    decompose,
    effective_coupling,
    locate_degeneracies,
    platform_coupling,
)

SEED = 20240611


@dataclass
class Check:
    label: str
    passed: bool
    value: float
    requirement: str


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, label: str, passed: bool, value: float, requirement: str) -> None:
        self.checks.append(Check(label, bool(passed), float(value), requirement))

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        failed = [c for c in self.checks if not c.passed]
        shown = failed or self.checks
        detail = "; ".join(f"{c.label}={c.value:.6g} ({c.requirement})" for c in shown)
        return f"[{tag}] criterion {self.number:2d} {self.title}: {detail}"


def _scenario_check(res: CriterionResult, scenario_id: str, params: dict, prefix: str = "") -> None:
    report = run_scenario(build_scenario(scenario_id, params))
    for o in report.outcomes:
        if o["gating"]:
            res.add(prefix + o["name"], o["passed"], o["value"], f"{o['op']} {o['threshold']:g}")


# ---------------------------------------------------------------------------


def criterion_1() -> CriterionResult:
    res = CriterionResult(1, "polariton singular values")
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for n in range(2, 11):
        for dphi in rng.uniform(0.0, 2 * math.pi, 200):
            dec = decompose(SystemSpec.chain(n, float(dphi)))
            lp, lm = chain_singular_values(n, float(dphi))
            worst = max(worst, abs(dec.lambda_plus - lp), abs(dec.lambda_minus - lm))
    res.add("max |svd - formula|", worst < 1e-10, worst, "< 1e-10")
    return res


def criterion_2() -> CriterionResult:
    res = CriterionResult(2, "degeneracy count, N=4")
    template = SystemSpec.chain(4, 0.0)
    expected = np.array([1, 2, 3]) * math.pi / 4
    resolution = math.pi / 400
    worst_count_ok, worst_err = True, 0.0
    for delta_a in np.linspace(-5.0, 5.0, 11):
        found = locate_degeneracies(template, float(delta_a))
        if len(found) != 3:
            worst_count_ok = False
            continue
        worst_err = max(worst_err, float(np.max(np.abs(np.array(found) - expected))))
    res.add("three points for every delta_a", worst_count_ok, 3 if worst_count_ok else 0, "== 3")
    res.add("max location error", worst_err < resolution, worst_err, f"< {resolution:.3g}")
    return res


def criterion_3() -> CriterionResult:
    res = CriterionResult(3, "spin grouping at quarter-wave spacing")
    _scenario_check(res, "transport", {"dphi": math.pi / 2, "n_spins": 4})
    return res


def criterion_4() -> CriterionResult:
    res = CriterionResult(4, "entangled transfer and directional variants")
    _scenario_check(res, "transfer", {"theta": 0.0}, "theta=0 ")
    _scenario_check(res, "transfer", {"theta": math.pi / 2}, "theta=+pi/2 ")
    _scenario_check(res, "transfer", {"theta": -math.pi / 2}, "theta=-pi/2 ")
    return res


def criterion_5() -> CriterionResult:
    res = CriterionResult(5, "detuning gate")
    sweep = run_detuning_gate_sweep(np.linspace(0.0, 15.0, 31))
    for c in sweep.checks:
        if c["gating"]:
            res.add(c["name"], c["passed"], c["value"], f"{c['op']} {c['threshold']:g}")
    res.add("31-point grid", len(sweep.values) == 31, len(sweep.values), "== 31")
    return res


def criterion_6() -> CriterionResult:
    res = CriterionResult(6, "remote transfer, N=6")
    _scenario_check(res, "remote6", {"delta_a": 10.0})
    return res


def criterion_7() -> CriterionResult:
    res = CriterionResult(7, "detuning-sweep transfer")
    _scenario_check(res, "stirap", {"delta0": 10.0, "delta1": 10.0, "ramp_time": 10.0})
    for ratio in (0.5, 0.7, 1.0, 1.2, 1.4):
        report = run_scenario(build_scenario("stirap", {"delta0": 10.0, "delta1": 10.0 * ratio}))
        f = report.final["psi1"]
        res.add(f"ratio {ratio} F_final", f > 0.995, f, "> 0.995")
    return res


def criterion_8() -> CriterionResult:
    res = CriterionResult(8, "two-excitation transfer")
    r2 = run_scenario(build_scenario("multi-exc", {"variant": "B", "cutoff": 2}))
    for o in r2.outcomes:
        if o["gating"]:
            res.add(o["name"], o["passed"], o["value"], f"{o['op']} {o['threshold']:g}")
    r3 = run_scenario(build_scenario("multi-exc", {"variant": "B", "cutoff": 3}))
    # compare observables; the two bases have different dimensions
    t2, t3 = r2.trajectory, r3.trajectory
    diff = float(max(
        np.max(np.abs(t2.spin_populations - t3.spin_populations)),
        np.max(np.abs(t2.n_cw - t3.n_cw)),
        np.max(np.abs(t2.n_ccw - t3.n_ccw)),
        np.max(np.abs(t2.fidelities - t3.fidelities)),
    ))
    res.add("cutoff 2 vs 3", diff < 1e-10, diff, "< 1e-10")
    return res


def criterion_9() -> CriterionResult:
    res = CriterionResult(9, "effective-coupling nulls")
    k = np.arange(10_000)
    grid = k * math.pi / 5000  # [0, 2pi); odd multiples of pi/2 at k = 2500, 7500
    odd_quarter = (k % 2500 == 0) & ((k // 2500) % 2 == 1)
    ok = True
    worst_null = 0.0
    for convention in ("per-spin", "raw"):
        for dphi, should_vanish in zip(grid, odd_quarter):
            spec = SystemSpec(SpinArray((0.0, float(dphi))), g=1.0 / math.sqrt(2))
            j = abs(effective_coupling(spec, 0, 1, convention))
            if should_vanish:
                worst_null = max(worst_null, j)
            if (j < 1e-12) != bool(should_vanish):
                ok = False
    res.add("nulls exactly at odd pi/2", ok, int(odd_quarter.sum()), "only k*pi/2, k odd")
    res.add("|J| at the nulls", worst_null < 1e-12, worst_null, "< 1e-12")
    return res


def criterion_10() -> CriterionResult:
    res = CriterionResult(10, "platform coupling")
    two_pi = 2 * math.pi
    g = platform_coupling(200.0, two_pi * 0.18e6, two_pi * 30e3)
    g_mhz = g / two_pi / 1e6
    res.add("g/2pi [MHz]", abs(g_mhz - 0.52) <= 0.005, g_mhz, "0.52 +- 0.005")
    g_c_mhz = g_mhz * math.sqrt(4)
    res.add("g_c/2pi at N=4 [MHz]", abs(g_c_mhz - 1.04) <= 0.01, g_c_mhz, "~1.04")
    return res


def criterion_11() -> CriterionResult:
    res = CriterionResult(11, "numerical hygiene")
    scenarios = [
        ("transport", {}), ("transport", {"dphi": 0.3}), ("transfer", {}),
        ("transfer", {"theta": math.pi / 2}), ("multi-exc", {"variant": "A"}),
        ("multi-exc", {"variant": "B"}), ("gate-sweep", {}), ("remote6", {}), ("stirap", {}),
    ]
    drift, conv = 0.0, 0.0
    for sid, params in scenarios:
        report = run_scenario(build_scenario(sid, params))  # raises on either gate
        drift = max(drift, report.trajectory.norm_drift)
        conv = max(conv, report.convergence_delta)
    res.add("max norm drift", drift < 1e-10, drift, "< 1e-10")
    res.add("max halved-dt change", conv < 1e-8, conv, "< 1e-8")

    # one-excitation sector of the Fock Hamiltonian against the direct build
    spec = SystemSpec.chain(4, 0.7, detuning_schedules=[DetuningSchedule.constant(d) for d in (0.3, -0.2, 0.0, 1.1)])
    fock = BasisSpec.fock(4, 2)
    emb = fock.single_excitation_embedding()
    H_f = build_fock_hamiltonian(spec, fock).matrix
    H_s = build_single_excitation_hamiltonian(spec).matrix
    sector = float(np.max(np.abs(H_f[np.ix_(emb, emb)] - H_s)))
    single = BasisSpec.single_excitation(4)
    psi_s = QuantumState.from_terms(single, (spins_term(1, 0), spins_term(1j, 3)))
    psi_f = QuantumState.from_terms(fock, (spins_term(1, 0), spins_term(1j, 3)))
    tr_s = evolve(psi_s, spec, 5.0)
    tr_f = evolve(psi_f, spec, 5.0)
    sector = max(sector, float(np.max(np.abs(tr_f.states[:, emb] - tr_s.states))))
    res.add("sector projection", sector < 1e-8, sector, "< 1e-8")

    oracle = float(np.max(np.abs(tr_s.states[-1] - one_shot(psi_s, spec, 5.0))))
    res.add("stepped vs one-shot", oracle < 1e-8, oracle, "< 1e-8")
    return res


CRITERIA: dict[int, Callable[[], CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
    11: criterion_11,
}


def run_all(quick: bool = False, stream: TextIO | None = sys.stdout) -> list[CriterionResult]:
    """Run every criterion in order; ``quick`` skips the parameter sweeps (5 and 7)."""
    results = []
    for number, fn in CRITERIA.items():
        if quick and number in (5, 7):
            continue
        r = fn()
        results.append(r)
        if stream is not None:
            print(r.line(), file=stream, flush=True)
    if stream is not None:
        n_pass = sum(r.passed for r in results)
        print(f"{n_pass}/{len(results)} criteria passed", file=stream)
    return results
