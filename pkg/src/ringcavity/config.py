"""Strict JSON scenario documents.

A document has up to seven sections::

    {
      "scenario":      {"id": "transfer", "theta": "pi/2"},
      "system":        {"n_spins": 4, "dphi": "pi/2", "g_c": 1.0, "g_c_units": true},
      "basis":         {"kind": "single"},
      "initial_state": [{"coeff": 1, "spins": [0]}, {"coeff": [0, 1], "spins": [1]}],
      "targets":       {"psi1": [{"coeff": 1, "spins": [2]}, {"coeff": [0, 1], "spins": [3]}]},
      "schedules":     {"2": [[0, 10, 5, 5]]},
      "simulation":    {"t_final": 10, "dt": 0.001, "stride": 100}
    }

Unknown keys are rejected.  Angles may be written as rational multiples of
``pi`` (``"3*pi/4"``).  With ``"g_c_units": false`` every frequency is read in
rad/s and every time in seconds and converted using the collective coupling.
"""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any

import numpy as np

from .dynamics import PropagatorSettings
from .errors import ConfigError, NormalizationError
from .model import BasisSpec, DetuningSchedule, Excitation, SpinArray, CavityPair, SystemSpec
from .protocols import SCENARIOS, ScenarioConfig, build_scenario

log = logging.getLogger(__name__)

RENORMALIZE_TOL = 1e-6

_SECTIONS = {"scenario", "system", "basis", "initial_state", "targets", "schedules", "simulation"}
_SYSTEM_KEYS = {"n_spins", "dphi", "phases", "g", "g_c", "omega_a", "omega_c", "g_c_units"}
_BASIS_KEYS = {"kind", "cutoff"}
_TERM_KEYS = {"coeff", "spins", "cw", "ccw"}
_SIM_KEYS = {"t_final", "dt", "stride", "convergence_check"}

_ANGLE = re.compile(
    r"^\s*(?P<sign>[+-]?)\s*(?:(?P<num>\d+(?:\.\d*)?)\s*\*?\s*)?pi\s*(?:/\s*(?P<den>\d+(?:\.\d*)?))?\s*$"
)


def parse_angle(value: Any) -> float:
    """Angle from a number or a string such as ``"pi/2"``, ``"-3*pi/4"``, ``"2pi"``."""
    if isinstance(value, bool):
        raise ConfigError(f"not an angle: {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _ANGLE.match(value)
        if m:
            num = Fraction(m["num"]) if m["num"] else Fraction(1)
            den = Fraction(m["den"]) if m["den"] else Fraction(1)
            frac = num / den * (-1 if m["sign"] == "-" else 1)
            return frac.numerator * math.pi / frac.denominator
        try:
            return float(value)
        except ValueError:
            pass
    raise ConfigError(f"cannot read angle {value!r}")


def parse_grid(text: str) -> np.ndarray:
    """``"start:stop:count"`` (inclusive linspace; angles allowed) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid {text!r} must be start:stop:count")
        try:
            count = int(parts[2])
        except ValueError:
            raise ConfigError(f"grid count {parts[2]!r} is not an integer") from None
        if count < 1:
            raise ConfigError("grid count must be positive")
        return np.linspace(parse_angle(parts[0]), parse_angle(parts[1]), count)
    return np.array([parse_angle(x) for x in text.split(",") if x.strip()])


def _strict(section: str, obj: Any, allowed: set[str]) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"section {section!r} must be an object")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {section!r}: {', '.join(unknown)}")
    return obj


def _number(section: str, key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise ConfigError(f"{section}.{key} must be a number")
    try:
        return parse_angle(value) if isinstance(value, str) else float(value)
    except ConfigError:
        raise ConfigError(f"{section}.{key}: cannot read {value!r}") from None


def parse_coeff(value: Any) -> complex:
    """``1``, ``[re, im]`` or ``{"abs": r, "phase": "pi/2"}``."""
    if isinstance(value, bool):
        raise ConfigError(f"bad coefficient {value!r}")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(isinstance(x, (int, float)) for x in value):
        return complex(value[0], value[1])
    if isinstance(value, dict):
        _strict("coeff", value, {"abs", "phase"})
        return float(value.get("abs", 1.0)) * complex(np.exp(1j * parse_angle(value.get("phase", 0.0))))
    raise ConfigError(f"bad coefficient {value!r}")


def _terms(section: str, items: Any) -> tuple[tuple[complex, Excitation], ...]:
    if not isinstance(items, list) or not items:
        raise ConfigError(f"{section} must be a non-empty list of terms")
    out = []
    for k, item in enumerate(items):
        item = _strict(f"{section}[{k}]", item, _TERM_KEYS)
        if "coeff" not in item:
            raise ConfigError(f"{section}[{k}] is missing 'coeff'")
        spins = item.get("spins", [])
        if not isinstance(spins, list) or not all(isinstance(m, int) for m in spins):
            raise ConfigError(f"{section}[{k}].spins must be a list of integers")
        out.append(
            (parse_coeff(item["coeff"]), Excitation(tuple(spins), int(item.get("cw", 0)), int(item.get("ccw", 0))))
        )
    return tuple(out)


@dataclass
class ParsedConfig:
    scenario: ScenarioConfig
    defaults: dict[str, Any] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def resolved(self) -> dict[str, Any]:
        return {**self.scenario.to_dict(), "defaults_applied": self.defaults}


def load_document(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"JSON syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError("configuration document must be a JSON object")
    return _strict("document", doc, _SECTIONS)


def parse_config(text: str | dict, overrides: dict[str, Any] | None = None) -> ParsedConfig:
    """Resolve a document (JSON text or already-loaded dict) into a scenario.

    ``overrides`` carries command-line values; they replace the matching
    scenario parameters or simulation settings.
    """
    doc = load_document(text) if isinstance(text, str) else _strict("document", dict(text), _SECTIONS)
    overrides = dict(overrides or {})
    defaults: dict[str, Any] = {}
    warnings: list[str] = []

    system = _strict("system", doc.get("system", {}), _SYSTEM_KEYS)
    sim = _strict("simulation", doc.get("simulation", {}), _SIM_KEYS)
    scen = doc.get("scenario", {})
    if not isinstance(scen, dict):
        raise ConfigError("section 'scenario' must be an object")
    scenario_id = overrides.pop("scenario", None) or scen.get("id", "custom")

    si_units = system.get("g_c_units", True) is False
    if "g_c_units" not in system:
        defaults["system.g_c_units"] = True

    # propagator settings; flags override the document
    dt = overrides.pop("dt", None) or sim.get("dt")
    stride = overrides.pop("stride", None) or sim.get("stride")
    if dt is None:
        defaults["simulation.dt"] = PropagatorSettings.dt
    if stride is None:
        defaults["simulation.stride"] = PropagatorSettings.stride
    conv = overrides.pop("convergence_check", None)
    if conv is None:
        conv = sim.get("convergence_check")
        if conv is None:
            defaults["simulation.convergence_check"] = True
            conv = True
    t_final = overrides.pop("t_final", None) or sim.get("t_final")

    g_c_si = None
    if si_units:
        if "g_c" in system:
            g_c_si = _number("system", "g_c", system["g_c"])
        elif "g" in system and "n_spins" in system:
            g_c_si = _number("system", "g", system["g"]) * math.sqrt(int(system["n_spins"]))
        else:
            raise ConfigError("SI units need system.g_c (or g with n_spins) in rad/s")

    def time(x: float) -> float:
        return x * g_c_si if si_units else x

    def freq(x: float) -> float:
        return x / g_c_si if si_units else x

    settings = PropagatorSettings(
        dt=time(_number("simulation", "dt", dt)) if dt is not None else PropagatorSettings.dt,
        stride=int(stride) if stride is not None else PropagatorSettings.stride,
    )

    if scenario_id != "custom":
        if scenario_id not in SCENARIOS:
            raise ConfigError(f"unknown scenario id {scenario_id!r}")
        accepted = SCENARIOS[scenario_id].params
        params = {k: v for k, v in scen.items() if k != "id"}
        params.update(overrides)
        for key in ("dphi", "n_spins"):
            if key in system and key in accepted:
                params.setdefault(key, system[key])
        if t_final is not None:
            key = "ramp_time" if "ramp_time" in accepted else "t_final"
            params.setdefault(key, t_final)
        for key, value in list(params.items()):
            if key not in accepted:
                raise ConfigError(f"unknown key {key!r} for scenario {scenario_id!r}")
            if key in ("variant",):
                continue
            if key in ("n_spins", "cutoff"):
                params[key] = int(value)
            elif key in ("delta0", "delta1", "delta", "delta_a"):
                params[key] = freq(_number("scenario", key, value))
            elif key in ("t_final", "ramp_time"):
                params[key] = time(_number("scenario", key, value))
            else:
                params[key] = _number("scenario", key, value)
        cfg = build_scenario(scenario_id, params, settings)
        if "n_spins" in system and int(system["n_spins"]) != cfg.spec.n_spins:
            raise ConfigError(
                f"system.n_spins={system['n_spins']} conflicts with scenario {scenario_id!r} "
                f"(N={cfg.spec.n_spins})"
            )
        cfg = replace(cfg, convergence_check=bool(conv))
        cfg = _apply_sections(cfg, doc, freq, time, warnings)
        return ParsedConfig(cfg, defaults, warnings)

    if overrides:
        raise ConfigError(f"flags {sorted(overrides)} need a built-in scenario")
    spec = _system(system, doc.get("schedules"), freq, time, defaults)
    basis = _basis(doc.get("basis"), spec.n_spins, defaults)
    if "initial_state" not in doc:
        raise ConfigError("a custom scenario needs 'initial_state'")
    if t_final is None:
        raise ConfigError("a custom scenario needs simulation.t_final")
    initial = _terms("initial_state", doc["initial_state"])
    initial = _checked_norm(basis, initial, warnings)
    targets = _targets(doc.get("targets", {}))
    cfg = ScenarioConfig(
        "custom", spec, basis, initial, targets, time(_number("simulation", "t_final", t_final)),
        settings, (), bool(conv), params={},
    )
    return ParsedConfig(cfg, defaults, warnings)


def _targets(obj: Any) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError("section 'targets' must map names to term lists")
    return {str(k): _terms(f"targets.{k}", v) for k, v in obj.items()}


def _checked_norm(basis: BasisSpec, terms, warnings: list[str]):
    amps = np.zeros(basis.dim, dtype=complex)
    for c, ex in terms:
        try:
            amps[basis.index(ex.spins, ex.cw, ex.ccw)] += c
        except ValueError as exc:
            raise ConfigError(f"initial_state: {exc}") from None
    norm = float(np.linalg.norm(amps))
    if abs(norm - 1.0) > RENORMALIZE_TOL:
        raise NormalizationError(f"initial state norm {norm!r} deviates from 1 by more than {RENORMALIZE_TOL}")
    if norm != 1.0:
        msg = f"initial state norm {norm!r} renormalized"
        log.warning(msg)
        warnings.append(msg)
    return tuple((c / norm, ex) for c, ex in terms)


def _schedules(obj: Any, n: int, freq, time) -> list[DetuningSchedule | None]:
    scheds: list[DetuningSchedule | None] = [None] * n
    if obj is None:
        return scheds
    if not isinstance(obj, dict):
        raise ConfigError("section 'schedules' must map spin indices to segment lists")
    for key, value in obj.items():
        try:
            m = int(key)
        except ValueError:
            raise ConfigError(f"schedules: {key!r} is not a spin index") from None
        if not 0 <= m < n:
            raise ConfigError(f"schedules: spin {m} out of range for N={n}")
        steps: list[int] = []
        if isinstance(value, dict):
            _strict(f"schedules.{key}", value, {"segments", "steps"})
            steps = list(value.get("steps", []))
            value = value.get("segments")
        if not isinstance(value, list) or not value:
            raise ConfigError(f"schedules.{key} needs a list of [t0, t1, d0, d1] segments")
        try:
            segs = tuple(
                (time(float(s[0])), time(float(s[1])), freq(float(s[2])), freq(float(s[3])))
                for s in value
            )
            scheds[m] = DetuningSchedule(segs, tuple(steps))
        except (TypeError, IndexError, ValueError) as exc:
            raise ConfigError(f"schedules.{key}: {exc}") from None
    return scheds


def _system(system: dict, schedules, freq, time, defaults) -> SystemSpec:
    if "phases" in system and "dphi" in system:
        raise ConfigError("give either system.phases or system.dphi, not both")
    if "phases" in system:
        phases = [parse_angle(p) for p in system["phases"]]
        n = len(phases)
        if "n_spins" in system and int(system["n_spins"]) != n:
            raise ConfigError("system.n_spins disagrees with len(system.phases)")
    else:
        if "n_spins" not in system:
            raise ConfigError("system.n_spins is required")
        n = int(system["n_spins"])
        if n < 1:
            raise ConfigError("system.n_spins must be positive")
        if "dphi" not in system:
            defaults["system.dphi"] = 0.0
        dphi = parse_angle(system.get("dphi", 0.0))
        phases = [m * dphi for m in range(n)]
    if "g" in system and "g_c" in system:
        raise ConfigError("give either system.g or system.g_c, not both")
    if "g" in system:
        g = freq(_number("system", "g", system["g"]))
    else:
        if "g_c" not in system:
            defaults["system.g_c"] = 1.0
        g = freq(_number("system", "g_c", system.get("g_c", 1.0))) / math.sqrt(n)
    for key in ("omega_a", "omega_c"):
        if key not in system:
            defaults[f"system.{key}"] = 0.0
    spins = SpinArray(
        tuple(phases),
        freq(_number("system", "omega_a", system.get("omega_a", 0.0))),
        tuple(_schedules(schedules, n, freq, time)),
    )
    try:
        return SystemSpec(spins, CavityPair(freq(_number("system", "omega_c", system.get("omega_c", 0.0)))), g)
    except ValueError as exc:
        raise ConfigError(f"system: {exc}") from None


def _basis(obj: Any, n: int, defaults) -> BasisSpec:
    if obj is None:
        defaults["basis.kind"] = "single"
        return BasisSpec.single_excitation(n)
    obj = _strict("basis", obj, _BASIS_KEYS)
    kind = obj.get("kind", "single")
    if kind == "single":
        if "cutoff" in obj:
            raise ConfigError("basis.cutoff applies only to kind 'fock'")
        return BasisSpec.single_excitation(n)
    if kind == "fock":
        if "cutoff" not in obj:
            defaults["basis.cutoff"] = 2 * n
        return BasisSpec.fock(n, obj.get("cutoff"))
    raise ConfigError(f"basis.kind must be 'single' or 'fock', not {kind!r}")


def _apply_sections(cfg: ScenarioConfig, doc: dict, freq, time, warnings) -> ScenarioConfig:
    """Let explicit document sections replace parts of a built-in scenario."""
    changes: dict[str, Any] = {}
    if "schedules" in doc:
        changes["spec"] = cfg.spec.with_schedules(
            _schedules(doc["schedules"], cfg.spec.n_spins, freq, time)
        )
    if "basis" in doc:
        changes["basis"] = _basis(doc["basis"], cfg.spec.n_spins, {})
    basis = changes.get("basis", cfg.basis)
    if "initial_state" in doc:
        changes["initial_state"] = _checked_norm(basis, _terms("initial_state", doc["initial_state"]), warnings)
    if "targets" in doc:
        changes["targets"] = {**cfg.targets, **_targets(doc["targets"])}
    return replace(cfg, **changes) if changes else cfg
