"""Command-line entry point.

Exit codes: 0 success, 1 a physics threshold failed, 2 bad configuration,
3 numerical failure (norm drift or step-size convergence).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
import time
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .config import ParsedConfig, load_document, parse_angle, parse_config, parse_grid
from .errors import ConfigError, ConvergenceError, RingCavityError
from .model import SystemSpec

EXIT_OK, EXIT_THRESHOLD, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3
WORKERS_ENV = "RINGCAVITY_WORKERS"

log = logging.getLogger("ringcavity")


def _canonical(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def write_outputs(out_dir: Path, files: dict[str, str], resolved: dict[str, Any], started: float) -> dict:
    """Write ``files`` plus ``manifest.json`` into ``out_dir``.

    Every file except the manifest depends only on the resolved
    configuration.  The manifest carries the wall-clock duration and so is
    the one output that differs between otherwise identical runs.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {"config.resolved.json": _canonical(resolved), **files}
    entries = []
    for name in sorted(files):
        data = files[name].encode()
        (out_dir / name).write_bytes(data)
        entries.append({"file": name, "sha256": hashlib.sha256(data).hexdigest(), "bytes": len(data)})
    manifest = {
        "config_hash": hashlib.sha256(_canonical(resolved).encode()).hexdigest(),
        "config": resolved,
        "tool_version": __version__,
        "wall_clock_seconds": round(time.perf_counter() - started, 6),
        "outputs": entries,
    }
    (out_dir / "manifest.json").write_text(_canonical(manifest))
    return manifest


def _read_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None
    return load_document(text)


def _default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV}={raw!r} is not an integer") from None
    if n < 1:
        raise ConfigError(f"{WORKERS_ENV} must be at least 1")
    return n


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    pairs = {
        "scenario": args.scenario, "dphi": args.dphi, "theta": args.theta, "n_spins": args.n,
        "delta_a": args.delta_a, "delta0": args.delta0, "delta1": args.delta1,
        "delta": args.delta, "variant": args.variant, "cutoff": args.cutoff,
        "ramp_time": args.ramp_time, "t_final": args.t_final, "dt": args.dt, "stride": args.stride,
    }
    out = {k: v for k, v in pairs.items() if v is not None}
    if args.no_convergence_check:
        out["convergence_check"] = False
    return out


def _parse(args: argparse.Namespace) -> ParsedConfig:
    doc = _read_config(args.config)
    ov = _overrides(args)
    if "scenario" not in ov and not doc.get("scenario", {}).get("id") and "initial_state" not in doc:
        raise ConfigError("give --scenario or a config file with a scenario or initial_state")
    return parse_config(doc, ov)


def cmd_run(args: argparse.Namespace) -> int:
    from .protocols import run_scenario

    started = time.perf_counter()
    parsed = _parse(args)
    for w in parsed.warnings:
        print(f"warning: {w}", file=sys.stderr)
    report = run_scenario(parsed.scenario)
    write_outputs(
        Path(args.out),
        {"trajectory.csv": report.trajectory.to_csv(), "report.json": report.to_json()},
        parsed.resolved(),
        started,
    )
    for o in report.outcomes:
        tag = "PASS" if o["passed"] else "FAIL"
        kind = "" if o["gating"] else " (informational)"
        print(f"{tag} {o['name']}: {o['metric']} = {o['value']:.6g} {o['op']} {o['threshold']}{kind}")
    return EXIT_OK if report.passed else EXIT_THRESHOLD


def cmd_sweep(args: argparse.Namespace) -> int:
    from .protocols import SCENARIOS, sweep

    started = time.perf_counter()
    if args.param is None or args.grid is None:
        raise ConfigError("sweep needs --param and --grid")
    grid = parse_grid(args.grid)
    parsed = _parse(args)
    cfg = parsed.scenario
    if cfg.scenario_id not in SCENARIOS:
        raise ConfigError("sweeps need a built-in scenario")
    base = {k: v for k, v in cfg.params.items() if k != args.param}
    workers = args.workers if args.workers is not None else _default_workers()
    res = sweep(cfg.scenario_id, args.param, grid, base, cfg.settings, workers)
    resolved = {**parsed.resolved(), "sweep": {"param": args.param, "grid": grid.tolist()}}
    write_outputs(Path(args.out), {"sweep.csv": res.to_csv()}, resolved, started)
    failed = [float(v) for v, p in zip(res.values, res.passed) if not p]
    print(f"{len(grid)} points, {len(failed)} failing" + (f": {failed}" if failed else ""))
    return EXIT_OK if res.all_passed else EXIT_THRESHOLD


def cmd_spectrum(args: argparse.Namespace) -> int:
    from .spectral import energy_spectrum_sweep, locate_degeneracies

    started = time.perf_counter()
    doc = _read_config(args.config)
    system = dict(doc.get("system", {}))
    if args.n is not None:
        system["n_spins"] = args.n
    n = int(system.get("n_spins", 4))
    g_c = float(system.get("g_c", 1.0))
    template = SystemSpec.chain(
        n, 0.0, g_c=g_c,
        omega_a=float(system.get("omega_a", 0.0)),
        omega_c=float(system.get("omega_c", 0.0)),
    )
    dphi = parse_grid(args.dphi_grid)
    detuning = parse_grid(args.detuning)
    table = energy_spectrum_sweep(template, dphi, detuning)
    degeneracies = {repr(float(d)): locate_degeneracies(template, float(d)) for d in detuning}
    resolved = {
        "spectrum": {
            "n_spins": n, "g_c": g_c, "omega_a": template.spins.base_frequency,
            "omega_c": template.cavity.frequency, "dphi_grid": dphi.tolist(),
            "delta_a_grid": detuning.tolist(),
        }
    }
    write_outputs(
        Path(args.out),
        {"spectrum.csv": table.to_csv(), "degeneracies.json": _canonical(degeneracies)},
        resolved,
        started,
    )
    for d, locs in degeneracies.items():
        print(f"delta_a={d}: degenerate at dphi/pi = {[round(x / math.pi, 9) for x in locs]}")
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    from .acceptance import run_all

    results = run_all(quick=args.quick, stream=sys.stdout)
    return EXIT_OK if all(r.passed for r in results) else EXIT_THRESHOLD


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _angle(text: str) -> float:
    try:
        return parse_angle(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON scenario document")
    p.add_argument("--scenario", help="built-in scenario id")
    p.add_argument("--n", type=int, help="number of spins")
    p.add_argument("--dphi", type=_angle, help="phase step, e.g. pi/2")
    p.add_argument("--theta", type=_angle, help="relative phase of the initial pair")
    p.add_argument("--delta-a", dest="delta_a", type=float)
    p.add_argument("--delta0", type=float)
    p.add_argument("--delta1", type=float)
    p.add_argument("--delta", type=float, help="common detuning of the stirap-scan scenario")
    p.add_argument("--variant", choices=("A", "B"))
    p.add_argument("--cutoff", type=int, help="photon occupation cutoff M")
    p.add_argument("--ramp-time", dest="ramp_time", type=float)
    p.add_argument("--t-final", dest="t_final", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--stride", type=int)
    p.add_argument("--no-convergence-check", action="store_true")
    p.add_argument("--out", default="out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ringcavity", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="eigenvalues over a phase-step grid")
    sp.add_argument("--config")
    sp.add_argument("--n", type=int)
    sp.add_argument("--dphi-grid", default="0:pi:200", help="start:stop:count")
    sp.add_argument("--detuning", default="0", help="uniform spin detuning; value, list or grid")
    sp.add_argument("--out", default="out")
    sp.set_defaults(func=cmd_spectrum)

    rp = sub.add_parser("run", help="run one scenario")
    _scenario_flags(rp)
    rp.set_defaults(func=cmd_run)

    wp = sub.add_parser("sweep", help="map a scenario parameter over a grid")
    _scenario_flags(wp)
    wp.add_argument("--param", help="parameter to sweep")
    wp.add_argument("--grid", help="start:stop:count or comma list")
    wp.add_argument("--workers", type=int, help=f"process count (default ${WORKERS_ENV} or 1)")
    wp.set_defaults(func=cmd_sweep)

    cp = sub.add_parser("check", help="run the acceptance criteria")
    cp.add_argument("--quick", action="store_true", help="skip the slowest sweeps")
    cp.set_defaults(func=cmd_check)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    np.seterr(all="ignore")
    try:
        return args.func(args)
    except ConvergenceError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (RingCavityError, ValueError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
