"""Unitary time evolution and observables.

Each step of length ``dt`` applies the exact exponential of the Hamiltonian
evaluated at the step midpoint.  Runs of steps whose Hamiltonian does not
change share one eigendecomposition and jump directly between sample points.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np
import scipy.linalg

from . import kernels
from .errors import (
    BasisMismatchError,
    ConvergenceError,
    EmptyTrajectoryError,
    ScheduleDomainError,
)
from .model import BasisSpec, QuantumState, SystemSpec, evaluate_detuning, static_matrix

NORM_DRIFT_TOL = 1e-10
CONVERGENCE_TOL = 1e-8


@dataclass(frozen=True)
class PropagatorSettings:
    """Step size (units of ``1/g_c``) and sampling stride in steps."""

    dt: float = 1e-3
    stride: int = 100
    max_chunk_bytes: int = 64 * 2**20

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.stride < 1:
            raise ValueError("stride must be at least one step")

    @property
    def sample_interval(self) -> float:
        return self.dt * self.stride

    def halved(self) -> "PropagatorSettings":
        """Half the step with the same sample times."""
        return replace(self, dt=self.dt / 2, stride=self.stride * 2)


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    spin_populations: np.ndarray  # (samples, N)
    n_cw: np.ndarray
    n_ccw: np.ndarray
    fidelities: np.ndarray  # (samples, targets)
    target_names: tuple[str, ...]
    states: np.ndarray  # (samples, dim)
    basis: BasisSpec
    norm_drift: float
    sample_interval: float

    def __len__(self) -> int:
        return len(self.times)

    def target_index(self, target: int | str) -> int:
        if isinstance(target, str):
            try:
                return self.target_names.index(target)
            except ValueError:
                raise KeyError(f"no target named {target!r}") from None
        return int(target)

    def fidelity(self, target: int | str) -> np.ndarray:
        return self.fidelities[:, self.target_index(target)]

    def columns(self) -> list[str]:
        n = self.spin_populations.shape[1]
        k = self.fidelities.shape[1]
        return (
            ["t"] + [f"rho_{m}" for m in range(n)] + ["n_cw", "n_ccw"]
            + [f"F_{j}" for j in range(k)]
        )

    def table(self) -> np.ndarray:
        return np.column_stack(
            [self.times, self.spin_populations, self.n_cw, self.n_ccw, self.fidelities]
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns())
        for row in self.table():
            w.writerow([repr(float(x)) for x in row])
        return buf.getvalue()


def populations(state: QuantumState) -> tuple[list[float], float, float]:
    """Spin populations ``<S+_m S-_m>`` and photon numbers ``<n_cw>``, ``<n_ccw>``."""
    n_cw, n_ccw, spin = state.basis.occupations()
    probs = np.abs(state.amplitudes) ** 2
    return [float(x) for x in probs @ spin], float(probs @ n_cw), float(probs @ n_ccw)


def fidelity(state: QuantumState, target: QuantumState) -> float:
    """Pure-state fidelity ``|<target|state>|^2``."""
    if state.basis != target.basis:
        raise BasisMismatchError("fidelity needs both states in the same basis")
    return float(abs(np.vdot(target.amplitudes, state.amplitudes)) ** 2)


def max_fidelity_over_window(
    traj: Trajectory, target: int | str = 0, t_window: float | None = None
) -> tuple[float, float]:
    """Largest sampled fidelity and the time it occurs.

    The answer is resolved only to ``traj.sample_interval``.
    """
    if len(traj) == 0:
        raise EmptyTrajectoryError("trajectory has no samples")
    f = traj.fidelity(target)
    mask = np.ones(len(f), dtype=bool) if t_window is None else traj.times <= t_window + 1e-12
    if not mask.any():
        raise EmptyTrajectoryError("no samples inside the window")
    k = int(np.argmax(np.where(mask, f, -np.inf)))
    return float(f[k]), float(traj.times[k])


# ---------------------------------------------------------------------------
# propagation
# ---------------------------------------------------------------------------


def _step_grid(t_final: float, dt: float) -> tuple[int, float]:
    n = round(t_final / dt)
    if n < 1 or abs(n * dt - t_final) > 1e-9 * max(t_final, dt):
        n = max(1, math.ceil(t_final / dt))
    return n, t_final / n


def _midpoint_detunings(spec: SystemSpec, mids: np.ndarray) -> np.ndarray:
    cols = []
    for sched in spec.spins.detuning_schedules:
        if sched is None:
            cols.append(np.zeros(mids.size))
        else:
            cols.append(np.atleast_1d(evaluate_detuning(sched, mids)))
    return np.column_stack(cols)


def _unitaries(H_static, occ, detunings, dt):
    """Exact step propagators for a stack of diagonal detuning rows."""
    H = np.broadcast_to(H_static, (len(detunings),) + H_static.shape).copy()
    diag = detunings @ occ.T
    idx = np.arange(H_static.shape[0])
    H[:, idx, idx] += diag
    E, V = np.linalg.eigh(H)
    return (V * np.exp(-1j * E * dt)[:, None, :]) @ V.conj().transpose(0, 2, 1)


def _blocks(starts, ends):
    """Split runs into static blocks (length > 1) and merged per-step blocks."""
    blocks: list[tuple[int, int, bool]] = []
    for a, e in zip(starts, ends):
        if e - a > 1:
            blocks.append((a, e, True))
        elif blocks and not blocks[-1][2]:
            blocks[-1] = (blocks[-1][0], e, False)
        else:
            blocks.append((a, e, False))
    return blocks


def _run(unitaries, psi, flags):
    """Apply a propagator stack; return the final state and the recorded samples."""
    flags = np.array(flags, dtype=bool)
    keep_last = bool(flags[-1])
    flags[-1] = True
    out = kernels.propagate(unitaries, psi, flags)
    return out[-1].copy(), list(out if keep_last else out[:-1])


def evolve(
    state0: QuantumState,
    spec: SystemSpec,
    t_final: float,
    settings: PropagatorSettings | None = None,
    targets: Mapping[str, QuantumState] | None = None,
    basis: BasisSpec | None = None,
) -> Trajectory:
    """Propagate ``state0`` over ``[0, t_final]`` and sample observables.

    Samples are taken every ``settings.stride`` steps and at ``t_final``.
    Raises :class:`ScheduleDomainError` when a detuning schedule ends before
    ``t_final`` and :class:`ConvergenceError` when the norm drifts by more
    than ``1e-10``.
    """
    settings = settings or PropagatorSettings()
    targets = dict(targets or {})
    b = state0.basis
    if basis is not None and basis != b:
        raise BasisMismatchError("initial state is not expressed in the requested basis")
    for name, tgt in targets.items():
        if tgt.basis != b:
            raise BasisMismatchError(f"target {name!r} lives in a different basis")
    if not t_final > 0:
        raise ValueError("t_final must be positive")
    if spec.spins.schedule_end() < t_final * (1 - 1e-12):
        raise ScheduleDomainError(
            f"schedules end at {spec.spins.schedule_end()} before t_final={t_final}"
        )

    n_steps, dt = _step_grid(t_final, settings.dt)
    stride = settings.stride
    record = np.zeros(n_steps, dtype=bool)
    record[stride - 1 :: stride] = True
    record[-1] = True

    H_static = static_matrix(spec, b)
    _, _, occ = b.occupations()
    mids = (np.arange(n_steps) + 0.5) * dt
    D = _midpoint_detunings(spec, mids)

    # runs of consecutive steps with an identical Hamiltonian
    change = np.flatnonzero(np.any(D[1:] != D[:-1], axis=1)) + 1
    starts = np.concatenate([[0], change])
    ends = np.concatenate([change, [n_steps]])

    psi = np.array(state0.amplitudes)
    samples = [psi.copy()]
    dim = b.dim
    chunk = max(1, settings.max_chunk_bytes // (16 * dim * dim))
    for a, e, is_static in _blocks(starts, ends):
        if is_static:
            H = H_static.copy()
            H[np.diag_indices(dim)] += occ @ D[a]
            E, V = np.linalg.eigh(H)
            Vh = V.conj().T
            stops = list(np.flatnonzero(record[a:e]) + a + 1)
            if not stops or stops[-1] != e:
                stops.append(e)
            jumps = np.diff([a] + stops)
            Us = np.array([(V * np.exp(-1j * E * j * dt)) @ Vh for j in jumps])
            flags = record[np.array(stops) - 1]
            psi, out = _run(Us, psi, flags)
            samples.extend(out)
        else:
            for c0 in range(a, e, chunk):
                c1 = min(e, c0 + chunk)
                Us = _unitaries(H_static, occ, D[c0:c1], dt)
                psi, out = _run(Us, psi, record[c0:c1])
                samples.extend(out)

    states = np.array(samples)
    norms = np.linalg.norm(states, axis=1)
    drift = float(np.max(np.abs(norms - 1.0)))
    if drift > NORM_DRIFT_TOL:
        raise ConvergenceError(f"state norm drifted by {drift:.3e}")

    times = np.concatenate([[0.0], (np.flatnonzero(record) + 1) * dt])
    probs = np.abs(states) ** 2
    n_cw, n_ccw, _ = b.occupations()
    names = tuple(targets)
    if names:
        T = np.array([targets[k].amplitudes for k in names])
        fids = np.abs(states @ T.conj().T) ** 2
    else:
        fids = np.zeros((len(states), 0))
    return Trajectory(
        times=times,
        spin_populations=probs @ occ,
        n_cw=probs @ n_cw,
        n_ccw=probs @ n_ccw,
        fidelities=fids,
        target_names=names,
        states=states,
        basis=b,
        norm_drift=drift,
        sample_interval=stride * dt,
    )


def one_shot(state0: QuantumState, spec: SystemSpec, t: float) -> np.ndarray:
    """Amplitudes after ``t`` from a single ``scipy.linalg.expm`` (static Hamiltonians only)."""
    if not spec.spins.is_static():
        raise ValueError("one-shot propagation needs a time-independent Hamiltonian")
    H = static_matrix(spec, state0.basis)
    _, _, occ = state0.basis.occupations()
    H[np.diag_indices_from(H)] += occ @ spec.spins.detunings(0.0)
    return scipy.linalg.expm(-1j * H * t) @ state0.amplitudes


def trajectory_difference(a: Trajectory, b: Trajectory) -> float:
    """Largest difference in any reported population, photon number or fidelity."""
    if a.times.shape != b.times.shape or np.max(np.abs(a.times - b.times)) > 1e-9:
        raise ValueError("trajectories are sampled at different times")
    return float(np.max(np.abs(a.table()[:, 1:] - b.table()[:, 1:]), initial=0.0))


def evolve_converged(
    state0: QuantumState,
    spec: SystemSpec,
    t_final: float,
    settings: PropagatorSettings | None = None,
    targets: Mapping[str, QuantumState] | None = None,
    tol: float = CONVERGENCE_TOL,
) -> tuple[Trajectory, float]:
    """Run :func:`evolve` at ``dt`` and ``dt/2`` and require agreement within ``tol``.

    Returns the ``dt`` trajectory and the observed difference.
    """
    settings = settings or PropagatorSettings()
    traj = evolve(state0, spec, t_final, settings, targets)
    fine = evolve(state0, spec, t_final, settings.halved(), targets)
    diff = trajectory_difference(traj, fine)
    if diff >= tol:
        raise ConvergenceError(f"halving dt changed reported values by {diff:.3e}")
    return traj, diff
