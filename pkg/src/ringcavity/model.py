"""Domain types and Hamiltonian builders for a spin array in a two-mode ring cavity.

Units follow the figure conventions: frequencies in units of the collective
coupling ``g_c`` and times in ``1/g_c``.  Both cavity modes and the bare spins
default to zero frequency.

Basis conventions
-----------------
Single-excitation basis (dimension ``N + 2``)::

    index 0      cw photon
    index 1      ccw photon
    index 2 + m  spin m excited

Truncated Fock basis (dimension ``(M + 1)**2 * 2**N``), lexicographic with the
cw occupation outermost, then ccw, then the spin bitstring with spin 0 as the
most significant bit::

    index = ((n_cw * (M + 1) + n_ccw) << N) | bits,   bit of spin m = 1 << (N - 1 - m)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import (
    BasisMismatchError,
    BasisTooLargeError,
    BasisTooSmallError,
    NormalizationError,
    ScheduleDomainError,
)

DEFAULT_MAX_DIM = 2**20
NORM_TOL = 1e-12
_DOMAIN_SLACK = 1e-12


# ---------------------------------------------------------------------------
# detuning schedules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DetuningSchedule:
    """Piecewise-linear detuning ``Δ(t)``.

    Parameters
    ----------
    segments : sequence of (t_start, t_end, delta_start, delta_end)
        Contiguous segments starting at ``t = 0``.  The last ``t_end`` may be
        ``math.inf`` for an open-ended constant tail.
    steps : sequence of int
        Indices ``k`` of joins (between segment ``k - 1`` and ``k``) where a
        jump in value is intended.  Any other discontinuity is rejected.
    """

    segments: tuple[tuple[float, float, float, float], ...]
    steps: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        segs = tuple(tuple(float(x) for x in s) for s in self.segments)
        if not segs:
            raise ValueError("a schedule needs at least one segment")
        if any(len(s) != 4 for s in segs):
            raise ValueError("segments are (t_start, t_end, delta_start, delta_end)")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "steps", tuple(int(k) for k in self.steps))
        if segs[0][0] != 0.0:
            raise ValueError("schedule must start at t = 0")
        for k, (t0, t1, d0, d1) in enumerate(segs):
            if not t1 > t0:
                raise ValueError(f"segment {k} has non-positive length")
            if not (math.isfinite(d0) and math.isfinite(d1)):
                raise ValueError(f"segment {k} has a non-finite detuning")
            if math.isinf(t1) and (k != len(segs) - 1 or d0 != d1):
                raise ValueError("only a final constant segment may be open-ended")
            if k:
                prev = segs[k - 1]
                if abs(prev[1] - t0) > _DOMAIN_SLACK * max(1.0, abs(t0)):
                    raise ValueError(f"segments {k - 1} and {k} are not contiguous")
                if k not in self.steps and abs(prev[3] - d0) > 1e-12 * max(1.0, abs(d0)):
                    raise ValueError(
                        f"detuning jumps at join {k}; flag it in `steps` if intended"
                    )

    @classmethod
    def constant(cls, value: float, t_final: float = math.inf) -> "DetuningSchedule":
        return cls(((0.0, t_final, value, value),))

    @classmethod
    def ramp(cls, start: float, end: float, duration: float) -> "DetuningSchedule":
        """Linear ramp from ``start`` to ``end`` over ``[0, duration]``."""
        return cls(((0.0, duration, start, end),))

    @property
    def t_final(self) -> float:
        return self.segments[-1][1]

    def covers(self, t: float) -> bool:
        return 0.0 - _DOMAIN_SLACK <= t <= self.t_final * (1 + _DOMAIN_SLACK) + _DOMAIN_SLACK

    def breakpoints(self) -> list[float]:
        """Interior segment boundaries."""
        return [s[1] for s in self.segments[:-1]]

    def __call__(self, t):
        return evaluate_detuning(self, t)


def evaluate_detuning(schedule: DetuningSchedule, t):
    """Evaluate a schedule at a time or an array of times.

    Values inside a segment are interpolated linearly; a time sitting exactly
    on a join takes the value of the later segment.
    """
    ts = np.asarray(t, dtype=float)
    if ts.size and (
        ts.min() < -_DOMAIN_SLACK
        or ts.max() > schedule.t_final * (1 + _DOMAIN_SLACK) + _DOMAIN_SLACK
    ):
        raise ScheduleDomainError(
            f"t outside schedule domain [0, {schedule.t_final}]"
        )
    segs = schedule.segments
    starts = np.array([s[0] for s in segs])
    idx = np.clip(np.searchsorted(starts, ts, side="right") - 1, 0, len(segs) - 1)
    out = np.empty(ts.shape)
    for k, (t0, t1, d0, d1) in enumerate(segs):
        mask = idx == k
        if not mask.any():
            continue
        if d0 == d1:
            out[mask] = d0
        else:
            frac = np.clip((ts[mask] - t0) / (t1 - t0), 0.0, 1.0)
            out[mask] = d0 + (d1 - d0) * frac
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# physical system
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpinArray:
    """N two-level spins identified by their optical phases ``φ_m = k x_m``.

    Phases are kept exactly as given; no reduction modulo 2π is applied.
    A ``None`` schedule means zero detuning at all times.
    """

    phases: tuple[float, ...]
    base_frequency: float = 0.0
    detuning_schedules: tuple[DetuningSchedule | None, ...] = ()

    def __post_init__(self) -> None:
        phases = tuple(float(p) for p in self.phases)
        if len(phases) < 1:
            raise ValueError("a spin array needs at least one spin")
        if not all(math.isfinite(p) for p in phases):
            raise ValueError("spin phases must be finite")
        scheds = tuple(self.detuning_schedules) or (None,) * len(phases)
        if len(scheds) != len(phases):
            raise ValueError("one detuning schedule (or None) per spin is required")
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "detuning_schedules", scheds)
        object.__setattr__(self, "base_frequency", float(self.base_frequency))

    @classmethod
    def uniform(
        cls,
        n: int,
        dphi: float,
        base_frequency: float = 0.0,
        detuning_schedules: Sequence[DetuningSchedule | None] = (),
    ) -> "SpinArray":
        """Equally spaced chain with adjacent phase difference ``dphi``."""
        if n < 1:
            raise ValueError("n must be positive")
        return cls(tuple(m * dphi for m in range(n)), base_frequency, tuple(detuning_schedules))

    @property
    def count(self) -> int:
        return len(self.phases)

    def detunings(self, t: float) -> np.ndarray:
        return np.array(
            [0.0 if s is None else evaluate_detuning(s, t) for s in self.detuning_schedules]
        )

    def schedule_end(self) -> float:
        """Latest time covered by every schedule."""
        ends = [s.t_final for s in self.detuning_schedules if s is not None]
        return min(ends) if ends else math.inf

    def is_static(self) -> bool:
        return all(
            s is None or all(seg[2] == seg[3] for seg in s.segments) and not s.steps
            for s in self.detuning_schedules
        )


@dataclass(frozen=True)
class CavityPair:
    """Two counterpropagating ring-cavity modes sharing one frequency."""

    frequency: float = 0.0
    labels: tuple[str, str] = ("cw", "ccw")

    def __post_init__(self) -> None:
        if len(self.labels) != 2:
            raise ValueError("a ring cavity has exactly two modes")


@dataclass(frozen=True)
class SystemSpec:
    """Spins, cavity, and the per-spin coupling ``g``; ``g_c = g sqrt(N)``."""

    spins: SpinArray
    cavity: CavityPair = field(default_factory=CavityPair)
    g: float = 1.0
    g_c: float | None = None

    def __post_init__(self) -> None:
        if not self.g > 0:
            raise ValueError("coupling g must be positive")
        expected = self.g * math.sqrt(self.spins.count)
        if self.g_c is None:
            object.__setattr__(self, "g_c", expected)
        elif abs(self.g_c - expected) > 1e-12 * expected:
            raise ValueError("g_c must equal g * sqrt(N)")

    @classmethod
    def chain(
        cls,
        n: int,
        dphi: float,
        g_c: float = 1.0,
        *,
        omega_a: float = 0.0,
        omega_c: float = 0.0,
        detuning_schedules: Sequence[DetuningSchedule | None] = (),
    ) -> "SystemSpec":
        """Equally spaced chain parameterized by its collective coupling."""
        spins = SpinArray.uniform(n, dphi, omega_a, detuning_schedules)
        return cls(spins, CavityPair(omega_c), g_c / math.sqrt(n), g_c)

    @property
    def n_spins(self) -> int:
        return self.spins.count

    def with_schedules(self, schedules: Sequence[DetuningSchedule | None]) -> "SystemSpec":
        spins = SpinArray(self.spins.phases, self.spins.base_frequency, tuple(schedules))
        return SystemSpec(spins, self.cavity, self.g, self.g_c)

    def with_coupling(self, g: float) -> "SystemSpec":
        return SystemSpec(self.spins, self.cavity, g)


# ---------------------------------------------------------------------------
# bases and states
# ---------------------------------------------------------------------------

SINGLE = "single"
FOCK = "fock"


@dataclass(frozen=True)
class BasisSpec:
    """Hilbert-space basis descriptor; see module docstring for the ordering."""

    kind: str
    n_spins: int
    cutoff: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in (SINGLE, FOCK):
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if self.n_spins < 1:
            raise ValueError("n_spins must be positive")
        if self.kind == FOCK:
            if self.cutoff is None or self.cutoff < 1:
                raise ValueError("a Fock basis needs a photon cutoff M >= 1")
        elif self.cutoff is not None:
            raise ValueError("the single-excitation basis takes no cutoff")

    @classmethod
    def single_excitation(cls, n_spins: int) -> "BasisSpec":
        return cls(SINGLE, n_spins)

    @classmethod
    def fock(cls, n_spins: int, cutoff: int | None = None) -> "BasisSpec":
        """Fock basis; the cutoff defaults to the maximum occupation ``2N``."""
        return cls(FOCK, n_spins, 2 * n_spins if cutoff is None else cutoff)

    @property
    def dim(self) -> int:
        if self.kind == SINGLE:
            return self.n_spins + 2
        return (self.cutoff + 1) ** 2 * 2**self.n_spins

    def index(self, spins: Iterable[int] = (), cw: int = 0, ccw: int = 0) -> int:
        """Basis index of the product state with the given excitations."""
        spins = tuple(spins)
        n = self.n_spins
        if len(set(spins)) != len(spins) or any(not 0 <= m < n for m in spins):
            raise ValueError(f"invalid spin excitation pattern {spins}")
        if cw < 0 or ccw < 0:
            raise ValueError("photon numbers must be non-negative")
        if self.kind == SINGLE:
            total = len(spins) + cw + ccw
            if total != 1:
                raise BasisTooSmallError(
                    "single-excitation basis holds exactly one excitation"
                )
            if cw:
                return 0
            if ccw:
                return 1
            return 2 + spins[0]
        if cw > self.cutoff or ccw > self.cutoff:
            raise BasisTooSmallError(f"photon number exceeds cutoff M={self.cutoff}")
        bits = 0
        for m in spins:
            bits |= 1 << (n - 1 - m)
        return ((cw * (self.cutoff + 1) + ccw) << n) | bits

    def occupations(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Diagonals of ``n_cw``, ``n_ccw`` and ``S+_m S-_m`` (shape ``(dim, N)``)."""
        n = self.n_spins
        if self.kind == SINGLE:
            n_cw = np.zeros(self.dim)
            n_ccw = np.zeros(self.dim)
            n_cw[0] = 1.0
            n_ccw[1] = 1.0
            spin = np.zeros((self.dim, n))
            spin[2 + np.arange(n), np.arange(n)] = 1.0
            return n_cw, n_ccw, spin
        idx = np.arange(self.dim)
        photons = idx >> n
        n_cw = (photons // (self.cutoff + 1)).astype(float)
        n_ccw = (photons % (self.cutoff + 1)).astype(float)
        shifts = n - 1 - np.arange(n)
        spin = ((idx[:, None] >> shifts[None, :]) & 1).astype(float)
        return n_cw, n_ccw, spin

    def excitation_number(self) -> np.ndarray:
        """Diagonal of ``N_exc = n_cw + n_ccw + sum_m S+_m S-_m``."""
        n_cw, n_ccw, spin = self.occupations()
        return n_cw + n_ccw + spin.sum(axis=1)

    def sector(self, excitations: int) -> np.ndarray:
        """Indices of basis states with the given total excitation number."""
        return np.flatnonzero(self.excitation_number() == excitations)

    def single_excitation_embedding(self) -> np.ndarray:
        """Fock indices of ``[cw, ccw, spin_0, ..., spin_{N-1}]`` in that order."""
        n = self.n_spins
        return np.array(
            [self.index(cw=1), self.index(ccw=1)] + [self.index((m,)) for m in range(n)]
        )


@dataclass(frozen=True)
class Excitation:
    """Product-state pattern: a set of excited spins plus photon numbers."""

    spins: tuple[int, ...] = ()
    cw: int = 0
    ccw: int = 0


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Normalized complex amplitude vector tagged with its basis."""

    amplitudes: np.ndarray
    basis: BasisSpec

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (self.basis.dim,):
            raise BasisMismatchError(
                f"amplitude vector of length {amps.size} does not fit basis of dim {self.basis.dim}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise NormalizationError(f"state norm is {norm!r}, expected 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_terms(
        cls,
        basis: BasisSpec,
        terms: Iterable[tuple[complex, Excitation | Sequence[int]]],
        normalize: bool = True,
    ) -> "QuantumState":
        """Superpose product states: ``terms = [(coeff, pattern), ...]``.

        A pattern may be an :class:`Excitation` or a plain sequence of
        excited spin indices.
        """
        amps = np.zeros(basis.dim, dtype=complex)
        for coeff, pattern in terms:
            if not isinstance(pattern, Excitation):
                pattern = Excitation(tuple(pattern))
            amps[basis.index(pattern.spins, pattern.cw, pattern.ccw)] += coeff
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise NormalizationError("state has zero norm")
        if normalize:
            amps /= norm
        return cls(amps, basis)

    @classmethod
    def basis_state(cls, basis: BasisSpec, spins=(), cw: int = 0, ccw: int = 0) -> "QuantumState":
        amps = np.zeros(basis.dim, dtype=complex)
        amps[basis.index(spins, cw, ccw)] = 1.0
        return cls(amps, basis)


@dataclass(frozen=True, eq=False)
class HamiltonianMatrix:
    matrix: np.ndarray
    basis: BasisSpec
    time_dependent: bool = False
    t: float = 0.0


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    """The 2 x N spin-cavity coupling matrix (row 0 cw, row 1 ccw)."""

    matrix: np.ndarray
    g_c: float

    @property
    def n_spins(self) -> int:
        return self.matrix.shape[1]


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def build_coupling_matrix(spec: SystemSpec) -> CouplingMatrix:
    phases = np.asarray(spec.spins.phases)
    g = spec.g_c / math.sqrt(spec.n_spins)
    G = np.vstack([g * np.exp(1j * phases), g * np.exp(-1j * phases)])
    G.setflags(write=False)
    return CouplingMatrix(G, spec.g_c)


def _check_time(spec: SystemSpec, t: float) -> None:
    for s in spec.spins.detuning_schedules:
        if s is not None and not s.covers(t):
            raise ScheduleDomainError(f"t={t} outside schedule domain [0, {s.t_final}]")


def build_single_excitation_hamiltonian(spec: SystemSpec, t: float = 0.0) -> HamiltonianMatrix:
    _check_time(spec, t)
    basis = BasisSpec.single_excitation(spec.n_spins)
    H = static_matrix(spec, basis)
    H[2:, 2:] += np.diag(spec.spins.detunings(t))
    return HamiltonianMatrix(H, basis, not spec.spins.is_static(), t)


def build_fock_hamiltonian(
    spec: SystemSpec,
    basis: BasisSpec | None = None,
    t: float = 0.0,
    max_dim: int = DEFAULT_MAX_DIM,
) -> HamiltonianMatrix:
    """Full rotating-wave Hamiltonian on the truncated Fock basis.

    ``basis`` defaults to a Fock basis with cutoff ``M = 2N``.
    """
    if basis is None:
        basis = BasisSpec.fock(spec.n_spins)
    if basis.kind != FOCK or basis.n_spins != spec.n_spins:
        raise BasisMismatchError("expected a Fock basis matching the spin count")
    if basis.dim > max_dim:
        raise BasisTooLargeError(f"Fock dimension {basis.dim} exceeds limit {max_dim}")
    _check_time(spec, t)
    H = static_matrix(spec, basis)
    _, _, spin = basis.occupations()
    H[np.diag_indices_from(H)] += spin @ spec.spins.detunings(t)
    return HamiltonianMatrix(H, basis, not spec.spins.is_static(), t)


def static_matrix(spec: SystemSpec, basis: BasisSpec) -> np.ndarray:
    """Hamiltonian with every scheduled detuning set to zero (writable copy)."""
    if basis.n_spins != spec.n_spins:
        raise BasisMismatchError("basis spin count differs from the system")
    G = build_coupling_matrix(spec).matrix
    n = spec.n_spins
    wc = spec.cavity.frequency
    wa = spec.spins.base_frequency
    if basis.kind == SINGLE:
        H = np.zeros((n + 2, n + 2), dtype=complex)
        H[0, 0] = H[1, 1] = wc
        H[2:, 2:] = wa * np.eye(n)
        H[:2, 2:] = G
        H[2:, :2] = G.conj().T
        return H
    return kernels.fock_hamiltonian(
        n, basis.cutoff, np.ascontiguousarray(G[0]), np.ascontiguousarray(G[1]),
        float(wc), np.full(n, float(wa)),
    )


def fock_operators(basis: BasisSpec) -> dict[str, np.ndarray]:
    """Dense ``a_cw``, ``a_ccw`` and ``S-_m`` built by Kronecker products.

    Independent of the index-arithmetic assembly; used as a cross-check.
    """
    if basis.kind != FOCK:
        raise BasisMismatchError("Kronecker operators exist only for the Fock basis")
    M, n = basis.cutoff, basis.n_spins
    a = np.diag(np.sqrt(np.arange(1, M + 1)), k=1)
    sm = np.array([[0.0, 1.0], [0.0, 0.0]])  # |0><1| with index 1 = excited
    eye_m = np.eye(M + 1)

    def chain(ops: list[np.ndarray]) -> np.ndarray:
        out = ops[0]
        for op in ops[1:]:
            out = np.kron(out, op)
        return out

    spin_eye = [np.eye(2)] * n
    ops = {
        "a_cw": chain([a, eye_m] + spin_eye),
        "a_ccw": chain([eye_m, a] + spin_eye),
    }
    for m in range(n):
        factors = [eye_m, eye_m] + [sm if k == m else np.eye(2) for k in range(n)]
        ops[f"s_minus_{m}"] = chain(factors)
    return ops
