"""Polariton structure of the spin-cavity coupling.

The 2 x N coupling matrix is factored as ``G = U diag(λ+, λ-) W^†``.  The two
nonzero singular values set the vacuum Rabi splittings of two polariton pairs,
the first two columns of ``W`` are the bright collective spin modes and the
remaining columns span the dark subspace.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .model import (
    CouplingMatrix,
    SpinArray,
    SystemSpec,
    build_coupling_matrix,
    build_single_excitation_hamiltonian,
)

DEGENERACY_TOL = 1e-9
RANK_TOL = 1e-10


def structure_factor(n: int, dphi: float) -> complex:
    """``s = (1/N) sum_m exp(2 i m dphi)``."""
    if n < 1:
        raise ValueError("n must be positive")
    m = np.arange(n)
    return complex(np.exp(2j * m * dphi).sum() / n)


@dataclass(frozen=True, eq=False)
class PolaritonDecomposition:
    lambda_plus: float
    lambda_minus: float
    cavity_modes: np.ndarray  # U, 2 x 2
    spin_modes: np.ndarray  # W, N x N
    structure_factor: complex | None
    g_c: float

    @property
    def degenerate(self) -> bool:
        return abs(self.lambda_plus - self.lambda_minus) < DEGENERACY_TOL * self.g_c

    @property
    def rank(self) -> int:
        sv = (self.lambda_plus, self.lambda_minus)
        return sum(1 for x in sv if x > RANK_TOL * self.g_c)

    def reconstruct(self) -> np.ndarray:
        n = self.spin_modes.shape[0]
        lam = np.zeros((2, n))
        lam[0, 0] = self.lambda_plus
        if n > 1:
            lam[1, 1] = self.lambda_minus
        return self.cavity_modes @ lam @ self.spin_modes.conj().T


def _uniform_dphi(phases: Sequence[float]) -> float | None:
    ph = np.asarray(phases)
    if ph.size < 2:
        return 0.0
    steps = np.diff(ph)
    if np.allclose(steps, steps[0], rtol=0, atol=1e-12):
        return float(steps[0])
    return None


def polariton_decomposition(G: CouplingMatrix, phases: Sequence[float] | None = None) -> PolaritonDecomposition:
    """Full SVD of the coupling matrix.

    ``phases`` is only used to report the structure factor of an equally
    spaced chain; pass ``None`` to recover them from ``G`` itself.
    """
    mat = np.asarray(G.matrix)
    n = mat.shape[1]
    U, sv, Wh = np.linalg.svd(mat, full_matrices=True)
    lam_plus = float(sv[0])
    lam_minus = float(sv[1]) if sv.size > 1 else 0.0
    if phases is None:
        dphi = float(np.angle(mat[0, 1] / mat[0, 0])) if n > 1 else 0.0
        uniform = n < 2 or np.allclose(
            mat[0], mat[0, 0] * np.exp(1j * dphi * np.arange(n)), rtol=0, atol=1e-12 * G.g_c
        )
    else:
        d = _uniform_dphi(phases)
        uniform, dphi = d is not None, d
    s = structure_factor(n, dphi) if uniform else None
    return PolaritonDecomposition(lam_plus, lam_minus, U, Wh.conj().T, s, G.g_c)


def decompose(spec: SystemSpec) -> PolaritonDecomposition:
    return polariton_decomposition(build_coupling_matrix(spec), spec.spins.phases)


def singular_values_formula(g_c: float, s: complex) -> tuple[float, float]:
    """Closed form ``λ± = g_c sqrt(1 ± |s|)``.

    ``1 - |s|`` cancels badly when ``|s|`` is close to one; use
    :func:`chain_singular_values` when N and Δφ are known.
    """
    a = min(abs(s), 1.0)
    return g_c * math.sqrt(1 + a), g_c * math.sqrt(max(1 - a, 0.0))


def chain_singular_values(n: int, dphi: float, g_c: float = 1.0) -> tuple[float, float]:
    """``λ±`` for an equally spaced chain without cancellation.

    Uses ``1 - |s|^2 = (2/N^2) sum_{m,k} sin^2((m - k) Δφ)``.
    """
    a = abs(structure_factor(n, dphi))
    d = np.subtract.outer(np.arange(n), np.arange(n))
    one_minus_sq = 2.0 * float(np.sum(np.sin(d * dphi) ** 2)) / n**2
    return g_c * math.sqrt(1 + a), g_c * math.sqrt(max(one_minus_sq / (1 + a), 0.0))


@dataclass(frozen=True, eq=False)
class CollectiveModes:
    """Polariton constituents.

    ``cavity_plus``/``cavity_minus`` are 2-vectors over (cw, ccw) and
    ``spin_plus``/``spin_minus`` are N-vectors over the spins, each pair
    satisfying ``<C_j| G |A_j> = λ_j``.  When the singular values are
    degenerate the two vectors are one arbitrary orthonormal basis of their
    span and ``degenerate`` is set.  ``spin_minus`` is ``None`` for N = 1.
    """

    cavity_plus: np.ndarray
    cavity_minus: np.ndarray
    spin_plus: np.ndarray
    spin_minus: np.ndarray | None
    lambda_plus: float
    lambda_minus: float
    degenerate: bool
    minus_dark: bool


def collective_modes(decomp: PolaritonDecomposition) -> CollectiveModes:
    W = decomp.spin_modes
    n = W.shape[0]
    return CollectiveModes(
        cavity_plus=decomp.cavity_modes[:, 0],
        cavity_minus=decomp.cavity_modes[:, 1],
        spin_plus=W[:, 0],
        spin_minus=W[:, 1] if n > 1 else None,
        lambda_plus=decomp.lambda_plus,
        lambda_minus=decomp.lambda_minus,
        degenerate=decomp.degenerate,
        minus_dark=decomp.lambda_minus <= RANK_TOL * decomp.g_c,
    )


def dark_state_basis(decomp: PolaritonDecomposition) -> list[np.ndarray]:
    """Orthonormal basis of the null space of ``G`` (``N - rank`` vectors)."""
    W = decomp.spin_modes
    return [W[:, k].copy() for k in range(decomp.rank, W.shape[0])]


# ---------------------------------------------------------------------------
# energy diagrams
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpectrumTable:
    """Eigenvalues of the single-excitation Hamiltonian on a (dphi, Δa) grid.

    Rows are ordered with ``delta_a`` outermost; each row of ``eigenvalues``
    is sorted ascending.
    """

    dphi: np.ndarray
    delta_a: np.ndarray
    eigenvalues: np.ndarray
    degenerate: np.ndarray  # |λ+ - λ-| < tol at that grid point

    def to_csv(self) -> str:
        n_ev = self.eigenvalues.shape[1]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dphi", "delta_a"] + [f"ev_{k}" for k in range(n_ev)])
        for p, d, ev in zip(self.dphi, self.delta_a, self.eigenvalues):
            w.writerow([repr(float(p)), repr(float(d))] + [repr(float(x)) for x in ev])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SpectrumTable":
        rows = list(csv.reader(io.StringIO(text)))
        data = np.array([[float(x) for x in r] for r in rows[1:]])
        return cls(data[:, 0], data[:, 1], data[:, 2:], np.zeros(len(data), dtype=bool))


def _template_with(template: SystemSpec, dphi: float, delta_a: float) -> SystemSpec:
    from .model import DetuningSchedule

    n = template.n_spins
    sched = DetuningSchedule.constant(delta_a) if delta_a else None
    spins = SpinArray.uniform(n, dphi, template.spins.base_frequency, [sched] * n)
    return SystemSpec(spins, template.cavity, template.g, template.g_c)


def energy_spectrum_sweep(
    template: SystemSpec,
    dphi_grid: Sequence[float],
    delta_a_grid: Sequence[float],
) -> SpectrumTable:
    """Diagonalize the single-excitation Hamiltonian at every grid point.

    The template supplies N, g and the bare frequencies; its phases are
    replaced by an equally spaced chain and a uniform detuning ``Δa`` is
    applied to every spin.
    """
    dphi_grid = np.asarray(dphi_grid, dtype=float)
    delta_a_grid = np.asarray(delta_a_grid, dtype=float)
    if dphi_grid.size == 0 or delta_a_grid.size == 0:
        raise ValueError("grids must be non-empty")
    rows_p, rows_d, evs, degen = [], [], [], []
    for d in delta_a_grid:
        for p in dphi_grid:
            spec = _template_with(template, float(p), float(d))
            H = build_single_excitation_hamiltonian(spec).matrix
            evs.append(np.linalg.eigvalsh(H))
            dec = decompose(spec)
            degen.append(dec.degenerate and spec.n_spins >= 2)
            rows_p.append(p)
            rows_d.append(d)
    return SpectrumTable(np.array(rows_p), np.array(rows_d), np.array(evs), np.array(degen))


def polariton_gap(template: SystemSpec, dphi: float, delta_a: float = 0.0) -> float:
    """Splitting between the upper branches of the two polariton pairs.

    Read off the full Hamiltonian spectrum (top two eigenvalues), so it
    vanishes exactly where ``λ+ = λ-`` whatever the uniform detuning.
    """
    spec = _template_with(template, dphi, delta_a)
    ev = np.linalg.eigvalsh(build_single_excitation_hamiltonian(spec).matrix)
    return float(ev[-1] - ev[-2])


def _refine_minimum(f, a: float, b: float, passes: int = 3) -> tuple[float, float]:
    """Bounded Brent search, re-centred between passes.

    scipy's bounded method stops at a tolerance relative to ``|x|``; working
    in an offset variable around the current estimate removes that floor.
    """
    c, half = 0.5 * (a + b), 0.5 * (b - a)
    for _ in range(passes):
        res = minimize_scalar(
            lambda u: f(c + u), bounds=(-half, half), method="bounded", options={"xatol": 1e-15}
        )
        c, half = c + float(res.x), max(1e-6 * half, 1e-300)
    return c, float(f(c))


def locate_degeneracies(
    template: SystemSpec,
    delta_a: float = 0.0,
    lo: float = 0.0,
    hi: float = math.pi,
    n_grid: int = 400,
    tol: float = DEGENERACY_TOL,
) -> list[float]:
    """Interior ``dphi`` values in ``(lo, hi)`` where the polariton pairs coincide.

    Local minima of :func:`polariton_gap` on a coarse grid are refined by a
    bounded scalar minimization and kept when the refined gap is below
    ``tol * g_c``.
    """
    grid = np.linspace(lo, hi, n_grid + 1)
    gaps = np.array([polariton_gap(template, p, delta_a) for p in grid])
    found: list[float] = []
    for k in range(1, n_grid):
        if gaps[k] <= gaps[k - 1] and gaps[k] <= gaps[k + 1]:
            x, fun = _refine_minimum(
                lambda p: polariton_gap(template, p, delta_a), grid[k - 1], grid[k + 1]
            )
            if fun < tol * template.g_c and lo < x < hi:
                if not found or abs(x - found[-1]) > (hi - lo) / n_grid:
                    found.append(x)
    return found


# ---------------------------------------------------------------------------
# photon-mediated spin-spin coupling and platform numbers
# ---------------------------------------------------------------------------


def effective_coupling(spec: SystemSpec, i: int, j: int, convention: str = "per-spin") -> float:
    """Flip-flop amplitude between spins ``i`` and ``j`` mediated by both modes.

    ``per-spin`` returns ``2 g^2 cos(φ_i - φ_j)`` (one factor of the cosine per
    mode pair, per-spin coupling ``g``).  ``raw`` keeps the collective
    prefactor and the Hermitian-conjugate doubling literally:
    ``4 g_c^2 cos(φ_i - φ_j)``.  Only the null structure is convention-free.
    """
    n = spec.n_spins
    if i == j:
        raise IndexError("effective coupling needs two distinct spins")
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"spin index out of range for N={n}")
    delta = spec.spins.phases[i] - spec.spins.phases[j]
    if convention == "per-spin":
        return 2.0 * spec.g**2 * math.cos(delta)
    if convention == "raw":
        return 4.0 * spec.g_c**2 * math.cos(delta)
    raise ValueError(f"unknown convention {convention!r}")


def platform_coupling(cooperativity: float, linewidth: float, cavity_linewidth: float) -> float:
    """Single-emitter coupling ``g = sqrt(C Γ κ) / 2``, in the units of Γ and κ."""
    if cooperativity <= 0 or linewidth <= 0 or cavity_linewidth <= 0:
        raise ValueError("cooperativity and linewidths must be positive")
    return math.sqrt(cooperativity * linewidth * cavity_linewidth) / 2.0
