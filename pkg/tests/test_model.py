from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ringcavity import kernels
from ringcavity.errors import (
    BasisMismatchError,
    BasisTooLargeError,
    BasisTooSmallError,
    NormalizationError,
    ScheduleDomainError,
)
from ringcavity.model import (
    BasisSpec,
    DetuningSchedule,
    Excitation,
    QuantumState,
    SpinArray,
    SystemSpec,
    build_coupling_matrix,
    build_fock_hamiltonian,
    build_single_excitation_hamiltonian,
    evaluate_detuning,
    fock_operators,
)

HALF_PI = math.pi / 2


# --- coupling matrix -------------------------------------------------------


def test_coupling_single_spin():
    spec = SystemSpec(SpinArray((0.0,)), g=1.0)
    np.testing.assert_allclose(build_coupling_matrix(spec).matrix, [[1], [1]], atol=1e-15)


def test_coupling_two_spins_quarter_wave():
    spec = SystemSpec(SpinArray((0.0, HALF_PI)), g=1.0)
    np.testing.assert_allclose(build_coupling_matrix(spec).matrix, [[1, 1j], [1, -1j]], atol=1e-15)


def test_coupling_four_spin_cw_row():
    spec = SystemSpec.chain(4, HALF_PI, g_c=2.0)
    assert spec.g == pytest.approx(1.0)
    np.testing.assert_allclose(build_coupling_matrix(spec).matrix[0], [1, 1j, -1, -1j], atol=1e-15)


def test_g_c_consistency_enforced():
    with pytest.raises(ValueError):
        SystemSpec(SpinArray((0.0, 1.0)), g=1.0, g_c=1.0)
    with pytest.raises(ValueError):
        SystemSpec(SpinArray((0.0,)), g=0.0)


def test_phases_not_reduced():
    spins = SpinArray((0.0, 7.0))
    assert spins.phases[1] == 7.0


# --- single-excitation Hamiltonian -------------------------------------------


@pytest.mark.parametrize(
    "n, dphi, expected",
    [
        (1, 0.0, [-math.sqrt(2), 0, math.sqrt(2)]),
        (4, 0.0, [-math.sqrt(2), 0, 0, 0, 0, math.sqrt(2)]),
        (4, HALF_PI, [-1, -1, 0, 0, 1, 1]),
    ],
)
def test_single_excitation_spectrum(n, dphi, expected):
    g_c = math.sqrt(n)  # per-spin g = 1 for the N=1 case, g_c = 1 otherwise
    spec = SystemSpec.chain(n, dphi, g_c=g_c if n == 1 else 1.0)
    ev = np.linalg.eigvalsh(build_single_excitation_hamiltonian(spec).matrix)
    np.testing.assert_allclose(ev, expected, atol=1e-12)


def test_diagonal_carries_frequencies_and_detunings():
    sched = DetuningSchedule.ramp(-2.0, 2.0, 4.0)
    spec = SystemSpec.chain(2, 0.3, omega_a=0.5, omega_c=0.25, detuning_schedules=[sched, None])
    H = build_single_excitation_hamiltonian(spec, t=1.0)
    np.testing.assert_allclose(np.diag(H.matrix).real, [0.25, 0.25, 0.5 - 1.0, 0.5])
    assert H.time_dependent


def test_hamiltonian_outside_schedule_domain():
    spec = SystemSpec.chain(2, 0.0, detuning_schedules=[DetuningSchedule.ramp(0, 1, 2.0), None])
    with pytest.raises(ScheduleDomainError):
        build_single_excitation_hamiltonian(spec, t=3.0)


@st.composite
def random_specs(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    phases = draw(st.lists(st.floats(-10, 10), min_size=n, max_size=n))
    dets = draw(st.lists(st.floats(-5, 5), min_size=n, max_size=n))
    g = draw(st.floats(0.05, 3.0))
    scheds = [DetuningSchedule.constant(d) for d in dets]
    return SystemSpec(SpinArray(tuple(phases), draw(st.floats(-2, 2)), tuple(scheds)), g=g)


@settings(max_examples=1000, deadline=None)
@given(random_specs())
def test_single_excitation_hermitian(spec):
    H = build_single_excitation_hamiltonian(spec).matrix
    assert np.max(np.abs(H - H.conj().T)) < 1e-12


@settings(max_examples=100, deadline=None)
@given(random_specs(max_n=4), st.integers(1, 2))
def test_fock_hermitian_and_conserving(spec, cutoff):
    basis = BasisSpec.fock(spec.n_spins, cutoff)
    H = build_fock_hamiltonian(spec, basis).matrix
    assert np.max(np.abs(H - H.conj().T)) < 1e-12
    n_exc = np.diag(basis.excitation_number().astype(float))
    assert np.max(np.abs(H @ n_exc - n_exc @ H)) < 1e-12


@settings(max_examples=60, deadline=None)
@given(random_specs(max_n=5))
def test_sector_equivalence(spec):
    basis = BasisSpec.fock(spec.n_spins, 1)
    emb = basis.single_excitation_embedding()
    H_f = build_fock_hamiltonian(spec, basis).matrix
    H_s = build_single_excitation_hamiltonian(spec).matrix
    assert np.max(np.abs(H_f[np.ix_(emb, emb)] - H_s)) < 1e-12


@settings(max_examples=60, deadline=None)
@given(random_specs(max_n=6), st.floats(-math.pi, math.pi))
def test_phase_covariance(spec, delta):
    shifted = SystemSpec(
        SpinArray(tuple(p + delta for p in spec.spins.phases), spec.spins.base_frequency,
                  spec.spins.detuning_schedules),
        spec.cavity, spec.g,
    )
    G0 = build_coupling_matrix(spec).matrix
    G1 = build_coupling_matrix(shifted).matrix
    D = np.diag([np.exp(1j * delta), np.exp(-1j * delta)])
    assert np.max(np.abs(D @ G0 - G1)) < 1e-12
    ev0 = np.linalg.eigvalsh(build_single_excitation_hamiltonian(spec).matrix)
    ev1 = np.linalg.eigvalsh(build_single_excitation_hamiltonian(shifted).matrix)
    assert np.max(np.abs(ev0 - ev1)) < 1e-12


# --- Fock basis -------------------------------------------------------------


def test_fock_dimension():
    assert BasisSpec.fock(2, 2).dim == 36
    assert BasisSpec.fock(3).cutoff == 6
    assert BasisSpec.single_excitation(5).dim == 7


def test_fock_ordering():
    b = BasisSpec.fock(2, 1)
    # cw outermost, then ccw, then spin bits with spin 0 most significant
    assert b.index((), 0, 0) == 0
    assert b.index((1,)) == 1
    assert b.index((0,)) == 2
    assert b.index((0, 1)) == 3
    assert b.index((), 0, 1) == 4
    assert b.index((), 1, 0) == 8


def test_fock_index_cutoff():
    with pytest.raises(BasisTooSmallError):
        BasisSpec.fock(2, 1).index((), 2, 0)


def test_single_excitation_index_rejects_multiple():
    b = BasisSpec.single_excitation(3)
    assert b.index((), 1, 0) == 0 and b.index((), 0, 1) == 1 and b.index((2,)) == 4
    with pytest.raises(BasisTooSmallError):
        b.index((0, 1))


def test_dimension_guard():
    spec = SystemSpec.chain(12, 0.0)
    with pytest.raises(BasisTooLargeError):
        build_fock_hamiltonian(spec, BasisSpec.fock(12))
    with pytest.raises(BasisTooLargeError):
        build_fock_hamiltonian(SystemSpec.chain(2, 0.0), BasisSpec.fock(2, 2), max_dim=35)


@pytest.mark.parametrize("backend", sorted(kernels.implementations()))
def test_fock_kernels_match_operator_construction(backend):
    spec = SystemSpec.chain(3, 0.4, omega_a=0.3, omega_c=-0.2,
                            detuning_schedules=[DetuningSchedule.constant(0.7), None, None])
    basis = BasisSpec.fock(3, 2)
    G = build_coupling_matrix(spec).matrix
    impl = kernels.implementations()[backend]
    spin_energy = np.array([0.3 + 0.7, 0.3, 0.3])
    H = impl.fock_hamiltonian(3, 2, np.ascontiguousarray(G[0]), np.ascontiguousarray(G[1]), -0.2, spin_energy)
    ops = fock_operators(basis)
    a, b = ops["a_cw"], ops["a_ccw"]
    ref = -0.2 * (a.conj().T @ a + b.conj().T @ b)
    for m in range(3):
        s = ops[f"s_minus_{m}"]
        ref = ref + spin_energy[m] * s.conj().T @ s
        coupling = G[0, m] * a.conj().T @ s + G[1, m] * b.conj().T @ s
        ref = ref + coupling + coupling.conj().T
    assert np.max(np.abs(H - ref)) < 1e-13


# --- states -----------------------------------------------------------------


def test_state_normalization_checked():
    b = BasisSpec.single_excitation(2)
    with pytest.raises(NormalizationError):
        QuantumState(np.array([1, 1, 0, 0], dtype=complex), b)
    with pytest.raises(BasisMismatchError):
        QuantumState(np.array([1, 0, 0], dtype=complex), b)


def test_state_from_terms_and_immutability():
    b = BasisSpec.fock(2, 2)
    psi = QuantumState.from_terms(b, [(1, Excitation((0,), cw=1)), (1j, Excitation((), 1, 1))])
    assert abs(psi.amplitudes[b.index((0,), 1, 0)]) == pytest.approx(1 / math.sqrt(2))
    with pytest.raises(ValueError):
        psi.amplitudes[0] = 1


# --- detuning schedules -----------------------------------------------------


@pytest.mark.parametrize(
    "segment, t, expected",
    [((0, 10, 5, 5), 3, 5.0), ((0, 10, -10, 10), 5, 0.0), ((0, 10, 10, -10), 2.5, 5.0)],
)
def test_evaluate_detuning_examples(segment, t, expected):
    assert evaluate_detuning(DetuningSchedule((segment,)), t) == pytest.approx(expected)


def test_schedule_domain():
    sched = DetuningSchedule.ramp(0, 1, 2)
    with pytest.raises(ScheduleDomainError):
        evaluate_detuning(sched, 2.5)
    with pytest.raises(ScheduleDomainError):
        evaluate_detuning(sched, -0.1)


def test_schedule_validation():
    with pytest.raises(ValueError, match="contiguous"):
        DetuningSchedule(((0, 1, 0, 0), (2, 3, 0, 0)))
    with pytest.raises(ValueError, match="jumps"):
        DetuningSchedule(((0, 1, 0, 0), (1, 3, 1, 1)))
    with pytest.raises(ValueError, match="t = 0"):
        DetuningSchedule(((1, 2, 0, 0),))
    step = DetuningSchedule(((0, 1, 0, 0), (1, 3, 1, 1)), steps=(1,))
    assert evaluate_detuning(step, 1.0) == 1.0  # a join takes the later segment
    assert step.breakpoints() == [1.0]


def test_schedule_vectorised():
    sched = DetuningSchedule(((0, 1, 0, 2), (1, 2, 2, 2)))
    np.testing.assert_allclose(evaluate_detuning(sched, np.array([0, 0.5, 1.5])), [0, 1, 2])
