from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ringcavity.model import (
    DetuningSchedule,
    SpinArray,
    SystemSpec,
    build_coupling_matrix,
    build_single_excitation_hamiltonian,
)
from ringcavity.spectral import (
    SpectrumTable,
    collective_modes,
    dark_state_basis,
    decompose,
    effective_coupling,
    energy_spectrum_sweep,
    locate_degeneracies,
    platform_coupling,
    polariton_decomposition,
    chain_singular_values,
    singular_values_formula,
    structure_factor,
)

HALF_PI = math.pi / 2


@pytest.mark.parametrize(
    "n, dphi, expected", [(4, 0.0, 1.0), (4, HALF_PI, 0.0), (3, math.pi / 3, 0.0), (1, 2.0, 1.0)]
)
def test_structure_factor(n, dphi, expected):
    assert abs(structure_factor(n, dphi) - expected) < 1e-12


def test_structure_factor_rejects_empty():
    with pytest.raises(ValueError):
        structure_factor(0, 0.1)


@pytest.mark.parametrize(
    "dphi, expected", [(0.0, (math.sqrt(2), 0.0)), (HALF_PI, (1.0, 1.0))]
)
def test_singular_values_examples(dphi, expected):
    dec = decompose(SystemSpec.chain(4, dphi))
    assert dec.lambda_plus == pytest.approx(expected[0], abs=1e-12)
    assert dec.lambda_minus == pytest.approx(expected[1], abs=1e-12)


def test_singular_values_direct_sum():
    s = np.exp(2j * np.arange(4) * math.pi / 3).mean()
    dec = decompose(SystemSpec.chain(4, math.pi / 3))
    assert dec.lambda_plus == pytest.approx(math.sqrt(1 + abs(s)), abs=1e-12)
    assert dec.lambda_minus == pytest.approx(math.sqrt(1 - abs(s)), abs=1e-12)
    assert abs(dec.structure_factor - s) < 1e-12


@settings(max_examples=1000, deadline=None)
@given(st.integers(1, 10), st.floats(-2 * math.pi, 2 * math.pi), st.floats(0.1, 5.0))
def test_svd_matches_formula(n, dphi, g_c):
    dec = decompose(SystemSpec.chain(n, dphi, g_c=g_c))
    lp, lm = chain_singular_values(n, dphi, g_c)
    if n == 1:
        lm = 0.0  # a single column has one singular value
    assert abs(dec.lambda_plus - lp) < 1e-10 * g_c
    assert abs(dec.lambda_minus - lm) < 1e-10 * g_c


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=9))
def test_decomposition_invariants(phases):
    spec = SystemSpec(SpinArray(tuple(phases)), g=0.7)
    G = build_coupling_matrix(spec)
    dec = polariton_decomposition(G)
    U, W = dec.cavity_modes, dec.spin_modes
    assert dec.lambda_plus >= dec.lambda_minus >= 0
    assert np.max(np.abs(U.conj().T @ U - np.eye(2))) < 1e-12
    assert np.max(np.abs(W.conj().T @ W - np.eye(len(phases)))) < 1e-12
    assert np.max(np.abs(dec.reconstruct() - G.matrix)) < 1e-12
    for v in dark_state_basis(dec):
        assert np.linalg.norm(G.matrix @ v) < 1e-10


def test_closed_form_agrees_away_from_unit_s():
    for n, dphi in [(4, 0.3), (7, 1.1), (10, 2.9)]:
        a = singular_values_formula(2.0, structure_factor(n, dphi))
        b = chain_singular_values(n, dphi, 2.0)
        np.testing.assert_allclose(a, b, rtol=1e-12)


def test_nonuniform_chain_has_no_structure_factor():
    dec = polariton_decomposition(build_coupling_matrix(SystemSpec(SpinArray((0.0, 0.3, 1.7)))))
    assert dec.structure_factor is None


@pytest.mark.parametrize("n, dphi, count", [(4, HALF_PI, 2), (4, 0.0, 3), (2, HALF_PI, 0), (6, 0.4, 4)])
def test_dark_state_count(n, dphi, count):
    assert len(dark_state_basis(decompose(SystemSpec.chain(n, dphi)))) == count


def test_dark_states_are_uncoupled_eigenvectors():
    delta_a = 0.8
    sched = DetuningSchedule.constant(delta_a)
    spec = SystemSpec.chain(6, 0.9, omega_a=0.3, detuning_schedules=[sched] * 6)
    H = build_single_excitation_hamiltonian(spec).matrix
    dark = dark_state_basis(decompose(spec))
    V = np.array([np.concatenate([[0, 0], v]) for v in dark]).T
    block = V.conj().T @ H @ V
    np.testing.assert_allclose(block, (0.3 + delta_a) * np.eye(len(dark)), atol=1e-12)
    np.testing.assert_allclose(H @ V, (0.3 + delta_a) * V, atol=1e-12)


def _in_span(v, basis_vectors):
    B = np.array(basis_vectors).T
    proj = B @ np.linalg.lstsq(B, v, rcond=None)[0]
    return np.linalg.norm(v - proj) < 1e-10


def test_collective_modes_quarter_wave():
    modes = collective_modes(decompose(SystemSpec.chain(4, HALF_PI)))
    assert modes.degenerate
    span = [modes.spin_plus, modes.spin_minus]
    assert _in_span(np.array([1, 0, -1, 0]) / math.sqrt(2), span)
    assert _in_span(np.array([0, 1, 0, -1]) / math.sqrt(2), span)


def test_collective_modes_quarter_wave_six_spins():
    # nondegenerate-free check of support: the bright span splits by parity
    modes = collective_modes(decompose(SystemSpec.chain(6, HALF_PI)))
    span = [modes.spin_plus, modes.spin_minus]
    assert _in_span(np.array([1, 0, -1, 0, 1, 0]) / math.sqrt(3), span)
    assert _in_span(np.array([0, 1, 0, -1, 0, 1]) / math.sqrt(3), span)


def test_collective_modes_symmetric_pair():
    modes = collective_modes(decompose(SystemSpec.chain(2, 0.0)))
    assert modes.minus_dark and not modes.degenerate
    v = modes.spin_plus / modes.spin_plus[0]
    np.testing.assert_allclose(v, [1, 1], atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 8), st.floats(0.05, 3.0))
def test_bright_modes_orthogonal_to_dark(n, dphi):
    dec = decompose(SystemSpec.chain(n, dphi))
    modes = collective_modes(dec)
    for v in dark_state_basis(dec):
        assert abs(np.vdot(v, modes.spin_plus)) < 1e-12
        if dec.rank == 2:
            assert abs(np.vdot(v, modes.spin_minus)) < 1e-12


# --- energy diagrams --------------------------------------------------------


def test_spectrum_sweep_shape_and_values():
    table = energy_spectrum_sweep(SystemSpec.chain(4, 0.0), [0.0, HALF_PI], [0.0, 1.0])
    assert table.eigenvalues.shape == (4, 6)
    np.testing.assert_allclose(table.eigenvalues[0], [-math.sqrt(2), 0, 0, 0, 0, math.sqrt(2)], atol=1e-12)
    assert list(table.degenerate) == [False, True, False, True]
    assert np.all(np.diff(table.eigenvalues, axis=1) >= 0)


def test_spectrum_csv_round_trip():
    table = energy_spectrum_sweep(SystemSpec.chain(3, 0.0), np.linspace(0, math.pi, 5), [-1.0, 2.0])
    text = table.to_csv()
    assert text.splitlines()[0] == "dphi,delta_a,ev_0,ev_1,ev_2,ev_3,ev_4"
    back = SpectrumTable.from_csv(text)
    np.testing.assert_array_equal(back.eigenvalues, table.eigenvalues)
    np.testing.assert_array_equal(back.dphi, table.dphi)


def test_spectrum_rejects_empty_grid():
    with pytest.raises(ValueError):
        energy_spectrum_sweep(SystemSpec.chain(3, 0.0), [], [0.0])


@pytest.mark.parametrize("n", range(2, 9))
def test_degeneracy_count(n):
    found = locate_degeneracies(SystemSpec.chain(n, 0.0))
    assert len(found) == n - 1
    np.testing.assert_allclose(found, np.arange(1, n) * math.pi / n, atol=1e-9)


@pytest.mark.parametrize("delta_a", [-5.0, -2.5, 0.0, 3.0, 5.0])
def test_degeneracy_independent_of_detuning(delta_a):
    found = locate_degeneracies(SystemSpec.chain(4, 0.0), delta_a)
    np.testing.assert_allclose(found, [math.pi / 4, math.pi / 2, 3 * math.pi / 4], atol=1e-9)


# --- effective coupling and platform numbers --------------------------------


def _pair(delta, g=1.0):
    return SystemSpec(SpinArray((0.0, delta)), g=g)


@pytest.mark.parametrize("delta, sign", [(HALF_PI, 0), (0.0, 1), (math.pi, -1), (3 * HALF_PI, 0)])
def test_effective_coupling_examples(delta, sign):
    spec = _pair(delta, g=0.5)
    J = 2 * 0.5**2
    assert effective_coupling(spec, 0, 1) == pytest.approx(sign * J, abs=1e-12)
    assert effective_coupling(spec, 0, 1, "raw") == pytest.approx(sign * 4 * spec.g_c**2, abs=1e-12)


def test_effective_coupling_nulls_on_grid():
    k = np.arange(10_000)
    grid = k * math.pi / 5000
    expect_null = (k % 2500 == 0) & ((k // 2500) % 2 == 1)
    vals = np.array([effective_coupling(_pair(float(d)), 0, 1) for d in grid])
    np.testing.assert_array_equal(np.abs(vals) < 1e-12, expect_null)


def test_effective_coupling_errors():
    spec = SystemSpec.chain(3, 0.1)
    with pytest.raises(IndexError):
        effective_coupling(spec, 1, 1)
    with pytest.raises(IndexError):
        effective_coupling(spec, 0, 3)
    with pytest.raises(ValueError):
        effective_coupling(spec, 0, 1, "bogus")


def test_platform_coupling():
    two_pi = 2 * math.pi
    g = platform_coupling(200, two_pi * 0.18e6, two_pi * 0.03e6)
    assert g / two_pi / 1e6 == pytest.approx(0.52, abs=0.005)
    assert 2 * g / two_pi / 1e6 == pytest.approx(1.04, abs=0.01)
    assert platform_coupling(4, 1, 1) == 1.0


@pytest.mark.parametrize("args", [(0, 1, 1), (1, -1, 1), (1, 1, 0)])
def test_platform_coupling_domain(args):
    with pytest.raises(ValueError):
        platform_coupling(*args)
