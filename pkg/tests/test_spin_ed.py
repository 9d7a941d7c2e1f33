import math
from math import comb

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from qfi_criticality.errors import CapacityError, ValidationError
from qfi_criticality.free_fermion import build_ising_nn_fermion, diagonalize, many_body_spectrum
from qfi_criticality.qfi_core import CollectiveOperator, pure_state_qfi
from qfi_criticality.spin_ed import (
    IsingSpec,
    build_ising,
    correlator_fq_density,
    fidelity_susceptibility_numeric,
    ground_state_ed,
    optimal_ising_qfi,
    order_parameter,
    perturbative_fq_jy,
    spin_flip_parity,
    thermal_qfi_curve,
    thermal_qfi_ed,
)
from qfi_criticality.thermal_scaling import ScalingSeries, TwoLevelSpectrum, fit_power_law, two_level_law


def spectrum(spec):
    return np.linalg.eigvalsh(build_ising(spec).toarray())


# --- build_ising ------------------------------------------------------------

def test_free_spectrum_is_binomial():
    N = 6
    expected = np.sort(np.concatenate([np.full(comb(N, n), -(N - 2 * n)) for n in range(N + 1)]))
    np.testing.assert_allclose(spectrum(IsingSpec(N, 0.0)), expected, atol=1e-12)


def test_two_spin_spectrum_by_hand():
    # singlet -s, antisymmetric triplet +s, symmetric pair [[s, 2c], [2c, -s]]
    values = spectrum(IsingSpec(2, math.pi / 4, alpha=0.7))
    np.testing.assert_allclose(values, [-math.sqrt(2.5), -math.sqrt(0.5), math.sqrt(0.5), math.sqrt(2.5)],
                               atol=1e-12)


@pytest.mark.parametrize("theta", [-1.2, -0.4, 0.3, 1.0])
def test_spectrum_invariant_under_shift_by_pi_with_sign_flip(theta):
    spec = IsingSpec(6, theta, alpha=1.5)
    shifted = IsingSpec(6, 0.0, alpha=1.5, J=-1.0)
    object.__setattr__(shifted, "theta", theta + math.pi)
    np.testing.assert_allclose(spectrum(shifted), spectrum(spec), atol=1e-12)


def test_capacity_limit():
    with pytest.raises(CapacityError):
        build_ising(IsingSpec(16, 0.1))


def test_spec_validation():
    with pytest.raises(ValidationError):
        IsingSpec(5, 0.1)
    with pytest.raises(ValidationError):
        IsingSpec(6, 2.0)


# --- ground_state_ed --------------------------------------------------------

@pytest.mark.parametrize("theta", [-0.7, -0.3, 0.0, 0.4, 0.75])
def test_nearest_neighbour_chain_gapped_in_paramagnet(theta):
    assert ground_state_ed(IsingSpec(8, theta)).gap1 > 0.1


@pytest.mark.parametrize("theta", [-math.pi / 2, math.pi / 2])
def test_classical_edges_are_degenerate(theta):
    result = ground_state_ed(IsingSpec(8, theta, alpha=2.0))
    assert result.gap1 <= 1e-10
    assert result.parities[0] == 1


def test_gap_matches_free_fermions():
    result = ground_state_ed(IsingSpec(10, -0.6))
    green = diagonalize(build_ising_nn_fermion(10, -0.6, boundary="open"))
    assert result.gap1 == pytest.approx(green.energies[0], abs=1e-8)


def test_eigenvectors_have_definite_parity():
    for N in (4, 6, 8, 10):
        result = ground_state_ed(IsingSpec(N, -0.5, alpha=1.3))
        flip = spin_flip_parity(N)
        vecs = result.eigenvectors
        parity = np.einsum("ij,ij->j", vecs, flip @ vecs)
        np.testing.assert_allclose(np.abs(parity), 1.0, atol=1e-10)
        np.testing.assert_allclose(parity, result.parities, atol=1e-10)


@pytest.mark.parametrize("N", [4, 6, 8, 10, 12])
def test_spectrum_equals_fermion_many_body(N):
    theta = -0.45
    result = ground_state_ed(IsingSpec(N, theta))
    levels = many_body_spectrum(diagonalize(build_ising_nn_fermion(N, theta, boundary="open")))
    np.testing.assert_allclose(result.energies, levels, atol=1e-8)


# --- order parameter --------------------------------------------------------

def test_order_parameter_vanishes_in_paramagnet():
    spec = IsingSpec(8, 0.0)
    assert order_parameter(ground_state_ed(spec), spec) == pytest.approx(0, abs=1e-10)


def test_ferromagnetic_order_parameter():
    spec = IsingSpec(10, -math.pi / 2, eps_long=-1e-3)
    assert abs(order_parameter(ground_state_ed(spec), spec)) == pytest.approx(1, abs=1e-3)


def test_antiferromagnetic_order_parameter():
    spec = IsingSpec(10, math.pi / 2, eps_long=-1e-3, staggered_eps=True)
    assert abs(order_parameter(ground_state_ed(spec), spec)) == pytest.approx(1, abs=1e-3)


# --- fidelity susceptibility ------------------------------------------------

def test_constant_ground_state_has_zero_susceptibility():
    psi = np.ones(8) / math.sqrt(8)
    result = fidelity_susceptibility_numeric(lambda lam: psi, 0.3)
    assert abs(result.value) < 1e-8


def test_level_crossing_flagged():
    states = {True: np.array([1.0, 0.0]), False: np.array([0.0, 1.0])}
    result = fidelity_susceptibility_numeric(lambda lam: states[lam < 0], 0.0)
    assert result.level_crossing and not result.converged


def test_ed_susceptibility_converges():
    def provider(theta):
        return ground_state_ed(IsingSpec(8, theta)).ground_state
    result = fidelity_susceptibility_numeric(provider, -0.5)
    assert result.converged
    assert result.value == pytest.approx(result.half_step_value, rel=0.01)


# --- thermal QFI ------------------------------------------------------------

def test_low_temperature_limit():
    spec = IsingSpec(8, -0.3)
    result = ground_state_ed(spec)
    op = CollectiveOperator("z", 8)
    pure = pure_state_qfi(result.ground_state, op)
    assert thermal_qfi_ed(result, 1e-3 * result.gap1, op) == pytest.approx(pure, rel=1e-6)


def test_high_temperature_decoheres():
    result = ground_state_ed(IsingSpec(8, -0.3))
    assert thermal_qfi_ed(result, 100.0, CollectiveOperator("z", 8)) / 8 < 0.05


def test_thermal_qfi_tracks_two_level_law():
    result = ground_state_ed(IsingSpec(8, -0.3))
    op = CollectiveOperator("z", 8)
    law = TwoLevelSpectrum(pure_state_qfi(result.ground_state, op), result.gap1)
    for T in np.linspace(0.02, 0.3, 10) * result.gap1:
        assert thermal_qfi_ed(result, T, op) == pytest.approx(two_level_law(law, T), rel=0.05)


def test_nonpositive_temperature_rejected():
    with pytest.raises(ValidationError):
        thermal_qfi_ed(ground_state_ed(IsingSpec(4, 0.1)), 0.0, CollectiveOperator("z", 4))


# --- optimal QFI ------------------------------------------------------------

def test_paramagnet_is_classical():
    spec = IsingSpec(8, 0.0)
    assert optimal_ising_qfi(ground_state_ed(spec), spec)[0] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("theta", [-math.pi / 2, math.pi / 2])
def test_classical_edges_reach_heisenberg(theta):
    spec = IsingSpec(8, theta)
    value, op = optimal_ising_qfi(ground_state_ed(spec), spec)
    assert value == pytest.approx(8, abs=1e-8)
    assert op.axis == "z" and op.staggered == (theta > 0)


def test_critical_qfi_trend():
    sizes = [4, 6, 8, 10, 12]
    values = []
    for N in sizes:
        spec = IsingSpec(N, -math.pi / 4)
        values.append(optimal_ising_qfi(ground_state_ed(spec), spec)[0])
    fit = fit_power_law(ScalingSeries(np.array(sizes, float), np.array(values)))
    assert 0.6 < fit.params["b"] < 0.9


@pytest.mark.parametrize("theta", [0.2, 0.5, 1.0])
def test_qfi_symmetric_under_sign_of_interaction(theta):
    plus, minus = IsingSpec(8, theta), IsingSpec(8, -theta)
    assert optimal_ising_qfi(ground_state_ed(plus), plus)[0] == pytest.approx(
        optimal_ising_qfi(ground_state_ed(minus), minus)[0], rel=1e-10)


@given(st.floats(-1.5, 1.5), st.sampled_from([0.5, 1.0, 3.0, math.inf]))
def test_correlator_sum_equals_variance(theta, alpha):
    spec = IsingSpec(6, theta, alpha=alpha)
    psi = ground_state_ed(spec).ground_state
    for staggered in (False, True):
        op = CollectiveOperator("z", 6, staggered=staggered)
        assert correlator_fq_density(psi, 6, staggered) == pytest.approx(
            pure_state_qfi(psi, op) / 6, abs=1e-10)


# --- perturbative long-range result ----------------------------------------

def test_perturbative_short_range_limit():
    from scipy.special import zeta
    assert perturbative_fq_jy(2000, 0.1, 10.0) == pytest.approx(1 + 0.1 * zeta(10), rel=1e-3)


def test_perturbative_zero_theta():
    assert perturbative_fq_jy(50, 0.0, 1.0) == 1.0


def test_perturbative_log_growth_at_alpha_one():
    sizes = np.array([100, 300, 1000, 3000, 10000])
    with pytest.warns(RuntimeWarning):
        values = [perturbative_fq_jy(int(N), 0.1, 1.0) for N in sizes]
    slope = np.polyfit(np.log(sizes), values, 1)[0]
    assert slope == pytest.approx(0.1, rel=0.15)


def test_first_order_coefficient_matches_ed():
    # exact first-order ED coefficient is pair_sum / N; the closed form uses
    # pair_sum / sqrt(N (N - 1)), a 1/N normalization difference
    theta = 1e-4
    for alpha in (1.0, 3.0, math.inf):
        for N in (4, 8, 10):
            psi = ground_state_ed(IsingSpec(N, theta, alpha=alpha)).ground_state
            ed = (pure_state_qfi(psi, CollectiveOperator("y", N)) / N - 1) / theta
            closed = (perturbative_fq_jy(N, theta, alpha) - 1) / theta
            assert ed / closed == pytest.approx(math.sqrt((N - 1) / N), rel=1e-3)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 10.0])
def test_perturbative_agrees_with_ed_to_second_order(alpha):
    N, theta = 12, 0.02
    psi = ground_state_ed(IsingSpec(N, theta, alpha=alpha)).ground_state
    ed = pure_state_qfi(psi, CollectiveOperator("y", N)) / N
    first = (perturbative_fq_jy(N, theta, alpha) - 1) * math.sqrt((N - 1) / N)
    assert abs(ed - 1 - first) <= first**2


def test_thermal_curve_matches_pointwise():
    result = ground_state_ed(IsingSpec(8, -0.5))
    op = CollectiveOperator("z", 8)
    temps = [0.03, 0.3, 3.0, 30.0]
    expected = [thermal_qfi_ed(result, t, op) for t in temps]
    np.testing.assert_allclose(thermal_qfi_curve(result, temps, op), expected, rtol=1e-12, atol=1e-12)
    with pytest.raises(ValidationError):
        thermal_qfi_curve(result, [0.0], op)
