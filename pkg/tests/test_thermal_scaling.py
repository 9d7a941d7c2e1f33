import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_state, random_unitary
from qfi_criticality.errors import (
    ExtrapolationError,
    NoCrossoverError,
    NoPowerLawError,
    ValidationError,
)
from qfi_criticality.lmg_model import LMGSpec, LMGThermal, lmg_eigensystem, lmg_gaps
from qfi_criticality.qfi_core import CollectiveOperator, SpectralDecomposition, mixed_state_qfi, pure_state_qfi
from qfi_criticality.spin_ed import IsingSpec, ground_state_ed, thermal_qfi_curve
from qfi_criticality.thermal_scaling import (
    ScalingSeries,
    TwoLevelSpectrum,
    crossover_temperature,
    data_collapse,
    degenerate_ground_qfi,
    fit_exponential,
    fit_linear,
    fit_power_law,
    inflection_points,
    qc_decay_exponent,
    two_level_law,
)


# --- two-level law ----------------------------------------------------------

def test_nondegenerate_law_is_tanh_squared():
    T = np.geomspace(0.05, 10, 30)
    np.testing.assert_allclose(two_level_law(TwoLevelSpectrum(3.0, 1.5), T), 3.0 * np.tanh(1.5 / (2 * T)) ** 2,
                               rtol=1e-14)


def test_degenerate_excited_level():
    L, F0 = 10, 4.0
    value = two_level_law(TwoLevelSpectrum(F0, 2.0, 1, L), 1.0)
    expected = F0 * math.tanh(1.0) ** 2 * (1 + math.exp(-2)) / (1 + L * math.exp(-2))
    assert value == pytest.approx(expected, rel=1e-14)


def test_zero_temperature_limit():
    assert two_level_law(TwoLevelSpectrum(7.0, 1.0, 2, 5), 1e-3) == pytest.approx(7.0, rel=1e-12)


def test_law_validation():
    with pytest.raises(ValidationError):
        TwoLevelSpectrum(-1.0, 1.0)
    with pytest.raises(ValidationError):
        TwoLevelSpectrum(1.0, 0.0)
    with pytest.raises(ValidationError):
        two_level_law(TwoLevelSpectrum(1.0, 1.0), 0.0)


@given(st.integers(1, 3), st.integers(1, 3), st.floats(0.2, 3), st.floats(0.05, 10), st.integers(0, 2**31))
def test_law_equals_brute_force_mixed_qfi(mu, nu, gap, T, seed):
    rng = np.random.default_rng(seed)
    dim = mu + nu
    vectors = random_unitary(rng, dim)
    energies = np.array([0.0] * mu + [gap] * nu)
    raw = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    op = (raw + raw.conj().T) / 2
    ground = vectors[:, :mu]
    F0 = degenerate_ground_qfi(ground, op) if mu > 1 else pure_state_qfi(ground[:, 0], op)
    direct = mixed_state_qfi(SpectralDecomposition.thermal(energies, vectors, T), op)
    assert two_level_law(TwoLevelSpectrum(F0, gap, mu, nu), T) == pytest.approx(direct, rel=1e-8, abs=1e-12)


# --- degenerate ground level ------------------------------------------------

def test_ising_doublet_matches_mixture():
    spec = IsingSpec(10, -1.2)
    vectors = ground_state_ed(spec).eigenvectors[:, :2]
    op = CollectiveOperator("z", 10)
    mixture = SpectralDecomposition(np.array([0.5, 0.5]), vectors)
    assert degenerate_ground_qfi(vectors, op) == pytest.approx(mixed_state_qfi(mixture, op), rel=1e-10)


def test_flip_partners_cancel_ghz_variance():
    spec = IsingSpec(10, -1.2)
    vectors = ground_state_ed(spec).eigenvectors[:, :2]
    broken = np.column_stack([vectors[:, 0] + vectors[:, 1], vectors[:, 0] - vectors[:, 1]]) / math.sqrt(2)
    op = CollectiveOperator("z", 10)
    assert degenerate_ground_qfi(broken, op) < 0.05 * pure_state_qfi(vectors[:, 0], op)


def test_lmg_doublet_plateau():
    N, lam = 1000, -1.5
    system = lmg_eigensystem(LMGSpec(N, lam))
    order = np.argsort(system.energies)
    doublet = system.vectors[:, order[:2]]
    value = degenerate_ground_qfi(doublet, CollectiveOperator("z", N, basis="dicke"))
    assert value == pytest.approx(N / (abs(lam) * math.sqrt(lam**2 - 1)), rel=0.05)


def test_degenerate_input_validation(rng):
    with pytest.raises(ValidationError):
        degenerate_ground_qfi(random_state(rng, 4)[:, None], np.eye(4))
    with pytest.raises(ValidationError):
        degenerate_ground_qfi(np.ones((4, 2)) / 2, np.eye(4))


# --- crossover --------------------------------------------------------------

def test_two_level_crossover_ratio():
    T = np.geomspace(0.05, 5, 200)
    assert 1 / crossover_temperature(T, np.tanh(1 / (2 * T)) ** 2) == pytest.approx(2.70, rel=0.02)


def test_ising_crossover_ratio():
    spec = IsingSpec(10, 0.3)
    result = ground_state_ed(spec)
    op = CollectiveOperator("z", 10, staggered=True)
    T = np.geomspace(0.05, 5, 60) * result.gap1
    F = thermal_qfi_curve(result, T, op)
    assert result.gap1 / crossover_temperature(T, F) == pytest.approx(2.54, rel=0.10)


def test_lmg_crossover_ratio():
    spec = LMGSpec(2000, -0.5)
    thermal, gap = LMGThermal(spec), lmg_gaps(spec)[0]
    T = np.geomspace(0.05, 5, 80) * gap
    F = [thermal.qfi(t) for t in T]
    assert gap / crossover_temperature(T, F) == pytest.approx(2.40, rel=0.10)


def test_no_crossover_for_convex_decay():
    T = np.geomspace(0.1, 10, 40)
    with pytest.raises(NoCrossoverError):
        crossover_temperature(T, 1 / T)
    with pytest.raises(ValidationError):
        crossover_temperature(T[:10], 1 / T[:10])


def test_steepest_of_two_knees():
    T = np.geomspace(0.01, 50, 400)
    # the small gap carries most of the weight, so its knee is steepest in T
    F = np.tanh(0.5 / (2 * T)) ** 2 + 0.2 * np.tanh(5.0 / (2 * T)) ** 2
    points = inflection_points(T, F)
    assert len(points) >= 2
    assert 0.5 / crossover_temperature(T, F) == pytest.approx(2.70, rel=0.03)


@given(st.floats(0.01, 100), st.floats(-10, 10))
def test_crossover_invariant_under_affine_rescaling(scale, shift):
    T = np.geomspace(0.05, 5, 120)
    F = np.tanh(1 / (2 * T)) ** 2
    assert crossover_temperature(T, scale * F + shift) == pytest.approx(crossover_temperature(T, F), rel=1e-6)


# --- fits -------------------------------------------------------------------

def test_synthetic_power_law(rng):
    x = np.geomspace(10, 1000, 12)
    y = 3 * x**0.75 * (1 + 0.01 * rng.normal(size=x.size))
    fit = fit_power_law(ScalingSeries(x, y))
    assert fit.params["b"] == pytest.approx(0.75, abs=0.02)
    assert fit.params["a"] == pytest.approx(3.0, rel=0.1)
    assert fit.rms < 0.02


def test_power_law_with_offset():
    x = np.geomspace(8, 512, 8)
    fit = fit_power_law((x, -1.0 + 2.0 * x**0.5), offset=True)
    assert fit.params["b"] == pytest.approx(0.5, abs=1e-6)
    assert fit.params["c"] == pytest.approx(-1.0, abs=1e-4)


@given(st.floats(1e-3, 1e3), st.floats(-2, 2))
def test_power_fit_is_scale_equivariant(scale, b):
    x = np.geomspace(1, 100, 7)
    y = 2 * x**b * (1 + 0.05 * np.sin(x))
    base, scaled = fit_power_law((x, y)), fit_power_law((x, scale * y))
    assert scaled.params["b"] == pytest.approx(base.params["b"], abs=1e-10)
    assert scaled.params["a"] == pytest.approx(scale * base.params["a"], rel=1e-10)


def test_extrapolation_guard():
    x = np.geomspace(10, 100, 6)
    fit = fit_power_law((x, x**0.5))
    assert fit.predict(150.0) == pytest.approx(150**0.5)
    with pytest.raises(ExtrapolationError):
        fit.predict(250.0)
    with pytest.raises(ExtrapolationError):
        fit.predict(4.0)
    assert fit.predict(1000.0, allow_extrapolation=True) == pytest.approx(1000**0.5)


def test_fit_preconditions():
    with pytest.raises(ValidationError):
        fit_power_law(([1, 2, 3, 4], [1, 2, 3, 4]))
    with pytest.raises(ValidationError):
        fit_power_law(([1, 2, 3, 4, 5], [1, 2, 0, 4, 5]))
    with pytest.raises(ValidationError):
        fit_exponential(([1, 2, 3, 4, 5], [1, 1, 1, 1, 1]))
    with pytest.raises(ValidationError):
        ScalingSeries([1, 2], [1])


def test_exponential_fit():
    x = np.arange(4, 16, 2.0)
    fit = fit_exponential((x, 1.7 * np.exp(-x / 2.5)))
    assert fit.params["x0"] == pytest.approx(2.5, rel=1e-10)
    assert fit.params["A"] == pytest.approx(1.7, rel=1e-10)


def test_linear_fit():
    x = np.linspace(0, 1, 6)
    fit = fit_linear((x, 2 - 3 * x))
    assert fit.params["slope"] == pytest.approx(-3.0)
    assert fit.params["intercept"] == pytest.approx(2.0)


def test_ising_gap_closes_exponentially():
    sizes = [4, 6, 8, 10, 12]
    gaps = [ground_state_ed(IsingSpec(N, -1.2)).gap1 for N in sizes]
    fit = fit_exponential((sizes, gaps))
    assert fit.params["x0"] == pytest.approx(1.5 * abs(1 - 1 / math.tan(-1.2)) ** -0.85, rel=0.1)


# --- quantum-critical decay -------------------------------------------------

def test_lmg_critical_decay():
    N = 2000
    T = np.geomspace(0.1, 1, 30)
    thermal = LMGThermal(LMGSpec(N, -1.0))
    density = np.array([thermal.qfi(t) for t in T]) / N
    fit = qc_decay_exponent(T, density, 0.1, 1.0)
    assert fit.params["b"] == pytest.approx(-1.0, abs=0.1)
    np.testing.assert_allclose(density * T, 0.5, atol=0.1)


def test_ising_critical_decay():
    result = ground_state_ed(IsingSpec(12, -math.pi / 4))
    op = CollectiveOperator("z", 12)
    # at N = 12 the slope steepens above T ~ 0.5 toward the high-temperature regime
    T = np.geomspace(0.1, 0.5, 16)
    fit = qc_decay_exponent(T, thermal_qfi_curve(result, T, op), 0.1, 0.5)
    assert fit.params["b"] == pytest.approx(-0.75, abs=0.2)


def test_tanh_knee_is_not_a_power_law():
    T = np.geomspace(0.05, 20, 80)
    F = np.tanh(1 / (2 * T)) ** 2
    for lo, hi in ((0.1, 1.0), (0.05, 0.5), (0.2, 2.0), (0.5, 5.0)):
        with pytest.raises(NoPowerLawError):
            qc_decay_exponent(T, F, lo, hi)


def test_decay_window_too_narrow():
    T = np.geomspace(0.1, 1, 30)
    with pytest.raises(ValidationError):
        qc_decay_exponent(T, 1 / T, 0.1, 0.3)


# --- data collapse ----------------------------------------------------------

@pytest.fixture(scope="module")
def lmg_critical_family():
    T = np.geomspace(0.02, 2, 40)
    return {N: (T, np.array([LMGThermal(LMGSpec(N, -1.0)).qfi(t) for t in T])) for N in (500, 1000, 2000)}


def test_critical_collapse(lmg_critical_family):
    assert data_collapse(lmg_critical_family, (4 / 3, 1 / 3)).rms < 0.05


def test_wrong_exponents_do_not_collapse(lmg_critical_family):
    assert data_collapse(lmg_critical_family, (1.0, 1.0)).rms > 0.2


def test_collapse_preconditions():
    x = np.linspace(1, 2, 10)
    with pytest.raises(ValidationError):
        data_collapse({10: (x, x)}, (1, 1))
    with pytest.raises(ValidationError):
        data_collapse({1: (x, x), 100: (x, x), 10_000: (x, x)}, (0, 1))


def test_exact_scaling_form_collapses_perfectly():
    def phi(u):
        return np.tanh(1 / (2 * u))

    curves = {}
    for N in (100, 200, 400, 800):
        T = np.geomspace(0.01, 1, 50)
        curves[N] = (T, N ** (4 / 3) * phi(T * N ** (1 / 3)))
    result = data_collapse(curves, (4 / 3, 1 / 3))
    assert result.rms < 1e-3
    assert result.deviation_from(phi) < 5e-3
