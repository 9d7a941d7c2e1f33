"""Universal thermal laws, crossover temperatures and finite-size-scaling fits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq, curve_fit

from .errors import ExtrapolationError, NoCrossoverError, NoPowerLawError, ValidationError
from .qfi_core import _as_matrix


@dataclass(frozen=True)
class TwoLevelSpectrum:
    F0: float
    Delta: float
    mu_deg: int = 1
    nu_deg: int = 1

    def __post_init__(self) -> None:
        if self.F0 < 0 or self.Delta <= 0 or self.mu_deg < 1 or self.nu_deg < 1:
            raise ValidationError("need F0 >= 0, Delta > 0 and degeneracies >= 1")


def two_level_law(spec: TwoLevelSpectrum, T):
    """F0 tanh^2(Delta/2T) mu (1 + e^{-Delta/T}) / (mu + nu e^{-Delta/T})."""
    T = np.asarray(T, dtype=float)
    if np.any(T <= 0):
        raise ValidationError("temperature must be positive")
    boltz = np.exp(-spec.Delta / T)
    value = (spec.F0 * np.tanh(spec.Delta / (2 * T)) ** 2
             * spec.mu_deg * (1 + boltz) / (spec.mu_deg + spec.nu_deg * boltz))
    return float(value) if value.ndim == 0 else value


def degenerate_ground_qfi(states, op) -> float:
    """QFI of the equal mixture of mu orthonormal degenerate states."""
    states = np.asarray(states)
    if states.ndim != 2 or states.shape[1] < 2:
        raise ValidationError("need at least two states as columns")
    count = states.shape[1]
    if np.max(np.abs(states.conj().T @ states - np.eye(count))) > 1e-10:
        raise ValidationError("states are not orthonormal")
    mat = _as_matrix(op)
    images = np.asarray(mat @ states)
    within = states.conj().T @ images
    second = np.einsum("ik,ik->k", images.conj(), images).real
    return float(4.0 / count * np.sum(second - np.sum(np.abs(within) ** 2, axis=0)))


# ---------------------------------------------------------------------------
# Crossover temperature
# ---------------------------------------------------------------------------

def inflection_points(T, F, refine: int = 40) -> list[tuple[float, float]]:
    """Roots of d2F/dT2 with the slope |dF/dT| at each, from a natural spline in log T."""
    T, F = np.asarray(T, dtype=float), np.asarray(F, dtype=float)
    order = np.argsort(T)
    T, F = T[order], F[order]
    u = np.log(T)
    spline = CubicSpline(u, F, bc_type="natural")
    d1, d2 = spline.derivative(1), spline.derivative(2)

    def curvature(x):
        # d2F/dT2 * T^2 = F_uu - F_u
        return d2(x) - d1(x)

    fine = np.linspace(u[0], u[-1], refine * u.size)
    vals = curvature(fine)
    roots = []
    for a, b, va, vb in zip(fine[:-1], fine[1:], vals[:-1], vals[1:]):
        if va == 0.0:
            roots.append(a)
        elif va * vb < 0:
            roots.append(brentq(curvature, a, b, xtol=1e-14))
    return [(math.exp(r), abs(float(d1(r))) / math.exp(r)) for r in roots]


def crossover_temperature(T, F) -> float:
    """Temperature of the steepest inflection of F(T)."""
    if len(T) < 20:
        raise ValidationError("need at least 20 temperature samples")
    points = inflection_points(T, F)
    if not points:
        raise NoCrossoverError("no crossover in range: second derivative never changes sign")
    return max(points, key=lambda item: item[1])[0]


# ---------------------------------------------------------------------------
# Fits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalingSeries:
    xs: np.ndarray
    ys: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "xs", np.asarray(self.xs, dtype=float))
        object.__setattr__(self, "ys", np.asarray(self.ys, dtype=float))
        if self.xs.shape != self.ys.shape:
            raise ValidationError("xs and ys must have equal length")


@dataclass(frozen=True)
class FitResult:
    """Fitted parameters, one-sigma errors and residual diagnostics.

    ``rms`` is the root mean square of the relative residuals (y - fit)/y.
    """

    model: str
    params: dict
    sigmas: dict
    rms: float
    x_range: tuple[float, float]
    r_squared: float = float("nan")
    extra: dict = field(default_factory=dict)

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.model == "power":
            return p.get("c", 0.0) + p["a"] * x ** p["b"]
        if self.model == "exponential":
            return p["A"] * np.exp(-x / p["x0"])
        if self.model == "linear":
            return p["intercept"] + p["slope"] * x
        raise ValidationError(f"unknown model {self.model}")

    def predict(self, x, allow_extrapolation: bool = False) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lo, hi = self.x_range
        if not allow_extrapolation and (np.any(x > 2 * hi) or np.any(x < lo / 2)):
            raise ExtrapolationError(
                f"x outside twice the sampled range [{lo:g}, {hi:g}]; pass allow_extrapolation")
        return self.evaluate(x)


def _xy(series) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(series, ScalingSeries):
        return series.xs, series.ys
    xs, ys = series
    return np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)


def _linear_fit(x: np.ndarray, y: np.ndarray):
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    dof = max(x.size - 2, 1)
    cov = np.linalg.inv(design.T @ design) * (resid @ resid) / dof
    total = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - (resid @ resid) / total if total > 0 else 1.0
    return coef, np.sqrt(np.diag(cov)), resid, r2


def _check_samples(x, y, need_positive_x: bool) -> None:
    if x.size < 5:
        raise ValidationError("need at least 5 samples for a fit")
    if np.any(y <= 0) or (need_positive_x and np.any(x <= 0)):
        raise ValidationError("log fits need positive data")


def fit_power_law(series, offset: bool = False) -> FitResult:
    """y = a x^b by log-log regression, optionally refined to y = c + a x^b."""
    x, y = _xy(series)
    _check_samples(x, y, True)
    coef, sig, resid, r2 = _linear_fit(np.log(x), np.log(y))
    a, b = math.exp(coef[0]), coef[1]
    params = {"a": a, "b": b}
    sigmas = {"a": a * sig[0], "b": sig[1]}
    if offset:
        def model(xx, c, aa, bb):
            return c + aa * xx**bb
        popt, pcov = curve_fit(model, x, y, p0=[0.0, a, b], maxfev=20000)
        perr = np.sqrt(np.abs(np.diag(pcov)))
        params = {"c": popt[0], "a": popt[1], "b": popt[2]}
        sigmas = {"c": perr[0], "a": perr[1], "b": perr[2]}
    fit = FitResult("power", params, sigmas, 0.0, (float(x.min()), float(x.max())), r2)
    rms = float(np.sqrt(np.mean(((y - fit.evaluate(x)) / y) ** 2)))
    return FitResult("power", params, sigmas, rms, fit.x_range, r2)


def fit_exponential(series) -> FitResult:
    """y = A exp(-x / x0) by regression of log y on x."""
    x, y = _xy(series)
    _check_samples(x, y, False)
    coef, sig, resid, r2 = _linear_fit(x, np.log(y))
    slope = coef[1]
    if slope == 0:
        raise ValidationError("flat data: decay length undefined")
    x0 = -1.0 / slope
    params = {"A": math.exp(coef[0]), "x0": x0}
    sigmas = {"A": params["A"] * sig[0], "x0": sig[1] / slope**2}
    fit = FitResult("exponential", params, sigmas, 0.0, (float(x.min()), float(x.max())), r2)
    rms = float(np.sqrt(np.mean(((y - fit.evaluate(x)) / y) ** 2)))
    return FitResult("exponential", params, sigmas, rms, fit.x_range, r2)


def fit_linear(series) -> FitResult:
    """y = intercept + slope x by ordinary least squares."""
    x, y = _xy(series)
    if x.size < 5:
        raise ValidationError("need at least 5 samples for a fit")
    coef, sig, resid, r2 = _linear_fit(x, y)
    params = {"intercept": coef[0], "slope": coef[1]}
    sigmas = {"intercept": sig[0], "slope": sig[1]}
    scale = np.max(np.abs(y)) or 1.0
    rms = float(np.sqrt(np.mean(resid**2)) / scale)
    return FitResult("linear", params, sigmas, rms, (float(x.min()), float(x.max())), r2)


def qc_decay_exponent(T, F, T_lo: float, T_hi: float, max_log_rms: float = 0.03) -> FitResult:
    """Power-law decay F ~ a T^b inside [T_lo, T_hi].

    The window must span at least half a decade. A window whose log-log
    residual RMS exceeds ``max_log_rms`` is rejected as not power law.
    """
    if T_hi / T_lo < math.sqrt(10.0):
        raise ValidationError("window narrower than half a decade")
    T, F = np.asarray(T, dtype=float), np.asarray(F, dtype=float)
    mask = (T >= T_lo) & (T <= T_hi)
    x, y = T[mask], F[mask]
    _check_samples(x, y, True)
    coef, sig, resid, r2 = _linear_fit(np.log(x), np.log(y))
    log_rms = float(np.sqrt(np.mean(resid**2)))
    if log_rms > max_log_rms:
        raise NoPowerLawError(f"log-log residual RMS {log_rms:.3g} exceeds {max_log_rms:g}")
    params = {"a": math.exp(coef[0]), "b": coef[1]}
    sigmas = {"a": params["a"] * sig[0], "b": sig[1]}
    return FitResult("power", params, sigmas, log_rms, (float(x.min()), float(x.max())), r2,
                     {"window": (T_lo, T_hi)})


# ---------------------------------------------------------------------------
# Data collapse
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CollapseResult:
    rms: float
    grid: np.ndarray
    curves: dict

    def deviation_from(self, reference: Callable[[np.ndarray], np.ndarray]) -> float:
        """Largest relative deviation of any rescaled curve from ``reference``."""
        ref = reference(self.grid)
        return float(max(np.max(np.abs(vals - ref) / np.abs(ref)) for vals in self.curves.values()))


def data_collapse(curves: Mapping[float, tuple], exponents: tuple[float, float],
                  n_grid: int = 60) -> CollapseResult:
    """Rescale (x, y) -> (x N^ax, y N^-ay) and measure the spread between sizes.

    ``exponents`` is (ay, ax). The spread is the RMS over a common grid of the
    standard deviation across sizes divided by the mean magnitude.
    """
    if len(curves) < 3:
        raise ValidationError("need at least three system sizes")
    ay, ax = exponents
    rescaled = {}
    for size, (x, y) in curves.items():
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        order = np.argsort(x)
        rescaled[size] = (x[order] * size**ax, y[order] * size ** (-ay))
    lo = max(v[0][0] for v in rescaled.values())
    hi = min(v[0][-1] for v in rescaled.values())
    if not hi > lo * (1 + 1e-9):
        raise ValidationError("rescaled abscissae do not overlap")
    use_log = lo > 0
    grid = np.geomspace(lo, hi, n_grid) if use_log else np.linspace(lo, hi, n_grid)
    values = {}
    for size, (x, y) in rescaled.items():
        if use_log:
            values[size] = np.interp(np.log(grid), np.log(x), y)
        else:
            values[size] = np.interp(grid, x, y)
    stack = np.vstack(list(values.values()))
    spread = stack.std(axis=0) / np.maximum(np.abs(stack).mean(axis=0), 1e-300)
    return CollapseResult(float(np.sqrt(np.mean(spread**2))), grid, values)
