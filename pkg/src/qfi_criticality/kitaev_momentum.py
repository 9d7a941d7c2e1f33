"""Momentum-space solution of the closed Kitaev ring with long-range pairing.

On the antiperiodic grid k_n = (2 pi / L)(n + 1/2) each mode pair (k, -k)
is a two-level problem with pseudospin
    eps_k sin(Theta_k) = -(Delta/2) f_alpha(k),
    eps_k cos(Theta_k) = -(J cos k + mu).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError, WindingUndefinedError

GAP_TOLERANCE = 1e-6


@dataclass(frozen=True)
class MomentumGrid:
    """Antiperiodic momenta; k = pi is never on the grid (closest: pi +- pi/L)."""

    L: int

    def __post_init__(self) -> None:
        if self.L < 2 or self.L % 2:
            raise ValidationError(f"L must be even and >= 2, got {self.L}")

    @property
    def k(self) -> np.ndarray:
        return 2 * math.pi / self.L * (np.arange(self.L) + 0.5)

    @property
    def half_zone(self) -> np.ndarray:
        """Momenta with 0 < k < pi (n = 0 .. L/2 - 1)."""
        return self.k[: self.L // 2]


def momentum_grid(L: int) -> MomentumGrid:
    return MomentumGrid(L)


def _grid_of(grid_or_L) -> MomentumGrid:
    return grid_or_L if isinstance(grid_or_L, MomentumGrid) else MomentumGrid(int(grid_or_L))


def pairing_weights(L: int, alpha: float, log_derivative: bool = False) -> np.ndarray:
    """d_l^-alpha for l = 1..L-1 (times -ln d_l for the alpha derivative)."""
    ell = np.arange(1, L)
    dist = np.minimum(ell, L - ell).astype(float)
    if math.isinf(alpha):
        weights = np.where(dist == 1, 1.0, 0.0)
    else:
        weights = dist ** (-alpha)
    if log_derivative:
        weights = -np.log(dist) * weights
    return weights


def _sine_sum(k, L: int, weights: np.ndarray) -> np.ndarray:
    k = np.atleast_1d(np.asarray(k, dtype=float))
    ell = np.arange(1, L)
    out = np.empty(k.size)
    chunk = max(1, 2_000_000 // L)
    for start in range(0, k.size, chunk):
        block = k[start:start + chunk]
        out[start:start + chunk] = np.sin(np.outer(block, ell)) @ weights
    return out


def _grid_sine_sum(L: int, weights: np.ndarray) -> np.ndarray:
    # sum_l w_l sin(k_n l) with k_n l = 2 pi n l / L + pi l / L
    coeff = np.zeros(L, dtype=complex)
    coeff[1:] = weights * np.exp(1j * math.pi * np.arange(1, L) / L)
    return (np.fft.ifft(coeff) * L).imag


def pairing_function(k, L: int, alpha: float) -> np.ndarray:
    """f_alpha(k) = sum_{l=1}^{L-1} sin(k l) / d_l^alpha, d_l = min(l, L - l).

    ``k=None`` evaluates on the whole antiperiodic grid through an FFT.
    """
    if alpha < 0:
        raise ValidationError("alpha must be nonnegative")
    weights = pairing_weights(L, alpha)
    if k is None:
        return _grid_sine_sum(L, weights)
    result = _sine_sum(k, L, weights)
    return result if np.ndim(k) else float(result[0])


def pairing_function_dalpha(k, L: int, alpha: float) -> np.ndarray:
    """Analytic derivative -sum ln(d_l) sin(k l) / d_l^alpha."""
    weights = pairing_weights(L, alpha, log_derivative=True)
    if k is None:
        return _grid_sine_sum(L, weights)
    result = _sine_sum(k, L, weights)
    return result if np.ndim(k) else float(result[0])


@dataclass(frozen=True)
class BogoliubovSolution:
    k: np.ndarray
    eps_k: np.ndarray
    theta_k: np.ndarray
    f_k: np.ndarray

    @property
    def min_gap(self) -> float:
        return float(np.min(self.eps_k))


def bogoliubov_solution(grid, J: float = 1.0, mu: float = 0.0, pairing: float = 1.0,
                        alpha: float = math.inf) -> BogoliubovSolution:
    """Quasiparticle energies and Bogoliubov angles on the full grid."""
    grid = _grid_of(grid)
    k = grid.k
    f = pairing_function(None, grid.L, alpha)
    h_y = -(pairing / 2) * f
    h_z = -(J * np.cos(k) + mu)
    return BogoliubovSolution(k, np.hypot(h_y, h_z), np.arctan2(h_y, h_z), f)


def min_gap(L: int, J: float = 1.0, mu: float = 0.0, pairing: float = 1.0,
            alpha: float = math.inf) -> float:
    return bogoliubov_solution(L, J, mu, pairing, alpha).min_gap


def _on_critical_line(J: float, mu: float, pairing: float, alpha: float) -> bool:
    """Gap closing in the thermodynamic limit, which the antiperiodic grid never samples.

    k = pi closes at mu = J for every alpha; k = 0 closes at mu = -J only when
    f_alpha(0) = 0, i.e. alpha > 1; without pairing the band touches zero for |mu| <= |J|.
    """
    tol = GAP_TOLERANCE * max(abs(J), 1.0)
    if abs(pairing) < tol:
        return abs(mu) <= abs(J) + tol
    return abs(mu - J) < tol or (alpha > 1 and abs(mu + J) < tol)


def winding_number(J: float, mu: float, pairing: float, alpha: float, L: int = 4096) -> float:
    """Winding of the pseudospin (sin Theta, cos Theta) across the zone.

    Steps between neighbouring momenta are unwrapped to the nearest branch.
    The closing step k_{L-1} -> k_0 + 2 pi is added when the pseudospin is
    continuous through k = 0 (alpha > 1); for alpha <= 1 the pairing
    function diverges or jumps there and that step is excluded, which is
    what produces half-integer values.
    """
    if L < 32:
        raise ValidationError("winding number needs L >= 32")
    sol = bogoliubov_solution(L, J, mu, pairing, alpha)
    if _on_critical_line(J, mu, pairing, alpha) or sol.min_gap < GAP_TOLERANCE * abs(J if J else 1.0):
        raise WindingUndefinedError("winding undefined at criticality (gapless spectrum)")
    theta = sol.theta_k
    steps = np.angle(np.exp(1j * np.diff(theta)))
    if alpha > 1:
        steps = np.append(steps, np.angle(np.exp(1j * (theta[0] - theta[-1]))))
    if np.any(np.abs(steps) >= math.pi - 1e-9):
        raise WindingUndefinedError("angle step reaches pi; grid too coarse")
    total = steps.sum() / (2 * math.pi)
    rounded = round(2 * total) / 2
    if abs(total - rounded) >= 0.1:
        raise WindingUndefinedError(f"accumulated winding {total:.3f} is not quantized")
    return float(rounded) + 0.0


def _half_zone(L: int, J: float, mu: float, pairing: float, alpha: float):
    sol = bogoliubov_solution(L, J, mu, pairing, alpha)
    half = slice(0, L // 2)
    return sol.k[half], sol.eps_k[half], sol.f_k[half]


def chi_closed_form(which: str, L: int, J: float = 1.0, mu: float = 0.0, pairing: float = 1.0,
                    alpha: float = math.inf) -> float:
    """Fidelity susceptibility in mu, pairing ("delta") or alpha, half-zone sums."""
    k, eps, f = _half_zone(L, J, mu, pairing, alpha)
    if which == "mu":
        numer = (pairing * f / 4) ** 2
    elif which == "delta":
        numer = (J * np.cos(k) + mu) ** 2 * (f / 4) ** 2
    elif which == "alpha":
        df = pairing_function_dalpha(None, L, alpha)[: L // 2]
        numer = (J * np.cos(k) + mu) ** 2 * (pairing / 4 * df) ** 2
    else:
        raise ValidationError(f"which must be mu, delta or alpha, got {which!r}")
    return float(np.sum(numer / eps**4))


def chi_alpha_single_mode(L: int, J: float = 1.0, mu: float = 0.0, pairing: float = 1.0,
                          alpha: float = 1.0) -> float:
    """Contribution of the k_min = pi/L mode to chi_alpha."""
    k = math.pi / L
    f = pairing_function(k, L, alpha)
    df = pairing_function_dalpha(k, L, alpha)
    h_z = J * math.cos(k) + mu
    eps2 = h_z**2 + (pairing * f / 2) ** 2
    return float(h_z**2 * (pairing / 4 * df) ** 2 / eps2**2)


def local_qfi_fzz(L: int, J: float = 1.0, mu: float = 0.0, pairing: float = 1.0,
                  alpha: float = math.inf) -> tuple[float, float, float]:
    """Diagonal of the local-probe Fisher matrix: (L, L, F_zz)."""
    sol = bogoliubov_solution(L, J, mu, pairing, alpha)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(sol.eps_k > 0, (pairing * sol.f_k / 2) ** 2 / sol.eps_k**2, 0.0)
    return float(L), float(L), float(2.0 * np.sum(ratio))


def mean_particle_number(L: int, J: float = 1.0, mu: float = 0.0, pairing: float = 1.0,
                         alpha: float = math.inf) -> float:
    """sum_k sin^2(Theta_k / 2) over the full zone."""
    sol = bogoliubov_solution(L, J, mu, pairing, alpha)
    return float(np.sum(np.sin(sol.theta_k / 2) ** 2))


def ground_state_fidelity(L: int, first: dict, second: dict) -> float:
    """prod over 0 < k < pi of |cos((Theta_k - Theta'_k) / 2)|."""
    a = bogoliubov_solution(L, **first).theta_k[: L // 2]
    b = bogoliubov_solution(L, **second).theta_k[: L // 2]
    return float(np.prod(np.abs(np.cos((a - b) / 2))))


def gap_prefactor(alpha: float, L: int = 4000) -> float:
    """min_k eps_k * L at mu = J = Delta."""
    return min_gap(L, 1.0, 1.0, 1.0, alpha) * L
