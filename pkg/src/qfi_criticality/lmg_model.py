"""Lipkin-Meshkov-Glick model in the maximal-spin (Dicke) sector.

H = (Lambda / N) J_z^2 - J_x + delta J_z   (energies in units of Omega).

The Hamiltonian is tridiagonal in the |J, m> basis. At delta = 0 it commutes
with the parity m -> -m, and the parity-adapted basis splits it into two
tridiagonal blocks, which keeps exponentially small tunnelling splittings
from mixing the two symmetric ground states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq, minimize_scalar

from .errors import (
    NoThermalEntanglementError,
    SqueezingUndefinedError,
    ValidationError,
    ValidityError,
)
from .qfi_core import (
    EigenbasisFisher,
    FisherMatrix,
    dicke_spin_matrices,
    fisher_from_entries,
    k_producibility_bound,
    squeezing_from_moments,
)
from .spin_ed import FidelityResult, fidelity_susceptibility_numeric

GOLDEN_THRESHOLD = -math.sqrt((1 + math.sqrt(5)) / 2)


@dataclass(frozen=True)
class LMGSpec:
    N: int
    Lambda: float
    delta: float = 0.0
    representation: str = "dicke_basis"

    def __post_init__(self) -> None:
        if self.N < 2 or self.N % 2:
            raise ValidationError(f"N must be even and >= 2, got {self.N}")
        if self.representation not in ("dicke_basis", "parity_adapted"):
            raise ValidationError(f"unknown representation {self.representation!r}")
        if self.representation == "parity_adapted" and self.delta != 0.0:
            raise ValidationError("the parity-adapted basis needs delta = 0")

    @property
    def spin(self) -> float:
        return self.N / 2


def _dicke_tridiagonal(spec: LMGSpec) -> tuple[np.ndarray, np.ndarray]:
    j = spec.spin
    m = np.arange(-j, j + 1)
    diag = spec.Lambda / spec.N * m**2 + spec.delta * m
    off = -0.5 * np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))
    return diag, off


def _parity_blocks(spec: LMGSpec):
    """Tridiagonal (diag, off) of the even (m = 0..J) and odd (m = 1..J) blocks."""
    j = spec.spin
    m = np.arange(0, j + 1)
    diag = spec.Lambda / spec.N * m**2
    off = -0.5 * np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))
    even_off = off.copy()
    even_off[0] *= math.sqrt(2.0)
    return (diag, even_off), (diag[1:], off[1:])


def parity_isometry(N: int) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Columns: even states |0>, (|m>+|-m>)/sqrt2; odd states (|m>-|-m>)/sqrt2."""
    j = N // 2
    dim = N + 1
    centre = j
    rows_e, cols_e, vals_e = [centre], [0], [1.0]
    rows_o, cols_o, vals_o = [], [], []
    amp = 1 / math.sqrt(2)
    for m in range(1, j + 1):
        rows_e += [centre + m, centre - m]
        cols_e += [m, m]
        vals_e += [amp, amp]
        rows_o += [centre + m, centre - m]
        cols_o += [m - 1, m - 1]
        vals_o += [amp, -amp]
    even = sp.csr_matrix((vals_e, (rows_e, cols_e)), shape=(dim, j + 1))
    odd = sp.csr_matrix((vals_o, (rows_o, cols_o)), shape=(dim, j))
    return even, odd


def build_lmg(spec: LMGSpec) -> np.ndarray:
    """Dense Hamiltonian in the requested representation.

    The parity-adapted matrix is ordered even block first, then odd block.
    """
    if spec.representation == "parity_adapted":
        blocks = []
        for diag, off in _parity_blocks(spec):
            blocks.append(np.diag(diag) + np.diag(off, 1) + np.diag(off, -1))
        dim = spec.N + 1
        out = np.zeros((dim, dim))
        n_even = blocks[0].shape[0]
        out[:n_even, :n_even] = blocks[0]
        out[n_even:, n_even:] = blocks[1]
        return out
    diag, off = _dicke_tridiagonal(spec)
    return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)


@dataclass(frozen=True)
class LMGEigensystem:
    """Eigenpairs in the Dicke basis; ``parities`` is +1/-1 or 0 when broken."""

    energies: np.ndarray
    vectors: np.ndarray
    parities: np.ndarray


def lmg_eigensystem(spec: LMGSpec) -> LMGEigensystem:
    """Full spectrum with eigenvectors in the Dicke basis."""
    if spec.delta != 0.0:
        diag, off = _dicke_tridiagonal(spec)
        vals, vecs = eigh_tridiagonal(diag, off)
        return LMGEigensystem(vals, vecs, np.zeros(vals.size))
    even_iso, odd_iso = parity_isometry(spec.N)
    (de, oe), (do, oo) = _parity_blocks(spec)
    ve, we = eigh_tridiagonal(de, oe)
    vo, wo = eigh_tridiagonal(do, oo)
    energies = np.concatenate([ve, vo])
    vectors = np.hstack([even_iso @ we, odd_iso @ wo])
    parities = np.concatenate([np.ones(ve.size), -np.ones(vo.size)])
    order = np.lexsort((-parities, energies))
    return LMGEigensystem(energies[order], vectors[:, order], parities[order])


def lowest_levels(spec: LMGSpec, count: int = 3) -> np.ndarray:
    """The ``count`` lowest eigenvalues (both parity sectors merged at delta = 0)."""
    if spec.delta != 0.0:
        diag, off = _dicke_tridiagonal(spec)
        return eigh_tridiagonal(diag, off, eigvals_only=True, select="i",
                                select_range=(0, min(count, diag.size) - 1))
    levels = []
    for diag, off in _parity_blocks(spec):
        top = min(count, diag.size) - 1
        levels.append(eigh_tridiagonal(diag, off, eigvals_only=True, select="i",
                                       select_range=(0, top)))
    return np.sort(np.concatenate(levels))[:count]


def lmg_gaps(spec: LMGSpec) -> tuple[float, float]:
    """(E1 - E0, E2 - E1)."""
    e = lowest_levels(spec, 3)
    return float(e[1] - e[0]), float(e[2] - e[1])


def ground_state(spec: LMGSpec) -> np.ndarray:
    """Ground state in the Dicke basis; the even-parity one when delta = 0."""
    if spec.delta != 0.0:
        diag, off = _dicke_tridiagonal(spec)
        _, vec = eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))
        psi = vec[:, 0]
    else:
        (de, oe), _ = _parity_blocks(spec)
        _, vec = eigh_tridiagonal(de, oe, select="i", select_range=(0, 0))
        psi = parity_isometry(spec.N)[0] @ vec[:, 0]
    return psi if psi[np.argmax(np.abs(psi))] > 0 else -psi


# ---------------------------------------------------------------------------
# Semiclassical continuum
# ---------------------------------------------------------------------------

def validity_length(Lambda: float) -> float:
    """Harmonic-well width scale used to cap the number of trusted levels."""
    if Lambda > -1:
        return (Lambda + 2) / (2 * math.sqrt(1 + Lambda))
    if Lambda < -1:
        return 1 / (abs(Lambda) * math.sqrt(Lambda**2 - 1))
    return math.inf


@dataclass(frozen=True)
class SemiclassicalGrid:
    M: int
    z: np.ndarray
    potential: np.ndarray
    energies: np.ndarray
    wavefunctions: np.ndarray
    n_max: int


def semiclassical_potential(z, Lambda: float, delta: float = 0.0):
    return Lambda / 2 * z**2 - np.sqrt(1 - z**2) + delta * z


def semiclassical_solve(spec: LMGSpec, M: int = 2001, n_levels: int = 10) -> SemiclassicalGrid:
    """Position-dependent-mass Schrodinger problem on z in (-1, 1).

    (N/2) [-(2/N^2) d/dz sqrt(1 - z^2) d/dz + V(z)] psi = E psi with hard
    walls, discretized in flux form on M interior points.
    """
    if M < 501 or M % 2 == 0:
        raise ValidationError("M must be odd and at least 501")
    n_max = int(spec.N / 2 * min(1.0, validity_length(spec.Lambda)))
    if n_levels - 1 > n_max:
        raise ValidityError(f"requested level {n_levels - 1} exceeds n_max = {n_max}")
    h = 2.0 / (M + 1)
    z = -1.0 + h * np.arange(1, M + 1)
    mid = -1.0 + h * (np.arange(M + 1) + 0.5)
    coeff = np.sqrt(1 - mid**2) / spec.N / h**2
    potential = semiclassical_potential(z, spec.Lambda, spec.delta)
    diag = coeff[:-1] + coeff[1:] + spec.N / 2 * potential
    off = -coeff[1:-1]
    vals, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, n_levels - 1))
    return SemiclassicalGrid(M, z, potential, vals, vecs / math.sqrt(h), n_max)


# ---------------------------------------------------------------------------
# QFI and squeezing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LMGWitness:
    """QFI (density at T = 0, total at T > 0), squeezing and the optimal axis."""

    fq: float
    xi2: float
    axis: str
    fisher: FisherMatrix


def _pure_moments(psi: np.ndarray, N: int):
    ops = dicke_spin_matrices(N)
    images = [ops[a] @ psi for a in "xyz"]
    mean = np.array([np.vdot(psi, img).real for img in images])
    cov = np.zeros((3, 3))
    for a in range(3):
        for b in range(a, 3):
            cov[a, b] = cov[b, a] = np.vdot(images[a], images[b]).real - mean[a] * mean[b]
    return mean, cov


def _safe_squeezing(mean, cov, N: int) -> float:
    try:
        return squeezing_from_moments(mean, cov, N)
    except SqueezingUndefinedError:
        return math.nan


def lmg_ground_qfi(spec: LMGSpec) -> LMGWitness:
    """Ground-state QFI density, Wineland parameter and optimal axis."""
    psi = ground_state(spec)
    mean, cov = _pure_moments(psi, spec.N)
    fisher = fisher_from_entries(4.0 * cov)
    return LMGWitness(fisher.optimal_value / spec.N, _safe_squeezing(mean, cov, spec.N),
                      fisher.optimal_axis, fisher)


def squeezing_root(N: int, bracket: tuple[float, float] = (-1.6, -1.02)) -> float:
    """Lambda < -1 where the ground-state xi_R^2 crosses 1."""
    def excess(lam):
        return lmg_ground_qfi(LMGSpec(N, lam)).xi2 - 1.0
    return brentq(excess, *bracket, xtol=1e-10)


class LMGThermal:
    """Thermal Fisher matrix and squeezing from one full diagonalization.

    At delta = 0 the operator matrix elements are assembled from parity
    blocks: J_x conserves parity, J_y and J_z flip it.
    """

    def __init__(self, spec: LMGSpec):
        self.spec = spec
        self.system = lmg_eigensystem(spec)
        ops = dicke_spin_matrices(spec.N)
        vecs = self.system.vectors
        if spec.delta != 0.0:
            self._fisher = EigenbasisFisher(self.system.energies, vecs, [ops[a] for a in "xyz"])
            return
        even = self.system.parities > 0
        elements = []
        for axis in "xyz":
            mat = ops[axis]
            full = np.zeros((vecs.shape[1],) * 2, dtype=complex)
            e_idx, o_idx = np.flatnonzero(even), np.flatnonzero(~even)
            v_e, v_o = vecs[:, e_idx], vecs[:, o_idx]
            if axis == "x":
                full[np.ix_(e_idx, e_idx)] = v_e.T @ (mat @ v_e)
                full[np.ix_(o_idx, o_idx)] = v_o.T @ (mat @ v_o)
            else:
                block = v_e.T @ np.asarray(mat @ v_o)
                full[np.ix_(e_idx, o_idx)] = block
                full[np.ix_(o_idx, e_idx)] = block.conj().T
            elements.append(full)
        self._fisher = EigenbasisFisher.from_elements(self.system.energies, elements)

    def fisher(self, T: float) -> FisherMatrix:
        if T <= 0:
            raise ValidationError("temperature must be positive")
        return self._fisher.fisher(T)

    def witness(self, T: float) -> LMGWitness:
        fisher = self.fisher(T)
        mean, cov = self._fisher.moments(T)
        return LMGWitness(fisher.optimal_value, _safe_squeezing(mean, cov, self.spec.N),
                          fisher.optimal_axis, fisher)

    def qfi(self, T: float) -> float:
        return self.fisher(T).optimal_value

    def axis_qfi(self, T: float, axis: str) -> float:
        """Single diagonal Fisher entry, the QFI for a fixed rotation axis."""
        return float(self.fisher(T).entries["xyz".index(axis), "xyz".index(axis)])


def lmg_thermal_qfi(spec: LMGSpec, T: float) -> LMGWitness:
    """Total thermal QFI (largest Fisher eigenvalue), xi_R^2 and optimal axis."""
    if T <= 0:
        raise ValidationError("temperature must be positive")
    return LMGThermal(spec).witness(T)


def lmg_kmode_thermal_law(F0: float, Delta: float, T, k: float):
    """F0 tanh(Delta/2T) (1 - k (e^{Delta/T} - 1) / (e^{k Delta/T} - 1)).

    ``k = math.inf`` gives the equispaced-ladder limit F0 tanh(Delta/2T).
    """
    if k < 2:
        raise ValidationError("k must be at least 2")
    T = np.asarray(T, dtype=float)
    x = Delta / T
    base = F0 * np.tanh(x / 2)
    if math.isinf(k):
        value = base
    else:
        # k (e^x - 1) / (e^{kx} - 1) written to avoid overflow
        ratio = k * np.exp(-(k - 1) * x) * (-np.expm1(-x)) / (-np.expm1(-k * x))
        value = base * (1 - ratio)
    return float(value) if np.ndim(value) == 0 else value


def producibility_density(N: int, kappa: int) -> float:
    return k_producibility_bound(N, kappa) / N


def lmg_entanglement_boundary(Lambda: float, kappa: int, N: int) -> float:
    """Temperature below which F_Q/N exceeds the kappa-producible bound.

    Returns 0 when the bound is never exceeded, and raises on the
    subcritical branch for Lambda <= Lambda* where squeezing is lost.
    """
    D = producibility_density(N, kappa)
    if Lambda >= 0:
        root = math.sqrt(1 + Lambda)
        arg = D / root
        return root / (2 * math.atanh(arg)) if arg < 1 else 0.0
    if Lambda >= -1:
        root = math.sqrt(1 + Lambda)
        if root == 0.0:
            return 1 / (2 * D)
        arg = D * root
        return root / (2 * math.atanh(arg)) if arg < 1 else 0.0
    root = math.sqrt(Lambda**2 - 1)
    arg = D * abs(Lambda) * root
    if Lambda <= GOLDEN_THRESHOLD and arg >= 1:
        raise NoThermalEntanglementError(
            f"Lambda={Lambda} lies beyond the squeezing threshold; no thermal entanglement witnessed")
    return root / (2 * math.atanh(arg)) if arg < 1 else 0.0


def _boundary_excess(T, thermal: LMGThermal, bound: float) -> float:
    return thermal.qfi(T) / thermal.spec.N - bound


def thermal_boundary_numeric(thermal: LMGThermal, kappa: int = 1,
                             T_bracket: tuple[float, float] = (1e-3, 5.0)) -> float:
    """Temperature where the ED thermal QFI density crosses the kappa bound."""
    # thermal goes through args: brentq's wrapper is a reference cycle, and a
    # closure over thermal would pin its eigenbasis until the next full gc
    args = (thermal, producibility_density(thermal.spec.N, kappa))
    lo, hi = T_bracket
    if _boundary_excess(lo, *args) <= 0:
        return 0.0
    if _boundary_excess(hi, *args) > 0:
        return hi
    return brentq(_boundary_excess, lo, hi, args=args, xtol=1e-8)


# ---------------------------------------------------------------------------
# Fidelity, order parameter, metastability
# ---------------------------------------------------------------------------

def lmg_fidelity_susceptibility(spec: LMGSpec, dLambda: float = 1e-4) -> FidelityResult:
    """Numeric chi_Lambda from even-sector ground states."""
    def provider(lam):
        return ground_state(LMGSpec(spec.N, lam, spec.delta))
    return fidelity_susceptibility_numeric(provider, spec.Lambda, dLambda)


def lmg_fidelity_analytic(Lambda: float, N: int) -> float:
    """Large-N chi_Lambda on either side of the transition."""
    if Lambda > -1:
        return 1 / (32 * (1 + Lambda) ** 2)
    if Lambda < -1:
        return N / (4 * abs(Lambda) ** 3 * math.sqrt(Lambda**2 - 1))
    return math.inf


def fidelity_peak(N: int, bracket: tuple[float, float] = (-1.3, -0.9),
                  dLambda: float = 1e-4) -> tuple[float, float]:
    """(argmax, max) of chi_Lambda near the critical point."""
    def negative(lam):
        return -lmg_fidelity_susceptibility(LMGSpec(N, lam), dLambda).value
    res = minimize_scalar(negative, bounds=bracket, method="bounded",
                          options={"xatol": 1e-7})
    return float(res.x), float(-res.fun)


def lmg_order_parameter(spec: LMGSpec) -> float:
    """2 <J_z> / N in the ground state."""
    psi = ground_state(spec)
    m = np.arange(-spec.spin, spec.spin + 1)
    return float(2 * np.sum(m * psi**2) / spec.N)


def metastability_threshold(Lambda: float) -> float:
    """Largest |delta| admitting a metastable minimum: (|Lambda|^(2/3) - 1)^(3/2)."""
    if Lambda > -1:
        raise ValidationError("metastability needs Lambda <= -1")
    return (abs(Lambda) ** (2 / 3) - 1) ** 1.5


def delta_sweep(lo: float = 1e-12, hi: float = 1e-1, count: int = 45) -> np.ndarray:
    """Log-spaced |delta| values for resolving the first-order transition."""
    return np.geomspace(lo, hi, count)
