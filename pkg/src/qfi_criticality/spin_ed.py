"""Exact diagonalization of arbitrary-range transverse-field Ising chains.

H = J sin(theta) sum_{i<j} sz_i sz_j / r_ij^alpha + J cos(theta) sum_i sx_i
    + eps sum_i s_i sz_i,   s_i = 1 or (-1)^i (staggered field).

Dense eigensolvers, N <= 14. With no longitudinal field the Hamiltonian is
block diagonalized in the two sectors of the spin-flip parity prod_i sx_i.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError, ValidationError
from .qfi_core import (
    CollectiveOperator,
    SpectralDecomposition,
    _as_matrix,
    _bits,
    annihilation_matrix,
    collective_spin_matrix,
    mixed_state_qfi,
    pure_state_qfi,
    thermal_weights,
)

MAX_SPINS = 14
DEFAULT_EPS = -1e-3


@dataclass(frozen=True)
class IsingSpec:
    """Parameters of the long-range Ising chain.

    ``boundary`` is ``"open"`` (distance |i-j|) or ``"periodic"`` (distance
    min(|i-j|, N-|i-j|)); the periodic chain is the spin image of the
    antiperiodic free-fermion ring.
    """

    N: int
    theta: float
    alpha: float = math.inf
    eps_long: float = 0.0
    staggered_eps: bool = False
    J: float = 1.0
    boundary: str = "open"

    def __post_init__(self) -> None:
        if self.N < 2 or self.N % 2:
            raise ValidationError(f"N must be even and >= 2, got {self.N}")
        if abs(self.theta) > math.pi / 2 + 1e-12:
            raise ValidationError("theta must lie in [-pi/2, pi/2]")
        if self.alpha < 0:
            raise ValidationError("alpha must be nonnegative")
        if self.boundary not in ("open", "periodic"):
            raise ValidationError(f"unknown boundary {self.boundary!r}")

    @property
    def parity_symmetric(self) -> bool:
        return self.eps_long == 0.0


def coupling_matrix(N: int, alpha: float, boundary: str = "open") -> np.ndarray:
    """Pair couplings 1/r^alpha for i<j (upper triangle), zero elsewhere."""
    out = np.zeros((N, N))
    for i in range(N):
        for j in range(i + 1, N):
            r = j - i
            if boundary == "periodic":
                r = min(r, N - r)
            if math.isinf(alpha):
                out[i, j] = 1.0 if r == 1 else 0.0
            else:
                out[i, j] = r ** (-alpha)
    return out


def build_ising(spec: IsingSpec) -> sp.csr_matrix:
    """Sparse Hamiltonian on the 2^N qubit basis (real symmetric)."""
    if spec.N > MAX_SPINS:
        raise CapacityError(
            f"N={spec.N} exceeds the dense ED limit {MAX_SPINS}; "
            "use the free_fermion module for nearest-neighbour chains"
        )
    N = spec.N
    sz = 1 - 2 * _bits(N)
    couplings = coupling_matrix(N, spec.alpha, spec.boundary)
    diag = np.zeros(2**N)
    for i in range(N):
        for j in range(i + 1, N):
            if couplings[i, j]:
                diag += couplings[i, j] * sz[i] * sz[j]
    diag *= spec.J * math.sin(spec.theta)
    if spec.eps_long:
        signs = np.array([(-1.0) ** (i + 1) if spec.staggered_eps else 1.0 for i in range(N)])
        diag += spec.eps_long * (signs[:, None] * sz).sum(axis=0)
    transverse = 2.0 * spec.J * math.cos(spec.theta) * collective_spin_matrix(N, "x")
    return (sp.diags(diag) + transverse).tocsr()


def parity_projectors(N: int) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Isometries onto the even and odd sectors of prod_i sigma_x."""
    dim = 2**N
    full = dim - 1
    reps = np.arange(dim // 2)  # top bit 0; partner has top bit 1
    partners = reps ^ full
    cols = np.arange(dim // 2)
    amp = np.full(dim // 2, 1 / math.sqrt(2))
    even = sp.csr_matrix((np.concatenate([amp, amp]),
                          (np.concatenate([reps, partners]), np.concatenate([cols, cols]))),
                         shape=(dim, dim // 2))
    odd = sp.csr_matrix((np.concatenate([amp, -amp]),
                         (np.concatenate([reps, partners]), np.concatenate([cols, cols]))),
                        shape=(dim, dim // 2))
    return even, odd


def spin_flip_parity(N: int) -> sp.csr_matrix:
    dim = 2**N
    index = np.arange(dim)
    return sp.csr_matrix((np.ones(dim), (index ^ (dim - 1), index)), shape=(dim, dim))


@dataclass(frozen=True)
class EDResult:
    energies: np.ndarray
    eigenvectors: np.ndarray
    gap1: float
    gap2: float
    parities: np.ndarray | None = None

    @property
    def ground_state(self) -> np.ndarray:
        return self.eigenvectors[:, 0]


def _gaps(energies: np.ndarray) -> tuple[float, float]:
    gap1 = float(energies[1] - energies[0]) if energies.size > 1 else math.inf
    gap2 = float(energies[2] - energies[1]) if energies.size > 2 else math.inf
    return gap1, gap2


def diagonalize_dense(matrix) -> tuple[np.ndarray, np.ndarray]:
    dense = matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix)
    return np.linalg.eigh(dense)


def ground_state_ed(spec: IsingSpec, sector: str | None = None) -> EDResult:
    """Full spectrum; with zero field every eigenvector has definite parity.

    ``sector`` restricts the result to ``"even"`` or ``"odd"`` parity. When
    the two lowest levels are degenerate to rounding the even state is put
    first so that the ground state is the symmetric one.
    """
    ham = build_ising(spec)
    if not spec.parity_symmetric:
        if sector is not None:
            raise ValidationError("parity sectors need eps_long = 0")
        energies, vectors = diagonalize_dense(ham)
        return EDResult(energies, vectors, *_gaps(energies))
    even, odd = parity_projectors(spec.N)
    blocks = []
    for label, proj in (("even", even), ("odd", odd)):
        if sector not in (None, label):
            continue
        vals, vecs = diagonalize_dense(proj.T @ ham @ proj)
        blocks.append((vals, np.asarray(proj @ vecs), 1.0 if label == "even" else -1.0))
    energies = np.concatenate([b[0] for b in blocks])
    vectors = np.hstack([b[1] for b in blocks])
    parities = np.concatenate([np.full(b[0].size, b[2]) for b in blocks])
    order = np.lexsort((-parities, energies))
    energies, vectors, parities = energies[order], vectors[:, order], parities[order]
    tol = 1e-12 * max(1.0, abs(energies[0]))
    if energies.size > 1 and energies[1] - energies[0] < tol and parities[0] < parities[1]:
        swap = [1, 0] + list(range(2, energies.size))
        vectors, parities = vectors[:, swap], parities[swap]
        energies = energies.copy()
        energies[1] = energies[0]
    return EDResult(energies, vectors, *_gaps(energies), parities)


def order_parameter(result: EDResult, spec: IsingSpec) -> float:
    """2<J_z>/N (theta <= 0) or 2<J_z^st>/N (theta > 0) in the ground state.

    The sign follows the field term +eps sum sz: a negative eps favours
    sz = +1 and gives phi -> +1 in the ferromagnet.
    """
    op = collective_spin_matrix(spec.N, "z", staggered=spec.theta > 0)
    psi = result.ground_state
    return float(2.0 * np.vdot(psi, op @ psi).real / spec.N)


# ---------------------------------------------------------------------------
# Fidelity susceptibility
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FidelityResult:
    """chi at step dlambda, the dlambda/2 estimate, and diagnostic flags."""

    value: float
    half_step_value: float
    converged: bool
    level_crossing: bool

    def __float__(self) -> float:
        return self.value


def _overlap_chi(provider, overlap, lam: float, step: float) -> tuple[float, float]:
    left, right = provider(lam - step / 2), provider(lam + step / 2)
    if overlap is None:
        # 2 (1 - |<a|b>|) = |a - e^{i phi} b|^2 after phase alignment, free of cancellation
        a, b = np.asarray(left), np.asarray(right)
        inner = np.vdot(a, b)
        amp = abs(inner)
        phase = inner.conjugate() / amp if amp > 0 else 1.0
        return float(np.linalg.norm(a - phase * b) ** 2) / step**2, amp
    amp = abs(overlap(left, right))
    return 2.0 * (1.0 - amp) / step**2, amp


def default_overlap(a, b) -> complex:
    return np.vdot(np.asarray(a), np.asarray(b))


def fidelity_susceptibility_numeric(provider: Callable[[float], object], lam: float,
                                    dlam: float = 1e-4,
                                    overlap: Callable[[object, object], complex] | None = None,
                                    rtol: float = 0.01) -> FidelityResult:
    """2 (1 - |<psi(lam - d/2)|psi(lam + d/2)>|) / d^2 with a half-step check.

    ``provider`` returns a ground state for a parameter value; ``overlap``
    defaults to the vector inner product. A small overlap at either step
    marks a level crossing. For vector states the distance form
    |a - e^{i phi} b|^2 replaces 2 (1 - |<a|b>|) to avoid cancellation.
    """
    chi, amp = _overlap_chi(provider, overlap, lam, dlam)
    chi_half, amp_half = _overlap_chi(provider, overlap, lam, dlam / 2)
    crossing = min(amp, amp_half) < 0.5
    scale = max(abs(chi), abs(chi_half))
    converged = scale == 0.0 or abs(chi - chi_half) <= rtol * scale
    return FidelityResult(chi, chi_half, bool(converged and not crossing), bool(crossing))


# ---------------------------------------------------------------------------
# QFI
# ---------------------------------------------------------------------------

def thermal_qfi_ed(result: EDResult, T: float, op) -> float:
    """QFI of the Boltzmann state built from the full ED spectrum."""
    if T <= 0:
        raise ValidationError("temperature must be positive")
    decomp = SpectralDecomposition.thermal(result.energies, result.eigenvectors, T)
    return mixed_state_qfi(decomp, op)


def thermal_qfi_curve(result: EDResult, temperatures, op) -> np.ndarray:
    """thermal_qfi_ed over many temperatures with one change to the eigenbasis.

    Uses 2 sum_ij (p_i - p_j)^2 / (p_i + p_j) |O_ij|^2. Levels below the
    Boltzmann cutoff enter only through row sums, since the factor reduces
    to p_i when p_j vanishes.
    """
    temps = np.atleast_1d(np.asarray(temperatures, dtype=float))
    if np.any(temps <= 0):
        raise ValidationError("temperature must be positive")
    vecs = result.eigenvectors
    if vecs.shape[1] != vecs.shape[0]:
        raise ValidationError("needs the full eigensystem")
    mat = _as_matrix(op)
    elements = np.abs(vecs.conj().T @ np.asarray(mat @ vecs)) ** 2
    row_sums = elements.sum(axis=1)
    shifted = result.energies - result.energies.min()
    out = np.empty(temps.size)
    for n, T in enumerate(temps):
        p = thermal_weights(shifted, T)
        keep = np.flatnonzero(p)
        pk = p[keep]
        block = elements[np.ix_(keep, keep)]
        inner = (pk[:, None] - pk[None, :]) ** 2 / (pk[:, None] + pk[None, :])
        outside = row_sums[keep] - block.sum(axis=1)
        out[n] = 2.0 * np.sum(inner * block) + 4.0 * np.sum(pk * outside)
    return out


def correlator_fq_density(state, N: int, staggered: bool = False) -> float:
    """(1/N) sum_ij (+-1)^(i-j) connected <sz_i sz_j>."""
    sz = 1 - 2 * _bits(N)
    probs = np.abs(np.asarray(state)) ** 2
    means = sz @ probs
    second = (sz * probs) @ sz.T
    connected = second - np.outer(means, means)
    signs = np.array([(-1.0) ** i if staggered else 1.0 for i in range(N)])
    return float(signs @ connected @ signs / N)


def optimal_ising_qfi(result: EDResult, spec: IsingSpec) -> tuple[float, CollectiveOperator]:
    """Best QFI density among J_x, J_y, J_z (staggered for theta > 0)."""
    staggered = spec.theta > 0
    psi = result.ground_state
    best = None
    for axis in ("x", "y", "z"):
        op = CollectiveOperator(axis, spec.N, staggered=staggered)
        value = pure_state_qfi(psi, op) / spec.N
        if best is None or value > best[0] + 1e-12:
            best = (value, op)
    return best


def generalized_harmonic(n: int, order: float) -> float:
    k = np.arange(1, n + 1, dtype=float)
    return float(np.sum(k ** (-order)))


def perturbative_fq_jy(N: int, theta: float, alpha: float, validity_threshold: float = 0.3) -> float:
    """First-order QFI density for J_y around the paramagnet.

    f = 1 + sqrt(8) theta G_N(alpha), G_N = (N H_{N,a} - H_{N,a-1}) / sqrt(8 N (N-1)).
    Warns when sqrt(8)|theta| G_N exceeds ``validity_threshold``.
    """
    if N < 2:
        raise ValidationError("N must be at least 2")
    if math.isinf(alpha):
        pair_sum = N - 1.0
    else:
        pair_sum = N * generalized_harmonic(N, alpha) - generalized_harmonic(N, alpha - 1)
    g_n = pair_sum / math.sqrt(8.0 * N * (N - 1))
    correction = math.sqrt(8.0) * theta * g_n
    if abs(correction) > validity_threshold:
        warnings.warn(
            f"perturbative correction {correction:.3g} is not small; result unreliable",
            RuntimeWarning,
        )
    return 1.0 + correction


# ---------------------------------------------------------------------------
# Jordan-Wigner image of quadratic fermion Hamiltonians
# ---------------------------------------------------------------------------

def quadratic_fock_hamiltonian(A, B, offset: float = 0.0) -> sp.csr_matrix:
    """sum a_i^+ A_ij a_j + 1/2 sum (a_i^+ B_ij a_j^+ + h.c.) + offset on 2^L qubits."""
    A, B = np.asarray(A, dtype=float), np.asarray(B, dtype=float)
    L = A.shape[0]
    if L > MAX_SPINS:
        raise CapacityError(f"L={L} exceeds the dense ED limit {MAX_SPINS}")
    ann = [annihilation_matrix(L, j) for j in range(L)]
    cre = [a.T.tocsr() for a in ann]
    ham = offset * sp.identity(2**L, format="csr")
    for i in range(L):
        for j in range(L):
            if A[i, j]:
                ham = ham + A[i, j] * (cre[i] @ ann[j])
            if B[i, j]:
                pair = 0.5 * B[i, j] * (cre[i] @ cre[j])
                ham = ham + pair + pair.T
    return ham.tocsr()


def fermion_parity(L: int) -> sp.csr_matrix:
    """(-1)^{N_f} on the qubit basis (occupied = bit 0)."""
    occupied = (_bits(L) == 0).sum(axis=0)
    return sp.diags(np.where(occupied % 2 == 0, 1.0, -1.0), format="csr")


def fock_ground_state(A, B, offset: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Full spectrum of the Fock-space image (energies, eigenvectors)."""
    return diagonalize_dense(quadratic_fock_hamiltonian(A, B, offset))


def as_dense_operator(op) -> np.ndarray:
    mat = _as_matrix(op)
    return mat.toarray() if sp.issparse(mat) else np.asarray(mat)
