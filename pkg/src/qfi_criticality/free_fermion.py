"""Quadratic fermion chains, closed (antiperiodic) or open.

H = sum_ij a_i^+ A_ij a_j + 1/2 sum_ij (a_i^+ B_ij a_j^+ + h.c.) + offset,

diagonalized by the singular value decomposition A + B = Phi^T Lambda Psi.
The Green matrix G = -Psi^T Phi yields every static spin correlator of the
Jordan-Wigner image as a subdeterminant.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ValidationError
from .thermal_scaling import ScalingSeries


@dataclass(frozen=True)
class QuadraticFermionModel:
    L: int
    A: np.ndarray
    B: np.ndarray
    boundary: str = "antiperiodic-closed"
    provenance: dict = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self) -> None:
        A, B = np.asarray(self.A, dtype=float), np.asarray(self.B, dtype=float)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        if A.shape != (self.L, self.L) or B.shape != (self.L, self.L):
            raise ValidationError("A and B must be L x L")
        if np.max(np.abs(A - A.T), initial=0.0) >= 1e-12:
            raise ValidationError("A must be symmetric")
        if np.max(np.abs(B + B.T), initial=0.0) >= 1e-12:
            raise ValidationError("B must be antisymmetric")


def _require_even(L: int) -> None:
    if L < 2 or L % 2:
        raise ValidationError(f"L must be even and >= 2, got {L}")


def ring_distance(L: int) -> np.ndarray:
    idx = np.arange(L)
    diff = np.abs(idx[:, None] - idx[None, :])
    return np.minimum(diff, L - diff)


def build_ising_nn_fermion(L: int, theta: float, J: float = 1.0,
                           boundary: str = "closed") -> QuadraticFermionModel:
    """Jordan-Wigner image of the nearest-neighbour Ising chain.

    The spins are first rotated so that the transverse field points along z.
    A periodic spin ring maps to antiperiodic fermions (even sector); an open
    spin chain maps exactly to an open fermion chain.
    """
    _require_even(L)
    if boundary not in ("closed", "open"):
        raise ValidationError(f"boundary must be closed or open, got {boundary!r}")
    s, c = J * math.sin(theta), J * math.cos(theta)
    A = 2.0 * c * np.eye(L)
    B = np.zeros((L, L))
    for i in range(L - 1):
        A[i, i + 1] = A[i + 1, i] = s
        B[i, i + 1], B[i + 1, i] = s, -s
    if boundary == "closed":
        # antiperiodic wrap: hopping flips sign, pairing keeps the sign(i-j) pattern
        A[0, L - 1] = A[L - 1, 0] = A[0, L - 1] - s
        B[0, L - 1] += s
        B[L - 1, 0] -= s
    return QuadraticFermionModel(
        L, A, B, boundary="antiperiodic-closed" if boundary == "closed" else "open",
        provenance={"model": "ising_nn", "theta": theta, "J": J}, offset=-L * c)


def build_kitaev(L: int, J: float = 1.0, mu: float = 0.0, pairing: float = 1.0,
                 alpha: float = math.inf) -> QuadraticFermionModel:
    """Closed Kitaev ring with pairing decaying as d^-alpha, d = min(l, L - l)."""
    _require_even(L)
    if alpha < 0:
        raise ValidationError("alpha must be nonnegative")
    dist = ring_distance(L)
    A = -mu * np.eye(L)
    near = dist == 1
    A[near] = -J / 2
    A[0, L - 1] = A[L - 1, 0] = J / 2 if L > 2 else A[0, L - 1]
    with np.errstate(divide="ignore"):
        if math.isinf(alpha):
            weight = np.where(dist == 1, 1.0, 0.0)
        else:
            weight = np.where(dist > 0, dist.astype(float) ** (-alpha), 0.0)
    idx = np.arange(L)
    sign = np.sign(idx[:, None] - idx[None, :])
    B = sign * (pairing / 2) * weight
    return QuadraticFermionModel(
        L, A, B,
        provenance={"model": "kitaev", "J": J, "mu": mu, "pairing": pairing, "alpha": alpha},
        offset=mu * L / 2,
    )


def build_kitaev_theta(L: int, theta: float, alpha: float = math.inf) -> QuadraticFermionModel:
    """Kitaev ring with hopping = pairing = 2 cos(theta) and mu = 2 sin(theta)."""
    model = build_kitaev(L, 2 * math.cos(theta), 2 * math.sin(theta), 2 * math.cos(theta), alpha)
    return QuadraticFermionModel(model.L, model.A, model.B,
                                 provenance={"model": "kitaev_theta", "theta": theta, "alpha": alpha},
                                 offset=model.offset)


@dataclass(frozen=True)
class GreenMatrix:
    G: np.ndarray
    energies: np.ndarray
    Phi: np.ndarray
    Psi: np.ndarray
    L: int
    vacuum_energy: float
    translation_invariant: bool = True

    @property
    def min_gap(self) -> float:
        return float(self.energies[0])


def diagonalize(model: QuadraticFermionModel) -> GreenMatrix:
    """SVD of A + B, sorted by ascending quasiparticle energy."""
    total = model.A + model.B
    try:
        left, values, right = np.linalg.svd(total)
    except np.linalg.LinAlgError as exc:
        raise ValidationError(f"singular value decomposition failed: {exc}") from exc
    order = np.argsort(values, kind="stable")
    values = values[order]
    phi = left[:, order].T
    psi = right[order, :]
    scale = max(np.max(np.abs(total)), 1e-300)
    if np.max(np.abs(phi.T @ np.diag(values) @ psi - total)) >= 1e-8 * scale:
        raise ValidationError("singular value decomposition does not reconstruct A + B")
    G = -psi.T @ phi
    vacuum = 0.5 * (np.trace(model.A) - values.sum()) + model.offset
    return GreenMatrix(G, values, phi, psi, model.L, float(vacuum),
                       model.boundary != "open")


def vacuum_parity(green: GreenMatrix) -> int:
    """Fermion parity (-1)^N_f of the quasiparticle vacuum, from det(-G)."""
    return 1 if np.linalg.det(-green.G) > 0 else -1


def many_body_spectrum(green: GreenMatrix, parity: int | None = None) -> np.ndarray:
    """All 2^L levels E_vac + sum_{k in S} Lambda_k, optionally one parity sector."""
    L = green.L
    if L > 20:
        raise ValidationError("many-body enumeration limited to L <= 20")
    occupations = np.array(list(itertools.product((0, 1), repeat=L)), dtype=float)
    levels = green.vacuum_energy + occupations @ green.energies
    if parity is not None:
        sector = vacuum_parity(green) * np.where(occupations.sum(axis=1) % 2 == 0, 1, -1)
        levels = levels[sector == parity]
    return np.sort(levels)


# ---------------------------------------------------------------------------
# Correlators
# ---------------------------------------------------------------------------

def _signed_det(block: np.ndarray) -> float:
    if block.size == 0:
        return 1.0
    sign, logdet = np.linalg.slogdet(block)
    return float(sign * math.exp(logdet)) if sign != 0 else 0.0


def _check_pair(green: GreenMatrix, i: int, j: int) -> None:
    if not 1 <= i < j <= green.L:
        raise ValidationError(f"need 1 <= i < j <= {green.L}, got ({i}, {j})")


def static_correlators(green: GreenMatrix, i: int, j: int) -> tuple[float, float, float]:
    """(C_xx, C_yy, C_zz) between sites i < j (1-based) of the Ising ring.

    Labels refer to the unrotated Ising spins: z is the ordering direction.
    """
    _check_pair(green, i, j)
    G = green.G
    a, b = i - 1, j - 1
    c_zz = _signed_det(G[a + 1:b + 1, a:b])
    c_yy = _signed_det(G[a:b, a + 1:b + 1])
    c_xx = G[a, a] * G[b, b] - G[b, a] * G[a, b]
    return float(c_xx), float(c_yy), float(c_zz)


def leading_minors(matrix: np.ndarray, pivot_tol: float = 1e-6) -> np.ndarray:
    """Determinants of all leading principal submatrices.

    Unpivoted elimination gives every minor as a running product of pivots;
    once a pivot gets small relative to the matrix scale the remaining minors
    fall back to pivoted LU determinants.
    """
    work = np.array(matrix, dtype=float)
    n = work.shape[0]
    out = np.empty(n)
    scale = max(np.max(np.abs(work), initial=0.0), 1e-300)
    running = 1.0
    for k in range(n):
        pivot = work[k, k]
        if abs(pivot) < pivot_tol * scale:
            for m in range(k, n):
                out[m] = _signed_det(matrix[: m + 1, : m + 1])
            return out
        running *= pivot
        out[k] = running
        if k + 1 < n:
            factors = work[k + 1:, k] / pivot
            work[k + 1:, k + 1:] -= np.outer(factors, work[k, k + 1:])
    return out


def string_correlations(green: GreenMatrix, axis: str) -> np.ndarray:
    """C(l) for l = 1..L-1 between site 1 and site 1+l.

    Axis labels follow the Jordan-Wigner spin image of the fermion ring:
    x is det G[2..l+1, 1..l], y is det G[1..l, 2..l+1], z is the two-point
    Wick form. With G = -Psi^T Phi and the sign of B fixed by the
    Hamiltonian, x is the long-range ordered axis for positive pairing.
    """
    G, L = green.G, green.L
    if axis == "x":
        return leading_minors(G[1:L, : L - 1])
    if axis == "y":
        return leading_minors(G[: L - 1, 1:L])
    if axis == "z":
        ells = np.arange(1, L)
        return G[0, 0] * G[ells, ells] - G[0, ells] * G[ells, 0]
    raise ValidationError(f"axis must be x, y or z, got {axis!r}")


def string_correlations_direct(green: GreenMatrix, axis: str, start: int = 1) -> np.ndarray:
    """Same as :func:`string_correlations` via one pivoted determinant per l."""
    G, L = green.G, green.L
    s = start - 1
    out = []
    for ell in range(1, L - s):
        if axis == "x":
            out.append(_signed_det(G[s + 1:s + ell + 1, s:s + ell]))
        elif axis == "y":
            out.append(_signed_det(G[s:s + ell, s + 1:s + ell + 1]))
        else:
            b = s + ell
            out.append(G[s, s] * G[b, b] - G[s, b] * G[b, s])
    return np.array(out)


def pair_correlation_matrix(green: GreenMatrix, axis: str) -> np.ndarray:
    """C(i, j) for all pairs i < j (0-based, upper triangle) of an arbitrary chain.

    One leading-minor sweep per starting site, O(L^4) overall.
    """
    G, L = green.G, green.L
    out = np.zeros((L, L))
    for i in range(L - 1):
        if axis == "x":
            out[i, i + 1:] = leading_minors(G[i + 1:, i:L - 1])
        elif axis == "y":
            out[i, i + 1:] = leading_minors(G[i:L - 1, i + 1:])
        else:
            raise ValidationError("string operators are defined for x and y")
    return out


def _separation_sums(green: GreenMatrix, axis: str) -> tuple[np.ndarray, np.ndarray]:
    """Per-separation totals (1/L) sum_{j-i=l} C(i, j) for l = 1..L-1, as (l, value).

    On a translation-invariant ring this is C(l) itself; in general every
    ordered pair is counted once in each direction.
    """
    L = green.L
    ells = np.arange(1, L)
    if green.translation_invariant:
        return ells, string_correlations(green, axis)
    corr = pair_correlation_matrix(green, axis)
    totals = np.array([np.trace(corr, offset=ell) for ell in ells])
    return ells, 2.0 * totals / L


def nonlocal_qfi(green: GreenMatrix, axis: str = "x", staggered: bool = False) -> float:
    """QFI density 1 + (1/L) sum_{i != j} (+-1)^(i-j) C(i, j) of the string operator O_axis."""
    if axis not in ("x", "y"):
        raise ValidationError("string operators are defined for x and y")
    ells, corr = _separation_sums(green, axis)
    if staggered:
        corr = corr * (-1.0) ** ells
    return float(1.0 + corr.sum())


def optimal_nonlocal_qfi(green: GreenMatrix) -> tuple[float, str]:
    """Largest density among O_x, O_y, O_x^st, O_y^st with its label."""
    best = None
    for axis in ("x", "y"):
        ells, corr = _separation_sums(green, axis)
        for staggered in (False, True):
            signs = (-1.0) ** ells if staggered else 1.0
            value = float(1.0 + np.sum(corr * signs))
            label = f"O{axis}" + ("_st" if staggered else "")
            if best is None or value > best[0] + 1e-12:
                best = (value, label)
    return best


def ising_fq_density(green: GreenMatrix, theta: float) -> float:
    """Optimal Ising QFI density: uniform order parameter for theta <= 0, staggered above."""
    return nonlocal_qfi(green, "x", staggered=theta > 0)


def qfi_scaling_series(builder: Callable[[int], QuadraticFermionModel], sizes: Sequence[int],
                       axis: str | None = "x", staggered: bool = False,
                       subtract_one: bool = True) -> ScalingSeries:
    """f_Q(L) over ascending sizes; ``axis=None`` takes the best string operator."""
    sizes = list(sizes)
    if len(sizes) < 5 or sorted(sizes) != sizes:
        raise ValidationError("need at least 5 ascending sizes")
    values = []
    for L in sizes:
        green = diagonalize(builder(L))
        fq = optimal_nonlocal_qfi(green)[0] if axis is None else nonlocal_qfi(green, axis, staggered)
        values.append(fq - 1.0 if subtract_one else fq)
    label = "fq_minus_one" if subtract_one else "fq"
    return ScalingSeries(np.array(sizes, dtype=float), np.array(values), label)


# ---------------------------------------------------------------------------
# Ground-state overlaps and fidelity
# ---------------------------------------------------------------------------

def ground_state_overlap(first: GreenMatrix, second: GreenMatrix) -> float:
    """|<0_a|0_b>| from the Bogoliubov factors (Onishi formula)."""
    block = 0.5 * (second.Phi @ first.Phi.T + second.Psi @ first.Psi.T)
    sign, logdet = np.linalg.slogdet(block)
    return 0.0 if sign == 0 else float(math.exp(0.5 * logdet))


def ising_chi_theta(N: int, theta: float) -> float:
    """Closed-ring fidelity susceptibility in theta, half-zone momentum sum."""
    _require_even(N)
    k = (2 * np.arange(N // 2) + 1) * math.pi / N
    return float(0.25 * np.sum(np.sin(k) ** 2 / (1 + math.sin(2 * theta) * np.cos(k)) ** 2))


def occupation_number(green: GreenMatrix) -> float:
    """Ground-state particle number sum_i (1 + G_ii) / 2."""
    return float(0.5 * np.sum(1.0 + np.diag(green.G)))
