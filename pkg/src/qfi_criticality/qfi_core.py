"""Quantum Fisher information, Fisher matrices, entanglement bounds and squeezing.

Everything here is model agnostic: states come in as a
:class:`SpectralDecomposition` and probes as a :class:`CollectiveOperator`
or a plain Hermitian matrix.

Qubit conventions used across the package: site ``j`` (0-based) is the
``N-1-j``-th bit of the basis index, bit 0 means sigma_z = +1 ("up",
"occupied" for fermions).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import SqueezingUndefinedError, ValidationError

PAIR_CUTOFF = 1e-14
WEIGHT_CUTOFF = 1e-16
AXES = ("x", "y", "z")


# ---------------------------------------------------------------------------
# Operator construction
# ---------------------------------------------------------------------------

def _site_signs(n_sites: int, staggered: bool) -> np.ndarray:
    if not staggered:
        return np.ones(n_sites)
    return np.array([(-1.0) ** (j + 1) for j in range(n_sites)])


def _bits(n_sites: int) -> np.ndarray:
    """Return an (n_sites, 2**n_sites) array of bit values per site."""
    index = np.arange(2**n_sites)
    shifts = n_sites - 1 - np.arange(n_sites)
    return (index[None, :] >> shifts[:, None]) & 1


def collective_spin_matrix(n_sites: int, axis: str, staggered: bool = False) -> sp.csr_matrix:
    """Sum over sites of (+-1)^j sigma_axis / 2 on the qubit basis."""
    if axis not in AXES:
        raise ValidationError(f"axis must be one of {AXES}, got {axis!r}")
    dim = 2**n_sites
    signs = _site_signs(n_sites, staggered)
    bits = _bits(n_sites)
    if axis == "z":
        diag = 0.5 * (signs[:, None] * (1 - 2 * bits)).sum(axis=0)
        return sp.diags(diag, format="csr")
    rows, cols, vals = [], [], []
    index = np.arange(dim)
    for j in range(n_sites):
        flipped = index ^ (1 << (n_sites - 1 - j))
        if axis == "x":
            amp = np.full(dim, 0.5 * signs[j], dtype=complex)
        else:
            # sigma_y |up> = i |down>, sigma_y |down> = -i |up>
            amp = 0.5j * signs[j] * np.where(bits[j] == 0, 1.0, -1.0)
        rows.append(flipped)
        cols.append(index)
        vals.append(amp)
    mat = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    )
    if axis == "x":
        mat = mat.real.tocsr()
    return mat


def site_pauli(n_sites: int, site: int, axis: str) -> sp.csr_matrix:
    """Single-site Pauli matrix sigma_axis acting on ``site`` (0-based)."""
    pauli = {
        "x": np.array([[0.0, 1.0], [1.0, 0.0]]),
        "y": np.array([[0.0, -1.0j], [1.0j, 0.0]]),
        "z": np.array([[1.0, 0.0], [0.0, -1.0]]),
    }[axis]
    left = sp.identity(2**site, format="csr")
    right = sp.identity(2 ** (n_sites - site - 1), format="csr")
    return sp.kron(sp.kron(left, sp.csr_matrix(pauli)), right, format="csr")


def annihilation_matrix(n_sites: int, site: int) -> sp.csr_matrix:
    """Jordan-Wigner fermion a_site = prod_{l<site}(-sigma_z^l) sigma_-^site.

    Occupied means sigma_z = +1 (bit 0), so a_site maps bit 0 to bit 1 with
    sign (-1)^(number of occupied sites to the left).
    """
    dim = 2**n_sites
    bits = _bits(n_sites)
    index = np.arange(dim)
    occupied_here = bits[site] == 0
    occupied_left = (bits[:site] == 0).sum(axis=0) if site > 0 else np.zeros(dim, dtype=int)
    sign = np.where(occupied_left % 2 == 0, 1.0, -1.0)
    cols = index[occupied_here]
    rows = cols | (1 << (n_sites - 1 - site))
    return sp.csr_matrix((sign[occupied_here], (rows, cols)), shape=(dim, dim))


def local_fermion_matrix(n_sites: int, axis: str, staggered: bool = False) -> sp.csr_matrix:
    """Site-local fermion probes G_x, G_y, G_z built from a_j, a_j^dagger."""
    signs = _site_signs(n_sites, staggered)
    total = sp.csr_matrix((2**n_sites, 2**n_sites), dtype=complex)
    for j in range(n_sites):
        a = annihilation_matrix(n_sites, j)
        if axis == "x":
            term = (a.T + a) / 2
        elif axis == "y":
            term = (a.T - a) / 2j
        elif axis == "z":
            term = (a.T @ a) - 0.5 * sp.identity(2**n_sites)
        else:
            raise ValidationError(f"axis must be one of {AXES}, got {axis!r}")
        total = total + signs[j] * term
    if axis != "y":
        total = total.real
    return total.tocsr()


def dicke_spin_matrices(n_spins: int) -> dict[str, sp.csr_matrix]:
    """J_x, J_y, J_z on the maximal-spin sector, basis m = -J..J."""
    j_total = n_spins / 2
    m = np.arange(-j_total, j_total + 1)
    raise_amp = np.sqrt(j_total * (j_total + 1) - m[:-1] * (m[:-1] + 1))
    j_plus = sp.diags(raise_amp, -1, format="csr")
    j_minus = j_plus.T.tocsr()
    return {
        "x": ((j_plus + j_minus) / 2).tocsr(),
        "y": ((j_plus - j_minus) / 2j).tocsr(),
        "z": sp.diags(m, format="csr"),
    }


@dataclass(frozen=True)
class CollectiveOperator:
    """Probe observable specification.

    ``representation`` is ``"spin"`` for collective spins, ``"fermion"`` for
    site-local fermion probes and ``"string"`` for the Jordan-Wigner string
    operators. In the Jordan-Wigner spin basis the string operators are the
    collective spins themselves, so both share one matrix. ``basis`` selects
    the full qubit space or the Dicke sector (spin representation only).
    """

    axis: str
    n_sites: int
    staggered: bool = False
    representation: str = "spin"
    basis: str = "qubits"

    def __post_init__(self) -> None:
        if self.axis not in AXES:
            raise ValidationError(f"axis must be one of {AXES}")
        if self.representation not in ("spin", "fermion", "string"):
            raise ValidationError(f"unknown representation {self.representation!r}")
        if self.basis not in ("qubits", "dicke"):
            raise ValidationError(f"unknown basis {self.basis!r}")
        if self.basis == "dicke" and (self.representation != "spin" or self.staggered):
            raise ValidationError("the Dicke basis only supports uniform collective spins")

    @property
    def label(self) -> str:
        prefix = {"spin": "J", "fermion": "G", "string": "O"}[self.representation]
        return f"{prefix}{self.axis}" + ("_st" if self.staggered else "")

    def matrix(self) -> sp.csr_matrix:
        if self.basis == "dicke":
            return dicke_spin_matrices(self.n_sites)[self.axis]
        if self.representation == "fermion":
            return local_fermion_matrix(self.n_sites, self.axis, self.staggered)
        return collective_spin_matrix(self.n_sites, self.axis, self.staggered)


def spin_triplet(n_sites: int, staggered: bool = False, representation: str = "spin",
                 basis: str = "qubits") -> list[CollectiveOperator]:
    return [CollectiveOperator(a, n_sites, staggered, representation, basis) for a in AXES]


def _as_matrix(op):
    if isinstance(op, CollectiveOperator):
        return op.matrix()
    if sp.issparse(op):
        return op.tocsr()
    return np.asarray(op)


def _check_hermitian(mat, tol: float = 1e-12) -> None:
    diff = mat - mat.conj().T
    norm = abs(diff).max() if sp.issparse(diff) else np.max(np.abs(diff), initial=0.0)
    if norm > tol * max(1.0, abs(mat).max() if sp.issparse(mat) else np.max(np.abs(mat))):
        raise ValidationError(f"operator is not Hermitian (deviation {norm:.3g})")


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralDecomposition:
    """Weighted orthonormal states, sorted by descending probability.

    ``states`` holds the vectors as columns (shape D x K).
    """

    probabilities: np.ndarray
    states: np.ndarray
    energies: np.ndarray | None = None
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self) -> None:
        probs = np.asarray(self.probabilities, dtype=float)
        states = np.asarray(self.states)
        if states.ndim == 1:
            states = states[:, None]
        object.__setattr__(self, "probabilities", probs)
        object.__setattr__(self, "states", states)
        if self.energies is not None:
            object.__setattr__(self, "energies", np.asarray(self.energies, dtype=float))
        if probs.ndim != 1 or states.shape[1] != probs.size:
            raise ValidationError("need one probability per state column")
        if not self.validate:
            return
        if np.any(probs < 0):
            raise ValidationError("probabilities must be nonnegative")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise ValidationError(f"probabilities sum to {probs.sum()!r}, not 1")
        if np.any(np.diff(probs) > 0):
            raise ValidationError("probabilities must be sorted in descending order")
        gram = states.conj().T @ states
        if np.max(np.abs(gram - np.eye(probs.size)), initial=0.0) > 1e-10:
            raise ValidationError("states are not orthonormal within 1e-10")

    @property
    def dimension(self) -> int:
        return self.states.shape[0]

    @classmethod
    def pure(cls, state) -> "SpectralDecomposition":
        state = np.asarray(state)
        _check_normalized(state)
        return cls(np.ones(1), state[:, None])

    @classmethod
    def thermal(cls, energies, vectors, temperature: float,
                cutoff: float = WEIGHT_CUTOFF) -> "SpectralDecomposition":
        """Boltzmann state from a full eigensystem (columns of ``vectors``)."""
        if temperature <= 0:
            raise ValidationError("temperature must be positive")
        energies = np.asarray(energies, dtype=float)
        weights = thermal_weights(energies, temperature, cutoff)
        keep = np.flatnonzero(weights)
        order = keep[np.argsort(-weights[keep], kind="stable")]
        return cls(weights[order], np.asarray(vectors)[:, order], energies[order], validate=False)

    @classmethod
    def uniform_mixture(cls, states) -> "SpectralDecomposition":
        states = np.asarray(states)
        count = states.shape[1]
        return cls(np.full(count, 1.0 / count), states)

    @classmethod
    def from_density_matrix(cls, rho, cutoff: float = WEIGHT_CUTOFF) -> "SpectralDecomposition":
        vals, vecs = np.linalg.eigh(np.asarray(rho))
        vals = np.clip(vals, 0.0, None)
        keep = vals > cutoff * vals.max()
        vals, vecs = vals[keep], vecs[:, keep]
        order = np.argsort(-vals, kind="stable")
        return cls(vals[order] / vals.sum(), vecs[:, order], validate=False)


def thermal_weights(energies, temperature: float, cutoff: float = WEIGHT_CUTOFF) -> np.ndarray:
    """Normalized Boltzmann weights; weights below ``cutoff * max`` become 0."""
    energies = np.asarray(energies, dtype=float)
    weights = np.exp(-(energies - energies.min()) / temperature)
    weights[weights < cutoff] = 0.0
    return weights / weights.sum()


def _check_normalized(state) -> None:
    norm = np.linalg.norm(state)
    if abs(norm - 1.0) > 1e-10:
        raise ValidationError(f"state is not normalized (norm {norm!r})")


# ---------------------------------------------------------------------------
# Quantum Fisher information
# ---------------------------------------------------------------------------

def pure_state_qfi(state, op) -> float:
    """4 (<O^2> - <O>^2) for a normalized pure state."""
    state = np.asarray(state)
    _check_normalized(state)
    mat = _as_matrix(op)
    if mat.shape[1] != state.size:
        raise ValidationError("operator and state dimensions differ")
    image = mat @ state
    mean = np.vdot(state, image).real
    second = np.vdot(image, image).real
    return max(0.0, 4.0 * (second - mean**2))


def _support_elements(decomp: SpectralDecomposition, mats):
    """Matrix elements within the support and first/second moments per state."""
    images = []
    for mat in mats:
        if mat.shape[1] != decomp.dimension:
            raise ValidationError(
                f"operator dimension {mat.shape[1]} does not match states ({decomp.dimension})"
            )
        images.append(np.asarray(mat @ decomp.states))
    states_h = decomp.states.conj().T
    within = [states_h @ img for img in images]
    return images, within


def _fisher_entries(decomp: SpectralDecomposition, mats) -> np.ndarray:
    p = decomp.probabilities
    images, within = _support_elements(decomp, mats)
    psum = p[:, None] + p[None, :]
    active = psum > PAIR_CUTOFF
    kernel = np.zeros_like(psum)
    kernel[active] = 2.0 * (p[:, None] - p[None, :])[active] ** 2 / psum[active]
    n = len(mats)
    entries = np.zeros((n, n))
    for a in range(n):
        for b in range(a, n):
            # Re(A_kk' B_k'k)
            cross = (within[a] * within[b].T).real
            value = np.sum(kernel * cross)
            anticomm = 2.0 * np.einsum("ik,ik->k", images[a].conj(), images[b]).real
            completion = anticomm - 2.0 * cross.sum(axis=1)
            value += 2.0 * np.sum(p * completion)
            entries[a, b] = entries[b, a] = value
    return entries


def mixed_state_qfi(decomp: SpectralDecomposition, op) -> float:
    """Quantum Fisher information of a mixed state under the unitary generated by ``op``.

    States with zero weight outside the stored support are accounted for
    exactly through the completeness relation, so a truncated thermal
    decomposition gives the same value as the full one.
    """
    mat = _as_matrix(op)
    return max(0.0, float(_fisher_entries(decomp, [mat])[0, 0]))


@dataclass(frozen=True)
class FisherMatrix:
    entries: np.ndarray
    optimal_value: float
    optimal_direction: np.ndarray
    degenerate: bool = False

    @property
    def optimal_axis(self) -> str:
        return AXES[int(np.argmax(np.abs(self.optimal_direction)))]


def _canonical_sign(vec: np.ndarray) -> np.ndarray:
    for comp in vec:
        if abs(comp) > 1e-12:
            return vec if comp > 0 else -vec
    return vec


def fisher_from_entries(entries: np.ndarray, degeneracy_tol: float = 1e-10) -> FisherMatrix:
    entries = 0.5 * (entries + entries.T)
    vals, vecs = np.linalg.eigh(entries)
    top = vals[-1]
    close = np.abs(vals - top) <= degeneracy_tol * max(1.0, abs(top))
    if close.sum() == 1:
        direction = _canonical_sign(vecs[:, -1])
        return FisherMatrix(entries, float(top), direction, False)
    basis = vecs[:, close]
    candidates = []
    for axis in np.eye(entries.shape[0]):
        proj = basis @ (basis.T @ axis)
        norm = np.linalg.norm(proj)
        if norm > 1e-8:
            candidates.append(_canonical_sign(proj / norm))
    direction = max(candidates, key=lambda v: tuple(np.round(v, 12)))
    return FisherMatrix(entries, float(top), direction, True)


def _check_axis_set(mats) -> None:
    for a in range(len(mats)):
        for b in range(a + 1, len(mats)):
            left, right = mats[a], mats[b]
            inner = (left.conj().multiply(right)).sum() if sp.issparse(left) else np.vdot(left, right)
            norm_a = math.sqrt(abs((left.conj().multiply(left)).sum()) if sp.issparse(left)
                               else abs(np.vdot(left, left)))
            norm_b = math.sqrt(abs((right.conj().multiply(right)).sum()) if sp.issparse(right)
                               else abs(np.vdot(right, right)))
            if abs(inner) > 1e-10 * norm_a * norm_b:
                raise ValidationError("operators are not mutually orthogonal axis choices")


def fisher_matrix_su2(decomp: SpectralDecomposition, ops: Sequence) -> FisherMatrix:
    """3x3 Fisher matrix over three orthogonal generators, with its optimum."""
    if len(ops) != 3:
        raise ValidationError("need exactly three operators")
    if all(isinstance(op, CollectiveOperator) for op in ops):
        if len({(op.representation, op.staggered, op.n_sites, op.basis) for op in ops}) != 1:
            raise ValidationError("operators must share one representation")
        if sorted(op.axis for op in ops) != list(AXES):
            raise ValidationError("operators must cover the x, y and z axes once each")
    mats = [_as_matrix(op) for op in ops]
    _check_axis_set(mats)
    return fisher_from_entries(_fisher_entries(decomp, mats))


class EigenbasisFisher:
    """Fisher matrices of Boltzmann states from one full eigensystem.

    The operator matrix elements in the eigenbasis are computed once, so each
    temperature costs only O(K^2) in the number K of populated levels.
    """

    def __init__(self, energies, vectors, ops: Sequence):
        self.energies = np.asarray(energies, dtype=float)
        vectors = np.asarray(vectors)
        mats = [_as_matrix(op) for op in ops]
        vh = vectors.conj().T
        self._set_elements([vh @ np.asarray(m @ vectors) for m in mats])

    @classmethod
    def from_elements(cls, energies, elements: Sequence) -> "EigenbasisFisher":
        """Build from operator matrices already expressed in the full eigenbasis."""
        obj = cls.__new__(cls)
        obj.energies = np.asarray(energies, dtype=float)
        obj._set_elements([np.asarray(el) for el in elements])
        return obj

    def _set_elements(self, elements) -> None:
        self.elements = elements
        self.squares = {}
        for a in range(len(elements)):
            for b in range(a, len(elements)):
                self.squares[a, b] = 2.0 * np.einsum(
                    "ik,ki->i", self.elements[a], self.elements[b]).real

    def entries(self, temperature: float) -> np.ndarray:
        weights = thermal_weights(self.energies, temperature)
        keep = np.flatnonzero(weights)
        p = weights[keep]
        psum = p[:, None] + p[None, :]
        kernel = np.where(psum > PAIR_CUTOFF,
                          2.0 * (p[:, None] - p[None, :]) ** 2 / np.where(psum > 0, psum, 1.0), 0.0)
        n = len(self.elements)
        out = np.zeros((n, n))
        for a in range(n):
            block_a = self.elements[a][np.ix_(keep, keep)]
            for b in range(a, n):
                block_b = self.elements[b][np.ix_(keep, keep)]
                cross = (block_a * block_b.T).real
                completion = self.squares[a, b][keep] - 2.0 * cross.sum(axis=1)
                out[a, b] = out[b, a] = np.sum(kernel * cross) + 2.0 * np.sum(p * completion)
        return out

    def fisher(self, temperature: float) -> FisherMatrix:
        return fisher_from_entries(self.entries(temperature))

    def moments(self, temperature: float):
        """Mean vector and symmetrized covariance of the operators."""
        weights = thermal_weights(self.energies, temperature)
        mean = np.array([np.sum(weights * np.diag(el).real) for el in self.elements])
        n = len(self.elements)
        cov = np.zeros((n, n))
        for a in range(n):
            for b in range(a, n):
                second = 0.5 * np.sum(weights * self.squares[a, b])
                cov[a, b] = cov[b, a] = second - mean[a] * mean[b]
        return mean, cov


# ---------------------------------------------------------------------------
# Bounds and squeezing
# ---------------------------------------------------------------------------

def k_producibility_bound(N: int, kappa: int, spread: float = 1.0) -> float:
    """Largest QFI reachable by kappa-producible states."""
    if not 1 <= kappa <= N:
        raise ValidationError(f"kappa must lie in [1, {N}], got {kappa}")
    blocks = N // kappa
    return float((blocks * kappa**2 + (N - blocks * kappa) ** 2) * spread**2)


def entanglement_depth(fq_density: float, N: int) -> int:
    """Largest kappa with fq_density > kappa, capped at N-1 (0: no witness)."""
    if fq_density < 0:
        raise ValidationError("fq_density must be nonnegative")
    depth = math.ceil(fq_density) - 1
    return int(min(max(depth, 0), N - 1))


def moments_from_decomposition(decomp: SpectralDecomposition, ops: Sequence):
    mats = [_as_matrix(op) for op in ops]
    p = decomp.probabilities
    images = [np.asarray(m @ decomp.states) for m in mats]
    mean = np.array([np.sum(p * np.einsum("ik,ik->k", decomp.states.conj(), img).real)
                     for img in images])
    n = len(mats)
    cov = np.zeros((n, n))
    for a in range(n):
        for b in range(a, n):
            second = np.sum(p * np.einsum("ik,ik->k", images[a].conj(), images[b]).real)
            cov[a, b] = cov[b, a] = second - mean[a] * mean[b]
    return mean, cov


def squeezing_from_moments(mean, cov, N: int, tol: float = 1e-10) -> float:
    """N min_perp Var / |<J>|^2 from the mean vector and covariance matrix."""
    length = float(np.linalg.norm(mean))
    if length <= tol * max(1.0, N):
        raise SqueezingUndefinedError("mean spin vanishes; squeezing parameter undefined")
    unit = np.asarray(mean) / length
    helper = np.eye(3)[int(np.argmin(np.abs(unit)))]
    first = np.cross(unit, helper)
    first /= np.linalg.norm(first)
    second = np.cross(unit, first)
    plane = np.column_stack([first, second])
    block = plane.T @ cov @ plane
    tr, det = np.trace(block), np.linalg.det(block)
    smallest = 0.5 * (tr - math.sqrt(max(tr * tr - 4 * det, 0.0)))
    return N * smallest / length**2


def wineland_squeezing(decomp: SpectralDecomposition, spin_ops: Sequence, N: int | None = None) -> float:
    """Wineland spin-squeezing parameter xi_R^2."""
    if N is None:
        if not all(isinstance(op, CollectiveOperator) for op in spin_ops):
            raise ValidationError("pass N explicitly for raw operator matrices")
        N = spin_ops[0].n_sites
    mean, cov = moments_from_decomposition(decomp, spin_ops)
    return squeezing_from_moments(mean, cov, N)


# ---------------------------------------------------------------------------
# Classical Fisher information
# ---------------------------------------------------------------------------

def _as_distribution(result) -> dict:
    if isinstance(result, Mapping):
        return {key: float(val) for key, val in result.items()}
    return {i: float(val) for i, val in enumerate(np.asarray(result, dtype=float))}


def classical_fisher_information(likelihood: Callable[[float], Mapping | Sequence[float]],
                                 phi: float, dphi: float = 1e-5,
                                 return_excluded: bool = False):
    """Sum over outcomes of (dP/dphi)^2 / P using central differences.

    Outcomes with P = 0 but a nonzero derivative are dropped and counted.
    """
    centre = _as_distribution(likelihood(phi))
    plus = _as_distribution(likelihood(phi + dphi))
    minus = _as_distribution(likelihood(phi - dphi))
    total, excluded = 0.0, 0
    for outcome, prob in centre.items():
        deriv = (plus.get(outcome, 0.0) - minus.get(outcome, 0.0)) / (2 * dphi)
        if prob <= 0.0:
            if deriv != 0.0:
                excluded += 1
            continue
        total += deriv**2 / prob
    if excluded:
        warnings.warn(f"{excluded} outcome(s) with zero probability excluded", RuntimeWarning)
    return (total, excluded) if return_excluded else total


def hellinger_distance_squared(p: Mapping | Sequence[float], q: Mapping | Sequence[float]) -> float:
    """1 - sum sqrt(p q) over a common outcome set."""
    p, q = _as_distribution(p), _as_distribution(q)
    overlap = sum(math.sqrt(max(p[k], 0.0) * max(q.get(k, 0.0), 0.0)) for k in p)
    return 1.0 - overlap
