"""Bipartite pure states, Schmidt data and entanglement measures.

A state of C^d1 (x) C^d2 is stored as its d1 x d2 coefficient matrix: entry
(i, j) is the amplitude of |i>|j>.  Schmidt coefficients are then the singular
values of that matrix and the Schmidt rank is its rank.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.stats import unitary_group

from .errors import (
    BadRank,
    DimensionMismatch,
    NonNormalized,
    ZeroVector,
)

SeedLike = Union[None, int, np.random.Generator, np.random.SeedSequence]


@dataclass(frozen=True)
class Tolerances:
    norm: float = 1e-10
    rank: float = 1e-9
    recon: float = 1e-9
    root_cluster: float = 1e-8
    search_product: float = 1e-9

    def __post_init__(self):
        for name in ("norm", "rank", "recon", "root_cluster", "search_product"):
            if not getattr(self, name) > 0:
                raise ValueError(f"tolerance {name!r} must be strictly positive")

    def as_dict(self) -> dict:
        return {
            "norm": self.norm,
            "rank": self.rank,
            "recon": self.recon,
            "root_cluster": self.root_cluster,
            "search_product": self.search_product,
        }


DEFAULT_TOL = Tolerances()


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized pure state of a d1 x d2 system.

    Construction checks the Frobenius norm against ``tol.norm``; use
    :meth:`from_matrix` with ``normalize=True`` to build from unnormalized
    amplitudes.
    """

    d1: int
    d2: int
    coeffs: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        if int(self.d1) < 1 or int(self.d2) < 1:
            raise DimensionMismatch(f"dimensions must be positive, got {self.d1}x{self.d2}")
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.d1, self.d2):
            raise DimensionMismatch(
                f"coefficient matrix has shape {c.shape}, expected {(self.d1, self.d2)}"
            )
        nrm = np.linalg.norm(c)
        if abs(nrm - 1.0) > self.tol.norm:
            raise NonNormalized(f"state norm is {nrm!r}, expected 1 within {self.tol.norm}")
        object.__setattr__(self, "coeffs", _frozen(c))

    @classmethod
    def from_matrix(cls, m, normalize: bool = True, tol: Tolerances = DEFAULT_TOL) -> "PureState":
        m = np.atleast_2d(np.asarray(m, dtype=complex))
        if normalize:
            nrm = np.linalg.norm(m)
            if nrm < tol.norm:
                raise ZeroVector("cannot normalize a zero vector")
            m = m / nrm
        return cls(m.shape[0], m.shape[1], m, tol)

    @classmethod
    def from_vector(cls, v, d1: int, d2: int, normalize: bool = True,
                    tol: Tolerances = DEFAULT_TOL) -> "PureState":
        v = np.asarray(v, dtype=complex)
        if v.size != d1 * d2:
            raise DimensionMismatch(f"vector of length {v.size} does not fit {d1}x{d2}")
        return cls.from_matrix(v.reshape(d1, d2), normalize=normalize, tol=tol)

    @classmethod
    def from_kets(cls, d1: int, d2: int, amplitudes: dict, normalize: bool = True,
                  tol: Tolerances = DEFAULT_TOL) -> "PureState":
        """Build from ``{(i, j): amplitude}``, e.g. ``{(0, 0): 1, (1, 1): 1}``."""
        m = np.zeros((d1, d2), dtype=complex)
        for (i, j), amp in amplitudes.items():
            m[i, j] += amp
        return cls.from_matrix(m, normalize=normalize, tol=tol)

    @classmethod
    def product(cls, u, v, tol: Tolerances = DEFAULT_TOL) -> "PureState":
        u = np.asarray(u, dtype=complex)
        v = np.asarray(v, dtype=complex)
        return cls.from_matrix(np.outer(u, v), normalize=True, tol=tol)

    @property
    def vector(self) -> np.ndarray:
        return self.coeffs.reshape(-1)

    @property
    def shape(self) -> tuple:
        return (self.d1, self.d2)

    def overlap(self, other: "PureState") -> complex:
        """<self|other>."""
        _check_same_dims([self, other])
        return complex(np.vdot(self.vector, other.vector))

    def fidelity(self, other: "PureState") -> float:
        return abs(self.overlap(other)) ** 2

    def same_ray(self, other: "PureState", tol: float = 1e-9) -> bool:
        return abs(abs(self.overlap(other)) - 1.0) <= tol

    def __repr__(self):
        return f"PureState({self.d1}x{self.d2})"


@dataclass(frozen=True, eq=False)
class SchmidtData:
    singular_values: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray
    numeric_rank: int
    tol_used: float

    def reconstruct(self) -> np.ndarray:
        return (self.left_vectors * self.singular_values) @ self.right_vectors.T


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Density matrix on C^d1 (x) C^d2 (dim = d1*d2)."""

    matrix: np.ndarray
    d1: int
    d2: int
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        dim = self.d1 * self.d2
        if m.shape != (dim, dim):
            raise DimensionMismatch(f"density matrix shape {m.shape} does not match {dim}")
        if np.max(np.abs(m - m.conj().T)) > self.tol.norm:
            raise NonNormalized("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > self.tol.norm:
            raise NonNormalized("density matrix does not have unit trace")
        if np.linalg.eigvalsh(m).min() < -self.tol.norm:
            raise NonNormalized("density matrix is not positive semidefinite")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.d1 * self.d2

    @classmethod
    def mixture(cls, weights: Sequence[float], states: Sequence[PureState],
                tol: Tolerances = DEFAULT_TOL) -> "DensityOperator":
        _check_same_dims(states)
        d1, d2 = states[0].shape
        m = sum(w * np.outer(s.vector, s.vector.conj()) for w, s in zip(weights, states))
        return cls(m, d1, d2, tol)

    def support(self, tol: float | None = None) -> list[PureState]:
        """Orthonormal eigenvectors spanning the range."""
        tol = self.tol.rank if tol is None else tol
        w, v = np.linalg.eigh(self.matrix)
        keep = w > tol * max(w.max(), 0.0)
        return [PureState.from_vector(v[:, k], self.d1, self.d2) for k in np.flatnonzero(keep)[::-1]]

    def rank(self, tol: float | None = None) -> int:
        return len(self.support(tol))


def _check_same_dims(states: Sequence[PureState]):
    if not states:
        return
    d = states[0].shape
    for s in states[1:]:
        if s.shape != d:
            raise DimensionMismatch(f"states have different shapes {d} and {s.shape}")


def _as_state(state) -> PureState:
    if isinstance(state, PureState):
        return state
    return PureState.from_matrix(state, normalize=False)


def schmidt_decompose(state: PureState, tol: Tolerances = DEFAULT_TOL) -> SchmidtData:
    """Schmidt decomposition via SVD of the coefficient matrix.

    Parameters
    ----------
    state : PureState
        Normalized bipartite state.
    tol : Tolerances
        ``tol.rank`` is the relative threshold for counting nonzero Schmidt
        coefficients (sigma_k > tol.rank * sigma_1).

    Returns
    -------
    SchmidtData
        Descending singular values with left/right Schmidt vectors as columns,
        so that ``coeffs = sum_k s_k u_k v_k^T``.
    """
    c = state.coeffs
    nrm = np.linalg.norm(c)
    if abs(nrm - 1.0) > tol.norm:
        raise NonNormalized(f"state norm is {nrm!r}")
    u, s, vh = np.linalg.svd(c, full_matrices=False)
    rank = int(np.count_nonzero(s > tol.rank * s[0])) if s[0] > 0 else 0
    data = SchmidtData(s, u, vh.T, rank, tol.rank)
    return data


def schmidt_rank(state: PureState, tol: Tolerances = DEFAULT_TOL) -> int:
    return schmidt_decompose(state, tol).numeric_rank


def second_singular_value(m) -> float:
    """Second singular value of a coefficient matrix, 0 for a single row/column."""
    m = m.coeffs if isinstance(m, PureState) else np.asarray(m)
    s = np.linalg.svd(m, compute_uv=False)
    return float(s[1]) if s.size > 1 else 0.0


def is_product(state: PureState, tol: Tolerances = DEFAULT_TOL) -> bool:
    return schmidt_rank(state, tol) == 1


def entanglement_entropy(state: PureState, tol: Tolerances = DEFAULT_TOL) -> float:
    """Von Neumann entropy (bits) of either reduced state."""
    s = schmidt_decompose(state, tol).singular_values
    p = s**2
    p = p[p > 0]
    e = float(-np.sum(p * np.log2(p)))
    return max(e, 0.0)


def concurrence_2x2(state: PureState) -> float:
    if state.shape != (2, 2):
        raise DimensionMismatch(f"concurrence_2x2 needs a 2x2 state, got {state.shape}")
    nrm = np.linalg.norm(state.coeffs)
    if abs(nrm - 1.0) > state.tol.norm:
        raise NonNormalized(f"state norm is {nrm!r}")
    return float(min(2.0 * abs(np.linalg.det(state.coeffs)), 1.0))


@dataclass(frozen=True, eq=False)
class Superposition:
    state: PureState
    raw_norm: float


def superpose(states: Sequence[PureState], coeffs: Sequence[complex],
              tol: Tolerances = DEFAULT_TOL) -> Superposition:
    """Normalized linear combination ``sum_k coeffs[k] * states[k]``.

    The norm of the combination before normalization is kept in ``raw_norm``.
    """
    if len(states) != len(coeffs):
        raise DimensionMismatch("need exactly one coefficient per state")
    if not states:
        raise ZeroVector("empty superposition")
    _check_same_dims(states)
    m = np.zeros(states[0].shape, dtype=complex)
    for s, c in zip(states, coeffs):
        m += complex(c) * s.coeffs
    nrm = float(np.linalg.norm(m))
    if nrm < tol.norm:
        raise ZeroVector(f"superposition has norm {nrm!r}")
    if abs(nrm - 1.0) > 8 * np.finfo(float).eps:  # keep already-normalized input bitwise
        m = m / nrm
    return Superposition(PureState.from_matrix(m, normalize=False, tol=tol), nrm)


# random states ------------------------------------------------------------

def as_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_unit_vector(n: int, seed: SeedLike = None) -> np.ndarray:
    rng = as_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def haar_frame(n: int, k: int, seed: SeedLike = None) -> np.ndarray:
    """First k columns of a Haar-random n x n unitary."""
    rng = as_rng(seed)
    if n == 1:
        u = np.exp(2j * np.pi * rng.random()) * np.ones((1, 1))
    else:
        u = unitary_group.rvs(n, random_state=rng)
    return u[:, :k]


def random_state(d1: int, d2: int, seed: SeedLike = None) -> PureState:
    rng = as_rng(seed)
    m = rng.standard_normal((d1, d2)) + 1j * rng.standard_normal((d1, d2))
    return PureState.from_matrix(m)


def random_rank_r_state(d1: int, d2: int, r: int, seed: SeedLike = None,
                        floor: float = 0.2) -> PureState:
    """State of exact Schmidt rank ``r``.

    Schmidt coefficients are drawn uniformly from [floor, 1] before
    normalization so they stay well away from zero.
    """
    if not 1 <= r <= min(d1, d2):
        raise BadRank(f"rank {r} impossible in {d1}x{d2}")
    rng = as_rng(seed)
    s = rng.uniform(floor, 1.0, size=r)
    s = np.sort(s / np.linalg.norm(s))[::-1]
    u = haar_frame(d1, r, rng)
    v = haar_frame(d2, r, rng)
    return PureState.from_matrix((u * s) @ v.T)


def random_product_state(d1: int, d2: int, seed: SeedLike = None) -> PureState:
    rng = as_rng(seed)
    return PureState.product(random_unit_vector(d1, rng), random_unit_vector(d2, rng))


# named states -------------------------------------------------------------

def ket(d1: int, d2: int, i: int, j: int) -> PureState:
    return PureState.from_kets(d1, d2, {(i, j): 1.0})


PLUS = np.array([1.0, 1.0]) / np.sqrt(2)
MINUS = np.array([1.0, -1.0]) / np.sqrt(2)


def bell_states() -> dict[str, PureState]:
    r = 1 / np.sqrt(2)
    return {
        "phi+": PureState.from_matrix([[r, 0], [0, r]]),
        "phi-": PureState.from_matrix([[r, 0], [0, -r]]),
        "psi+": PureState.from_matrix([[0, r], [r, 0]]),
        "psi-": PureState.from_matrix([[0, r], [-r, 0]]),
    }


def magic_basis() -> list[PureState]:
    """Two-qubit magic basis; real combinations are maximally entangled."""
    b = bell_states()
    return [b["phi+"], _mul(1j, b["phi-"]), _mul(1j, b["psi+"]), b["psi-"]]


def _mul(c: complex, s: PureState) -> PureState:
    return PureState.from_matrix(c * s.coeffs, normalize=False)
