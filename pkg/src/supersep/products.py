"""Product states in spans of bipartite states.

Two-dimensional spans are solved exactly: the product states in span{A, B}
are the points [a0:a1] of the projective line where a0*A + a1*B has rank one,
i.e. where every 2x2 minor (a binary quadratic form in (a0, a1)) vanishes.
Larger subspaces are searched by alternating maximization of the overlap
||P (a (x) b)||^2, which only ever proves existence, never absence.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, NotOrthonormal, PreconditionViolated
from .states import (
    DEFAULT_TOL,
    PureState,
    SeedLike,
    Tolerances,
    random_unit_vector,
    schmidt_rank,
)

# candidate roots must make every minor this small (relative) before the SVD check
_SCREEN = 1e-6
# a root is treated as double when every minor's derivative is this small
_DOUBLE = 1e-6
MAX_SWEEPS = 500
DEFAULT_STARTS = 64


class Verdict(str, enum.Enum):
    UNCONDITIONAL = "UnconditionallyInseparable"
    CONDITIONAL = "ConditionallyInseparable"


class CertificateKind(str, enum.Enum):
    RANK_ARGUMENT = "ExactRankArgument"
    PENCIL = "ExactPencil"
    SCAN = "Scan"


@dataclass(frozen=True, eq=False)
class Pencil:
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=complex))
        B = np.atleast_2d(np.asarray(self.B, dtype=complex))
        if A.shape != B.shape:
            raise DimensionMismatch(f"pencil matrices have shapes {A.shape} and {B.shape}")
        if not (np.any(A) or np.any(B)):
            raise PreconditionViolated("pencil matrices are both zero")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @classmethod
    def from_states(cls, a: PureState, b: PureState) -> "Pencil":
        if a.shape != b.shape:
            raise DimensionMismatch(f"states have shapes {a.shape} and {b.shape}")
        return cls(a.coeffs, b.coeffs)

    def at(self, a0: complex, a1: complex) -> np.ndarray:
        return a0 * self.A + a1 * self.B


@dataclass(frozen=True, eq=False)
class PencilRoot:
    coeff_pair: tuple  # (a0, a1) with ||a0 A + a1 B|| = 1
    product_state: PureState
    residual: float  # sigma_2 / sigma_1 of a0 A + a1 B
    multiplicity: int

    @property
    def at_infinity(self) -> bool:
        return self.coeff_pair[0] == 0


@dataclass(frozen=True, eq=False)
class PencilRootSet:
    roots: list
    includes_infinity: bool
    degenerate: bool = False  # rank <= 1 along the whole pencil

    @property
    def finite_roots(self) -> list:
        return [r for r in self.roots if not r.at_infinity]

    def __len__(self):
        return len(self.roots)


@dataclass(frozen=True, eq=False)
class PairClassification:
    verdict: Verdict
    witnesses: list  # [(coeff_pair, PureState)]
    certificate_kind: CertificateKind
    roots: PencilRootSet | None = None

    def __post_init__(self):
        if self.verdict is Verdict.CONDITIONAL and not self.witnesses:
            raise ValueError("conditional verdict needs at least one witness")
        if self.verdict is Verdict.UNCONDITIONAL and self.witnesses:
            raise ValueError("unconditional verdict cannot carry witnesses")


# ---------------------------------------------------------------------------
# pencil solver


def minor_coefficients(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Coefficients (c0, c1, c2) of every 2x2 minor of a0*A + a1*B.

    Row m holds the binary quadratic c0*a0^2 + c1*a0*a1 + c2*a1^2.
    """
    d1, d2 = A.shape
    if d1 < 2 or d2 < 2:
        return np.zeros((0, 3), dtype=complex)
    rp = np.array(list(combinations(range(d1), 2)))
    cp = np.array(list(combinations(range(d2), 2)))
    i, j = rp[:, 0][:, None], rp[:, 1][:, None]
    k, l = cp[:, 0][None, :], cp[:, 1][None, :]
    Aik, Ajl, Ail, Ajk = A[i, k], A[j, l], A[i, l], A[j, k]
    Bik, Bjl, Bil, Bjk = B[i, k], B[j, l], B[i, l], B[j, k]
    c0 = Aik * Ajl - Ail * Ajk
    c1 = Aik * Bjl + Bik * Ajl - Ail * Bjk - Bil * Ajk
    c2 = Bik * Bjl - Bil * Bjk
    return np.stack([c0.ravel(), c1.ravel(), c2.ravel()], axis=1)


def _quadratic_points(c: np.ndarray) -> list[np.ndarray]:
    """Projective roots of one binary quadratic, each from its stable chart.

    The charts overlap slightly so roots on |t| = 1 are never lost to
    rounding; duplicates are merged by the caller's clustering.
    """
    pts = []
    for t in np.roots([c[2], c[1], c[0]]):
        if abs(t) <= 1.0 + 1e-6:
            pts.append(np.array([1.0, t], dtype=complex))
    for s in np.roots([c[0], c[1], c[2]]):
        if abs(s) <= 1.0 + 1e-6:
            pts.append(np.array([s, 1.0], dtype=complex))
    return pts


def _chart(u: np.ndarray, C: np.ndarray):
    """Affine coordinate of u and the minor polynomials (p0, p1, p2) in it."""
    if abs(u[0]) >= abs(u[1]):
        return u[1] / u[0], C, False
    return u[0] / u[1], C[:, ::-1], True


def _polish(u: np.ndarray, C: np.ndarray) -> tuple[np.ndarray, int, float]:
    z, P, flipped = _chart(u, C)
    p0, p1, p2 = P[:, 0], P[:, 1], P[:, 2]

    def jac(z):
        return p1 + 2 * p2 * z

    mult = 1
    if np.max(np.abs(jac(z))) <= _DOUBLE:
        # double root: the derivatives vanish simply there, solve them instead
        g = 2 * p2
        gg = np.vdot(g, g).real
        if gg > 0:
            z = -np.vdot(g, p1) / gg
        mult = 2
    else:
        for _ in range(60):
            F = p0 + p1 * z + p2 * z * z
            J = jac(z)
            jj = np.vdot(J, J).real
            if jj == 0:
                break
            step = np.vdot(J, F) / jj
            z = z - step
            if abs(step) <= 1e-16 * (1 + abs(z)):
                break
    F = p0 + p1 * z + p2 * z * z
    u = np.array([z, 1.0], dtype=complex) if flipped else np.array([1.0, z], dtype=complex)
    return u / np.linalg.norm(u), mult, float(np.max(np.abs(F)))


def _chordal(u: np.ndarray, v: np.ndarray) -> float:
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    return float(abs(u[0] * v[1] - u[1] * v[0]))


def _make_root(p: Pencil, u: np.ndarray, mult: int, tol: Tolerances) -> PencilRoot | None:
    M = p.at(u[0], u[1])
    nrm = np.linalg.norm(M)
    if nrm < tol.norm * (np.linalg.norm(p.A) + np.linalg.norm(p.B)):
        return None  # a0 A + a1 B vanishes here: not a state
    U, s, Vh = np.linalg.svd(M / nrm)
    resid = float(s[1] / s[0]) if s.size > 1 else 0.0
    if resid > tol.search_product:
        return None
    a0, a1 = u / nrm
    # canonical phase: first nonzero coefficient real and positive
    ref = a0 if abs(a0) > tol.norm else a1
    ph = np.conj(ref) / abs(ref)
    a0, a1 = a0 * ph, a1 * ph
    if abs(u[0]) == 0:
        a0 = 0.0
    prod = PureState.from_matrix(ph * np.outer(U[:, 0], Vh[0, :]), normalize=True)
    return PencilRoot((complex(a0), complex(a1)), prod, resid, mult)


def pencil_product_roots(p: Pencil, tol: Tolerances = DEFAULT_TOL) -> PencilRootSet:
    """All product directions [a0:a1] in the span of the pencil.

    Every 2x2 minor of ``a0*A + a1*B`` is a binary quadratic; rank-one points
    are their common roots.  Roots of the dominant minors are taken as
    candidates, polished against all minors in least squares (double roots are
    found from the derivatives, where they are simple), screened by the
    residual of every minor, clustered within ``tol.root_cluster`` and finally
    accepted only if the matrix passes an SVD rank-one check.  The point
    [0:1] is decided separately by a rank test on ``B``.
    """
    scale = np.linalg.norm(p.A) + np.linalg.norm(p.B)
    A, B = p.A / scale, p.B / scale
    C = minor_coefficients(A, B)
    norms = np.linalg.norm(C, axis=1) if C.size else np.zeros(0)
    cmax = float(norms.max()) if norms.size else 0.0
    if cmax <= tol.norm:
        return PencilRootSet([], includes_infinity=False, degenerate=True)
    C = C / cmax
    norms = norms / cmax

    roots: list[PencilRoot] = []
    inf_u = np.array([0.0, 1.0], dtype=complex)
    B_rank_one = schmidt_like_rank_one(p.B, tol)
    if B_rank_one:
        mult = 2 if np.max(np.abs(C[:, 1])) <= _DOUBLE else 1
        r = _make_root(p, inf_u, mult, tol)
        if r is not None:
            roots.append(r)

    order = np.argsort(-norms)
    ref_rows = [m for m in order[:8] if norms[m] >= 0.1]
    accepted: list[tuple[np.ndarray, int]] = []
    for m in ref_rows:
        for u0 in _quadratic_points(C[m]):
            u, mult, res = _polish(u0, C)
            if res > _SCREEN:
                continue
            if B_rank_one and _chordal(u, inf_u) <= tol.root_cluster:
                continue
            if any(_chordal(u, v) <= tol.root_cluster for v, _ in accepted):
                continue
            accepted.append((u, mult))
    for u, mult in accepted:
        r = _make_root(p, u, mult, tol)
        if r is None:
            continue
        if any(r.product_state.fidelity(q.product_state) > 1 - 1e-12 for q in roots):
            continue
        roots.append(r)
    roots.sort(key=lambda r: (r.at_infinity, -abs(r.coeff_pair[0])))
    return PencilRootSet(roots, includes_infinity=bool(roots) and any(r.at_infinity for r in roots))


def schmidt_like_rank_one(m: np.ndarray, tol: Tolerances) -> bool:
    s = np.linalg.svd(m, compute_uv=False)
    if s[0] == 0:
        return False
    return s.size == 1 or s[1] <= tol.search_product * s[0]


def classify_pencil(a: PureState, b: PureState, tol: Tolerances = DEFAULT_TOL) -> PairClassification:
    """Unconditional vs conditional inseparability of an (entangled, product) pair.

    The pair is unconditionally inseparable exactly when the only product
    direction in span{a, b} is b itself.  Otherwise every product-producing
    coefficient pair is returned as a witness.
    """
    if schmidt_rank(a, tol) < 2:
        raise PreconditionViolated("first state of the pair must be entangled")
    if schmidt_rank(b, tol) != 1:
        raise PreconditionViolated("second state of the pair must be a product state")
    rs = pencil_product_roots(Pencil.from_states(a, b), tol)
    witnesses = [(r.coeff_pair, r.product_state) for r in rs.finite_roots]
    verdict = Verdict.CONDITIONAL if witnesses else Verdict.UNCONDITIONAL
    return PairClassification(verdict, witnesses, CertificateKind.PENCIL, rs)


# ---------------------------------------------------------------------------
# subspaces


@dataclass(frozen=True, eq=False)
class Subspace:
    d1: int
    d2: int
    basis: tuple
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        basis = tuple(self.basis)
        for s in basis:
            if s.shape != (self.d1, self.d2):
                raise DimensionMismatch(f"basis state {s.shape} in a {self.d1}x{self.d2} subspace")
        object.__setattr__(self, "basis", basis)
        if basis:
            dev = self.gram_deviation()
            if dev > self.tol.norm:
                raise NotOrthonormal(f"basis Gram matrix deviates from identity by {dev:.3g}")

    @classmethod
    def span(cls, states: Sequence[PureState], tol: Tolerances = DEFAULT_TOL) -> "Subspace":
        """Orthonormal basis of the span of arbitrary states (in order, Gram-Schmidt style)."""
        if not states:
            raise PreconditionViolated("span of nothing has no dimensions")
        d1, d2 = states[0].shape
        V = np.array([s.vector for s in states]).T
        Q, R = np.linalg.qr(V)
        keep = np.abs(np.diag(R)) > tol.rank * max(np.abs(np.diag(R)).max(), 1e-300)
        if not np.all(keep):
            U, sv, _ = np.linalg.svd(V, full_matrices=False)
            Q = U[:, sv > tol.rank * sv[0]]
        else:
            # keep the first basis vector a positive multiple of states[0]
            Q = Q * (np.diag(R) / np.abs(np.diag(R)))[None, :]
        basis = [PureState.from_vector(Q[:, k], d1, d2, normalize=True, tol=tol) for k in range(Q.shape[1])]
        return cls(d1, d2, basis, tol)

    @classmethod
    def full(cls, d1: int, d2: int, tol: Tolerances = DEFAULT_TOL) -> "Subspace":
        return cls(d1, d2, [PureState.from_kets(d1, d2, {(i, j): 1}) for i in range(d1) for j in range(d2)], tol)

    @classmethod
    def orthocomplement(cls, states: Sequence[PureState], d1: int | None = None,
                        d2: int | None = None, tol: Tolerances = DEFAULT_TOL) -> "Subspace":
        """Orthogonal complement of span(states) in the full space."""
        if states:
            d1, d2 = states[0].shape
        D = d1 * d2
        if not states:
            return cls.full(d1, d2, tol)
        V = np.array([s.vector for s in states])  # rows
        _, sv, Vh = np.linalg.svd(V, full_matrices=True)
        r = int(np.count_nonzero(sv > tol.rank * sv[0]))
        null = Vh[r:]  # rows y with conj(V) y = 0, i.e. <v|y> = 0
        basis = [PureState.from_vector(null[k], d1, d2, normalize=True, tol=tol) for k in range(D - r)]
        return cls(d1, d2, basis, tol)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def matrix(self) -> np.ndarray:
        """Basis vectors as rows, shape (dim, d1*d2)."""
        if not self.basis:
            return np.zeros((0, self.d1 * self.d2), dtype=complex)
        return np.array([s.vector for s in self.basis])

    def gram_deviation(self) -> float:
        V = self.matrix
        return float(np.max(np.abs(V.conj() @ V.T - np.eye(len(V))))) if len(V) else 0.0

    def coordinates(self, state: PureState) -> np.ndarray:
        return self.matrix.conj() @ state.vector

    def leakage(self, state: PureState) -> float:
        """Norm of the part of ``state`` outside the subspace."""
        v = state.vector
        c = self.matrix.conj() @ v
        return float(np.linalg.norm(v - self.matrix.T @ c))

    def deflate(self, state: PureState) -> "Subspace":
        """Orthogonal complement of ``state`` inside this subspace."""
        c = self.coordinates(state)
        if np.linalg.norm(c) < self.tol.norm:
            return self
        _, _, Vh = np.linalg.svd(c.conj()[None, :], full_matrices=True)
        W = Vh[1:].conj()  # coordinate vectors orthogonal to c
        V = W @ self.matrix
        basis = [PureState.from_vector(V[k], self.d1, self.d2, normalize=True, tol=self.tol)
                 for k in range(len(V))]
        return Subspace(self.d1, self.d2, basis, self.tol)


@dataclass(frozen=True, eq=False)
class ProductSearchResult:
    found: list
    best_overlap: float
    starts_used: int
    method: str  # "exact", "pencil" or "alternating"
    residuals: list = field(default_factory=list)  # leakage of each found state
    coefficients: list = field(default_factory=list)  # coordinates in the subspace basis
    degenerate: bool = False


def _substream(seed: SeedLike, index: int) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        raise TypeError("product search needs an integer seed for per-start substreams")
    if isinstance(seed, np.random.SeedSequence):
        entropy = seed.entropy
    else:
        entropy = 0 if seed is None else int(seed)
    return np.random.default_rng(np.random.SeedSequence(entropy, spawn_key=(index,)))


def _top(M: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, float]:
    """Top eigenvector of Hermitian M; on a degenerate top eigenvalue, the projection of x."""
    w, V = np.linalg.eigh(M)
    top = V[:, w >= w[-1] - 1e-12 * max(w[-1], 1.0)]
    if top.shape[1] > 1:
        y = top @ (top.conj().T @ x)
        n = np.linalg.norm(y)
        if n > 1e-8:
            return y / n, float(w[-1])
    return V[:, -1], float(w[-1])


def _sweep(Sc: np.ndarray, a: np.ndarray, b: np.ndarray):
    G = np.einsum("kij,j->ik", Sc, b)
    a, _ = _top(G.conj() @ G.T, a)
    H = np.einsum("kij,i->jk", Sc, a)
    b, f = _top(H.conj() @ H.T, b)
    return a, b, f


def alternating_product_search(Sc: np.ndarray, a: np.ndarray, b: np.ndarray,
                               tol: float, max_sweeps: int = MAX_SWEEPS):
    """Alternating maximization of ||P(a (x) b)||^2 from one start.

    ``Sc`` is the conjugated basis stack, shape (K, d1, d2).  Returns the
    final factors, the overlap and the number of sweeps.
    """
    f_old = -np.inf
    f = 0.0
    n = 0
    for n in range(1, max_sweeps + 1):
        a, b, f = _sweep(Sc, a, b)
        if abs(f - f_old) < tol:
            break
        f_old = f
    return a, b, f, n


def _leak(S: np.ndarray, x: np.ndarray) -> float:
    c = S.conj() @ x
    return float(np.linalg.norm(x - S.T @ c))


def _polish_product(Sc, S_rows, a, b, sweeps=300):
    x = np.outer(a, b).ravel()
    best = (_leak(S_rows, x), a, b)
    stall = 0
    for _ in range(sweeps):
        a, b, _ = _sweep(Sc, a, b)
        x = np.outer(a, b).ravel()
        lk = _leak(S_rows, x)
        if lk < best[0] * 0.999:
            best = (lk, a, b)
            stall = 0
        else:
            stall += 1
        if best[0] < 1e-14 or stall >= 5:
            break
    return best


def _exact_small(S: Subspace, tol: Tolerances, starts: int, seed: SeedLike):
    if S.dim == 1:
        s = S.basis[0]
        sv = np.linalg.svd(s.coeffs, compute_uv=False)
        if schmidt_rank(s, tol) == 1:
            return ProductSearchResult([s], 1.0, 0, "exact", [0.0], [np.array([1.0 + 0j])])
        return ProductSearchResult([], float(sv[0] ** 2), 0, "exact")
    rs = pencil_product_roots(Pencil.from_states(*S.basis), tol)
    if rs.degenerate:
        return None
    found = [r.product_state for r in rs.roots]
    if found:
        best = 1.0
    else:
        best = _alternating(S, tol, starts, seed).best_overlap
    return ProductSearchResult(
        found, best, 0, "pencil",
        [S.leakage(x) for x in found], [S.coordinates(x) for x in found],
    )


def _alternating(S: Subspace, tol: Tolerances, starts: int, seed: SeedLike) -> ProductSearchResult:
    S_rows = S.matrix
    Sc = np.array([s.coeffs for s in S.basis]).conj()
    found, resid = [], []
    best = 0.0
    for i in range(starts):
        rng = _substream(seed, i)
        a = random_unit_vector(S.d1, rng)
        b = random_unit_vector(S.d2, rng)
        a, b, f, _ = alternating_product_search(Sc, a, b, tol.search_product)
        best = max(best, min(f, 1.0))
        if f < 1 - tol.search_product:
            continue
        lk, a, b = _polish_product(Sc, S_rows, a, b)
        x = np.outer(a, b).ravel()
        if any(abs(np.vdot(y.vector, x)) > 1 - 1e-8 for y in found):
            continue
        found.append(PureState.from_vector(x, S.d1, S.d2, normalize=True))
        resid.append(lk)
    return ProductSearchResult(found, best, starts, "alternating", resid,
                               [S.coordinates(x) for x in found])


def product_in_subspace(S: Subspace, tol: Tolerances = DEFAULT_TOL,
                        starts: int = DEFAULT_STARTS, seed: SeedLike = 0) -> ProductSearchResult:
    """Product states in a subspace.

    Spans of dimension one or two are solved exactly (the latter by the pencil
    solver, unless the pencil is rank one throughout).  Otherwise a multi-start
    alternating maximization is run, one RNG substream per start index, and a
    product is reported when its overlap reaches ``1 - tol.search_product``.
    An empty ``found`` list from the alternating path means "none found", not
    "none exists".
    """
    if starts < 1:
        raise PreconditionViolated("starts must be at least 1")
    if S.dim == 0:
        return ProductSearchResult([], 0.0, 0, "exact")
    if S.dim <= 2:
        res = _exact_small(S, tol, starts, seed)
        if res is not None:
            return res
        alt = _alternating(S, tol, starts, seed)
        return ProductSearchResult(alt.found, alt.best_overlap, alt.starts_used, alt.method,
                                   alt.residuals, alt.coefficients, degenerate=True)
    return _alternating(S, tol, starts, seed)


def span_rank(states: Sequence[PureState], tol: float = 1e-8) -> int:
    if not states:
        return 0
    sv = np.linalg.svd(np.array([s.vector for s in states]), compute_uv=False)
    return int(np.count_nonzero(sv > tol * sv[0]))


def max_independent_products(S: Subspace, tol: Tolerances = DEFAULT_TOL,
                             starts: int = DEFAULT_STARTS, seed: SeedLike = 0) -> int:
    """Lower bound on the number of linearly independent product states in S.

    Exact for dim(S) <= 2.  Otherwise greedy: find a product, pass to its
    orthogonal complement inside S, repeat.  The rank of everything found by
    the first search is also a valid lower bound and the larger is returned.
    """
    if S.dim == 0:
        return 0
    if S.dim <= 2:
        res = product_in_subspace(S, tol, starts, seed)
        if res.degenerate:
            return S.dim  # every element of the span is a product
        return span_rank(res.found)
    first = product_in_subspace(S, tol, starts, seed)
    count = 0
    current = S
    res = first
    while current.dim > 0:
        if not res.found:
            break
        count += 1
        current = current.deflate(res.found[0])
        if current.dim == 0:
            break
        res = product_in_subspace(current, tol, starts, seed)
    return max(count, span_rank(first.found))
