"""Unextendible entangled bases whose members all have Schmidt rank >= r >= 3.

For such a basis no member can be conclusively identified by LOCC: a product
state orthogonal to the other members lies in span{drawn} + complement, and
when the complement consists of products sharing a common local factor every
element with a nonzero drawn-state component is "rank >= 3 state + product",
which is entangled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import BadCandidate, CertificateUnavailable, NotOrthonormal, PreconditionViolated
from .products import (
    DEFAULT_STARTS,
    Subspace,
    _substream,
    max_independent_products,
    product_in_subspace,
)
from .states import (
    DEFAULT_TOL,
    DensityOperator,
    PureState,
    SeedLike,
    Tolerances,
    entanglement_entropy,
    schmidt_rank,
)

REALIZATION = "fourier-phase shifted diagonals: psi_{3s+k+1} = sum_j w^{jk} |j>|j+s mod 3> / sqrt(3)"


@dataclass(frozen=True, eq=False)
class UebCandidate:
    d1: int
    d2: int
    states: tuple
    r_claimed: int = 3
    realization: str = ""
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        states = tuple(self.states)
        object.__setattr__(self, "states", states)
        for s in states:
            if s.shape != (self.d1, self.d2):
                raise BadCandidate(f"state of shape {s.shape} in a {self.d1}x{self.d2} candidate")

    @property
    def N(self) -> int:
        return len(self.states)

    def gram_deviation(self) -> float:
        V = np.array([s.vector for s in self.states])
        return float(np.max(np.abs(V.conj() @ V.T - np.eye(len(V)))))

    def complement(self) -> Subspace:
        return Subspace.orthocomplement(list(self.states), tol=self.tol)


def _psi(s: int, k: int) -> np.ndarray:
    w = np.exp(2j * np.pi / 3)
    m = np.zeros((4, 4), dtype=complex)
    for j in range(3):
        m[j, (j + s) % 3] = w ** (j * k) / np.sqrt(3)
    return m


def paper_psi_states() -> list[PureState]:
    """The nine rank-3 states psi_1..psi_9 (index 3s + k)."""
    return [PureState.from_matrix(_psi(s, k), normalize=False) for s in range(3) for k in range(3)]


def _ket(i, j):
    m = np.zeros((4, 4), dtype=complex)
    m[i, j] = 1.0
    return m


def full_sixteen_states() -> list[PureState]:
    """The 13 UEB members followed by |31>, |32>, |33>."""
    psi = [_psi(s, k) for s in range(3) for k in range(3)]
    r = 1 / np.sqrt(2)
    out = []
    for idx, (i, j) in enumerate([(0, 3), (1, 3), (2, 3), (3, 0)]):
        out.append(r * (psi[idx] + _ket(i, j)))
        out.append(r * (psi[idx] - _ket(i, j)))
    out.extend(psi[4:])
    out.extend(_ket(3, j) for j in (1, 2, 3))
    return [PureState.from_matrix(m, normalize=False) for m in out]


def build_paper_3ueb() -> UebCandidate:
    """The 13-member 3-UEB of C^4 (x) C^4 whose complement is span{|31>,|32>,|33>}."""
    return UebCandidate(4, 4, full_sixteen_states()[:13], r_claimed=3, realization=REALIZATION)


# ---------------------------------------------------------------------------


def common_factor(states: Sequence[PureState], tol: Tolerances = DEFAULT_TOL):
    """Shared local factor of a set of states, if any.

    Returns ``("left", x)`` when every state is x (x) v_k, ``("right", y)``
    when every state is v_k (x) y, or ``None``.  All elements of the span are
    then products, which is what the exact complement certificate needs.
    """
    if not states:
        return None
    mats = [s.coeffs for s in states]
    for side, stack in (("left", np.hstack(mats)), ("right", np.vstack(mats))):
        U, sv, Vh = np.linalg.svd(stack)
        if sv.size == 1 or sv[1] <= tol.search_product * sv[0]:
            return side, (U[:, 0] if side == "left" else Vh[0, :])
    return None


def product_basis(space: Subspace, tol: Tolerances = DEFAULT_TOL):
    """Product orthonormal basis of an all-product subspace with a common factor."""
    cf = common_factor(list(space.basis), tol)
    if cf is None:
        return None
    side, f = cf
    if side == "left":
        vecs = np.array([f.conj() @ s.coeffs for s in space.basis])  # rows in C^d2
    else:
        vecs = np.array([s.coeffs @ f.conj() for s in space.basis])
    Q, _ = np.linalg.qr(vecs.T)
    out = []
    for k in range(Q.shape[1]):
        m = np.outer(f, Q[:, k]) if side == "left" else np.outer(Q[:, k], f)
        out.append(PureState.from_matrix(m))
    return out


@dataclass(frozen=True)
class UebReport:
    is_orthonormal: bool
    gram_deviation: float
    min_schmidt_rank: int
    schmidt_ranks: list
    complement_dim: int
    complement_product_certified: bool
    complement_best_entanglement: float
    theorem3_applies: bool
    generalized_condition_holds: bool
    r_claimed: int
    realization: str = ""


def _linear_entropy(m: np.ndarray) -> float:
    s = np.linalg.svd(m, compute_uv=False)
    p = s**2 / np.sum(s**2)
    return 1.0 - float(np.sum(p**2))


def max_entanglement_in(space: Subspace, starts: int = 16, seed: SeedLike = 0) -> float:
    """Heuristic maximum of the entanglement entropy over unit vectors of ``space``.

    Maximizes the (smooth) linear entropy from several random starts and
    reports the von Neumann entropy of the best point.  A lower bound only.
    """
    if space.dim == 0:
        return 0.0
    stack = np.array([s.coeffs for s in space.basis])
    K = space.dim

    def mat(x):
        c = x[:K] + 1j * x[K:]
        return np.tensordot(c, stack, axes=1)

    def neg(x):
        m = mat(x)
        return -_linear_entropy(m / np.linalg.norm(m))

    best, best_m = -1.0, None
    for i in range(starts):
        rng = _substream(seed, i)
        x0 = rng.standard_normal(2 * K)
        res = minimize(neg, x0, method="BFGS")
        m = mat(res.x)
        val = -res.fun
        if val > best:
            best, best_m = val, m / np.linalg.norm(m)
    return entanglement_entropy(PureState.from_matrix(best_m, normalize=False))


def verify_r_ueb(c: UebCandidate, tol: Tolerances = DEFAULT_TOL,
                 starts: int = DEFAULT_STARTS, seed: SeedLike = 0) -> UebReport:
    """Check the r-UEB properties of a candidate basis.

    Orthonormality, minimum Schmidt rank, productness of the complement (exact
    only via a common local factor, otherwise a labelled heuristic), and the
    counting condition d1*d2 - N <= r - 2.
    """
    if c.N >= c.d1 * c.d2:
        raise BadCandidate(f"{c.N} states leave no complement in {c.d1}x{c.d2}")
    if c.r_claimed < 3:
        raise BadCandidate("r_claimed must be at least 3")
    dev = c.gram_deviation()
    if dev > tol.norm:
        raise NotOrthonormal(f"Gram matrix deviates from identity by {dev:.3g}")
    ranks = [schmidt_rank(s, tol) for s in c.states]
    comp = c.complement()
    certified = comp.dim > 0 and common_factor(list(comp.basis), tol) is not None
    if certified:
        best_ent = 0.0
    else:
        best_ent = max_entanglement_in(comp, starts=min(starts, 16), seed=seed)
    min_rank = min(ranks)
    return UebReport(
        is_orthonormal=True,
        gram_deviation=dev,
        min_schmidt_rank=min_rank,
        schmidt_ranks=ranks,
        complement_dim=comp.dim,
        complement_product_certified=certified,
        complement_best_entanglement=best_ent,
        theorem3_applies=bool(min_rank >= c.r_claimed >= 3 and certified),
        generalized_condition_holds=bool(c.d1 * c.d2 - c.N <= c.r_claimed - 2),
        r_claimed=c.r_claimed,
        realization=c.realization,
    )


def theorem3_identifiability(c: UebCandidate, index: int, tol: Tolerances = DEFAULT_TOL,
                             starts: int = DEFAULT_STARTS, seed: SeedLike = 0):
    """Obstruction record showing member ``index`` is not conclusively identifiable.

    Also runs a product search over span{drawn} + complement and records the
    largest overlap of any product found with the drawn state.

    Raises
    ------
    CertificateUnavailable
        If the complement is not certified all-product or the drawn state has
        Schmidt rank below 3 (a complete entangled basis only needs rank 2).
    """
    from .discrimination import IdentifiabilityCertificate, IdVerdict

    dev = c.gram_deviation()
    if dev > tol.norm:
        raise NotOrthonormal(f"Gram matrix deviates from identity by {dev:.3g}")
    drawn = c.states[index]
    others = [s for k, s in enumerate(c.states) if k != index]
    rank = schmidt_rank(drawn, tol)
    comp = Subspace.orthocomplement(list(c.states), c.d1, c.d2, tol) if c.N < c.d1 * c.d2 else None
    if comp is None or comp.dim == 0:
        if rank < 2:
            raise CertificateUnavailable("drawn state is a product state")
        return IdentifiabilityCertificate(
            index, IdVerdict.NOT_IDENTIFIABLE, None,
            "complete entangled basis: the only vectors orthogonal to the other members "
            "are multiples of the drawn state, which is entangled",
            method="rank-argument",
        )
    if common_factor(list(comp.basis), tol) is None:
        raise CertificateUnavailable("complement is not certified to consist of products only")
    if rank < 3:
        raise CertificateUnavailable(f"drawn state has Schmidt rank {rank} < 3")
    S = Subspace.span([drawn, *comp.basis], tol)
    res = product_in_subspace(S, tol, starts, seed)
    overlap = max((abs(drawn.overlap(x)) for x in res.found), default=0.0)
    return IdentifiabilityCertificate(
        index, IdVerdict.NOT_IDENTIFIABLE, None,
        f"a product orthogonal to the other {len(others)} members lies in span(drawn) + complement; "
        f"the complement is spanned by products with a common local factor, so any element with a "
        f"nonzero drawn component is (rank-{rank} state) + (product) and therefore entangled",
        method="rank-argument",
        corroboration={"products_found": len(res.found), "max_overlap_with_target": overlap,
                       "starts": res.starts_used},
    )


@dataclass(frozen=True, eq=False)
class PartiallyEntangledSubspace:
    subspace: Subspace
    product_span_dim: int
    deficit: int
    certified: bool  # deficit >= 1 proven (not just searched)
    reason: str = ""


def assess_subspace(S: Subspace, tol: Tolerances = DEFAULT_TOL, starts: int = DEFAULT_STARTS,
                    seed: SeedLike = 0, certified_deficit: bool = False,
                    reason: str = "") -> PartiallyEntangledSubspace:
    """Product-span dimension and deficit of an arbitrary subspace.

    The deficit is certified for dim(S) <= 2 (exact solvers) or when the
    caller supplies a proof (``certified_deficit``).
    """
    n = max_independent_products(S, tol, starts, seed)
    deficit = S.dim - n
    exact = S.dim <= 2
    cert = deficit >= 1 and (certified_deficit or exact)
    if cert and not reason:
        reason = "exact product count in a span of dimension <= 2"
    return PartiallyEntangledSubspace(S, n, deficit, cert, reason)


def build_partially_entangled_subspace(c: UebCandidate, index: int, tol: Tolerances = DEFAULT_TOL,
                                       starts: int = DEFAULT_STARTS,
                                       seed: SeedLike = 0) -> PartiallyEntangledSubspace:
    """span{drawn member} + product basis of the complement."""
    drawn = c.states[index]
    comp = c.complement()
    pb = product_basis(comp, tol)
    if pb is None:
        raise CertificateUnavailable("complement has no certified product basis")
    rank = schmidt_rank(drawn, tol)
    if rank < 3:
        raise CertificateUnavailable(f"drawn state has Schmidt rank {rank} < 3")
    S = Subspace(c.d1, c.d2, [drawn, *pb], tol)
    return assess_subspace(
        S, tol, starts, seed, certified_deficit=True,
        reason=f"every element with a nonzero drawn component is a rank-{rank} state plus a product, "
               "hence entangled; products span at most the complement",
    )


@dataclass(frozen=True)
class RangeCertificate:
    entangled: bool
    reason: str


def range_criterion_certificate(s: PartiallyEntangledSubspace,
                                rho: DensityOperator | None = None,
                                tol: Tolerances = DEFAULT_TOL) -> RangeCertificate:
    """Entanglement of any density operator whose range is the subspace.

    A separable state's range is spanned by product vectors, which a subspace
    with certified product deficit cannot provide.  If ``rho`` is given its
    range is checked to equal the subspace.
    """
    if rho is not None:
        if (rho.d1, rho.d2) != (s.subspace.d1, s.subspace.d2):
            raise PreconditionViolated("density operator lives on a different space")
        sup = rho.support(tol.rank)
        inside = all(s.subspace.leakage(v) <= 1e-8 for v in sup)
        if len(sup) != s.subspace.dim or not inside:
            raise PreconditionViolated("range of the density operator differs from the subspace")
    if s.deficit < 1:
        raise CertificateUnavailable("subspace has a product basis; range criterion is silent")
    if not s.certified:
        raise CertificateUnavailable("product deficit is only heuristic")
    return RangeCertificate(
        True,
        f"range has dimension {s.subspace.dim} but product vectors in it span only "
        f"{s.product_span_dim} dimensions ({s.reason})",
    )


def uniform_mixture(S: Subspace) -> DensityOperator:
    return DensityOperator.mixture([1.0 / S.dim] * S.dim, list(S.basis))
