"""Conclusive local identification of states in shared ensembles.

A member of an orthonormal set can be conclusively identified by LOCC iff some
product state overlaps it while being orthogonal to every other member.  Such a
product lives in S, the orthogonal complement of the other members; S always
contains the target itself.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import (
    BadWeight,
    CompletionFailed,
    DimensionMismatch,
    NotOrthonormal,
    NoWitness,
    PreconditionViolated,
    UnsupportedShape,
)
from .products import (
    DEFAULT_STARTS,
    PairClassification,
    Pencil,
    Subspace,
    Verdict,
    classify_pencil,
    pencil_product_roots,
    product_in_subspace,
)
from .states import (
    DEFAULT_TOL,
    DensityOperator,
    PureState,
    SeedLike,
    Tolerances,
    as_rng,
    entanglement_entropy,
    magic_basis,
    schmidt_rank,
    second_singular_value,
)


class IdVerdict(str, enum.Enum):
    IDENTIFIABLE = "Identifiable"
    NOT_IDENTIFIABLE = "NotIdentifiable"
    UNKNOWN = "Unknown"


# methods that make a NotIdentifiable verdict exact
EXACT_METHODS = ("trivial", "exact", "pencil", "rank-argument")


@dataclass(frozen=True, eq=False)
class IdentifiabilityCertificate:
    target_index: int
    verdict: IdVerdict
    witness: PureState | None
    obstruction: str | None
    method: str = ""
    target_overlap: float = 0.0
    max_other_overlap: float = 0.0
    corroboration: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict is IdVerdict.IDENTIFIABLE and self.witness is None:
            raise ValueError("Identifiable certificate needs a witness")
        if self.verdict is IdVerdict.NOT_IDENTIFIABLE:
            if not self.obstruction or self.method not in EXACT_METHODS:
                raise ValueError("NotIdentifiable needs an exact obstruction")


def _check_orthonormal(states: Sequence[PureState], tol: Tolerances):
    if not states:
        raise PreconditionViolated("empty ensemble")
    d = states[0].shape
    if any(s.shape != d for s in states):
        raise DimensionMismatch("ensemble members have different dimensions")
    V = np.array([s.vector for s in states])
    dev = float(np.max(np.abs(V.conj() @ V.T - np.eye(len(V)))))
    if dev > tol.norm:
        raise NotOrthonormal(f"ensemble Gram matrix deviates from identity by {dev:.3g}")


def _witness_cert(index, w, target, others, tol, method, **extra):
    t_ov = abs(target.overlap(w))
    o_ov = max((abs(o.overlap(w)) for o in others), default=0.0)
    if t_ov > 10 * tol.search_product and o_ov <= tol.search_product and schmidt_rank(w, tol) == 1:
        return IdentifiabilityCertificate(index, IdVerdict.IDENTIFIABLE, w, None, method, t_ov, o_ov, extra)
    return None


def _rank_upper_bound(space: Subspace, tol: Tolerances) -> int:
    """Upper bound on the Schmidt rank of any element of ``space``."""
    from .ueb import common_factor

    if space.dim == 0:
        return 0
    if common_factor(list(space.basis), tol) is not None:
        return 1
    bound = sum(schmidt_rank(s, tol) for s in space.basis)
    return min(bound, min(space.d1, space.d2))


def chefles_certificate(states: Sequence[PureState], target_index: int, tol: Tolerances = DEFAULT_TOL,
                        starts: int = DEFAULT_STARTS, seed: SeedLike = 0) -> IdentifiabilityCertificate:
    """Decide conclusive LOCC identifiability of ``states[target_index]``.

    Exact when the search space S (complement of the other members) has
    dimension <= 2, or when the Schmidt rank of the target exceeds the largest
    rank available in the complement of all members by at least two.
    Otherwise a product search may find a witness; failing that the verdict
    is Unknown.
    """
    _check_orthonormal(states, tol)
    target = states[target_index]
    others = [s for k, s in enumerate(states) if k != target_index]
    d1, d2 = target.shape
    r = schmidt_rank(target, tol)
    if r == 1:
        return _witness_cert(target_index, target, target, others, tol, "trivial")

    comp = Subspace.orthocomplement(list(states), d1, d2, tol)  # S = span{target} + comp
    if comp.dim == 0:
        return IdentifiabilityCertificate(
            target_index, IdVerdict.NOT_IDENTIFIABLE, None,
            "the other members leave only the (entangled) target direction", "exact")

    if comp.dim == 1:
        rs = pencil_product_roots(Pencil.from_states(target, comp.basis[0]), tol)
        best = None
        for root in rs.roots:
            cert = _witness_cert(target_index, root.product_state, target, others, tol, "pencil",
                                 coeff_pair=[complex(c) for c in root.coeff_pair])
            if cert is not None and (best is None or cert.target_overlap > best.target_overlap):
                best = cert
        if best is not None:
            return best
        dirs = len(rs.roots)
        return IdentifiabilityCertificate(
            target_index, IdVerdict.NOT_IDENTIFIABLE, None,
            f"the orthogonal complement of the other members is two-dimensional; the pencil solver "
            f"finds {dirs} product direction(s) there, none overlapping the target",
            "pencil", corroboration={"product_directions": dirs})

    ub = _rank_upper_bound(comp, tol)
    if r - ub >= 2:
        return IdentifiabilityCertificate(
            target_index, IdVerdict.NOT_IDENTIFIABLE, None,
            f"every candidate is a*target + c with a != 0 and c in the complement; rank(target) = {r} "
            f"and rank(c) <= {ub}, so the Schmidt rank is at least {r - ub} >= 2",
            "rank-argument")

    S = Subspace.span([target, *comp.basis], tol)
    res = product_in_subspace(S, tol, starts, seed)
    cands = sorted(res.found, key=lambda w: -abs(target.overlap(w)))
    for w in cands:
        cert = _witness_cert(target_index, w, target, others, tol, "alternating")
        if cert is not None:
            return cert
    return IdentifiabilityCertificate(
        target_index, IdVerdict.UNKNOWN, None, None, "alternating",
        corroboration={"best_overlap": res.best_overlap, "products_found": len(res.found)})


def set_identifiability(states: Sequence[PureState], tol: Tolerances = DEFAULT_TOL,
                        starts: int = DEFAULT_STARTS, seed: SeedLike = 0) -> list:
    """Per-member certificates; the set is conclusively distinguishable iff all are Identifiable."""
    return [chefles_certificate(states, k, tol, starts, seed) for k in range(len(states))]


@dataclass(frozen=True)
class StrategyWitness:
    witness: PureState
    coeffs: tuple  # witness = coeffs[0] psi1 + coeffs[1] phi


def strategy_product_witness(psi1: PureState, phi: PureState,
                             tol: Tolerances = DEFAULT_TOL) -> StrategyWitness:
    """Product state in span{psi1, phi} with a nonzero psi1 component.

    Given an entangled psi1 and the product phi orthogonal to the rest of a
    set, this is the product state a measurement needs to identify psi1.
    """
    if abs(psi1.overlap(phi)) > tol.norm:
        raise PreconditionViolated("psi1 and phi must be orthogonal")
    cls = classify_pencil(psi1, phi, tol)
    if cls.verdict is Verdict.UNCONDITIONAL:
        raise NoWitness("every nontrivial superposition of the pair is entangled")
    coeffs, w = max(cls.witnesses, key=lambda cw: abs(cw[0][0]))
    return StrategyWitness(w, coeffs)


@dataclass(frozen=True, eq=False)
class MoreNonlocalSet:
    psi1: PureState
    psi2: PureState
    psi3: PureState
    phi: PureState
    pair_certificate: PairClassification
    identifiability: IdentifiabilityCertificate

    @property
    def psis(self) -> list:
        return [self.psi1, self.psi2, self.psi3]

    def basis(self) -> list:
        return [self.psi1, self.psi2, self.psi3, self.phi]

    def average_entanglement(self) -> float:
        return float(np.mean([entanglement_entropy(s) for s in self.psis]))


def build_more_nonlocal_set(psi1: PureState, phi: PureState, seed: SeedLike = None,
                            tol: Tolerances = DEFAULT_TOL) -> MoreNonlocalSet:
    """Complete an unconditionally inseparable orthogonal pair to a two-qubit basis.

    The two completion vectors are an orthonormal basis of the complement,
    rotated inside their plane so that both stay away from the (at most two)
    product directions the plane contains.  With ``seed`` the starting basis
    of the plane is randomized.
    """
    if psi1.shape != (2, 2) or phi.shape != (2, 2):
        raise PreconditionViolated("two-qubit states required")
    if abs(psi1.overlap(phi)) > tol.norm:
        raise PreconditionViolated("psi1 and phi must be orthogonal")
    pair = classify_pencil(psi1, phi, tol)
    if pair.verdict is not Verdict.UNCONDITIONAL:
        raise PreconditionViolated("pair is only conditionally inseparable")
    W = Subspace.orthocomplement([psi1, phi], tol=tol)
    w1, w2 = W.basis[0].coeffs, W.basis[1].coeffs
    if seed is not None:
        from .states import haar_frame

        U = haar_frame(2, 2, as_rng(seed))
        w1, w2 = U[0, 0] * w1 + U[1, 0] * w2, U[0, 1] * w1 + U[1, 1] * w2
    if pencil_product_roots(Pencil(w1, w2), tol).degenerate:
        raise CompletionFailed("complement consists of product states only")

    def pair_at(th, ph):
        c, s = np.cos(th), np.sin(th)
        e = np.exp(1j * ph)
        return c * w1 + e * s * w2, -np.conj(e) * s * w1 + c * w2

    def score(th, ph):
        a, b = pair_at(th, ph)
        return min(second_singular_value(a), second_singular_value(b))

    best = (score(0.0, 0.0), 0.0, 0.0)
    if best[0] < 0.05:
        for th in np.linspace(0, np.pi / 2, 25):
            for ph in np.linspace(0, 2 * np.pi, 24, endpoint=False):
                sc = score(th, ph)
                if sc > best[0] + 1e-12:
                    best = (sc, th, ph)
    if best[0] <= 1e-6:
        raise CompletionFailed("no rotation of the complement avoids its product directions")
    a, b = pair_at(best[1], best[2])
    psi2 = PureState.from_matrix(a)
    psi3 = PureState.from_matrix(b)
    cert = chefles_certificate([psi1, psi2, psi3], 0, tol)
    return MoreNonlocalSet(psi1, psi2, psi3, phi, pair, cert)


# ---------------------------------------------------------------------------
# ensembles

Element = Union[PureState, DensityOperator]


@dataclass(frozen=True, eq=False)
class Ensemble:
    elements: tuple  # ((weight, PureState | DensityOperator), ...)

    def __post_init__(self):
        els = tuple((float(w), op) for w, op in self.elements)
        object.__setattr__(self, "elements", els)
        if not els:
            raise BadWeight("empty ensemble")
        ws = np.array([w for w, _ in els])
        if np.any(ws < 0) or abs(ws.sum() - 1) > 1e-10:
            raise BadWeight("weights must be nonnegative and sum to 1")
        dims = {(op.d1, op.d2) for _, op in els}
        if len(dims) != 1:
            raise DimensionMismatch("ensemble elements have different dimensions")

    @property
    def shape(self):
        op = self.elements[0][1]
        return (op.d1, op.d2)


def build_two_element_ensemble(s: MoreNonlocalSet, p1: float,
                               priors: tuple = (0.5, 0.5)) -> Ensemble:
    """{psi1, p1 |psi2><psi2| + (1 - p1) |psi3><psi3|}."""
    if not 0.0 < p1 < 1.0:
        raise BadWeight("p1 must lie strictly between 0 and 1")
    rho = DensityOperator.mixture([p1, 1.0 - p1], [s.psi2, s.psi3])
    return Ensemble(((priors[0], s.psi1), (priors[1], rho)))


def _as_pure(op: Element, tol: Tolerances):
    if isinstance(op, PureState):
        return op
    sup = op.support(tol.rank)
    return sup[0] if len(sup) == 1 else None


def two_element_conclusive_check(ens: Ensemble, tol: Tolerances = DEFAULT_TOL,
                                 starts: int = DEFAULT_STARTS, seed: SeedLike = 0) -> IdentifiabilityCertificate:
    """Identifiability of the pure element against the support of the mixed one.

    For {pure, rank-2 mixed} two-qubit ensembles with orthogonal supports the
    mixed element is always identifiable, so NotIdentifiable here means the
    ensemble is not conclusively distinguishable by LOCC.  ``target_index`` in
    the returned certificate refers to the position of the pure element in
    the ensemble.
    """
    if len(ens.elements) != 2 or ens.shape != (2, 2):
        raise UnsupportedShape("need exactly two elements on two qubits")
    pure_idx = [k for k, (_, op) in enumerate(ens.elements) if _as_pure(op, tol) is not None]
    mixed_idx = [k for k, (_, op) in enumerate(ens.elements)
                 if isinstance(op, DensityOperator) and op.rank(tol.rank) == 2]
    if len(pure_idx) != 1 or len(mixed_idx) != 1:
        raise UnsupportedShape("need one pure element and one rank-2 mixed element")
    pure = _as_pure(ens.elements[pure_idx[0]][1], tol)
    support = ens.elements[mixed_idx[0]][1].support(tol.rank)
    if max(abs(pure.overlap(v)) for v in support) > tol.norm * 10:
        raise UnsupportedShape("supports of the two elements are not orthogonal")
    cert = chefles_certificate([pure, *support], 0, tol, starts, seed)
    return IdentifiabilityCertificate(
        pure_idx[0], cert.verdict, cert.witness, cert.obstruction, cert.method,
        cert.target_overlap, cert.max_other_overlap, cert.corroboration)


def random_maximally_entangled_set(n: int = 3, seed: SeedLike = None) -> list[PureState]:
    """n orthonormal two-qubit maximally entangled states.

    Real orthogonal rotations of the magic basis keep every member maximally
    entangled; each gets a random global phase.
    """
    from scipy.stats import ortho_group

    rng = as_rng(seed)
    O = ortho_group.rvs(4, random_state=rng)
    M = np.array([m.vector for m in magic_basis()])  # rows
    out = []
    for k in range(n):
        v = O[:, k] @ M * np.exp(2j * np.pi * rng.random())
        out.append(PureState.from_vector(v, 2, 2))
    return out
