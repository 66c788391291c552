"""Certificates for (in)separability of superpositions of entangled/product pairs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BadParams, NoSolution, PreconditionViolated, TooManyProducts
from .products import (
    CertificateKind,
    PairClassification,
    Pencil,
    Verdict,
    classify_pencil,
    pencil_product_roots,
)
from .states import (
    DEFAULT_TOL,
    PureState,
    Tolerances,
    schmidt_decompose,
    schmidt_rank,
    second_singular_value,
    superpose,
)

__all__ = [
    "PairClassification",
    "Verdict",
    "CertificateKind",
    "theorem1_certificate",
    "generalized_theorem1_check",
    "GeneralizedCheck",
    "find_orthogonal_product_partner",
    "OrthogonalPartner",
    "NonorthogonalFamilyParams",
    "NonorthogonalPair",
    "nonorthogonal_unconditional_pair",
    "epsilon_scan",
    "ScanPoint",
    "default_epsilon_grid",
    "random_orthogonal_unconditional_pair",
]


def theorem1_certificate(e: PureState, p: PureState, tol: Tolerances = DEFAULT_TOL) -> PairClassification:
    """Classify the pair (e, p), using the rank argument when it applies.

    If e has Schmidt rank >= 3, a product p' = a1 e + a2 p would give
    a1 e = p' - a2 p, a difference of two products, whose rank is at most 2.
    No search is needed in that case.  Lower ranks go to the pencil solver.
    """
    if schmidt_rank(p, tol) != 1:
        raise PreconditionViolated("second state must be a product state")
    r = schmidt_rank(e, tol)
    if r >= 3:
        return PairClassification(Verdict.UNCONDITIONAL, [], CertificateKind.RANK_ARGUMENT)
    return classify_pencil(e, p, tol)


@dataclass(frozen=True)
class GeneralizedCheck:
    entangled: bool
    rank_lower_bound: int
    numeric_rank: int
    second_singular_value: float
    certified: bool
    state: PureState = field(repr=False)


def generalized_theorem1_check(e: PureState, products: Sequence[PureState], coeffs: Sequence[complex],
                               tol: Tolerances = DEFAULT_TOL,
                               allow_uncertified: bool = False) -> GeneralizedCheck:
    """Entanglement of ``coeffs[0]*e + sum_i coeffs[i+1]*products[i]``.

    Adding one product changes the Schmidt rank by at most one, so with e of
    rank r and m <= r - 2 products the sum keeps rank >= r - m >= 2.  The
    bound is returned together with the numerically observed rank.

    With more than r - 2 products there is no certificate; ``TooManyProducts``
    is raised unless ``allow_uncertified`` is set, in which case only the
    numerical check is returned.
    """
    if len(coeffs) != len(products) + 1:
        raise PreconditionViolated("need one coefficient for e and one per product")
    if abs(coeffs[0]) <= tol.norm:
        raise PreconditionViolated("coefficient of the entangled state must be nonzero")
    r = schmidt_rank(e, tol)
    if r < 3:
        raise PreconditionViolated(f"entangled state must have Schmidt rank >= 3, got {r}")
    for q in products:
        if schmidt_rank(q, tol) != 1:
            raise PreconditionViolated("every additional state must be a product state")
    m = len(products)
    certified = m <= r - 2
    if not certified and not allow_uncertified:
        raise TooManyProducts(f"{m} products exceed r - 2 = {r - 2}")
    psi = superpose([e, *products], coeffs, tol).state
    rank = schmidt_rank(psi, tol)
    bound = max(r - m, 0)
    return GeneralizedCheck(
        entangled=certified or rank >= 2,
        rank_lower_bound=bound,
        numeric_rank=rank,
        second_singular_value=second_singular_value(psi),
        certified=certified,
        state=psi,
    )


# ---------------------------------------------------------------------------
# orthogonal product partners of two-qubit states


@dataclass(frozen=True)
class OrthogonalPartner:
    p: PureState
    coeffs: tuple  # (c_e, c_p), superposition c_e e + c_p p is a product
    product: PureState
    alternatives: list  # further (p, coeffs) solutions


def _partner_family(a1: float, a2: float, tau: float):
    """Orthogonal product partner in the Schmidt frame, parametrized by tau.

    First factor x = (cos tau, -sin tau); orthogonality to a1|00> + a2|11>
    forces y ~ (a2 sin tau, a1 cos tau).  Returns (x, y, ratio c_p / c_e)
    where the ratio solves det(c_e D + c_p x y^T) = 0, a quadratic form in
    (c_e, c_p) whose other root is c_e = 0.
    """
    x = np.array([np.cos(tau), -np.sin(tau)])
    y = np.array([a2 * np.sin(tau), a1 * np.cos(tau)])
    y = y / np.linalg.norm(y)
    # det(c_e D + c_p X) = c_e^2 a1 a2 + c_e c_p (a1 x1 y1 + a2 x0 y0)
    cross = a1 * x[1] * y[1] + a2 * x[0] * y[0]
    if abs(cross) < 1e-300:
        return x, y, None
    return x, y, -a1 * a2 / cross


def find_orthogonal_product_partner(e: PureState, tol: Tolerances = DEFAULT_TOL) -> OrthogonalPartner:
    """Product state p orthogonal to a two-qubit e such that some superposition is a product.

    Works in the Schmidt frame e = a1|00> + a2|11> (a1 > a2 > 0).  Every
    orthogonal product with nonzero |00> amplitude works there, so the
    solution set is a one-parameter family; the member returned is the one
    whose first factor is (a1, -a2).  For that member the resulting product
    is z (x) |+> in the Schmidt frame.  The mirrored member, with the roles
    of the two parties exchanged, is listed in ``alternatives``.

    Raises
    ------
    NoSolution
        If e is maximally entangled: the quadratic then degenerates to its
        trivial root for every orthogonal product.
    """
    if e.shape != (2, 2):
        raise PreconditionViolated(f"expected a two-qubit state, got {e.shape}")
    sd = schmidt_decompose(e, tol)
    if sd.numeric_rank < 2:
        raise PreconditionViolated("state is a product state")
    a1, a2 = sd.singular_values
    if a1 - a2 <= tol.rank ** 0.5:
        raise NoSolution("maximally entangled two-qubit state has no orthogonal conditional partner here")
    U, V = sd.left_vectors, sd.right_vectors

    def realize(x, y, ratio, swap=False):
        if swap:
            x, y = y, x
        p = PureState.from_matrix(U @ np.outer(x, y) @ V.T)
        c_e = 1.0 / np.sqrt(1.0 + ratio**2)
        c_p = ratio * c_e
        return p, (float(c_e), float(c_p))

    tau = np.arctan2(a2, a1)
    x, y, ratio = _partner_family(a1, a2, tau)
    p, coeffs = realize(x, y, ratio)
    # mirror: exchange the parties (the Schmidt form is symmetric in them)
    xm, ym, rm = _partner_family(a1, a2, tau)
    pm, cm = realize(xm, ym, rm, swap=True)
    sols = sorted([(p, coeffs), (pm, cm)], key=lambda s: -abs(s[1][1]))
    (p, coeffs), alt = sols[0], sols[1:]
    psi = superpose([e, p], coeffs, tol).state
    return OrthogonalPartner(p, coeffs, psi, alt)


# ---------------------------------------------------------------------------
# nonorthogonal family


@dataclass(frozen=True)
class NonorthogonalFamilyParams:
    a1: float
    a2: float
    a3: float
    a4: float

    def __post_init__(self):
        a = (self.a1, self.a2, self.a3, self.a4)
        if min(a) <= 0:
            raise BadParams("a1..a4 must be strictly positive")
        if abs(self.a1**2 + self.a2**2 - 1) > 1e-10 or abs(self.a3**2 + self.a4**2 - 1) > 1e-10:
            raise BadParams("need a1^2 + a2^2 = 1 and a3^2 + a4^2 = 1")

    @property
    def k(self) -> float:
        return self.a3 * self.a4 / (self.a1 * self.a2)

    @property
    def alpha(self) -> float:
        return float(np.sqrt(self.k / (self.k + 1)))

    @property
    def beta(self) -> float:
        return float(np.sqrt(1 / (self.k + 1)))

    @classmethod
    def from_angles(cls, t12: float, t34: float) -> "NonorthogonalFamilyParams":
        return cls(np.cos(t12), np.sin(t12), np.cos(t34), np.sin(t34))


@dataclass(frozen=True)
class NonorthogonalPair:
    e: PureState
    p: PureState
    e_perp: PureState
    overlap: float


def nonorthogonal_unconditional_pair(params: NonorthogonalFamilyParams) -> NonorthogonalPair:
    """e = a1|00> + a2|11> and the product p = alpha e + beta e_perp.

    e_perp = a3|01> + a4|10>; alpha and beta make det(p) vanish, so p is a
    product with <e|p> = alpha.  Note that alpha e - beta e_perp is a product
    as well, so span{e, p} holds two product directions; run
    :func:`classify_pencil` on the pair for the actual verdict.
    """
    a1, a2, a3, a4 = params.a1, params.a2, params.a3, params.a4
    e = PureState.from_matrix([[a1, 0], [0, a2]])
    ep = PureState.from_matrix([[0, a3], [a4, 0]])
    p = PureState.from_matrix(params.alpha * e.coeffs + params.beta * ep.coeffs)
    return NonorthogonalPair(e, p, ep, float(e.overlap(p).real))


# ---------------------------------------------------------------------------
# epsilon scan


@dataclass(frozen=True)
class ScanPoint:
    epsilon: float
    schmidt_rank: int
    second_singular_value: float


def default_epsilon_grid(n: int = 99) -> np.ndarray:
    return np.linspace(0.01, 0.99, n)


def epsilon_scan(e: PureState, p: PureState, grid: Sequence[float] | None = None,
                 tol: Tolerances = DEFAULT_TOL) -> list[ScanPoint]:
    """Rank of eps|e> + sqrt(1 - eps^2)|p> along a grid of eps in [0, 1].

    This is evidence only; see :func:`classify_pencil` for the exact answer.
    """
    grid = default_epsilon_grid() if grid is None else grid
    out = []
    for eps in grid:
        eps = float(eps)
        if not 0.0 <= eps <= 1.0:
            raise PreconditionViolated(f"epsilon {eps} outside [0, 1]")
        m = eps * e.coeffs + np.sqrt(max(0.0, 1.0 - eps**2)) * p.coeffs
        nrm = np.linalg.norm(m)
        psi = PureState.from_matrix(m / nrm, normalize=False) if nrm > tol.norm else None
        if psi is None:
            out.append(ScanPoint(eps, 0, 0.0))
            continue
        out.append(ScanPoint(eps, schmidt_rank(psi, tol), second_singular_value(psi)))
    return out


def scan_has_entangled(points: Sequence[ScanPoint]) -> bool:
    return any(pt.schmidt_rank >= 2 for pt in points)


def pencil_multiplicity_at_p(e: PureState, p: PureState, tol: Tolerances = DEFAULT_TOL) -> int:
    """Multiplicity of the root [0:1] (the product p itself) of the pair's pencil."""
    rs = pencil_product_roots(Pencil.from_states(e, p), tol)
    for r in rs.roots:
        if r.at_infinity:
            return r.multiplicity
    return 0


def random_orthogonal_unconditional_pair(seed=None, tol: Tolerances = DEFAULT_TOL):
    """Random two-qubit (entangled psi, product phi) with psi _|_ phi, unconditionally inseparable.

    det(a psi + b phi) = a^2 det(psi) + a b X(psi, phi) since det(phi) = 0,
    where X is bilinear.  Imposing <phi|psi> = 0 and X(psi, phi) = 0 (two
    linear conditions on psi) leaves b = 0 as the only rank-one direction.
    """
    from .states import as_rng, random_product_state

    rng = as_rng(seed)
    while True:
        phi = random_product_state(2, 2, rng)
        f = phi.coeffs
        rows = np.array([
            f.conj().ravel(),
            [f[1, 1], -f[1, 0], -f[0, 1], f[0, 0]],
        ])
        _, _, Vh = np.linalg.svd(rows)
        null = Vh[2:].conj()
        c = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        psi = PureState.from_vector(c @ null, 2, 2)
        if second_singular_value(psi) > 0.05:
            return psi, phi
