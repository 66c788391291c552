"""Instantiated entanglement-of-superposition bounds.

Upper bounds of this kind are strictly positive even when the superposition
is a product state, so they cannot detect separability.  The demo builds such
a case and compares the bounds with the exact pencil verdict.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .products import PairClassification, classify_pencil
from .states import (
    PureState,
    concurrence_2x2,
    entanglement_entropy,
    superpose,
)


def binary_entropy(x: float) -> float:
    """h2(x) in bits, with h2(0) = h2(1) = 0."""
    x = float(x)
    if not 0.0 <= x <= 1.0 or np.isnan(x):
        raise DomainError(f"binary entropy needs 0 <= x <= 1, got {x}")
    if x in (0.0, 1.0):
        return 0.0
    return float(-x * np.log2(x) - (1 - x) * np.log2(1 - x))


def linden_upper_instance(E1: float, w: float) -> float:
    """2 [w E1 + h2(w)] for an entangled term of squared weight w plus a product term."""
    if E1 < 0 or not 0.0 < w < 1.0:
        raise DomainError("need E1 >= 0 and 0 < w < 1")
    return 2.0 * (w * E1 + binary_entropy(w))


def niset_bounds_instance(C1: float) -> tuple[float, float]:
    """(lower, upper) = (2/3)[C1 -/+ sqrt(2) sqrt(1 - C1^2)].

    Fixed to weights 2/3 and 1/3 with a product second term.
    """
    if not 0.0 <= C1 <= 1.0:
        raise DomainError(f"concurrence must lie in [0, 1], got {C1}")
    r = np.sqrt(2.0) * np.sqrt(1.0 - C1**2)
    return (2.0 / 3.0) * (C1 - r), (2.0 / 3.0) * (C1 + r)


@dataclass(frozen=True)
class BoundReport:
    e_phi1: float
    c_phi1: float
    linden_upper: float
    niset_upper: float
    niset_lower: float
    actual_e_psi: float
    actual_c_psi: float
    detects_separability: dict
    overlap_phi1_phi2: float
    pencil: PairClassification = field(repr=False)

    def table(self) -> str:
        rows = [
            ("E(phi1)", self.e_phi1),
            ("C(phi1)", self.c_phi1),
            ("entropy upper bound", self.linden_upper),
            ("concurrence upper bound", self.niset_upper),
            ("concurrence lower bound", self.niset_lower),
            ("E(psi)", self.actual_e_psi),
            ("C(psi)", self.actual_c_psi),
        ]
        lines = [f"{name:<26}{val: .6f}" for name, val in rows]
        for k, v in self.detects_separability.items():
            lines.append(f"{'detects separability (' + k + ')':<40}{v}")
        lines.append(f"{'pencil verdict':<26}{self.pencil.verdict.value}")
        return "\n".join(lines)


def demo_states() -> tuple[PureState, PureState, tuple[float, float]]:
    phi1 = PureState.from_matrix(np.array([[1 / np.sqrt(2), 0], [0.5, 0.5]]))
    phi2 = PureState.from_kets(2, 2, {(0, 1): 1.0})
    return phi1, phi2, (np.sqrt(2 / 3), np.sqrt(1 / 3))


def bounds_demo() -> BoundReport:
    """Bounds versus exact values for a product superposition of orthogonal states."""
    phi1, phi2, coeffs = demo_states()
    psi = superpose([phi1, phi2], coeffs).state
    e1 = entanglement_entropy(phi1)
    c1 = concurrence_2x2(phi1)
    lu = linden_upper_instance(e1, coeffs[0] ** 2)
    nl, nu = niset_bounds_instance(c1)
    pencil = classify_pencil(phi1, phi2)
    # a bound can only certify a product output by collapsing to zero
    flags = {
        "linden_upper": lu <= 0.0,
        "niset_upper": nu <= 0.0,
        "niset_lower": abs(nl) <= 1e-12 and nu <= 1e-12,
    }
    return BoundReport(
        e_phi1=e1,
        c_phi1=c1,
        linden_upper=lu,
        niset_upper=nu,
        niset_lower=nl,
        actual_e_psi=entanglement_entropy(psi),
        actual_c_psi=concurrence_2x2(psi),
        detects_separability=flags,
        overlap_phi1_phi2=abs(phi1.overlap(phi2)),
        pencil=pencil,
    )
