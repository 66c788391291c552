import numpy as np
import pytest

from supersep.classify import random_orthogonal_unconditional_pair
from supersep.discrimination import (
    EXACT_METHODS,
    Ensemble,
    IdVerdict,
    build_more_nonlocal_set,
    build_two_element_ensemble,
    chefles_certificate,
    random_maximally_entangled_set,
    set_identifiability,
    strategy_product_witness,
    two_element_conclusive_check,
)
from supersep.errors import (
    BadWeight,
    NotOrthonormal,
    NoWitness,
    PreconditionViolated,
    UnsupportedShape,
)
from supersep.products import Verdict
from supersep.states import (
    PLUS,
    DensityOperator,
    PureState,
    bell_states,
    concurrence_2x2,
    entanglement_entropy,
    haar_frame,
    ket,
    random_state,
    schmidt_rank,
)

R5 = np.sqrt(5)
EX1_E = PureState.from_kets(2, 2, {(0, 0): 2 / R5, (1, 1): 1 / R5})
EX1_P = PureState.product([2 / R5, -1 / R5], np.array([1, 4]) / np.sqrt(17))
PHI_MINUS = bell_states()["phi-"]
PLUSPLUS = PureState.product(PLUS, PLUS)


def assert_sound(cert, states):
    """Re-verify an emitted certificate."""
    tol = 1e-9
    if cert.verdict is IdVerdict.IDENTIFIABLE:
        w = cert.witness
        assert schmidt_rank(w) == 1
        assert abs(states[cert.target_index].overlap(w)) > 10 * tol
        assert all(abs(s.overlap(w)) <= tol for k, s in enumerate(states) if k != cert.target_index)
    elif cert.verdict is IdVerdict.NOT_IDENTIFIABLE:
        assert cert.obstruction and cert.method in EXACT_METHODS
    else:
        assert cert.witness is None


@pytest.fixture(scope="module")
def mnl():
    return build_more_nonlocal_set(PHI_MINUS, PLUSPLUS)


# chefles ------------------------------------------------------------------------

def test_more_nonlocal_target_not_identifiable(mnl):
    cert = chefles_certificate(mnl.psis, 0)
    assert cert.verdict is IdVerdict.NOT_IDENTIFIABLE and cert.method == "pencil"
    assert cert.corroboration["product_directions"] == 1
    assert_sound(cert, mnl.psis)


def test_maximally_entangled_triple_identifiable():
    b = bell_states()
    states = [b["phi+"], b["phi-"], b["psi+"]]
    for cert in set_identifiability(states):
        assert cert.verdict is IdVerdict.IDENTIFIABLE
        assert_sound(cert, states)


def test_product_target_trivial():
    states = [ket(2, 2, 0, 0), ket(2, 2, 1, 1)]
    cert = chefles_certificate(states, 0)
    assert cert.verdict is IdVerdict.IDENTIFIABLE and cert.witness.same_ray(states[0])


def test_not_orthonormal():
    with pytest.raises(NotOrthonormal):
        chefles_certificate([bell_states()["phi+"], PLUSPLUS], 0)


def test_complete_entangled_basis():
    b = list(bell_states().values())
    cert = chefles_certificate(b, 2)
    assert cert.verdict is IdVerdict.NOT_IDENTIFIABLE and cert.method == "exact"


def test_heuristic_never_claims_not_identifiable():
    rng = np.random.default_rng(41)
    seen = set()
    for _ in range(30):
        d = int(rng.integers(3, 5))
        n = int(rng.integers(2, d * d - 3))
        Q = haar_frame(d * d, n, rng)
        states = [PureState.from_vector(Q[:, k], d, d) for k in range(n)]
        cert = chefles_certificate(states, 0, starts=8)
        assert_sound(cert, states)
        seen.add(cert.method)
        if cert.method == "alternating":
            assert cert.verdict is not IdVerdict.NOT_IDENTIFIABLE
    assert "alternating" in seen


def test_rank_argument_path():
    from supersep.ueb import build_paper_3ueb

    c = build_paper_3ueb()
    cert = chefles_certificate(list(c.states), 4)
    assert cert.verdict is IdVerdict.NOT_IDENTIFIABLE and cert.method == "rank-argument"


# strategy witness ----------------------------------------------------------------

def test_strategy_witness_example1():
    w = strategy_product_witness(EX1_E, EX1_P)
    assert abs(w.coeffs[0] - 3 / np.sqrt(26)) < 1e-12
    assert abs(w.coeffs[1] - np.sqrt(17 / 26)) < 1e-12
    assert schmidt_rank(w.witness) == 1 and abs(EX1_E.overlap(w.witness)) > 1e-3


def test_strategy_witness_none_for_example3():
    with pytest.raises(NoWitness):
        strategy_product_witness(PHI_MINUS, PLUSPLUS)


def test_strategy_witness_requires_orthogonality():
    with pytest.raises(PreconditionViolated):
        strategy_product_witness(bell_states()["phi+"], PLUSPLUS)


# more-nonlocal sets ------------------------------------------------------------

def test_more_nonlocal_set_basis(mnl):
    V = np.array([s.vector for s in mnl.basis()])
    assert np.max(np.abs(V.conj() @ V.T - np.eye(4))) < 1e-12
    assert all(schmidt_rank(s) == 2 for s in mnl.psis) and schmidt_rank(mnl.phi) == 1
    assert mnl.pair_certificate.verdict is Verdict.UNCONDITIONAL
    assert mnl.identifiability.verdict is IdVerdict.NOT_IDENTIFIABLE


def test_more_nonlocal_less_entanglement(mnl):
    assert mnl.average_entanglement() < 1


def test_more_nonlocal_rejects_conditional_pair():
    with pytest.raises(PreconditionViolated):
        build_more_nonlocal_set(EX1_E, EX1_P)


def _example3_type_pair(rng):
    U, V = haar_frame(2, 2, rng), haar_frame(2, 2, rng)
    f = lambda s: PureState.from_matrix(U @ s.coeffs @ V.T)  # noqa: E731
    return f(PHI_MINUS), f(PLUSPLUS)


def test_random_more_nonlocal_sets():
    rng = np.random.default_rng(42)
    for k in range(50):
        if k % 2:
            psi, phi = _example3_type_pair(rng)
        else:
            psi, phi = random_orthogonal_unconditional_pair(rng)
        s = build_more_nonlocal_set(psi, phi, seed=k)
        cert = chefles_certificate(s.psis, 0)
        assert cert.verdict is IdVerdict.NOT_IDENTIFIABLE
        assert_sound(cert, s.psis)


def test_nonorthogonal_family_mapped_to_orthogonal_form():
    """Family pairs orthogonalized within their span, used as more-nonlocal seeds."""
    from supersep.classify import NonorthogonalFamilyParams, nonorthogonal_unconditional_pair

    rng = np.random.default_rng(43)
    for _ in range(50):
        prm = NonorthogonalFamilyParams.from_angles(*rng.uniform(0.05, np.pi / 2 - 0.05, size=2))
        pair = nonorthogonal_unconditional_pair(prm)
        # Gram-Schmidt: the entangled member made orthogonal to p inside span{e, p}
        psi = PureState.from_matrix(pair.e.coeffs - pair.p.overlap(pair.e) * pair.p.coeffs)
        s = build_more_nonlocal_set(psi, pair.p)
        assert chefles_certificate(s.psis, 0).verdict is IdVerdict.NOT_IDENTIFIABLE


def test_random_maximally_entangled_triples():
    rng = np.random.default_rng(44)
    for _ in range(50):
        states = random_maximally_entangled_set(3, rng)
        assert all(abs(concurrence_2x2(s) - 1) < 1e-12 for s in states)
        for cert in set_identifiability(states):
            assert cert.verdict is IdVerdict.IDENTIFIABLE
            assert_sound(cert, states)


# ensembles ----------------------------------------------------------------------

def test_two_element_ensemble(mnl):
    ens = build_two_element_ensemble(mnl, 0.5)
    rho = ens.elements[1][1]
    P = sum(np.outer(s.vector, s.vector.conj()) for s in (mnl.psi2, mnl.psi3))
    assert np.allclose(rho.matrix, P / 2)
    for v in rho.support():
        assert abs(mnl.psi1.overlap(v)) < 1e-12


@pytest.mark.parametrize("p1", [0.1, 0.5, 0.9])
def test_two_element_check_not_identifiable(mnl, p1):
    cert = two_element_conclusive_check(build_two_element_ensemble(mnl, p1))
    assert cert.verdict is IdVerdict.NOT_IDENTIFIABLE and cert.target_index == 0


def test_two_element_bad_weight(mnl):
    for p1 in (0.0, 1.0, -0.2):
        with pytest.raises(BadWeight):
            build_two_element_ensemble(mnl, p1)


def test_two_element_product_pure_element():
    rho = DensityOperator.mixture([0.5, 0.5], [ket(2, 2, 0, 1), ket(2, 2, 1, 0)])
    ens = Ensemble(((0.5, ket(2, 2, 0, 0)), (0.5, rho)))
    cert = two_element_conclusive_check(ens)
    assert cert.verdict is IdVerdict.IDENTIFIABLE and cert.witness.same_ray(ket(2, 2, 0, 0))


def test_two_element_bell_ensemble():
    b = bell_states()
    rho = DensityOperator.mixture([0.5, 0.5], [b["phi-"], b["psi+"]])
    cert = two_element_conclusive_check(Ensemble(((0.5, b["phi+"]), (0.5, rho))))
    assert cert.verdict is IdVerdict.IDENTIFIABLE and cert.method == "pencil"


def test_two_element_unsupported_shapes(mnl):
    with pytest.raises(UnsupportedShape):
        two_element_conclusive_check(Ensemble(((1.0, mnl.psi1),)))
    rho = DensityOperator.mixture([0.5, 0.5], [mnl.psi1, mnl.psi2])
    with pytest.raises(UnsupportedShape):
        two_element_conclusive_check(Ensemble(((0.5, mnl.psi1), (0.5, rho))))


def test_ensemble_weights():
    with pytest.raises(BadWeight):
        Ensemble(((0.7, ket(2, 2, 0, 0)), (0.7, ket(2, 2, 1, 1))))


def test_entropy_sanity(mnl):
    assert all(0 < entanglement_entropy(s) <= 1 for s in mnl.psis)
    assert schmidt_rank(random_state(2, 2, 0)) == 2
