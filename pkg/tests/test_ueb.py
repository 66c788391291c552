import numpy as np
import pytest

from supersep.discrimination import IdVerdict
from supersep.errors import BadCandidate, CertificateUnavailable, NotOrthonormal, PreconditionViolated
from supersep.products import Subspace
from supersep.states import (
    DensityOperator,
    PureState,
    magic_basis,
    random_state,
    schmidt_decompose,
    schmidt_rank,
    entanglement_entropy,
    second_singular_value,
)
from supersep.ueb import (
    UebCandidate,
    assess_subspace,
    build_paper_3ueb,
    build_partially_entangled_subspace,
    common_factor,
    full_sixteen_states,
    paper_psi_states,
    range_criterion_certificate,
    theorem3_identifiability,
    uniform_mixture,
    verify_r_ueb,
)


@pytest.fixture(scope="module")
def ueb():
    return build_paper_3ueb()


@pytest.fixture(scope="module")
def pes(ueb):
    return build_partially_entangled_subspace(ueb, 0)


def test_construction_counts(ueb):
    assert ueb.N == 13 and (ueb.d1, ueb.d2) == (4, 4)
    assert len(full_sixteen_states()) == 16


def test_first_basis_state_singular_values():
    s = full_sixteen_states()[0]
    np.testing.assert_allclose(schmidt_decompose(s).singular_values[:3],
                               [np.sqrt(2 / 3), np.sqrt(1 / 6), np.sqrt(1 / 6)], atol=1e-14)


def test_sixteen_state_gram():
    V = np.array([s.vector for s in full_sixteen_states()])
    assert np.max(np.abs(V.conj() @ V.T - np.eye(16))) <= 1e-12


def test_ranks(ueb):
    assert all(schmidt_rank(s) == 3 for s in paper_psi_states())
    for s in paper_psi_states():  # exact: three equal singular values, the rest zero
        sv = np.linalg.svd(s.coeffs, compute_uv=False)
        np.testing.assert_allclose(sv, [1 / np.sqrt(3)] * 3 + [0], atol=1e-15)
    assert all(schmidt_rank(s) == 3 for s in ueb.states)
    assert all(schmidt_rank(s) == 1 for s in full_sixteen_states()[13:])


def test_verify_paper_ueb(ueb):
    r = verify_r_ueb(ueb)
    assert r.is_orthonormal and r.min_schmidt_rank == 3 and r.complement_dim == 3
    assert r.complement_product_certified and r.theorem3_applies
    assert r.gram_deviation <= 1e-12
    assert not r.generalized_condition_holds  # 16 - 13 = 3 > r - 2 = 1


def test_verify_rejects_complete_basis():
    with pytest.raises(BadCandidate):
        verify_r_ueb(UebCandidate(4, 4, full_sixteen_states(), 3))


def test_verify_two_qubit_fails_rank():
    b = magic_basis()[:3]
    r = verify_r_ueb(UebCandidate(2, 2, b, 3))
    assert r.min_schmidt_rank < 3 and not r.theorem3_applies


def test_verify_not_orthonormal():
    s = paper_psi_states()
    bad = [s[0], PureState.from_matrix(s[0].coeffs + 0.1 * s[1].coeffs)]
    with pytest.raises(NotOrthonormal):
        verify_r_ueb(UebCandidate(4, 4, bad, 3))


def test_heuristic_complement_not_certified():
    # random orthonormal states: complement is entangled, no common factor
    rng = np.random.default_rng(31)
    Q = np.linalg.qr(rng.standard_normal((9, 9)) + 1j * rng.standard_normal((9, 9)))[0]
    c = UebCandidate(3, 3, [PureState.from_vector(Q[:, k], 3, 3) for k in range(6)], 3)
    r = verify_r_ueb(c, starts=8)
    assert not r.complement_product_certified and not r.theorem3_applies
    assert r.complement_best_entanglement > 0.1
    with pytest.raises(CertificateUnavailable):
        theorem3_identifiability(c, 0)


def test_theorem3_all_indices(ueb):
    for k in range(ueb.N):
        cert = theorem3_identifiability(ueb, k)
        assert cert.verdict is IdVerdict.NOT_IDENTIFIABLE
        assert cert.obstruction and cert.method == "rank-argument"
        assert cert.corroboration["max_overlap_with_target"] <= 1e-9


def test_theorem3_complete_basis():
    c = UebCandidate(2, 2, magic_basis(), 3)
    cert = theorem3_identifiability(c, 0)
    assert cert.verdict is IdVerdict.NOT_IDENTIFIABLE


def test_verify_implies_theorem3(ueb):
    if verify_r_ueb(ueb).theorem3_applies:
        assert all(theorem3_identifiability(ueb, k).verdict is IdVerdict.NOT_IDENTIFIABLE
                   for k in range(ueb.N))


def test_common_factor():
    side, x = common_factor([PureState.from_kets(4, 4, {(3, j): 1}) for j in (1, 2, 3)])
    assert side == "left" and abs(abs(x[3]) - 1) < 1e-12
    assert common_factor(paper_psi_states()[:2]) is None


# partially entangled subspaces -----------------------------------------------------

def test_pes_from_ueb(pes):
    assert pes.subspace.dim == 4 and pes.product_span_dim == 3 and pes.deficit == 1
    assert pes.certified


def test_pes_complement_alone(ueb):
    s = assess_subspace(ueb.complement())
    assert s.deficit == 0 and not s.certified


def test_pes_drawn_alone(ueb):
    s = assess_subspace(Subspace(4, 4, [ueb.states[0]]))
    assert s.product_span_dim == 0 and s.deficit == 1


def test_complement_vectors_are_products(ueb):
    comp = ueb.complement()
    rng = np.random.default_rng(32)
    for _ in range(100):
        c = rng.standard_normal(comp.dim) + 1j * rng.standard_normal(comp.dim)
        v = PureState.from_vector(c @ comp.matrix, 4, 4)
        assert entanglement_entropy(v) <= 1e-10


def test_pes_elements_with_drawn_component_entangled(ueb, pes):
    # rank(c) <= 1, so by interlacing sigma_2(a0 t + c) >= |a0| sigma_3(t) = |a0| / sqrt(6);
    # |a0| is drawn bounded below to make the 0.05 floor meaningful
    rng = np.random.default_rng(33)
    B = pes.subspace.matrix
    floors = []
    for _ in range(100):
        c = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        c[0] = np.exp(2j * np.pi * rng.random()) * rng.uniform(0.5, 1.0) * np.linalg.norm(c[1:]) + 0j
        c /= np.linalg.norm(c)
        s2 = second_singular_value(PureState.from_vector(c @ B, 4, 4))
        sv_t = np.linalg.svd(ueb.states[0].coeffs, compute_uv=False)
        assert s2 >= abs(c[0]) * sv_t[2] - 1e-12
        floors.append(s2)
    assert min(floors) > 0.05


def test_range_criterion(ueb, pes):
    cert = range_criterion_certificate(pes, uniform_mixture(pes.subspace))
    assert cert.entangled and "span only 3" in cert.reason


def test_range_criterion_refuses_full_space():
    s = assess_subspace(Subspace.full(2, 2))
    with pytest.raises(CertificateUnavailable):
        range_criterion_certificate(s)


def test_range_criterion_rank_deficient(pes):
    rho = DensityOperator.mixture([0.5, 0.5], list(pes.subspace.basis[:2]))
    with pytest.raises(PreconditionViolated):
        range_criterion_certificate(pes, rho)


def test_range_criterion_heuristic_deficit_refused():
    rng = np.random.default_rng(34)
    S = Subspace.span([random_state(3, 3, rng) for _ in range(3)])
    s = assess_subspace(S, starts=16)
    assert not s.certified
    with pytest.raises(CertificateUnavailable):
        range_criterion_certificate(s)
