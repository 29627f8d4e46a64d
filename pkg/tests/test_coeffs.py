import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isoreg import (
    CoefficientSet,
    DegreeWeights,
    DimensionError,
    DomainError,
    degree_norms,
    discrepancy,
    flat_index,
    hybrid_norm,
    l1_norm,
    l1_soft_threshold,
    unflatten,
)
from isoreg.coeffs import degree_index

from conftest import ALPHA, apply_block_unitaries, make_real, random_coeffs, random_unitary


@given(st.integers(0, 300).flatmap(lambda L: st.tuples(st.just(L), st.integers(-L, L))))
def test_flat_index_roundtrip(lm):
    ell, m = lm
    assert unflatten(flat_index(ell, m)) == (ell, m)


def test_flat_order_matches_listing():
    order = [unflatten(i) for i in range(9)]
    assert order == [(0, 0), (1, -1), (1, 0), (1, 1), (2, -2), (2, -1), (2, 0), (2, 1), (2, 2)]


def test_flat_index_rejects_bad_order():
    with pytest.raises(DomainError):
        flat_index(2, 3)


def test_coefficient_set_size_validation():
    with pytest.raises(DimensionError):
        CoefficientSet(np.zeros(5))
    assert CoefficientSet.zeros(3).band_limit == 3
    assert len(CoefficientSet.zeros(3)) == 16


def test_coefficient_set_is_immutable():
    a = CoefficientSet.zeros(2)
    with pytest.raises(ValueError):
        a.values[0] = 1.0


def test_degree_weights_validation():
    with pytest.raises(DomainError):
        DegreeWeights([1.0, 0.0])
    with pytest.raises(DomainError):
        DegreeWeights([2.0, 1.0])
    assert DegreeWeights.powerlaw(4, 2).beta.tolist() == [1.0, 1.0, 0.25, 1 / 9, 1 / 16]


# -- degree norms ---------------------------------------------------------

def test_degree_norms_dipole(dipole):
    assert degree_norms(dipole)[1] == pytest.approx(ALPHA, rel=1e-15)
    assert ALPHA == pytest.approx(2.04665, abs=5e-6)


def test_degree_norms_x_dipole_equals_pole_dipole(x_dipole):
    assert degree_norms(x_dipole)[1] == pytest.approx(ALPHA, rel=1e-15)


def test_degree_norms_zero():
    assert np.all(degree_norms(CoefficientSet.zeros(3)) == 0)


def test_parseval_consistency(rng):
    a = random_coeffs(rng, 7)
    assert np.sum(degree_norms(a) ** 2) == pytest.approx(np.sum(np.abs(a.values) ** 2), rel=1e-14)


def test_zero_block_iff_zero_norm(rng):
    a = random_coeffs(rng, 4)
    v = a.values.copy()
    v[4:9] = 0
    A = degree_norms(CoefficientSet(v))
    assert A[2] == 0 and np.all(np.delete(A, 2) > 0)


# -- norms -----------------------------------------------------------------

def test_hybrid_norm_examples(dipole):
    assert hybrid_norm(dipole, DegreeWeights.constant(1)) == pytest.approx(ALPHA)
    assert hybrid_norm(CoefficientSet.zeros(2), DegreeWeights.constant(2)) == 0
    a = CoefficientSet.from_dict({(0, 0): 3, (2, 1): 4j}, 2)
    assert hybrid_norm(a, DegreeWeights([1, 1, 0.5])) == pytest.approx(5.0, rel=1e-15)


def test_hybrid_norm_dimension_error(dipole):
    with pytest.raises(DimensionError):
        hybrid_norm(dipole, DegreeWeights.constant(2))


def test_l1_norm_frame_dependence(dipole, x_dipole):
    assert l1_norm(dipole) == pytest.approx(ALPHA)
    assert l1_norm(x_dipole) == pytest.approx(ALPHA * np.sqrt(2), rel=1e-15)
    assert l1_norm(CoefficientSet.zeros(1)) == 0


def test_discrepancy_examples(rng):
    b = CoefficientSet.from_dict({(1, 0): 3 + 4j}, 2)
    assert discrepancy(CoefficientSet.zeros(2), b) == pytest.approx(25.0)
    assert discrepancy(b, b) == 0
    x, y = random_coeffs(rng, 2), random_coeffs(rng, 2)
    expected = sum(abs(x.values[i] - y.values[i]) ** 2 for i in range(9))
    assert discrepancy(x, y) == pytest.approx(expected, rel=1e-14)
    with pytest.raises(DimensionError):
        discrepancy(x, CoefficientSet.zeros(3))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 8), st.integers(0, 2**32 - 1))
def test_block_unitary_invariance(L, seed):
    rng = np.random.default_rng(seed)
    a = random_coeffs(rng, L)
    beta = DegreeWeights(np.concatenate([[1.0], rng.uniform(0.1, 2, L)]))
    Ua = apply_block_unitaries(a, [random_unitary(rng, 2 * l + 1) for l in range(L + 1)])
    np.testing.assert_allclose(degree_norms(Ua), degree_norms(a), rtol=1e-12, atol=0)
    assert hybrid_norm(Ua, beta) == pytest.approx(hybrid_norm(a, beta), rel=1e-12)


def test_l1_norm_not_block_unitary_invariant(dipole, x_dipole):
    # the degree-1 rotation taking the z axis to the x axis, as a block unitary
    U = np.zeros((3, 3), dtype=complex)
    U[:, 1] = x_dipole.block(1) / ALPHA
    U[:, 0] = [1 / np.sqrt(2), 0, 1 / np.sqrt(2)]
    U[:, 2] = [0, 1, 0]
    assert np.allclose(U.conj().T @ U, np.eye(3))
    rotated = apply_block_unitaries(dipole, [np.eye(1), U])
    assert l1_norm(rotated) / l1_norm(dipole) == pytest.approx(np.sqrt(2), rel=1e-12)
    assert degree_norms(rotated)[1] == pytest.approx(degree_norms(dipole)[1], rel=1e-12)


# -- l1 soft threshold ----------------------------------------------------

def test_l1_soft_threshold_identity_at_zero(rng):
    a = random_coeffs(rng, 3)
    assert np.array_equal(l1_soft_threshold(a, 0.0).values, a.values)


def test_l1_soft_threshold_is_coordinate_dependent(dipole, x_dipole):
    assert np.any(l1_soft_threshold(dipole, 1.5).values != 0)
    assert not np.any(l1_soft_threshold(x_dipole, 1.5).values)


def test_l1_soft_threshold_boundary_and_domain():
    a = CoefficientSet.from_dict({(0, 0): 3 + 4j}, 0)
    assert l1_soft_threshold(a, 5.0).values[0] == 0
    with pytest.raises(DomainError):
        l1_soft_threshold(a, -1.0)


def test_l1_soft_threshold_objective_sanity(rng):
    a = random_coeffs(rng, 4)
    lam = 0.7

    def obj(x):
        return 0.5 * discrepancy(x, a) + lam * l1_norm(x)

    x = l1_soft_threshold(a, lam)
    assert obj(x) <= obj(a)
    assert obj(x) <= obj(CoefficientSet.zeros(4))
    for _ in range(200):
        probe = CoefficientSet(x.values + 1e-3 * (rng.standard_normal(25) + 1j * rng.standard_normal(25)))
        assert obj(x) <= obj(probe)


def test_real_field_flag_and_symmetry(rng):
    a = make_real(random_coeffs(rng, 5))
    assert a.is_conjugate_symmetric()
    assert np.all(a.block(3)[3].imag == 0)
    assert not random_coeffs(rng, 5).is_conjugate_symmetric()
    assert l1_soft_threshold(a, 0.5).is_conjugate_symmetric()


def test_degree_index():
    assert degree_index(2).tolist() == [0, 1, 1, 1, 2, 2, 2, 2, 2]
