import numpy as np
import pytest

from mscasimir.errors import ComputationError, ValidationError
from mscasimir.liealg import block_exp, build_algebra
from mscasimir.models import PairKind, Signature
from mscasimir.rootspace import (
    _cluster,
    decomposition_residuals,
    dual_element,
    principal_sqrt,
    root_decomposition,
    root_type,
    sigma_intersection,
)


def _euclid(d: int):
    algebra = build_algebra(Signature(d, 0))
    cprime = np.array([algebra.element(0, 1), algebra.element(d, d + 1)])
    return algebra, root_decomposition(algebra, cprime)


def _a_p(p: int, q: int):
    algebra = build_algebra(Signature(p, q))
    d = p + q
    cprime = np.array([algebra.element(a, d + 1 - a, -1.0) for a in range(q + 1)])
    return algebra, root_decomposition(algebra, cprime, involution="theta")


@pytest.mark.parametrize("d", [3, 4, 5])
def test_euclidean_root_system_is_c2(d: int) -> None:
    algebra, decomp = _euclid(d)
    assert decomp.zero_dim == (d - 2) * (d - 3) // 2 + 2
    assert decomp.total_dim == algebra.dim
    assert root_type(algebra, decomp, rank2_name="C") == ("C_2", {"short": d - 2, "long": 1})


def test_decomposition_invariants_hold() -> None:
    algebra, decomp = _euclid(4)
    residuals = decomposition_residuals(algebra, decomp)
    assert all(value <= 1e-9 for value in residuals.values()), residuals


def test_roots_closed_under_negation() -> None:
    _, decomp = _euclid(3)
    half = len(decomp.roots) // 2
    assert half == 4
    for idx in range(half):
        assert np.allclose(decomp.roots[idx + half].functional, -decomp.roots[idx].functional)
        assert decomp.negative_index(idx) == idx + half


def test_split_rank_decomposition_is_b() -> None:
    algebra, decomp = _a_p(4, 1)
    assert decomp.mprime.shape[0] == 3
    assert root_type(algebra, decomp, rank2_name="B") == ("B_2", {"short": 3, "long": 1})
    d = 5
    v = np.zeros(algebra.n)
    v[0] = v[d + 1] = 1.0
    assert np.allclose(algebra.to_matrix(decomp.cprime[1]) @ v, 0)


def test_defect_single_generator() -> None:
    algebra = build_algebra(Signature(4, 0), pair_kind=PairKind.DEFECT, p_defect=2)
    cprime = np.array([algebra.element(0, 5)])
    decomp = root_decomposition(algebra, cprime, require_cartan=False)
    positives = decomp.positive_roots()
    assert len(positives) == 1
    assert positives[0].multiplicity == 4
    assert np.allclose(np.abs(positives[0].functional), [1.0])
    assert decomp.total_dim == algebra.dim


def test_dual_element() -> None:
    algebra, decomp = _euclid(3)
    expected = algebra.element(0, 1, 1 / 2j) + algebra.element(3, 4, 0.5)
    assert np.allclose(dual_element(algebra, decomp, np.array([1j, 1.0])), expected)
    assert np.allclose(dual_element(algebra, decomp, np.zeros(2)), 0)
    a, b = decomp.roots[0].functional, decomp.roots[1].functional
    assert np.allclose(
        dual_element(algebra, decomp, a + b),
        dual_element(algebra, decomp, a) + dual_element(algebra, decomp, b),
    )
    for root in decomp.roots:
        c_alpha = dual_element(algebra, decomp, root.functional)
        for z, value in zip(decomp.cprime, root.functional):
            assert np.isclose(algebra.form_B(c_alpha, z), value)


def test_non_commutative_input_rejected() -> None:
    algebra = build_algebra(Signature(3, 0))
    with pytest.raises(ValidationError):
        root_decomposition(algebra, np.array([algebra.element(0, 1), algebra.element(1, 4)]))


def test_ambiguous_clusters_fail_loudly() -> None:
    with pytest.raises(ComputationError):
        _cluster(np.array([0.0, 5e-7, 1.0], dtype=complex), 1e-7)
    centres = _cluster(np.array([0.0, 1e-12, 1.0], dtype=complex), 1e-7)
    assert [size for _, size in centres] == [2, 1]


def test_sigma_intersection_euclidean() -> None:
    algebra = build_algebra(Signature(3, 0))
    t = block_exp(algebra.eta, 0, 1, 0.7)
    assert sigma_intersection(algebra, t).shape[0] == 3
    assert sigma_intersection(algebra, np.eye(algebra.n)).shape[0] == 6


def test_sigma_intersection_lorentzian_generic() -> None:
    algebra = build_algebra(Signature(3, 1))
    t = block_exp(algebra.eta, 0, 1, 0.7) @ block_exp(algebra.eta, 4, 5, 1.9)
    basis = sigma_intersection(algebra, t)
    assert basis.shape[0] == 2
    c = np.array([algebra.element(0, 1), algebra.element(4, 5)]).real
    assert np.linalg.matrix_rank(np.vstack([basis, c])) == 2
    with pytest.raises(ValidationError):
        sigma_intersection(algebra, 2 * np.eye(algebra.n))


def test_principal_sqrt_branch() -> None:
    assert principal_sqrt(-4) == 2j
    assert principal_sqrt(complex(-4, -0.0)) == 2j
    assert principal_sqrt(4) == 2
