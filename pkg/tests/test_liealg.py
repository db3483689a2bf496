import numpy as np
import pytest
import sympy
from scipy.linalg import expm

from mscasimir.errors import SignatureError, ValidationError
from mscasimir.liealg import block_exp, build_algebra, exp_element, parabolic_dims
from mscasimir.models import PairKind, Signature


def _algebra(p: int, q: int):
    return build_algebra(Signature(p, q))


def _random_element(algebra, rng) -> np.ndarray:
    return rng.normal(size=algebra.dim) + 1j * rng.normal(size=algebra.dim)


def test_dimensions() -> None:
    assert _algebra(3, 0).dim == 10
    assert _algebra(3, 1).dim == 15


def test_basis_lies_in_so_eta() -> None:
    algebra = _algebra(2, 1)
    eta = np.diag(algebra.eta)
    assert algebra.basis_matrices.shape == (10, 5, 5)
    assert list(algebra.eta) == [1, 1, 1, -1, -1]
    for mat in algebra.basis_matrices:
        assert np.allclose(mat.T @ eta + eta @ mat, 0)


def test_invalid_signatures_rejected() -> None:
    with pytest.raises(SignatureError):
        build_algebra(Signature(1, 1))
    with pytest.raises(SignatureError):
        build_algebra(Signature(1, 2))
    assert build_algebra(Signature(1, 1), allow_exploratory=True).dim == 6


def test_bracket_values() -> None:
    algebra = _algebra(3, 0)
    f01, f12, f23 = algebra.element(0, 1), algebra.element(1, 2), algebra.element(2, 3)
    assert np.allclose(algebra.bracket(f01, f12), algebra.element(0, 2))
    assert np.allclose(algebra.bracket(f01, algebra.element(0, 2)), -f12)
    assert np.allclose(algebra.bracket(f01, f23), 0)


def test_bracket_matches_matrix_commutator() -> None:
    algebra = _algebra(3, 1)
    rng = np.random.default_rng(3)
    for _ in range(20):
        x, y = _random_element(algebra, rng), _random_element(algebra, rng)
        mx, my = algebra.to_matrix(x), algebra.to_matrix(y)
        assert np.allclose(algebra.to_matrix(algebra.bracket(x, y)), mx @ my - my @ mx, atol=1e-12)


def test_from_matrix_inverts_to_matrix() -> None:
    algebra = _algebra(4, 1)
    x = _random_element(algebra, np.random.default_rng(0))
    assert np.allclose(algebra.from_matrix(algebra.to_matrix(x)), x)
    with pytest.raises(ValidationError):
        algebra.from_matrix(np.eye(algebra.n))


def test_antisymmetric_normal_form() -> None:
    algebra = _algebra(3, 0)
    assert np.allclose(algebra.element(2, 0), -algebra.element(0, 2))
    assert np.allclose(algebra.element(1, 1), 0)
    assert algebra.label(algebra.parse_label("F_0_4")) == "F_0_4"


@pytest.mark.parametrize("p,q", [(3, 0), (2, 1), (4, 0), (3, 1), (4, 2)])
def test_jacobi_identity_exhaustive(p: int, q: int) -> None:
    assert _algebra(p, q).jacobi_residual() == 0.0


def test_jacobi_identity_exact() -> None:
    algebra = _algebra(3, 1)
    basis = [list(sympy.eye(algebra.dim).row(a)) for a in range(algebra.dim)]
    for a, b, c in [(0, 5, 9), (1, 2, 14), (3, 7, 11), (4, 4, 6)]:
        x, y, z = basis[a], basis[b], basis[c]
        total = (
            algebra.bracket_exact(x, list(algebra.bracket_exact(y, z)))
            + algebra.bracket_exact(y, list(algebra.bracket_exact(z, x)))
            + algebra.bracket_exact(z, list(algebra.bracket_exact(x, y)))
        )
        assert total == sympy.zeros(algebra.dim, 1)


def test_exact_structure_constants_are_integers() -> None:
    table = _algebra(3, 0).structure_constants_exact()
    assert all(isinstance(v, sympy.Integer) for entries in table.values() for v in entries.values())
    assert table[(0, 4)] == {1: sympy.Integer(1)}


def test_trace_form() -> None:
    algebra = _algebra(3, 0)
    for a in range(algebra.dim):
        e = np.eye(algebra.dim)[a]
        assert algebra.form_Btheta(e, e).real > 0
        mat = algebra.basis_matrices[a]
        assert np.isclose(algebra.form_B(e, e), np.trace(mat @ mat))
    assert algebra.form_B(algebra.element(0, 1), algebra.element(0, 2)) == 0
    f04 = algebra.element(0, 4)
    assert np.isclose(algebra.form_B(f04, f04), 2.0)


def test_form_is_ad_invariant() -> None:
    algebra = _algebra(3, 1)
    rng = np.random.default_rng(11)
    for _ in range(10):
        z, x, y = (_random_element(algebra, rng) for _ in range(3))
        value = algebra.form_B(algebra.bracket(z, x), y) + algebra.form_B(x, algebra.bracket(z, y))
        assert abs(value) < 1e-10


def test_involutions() -> None:
    algebra = _algebra(3, 1)
    x = _random_element(algebra, np.random.default_rng(5))
    for inv in (algebra.theta, algebra.sigma):
        assert np.allclose(inv.apply(inv.apply(x)), x)
        assert np.allclose(algebra.to_matrix(inv.apply(x)), inv.on_matrix(algebra.to_matrix(x)))
    assert np.allclose(algebra.theta.apply(algebra.sigma.apply(x)), algebra.sigma.apply(algebra.theta.apply(x)))
    p = algebra.signature.p
    for a, (mu, nu) in enumerate(algebra.pairs):
        flips = (mu > p) != (nu > p)
        assert algebra.theta.signs[a] == (-1 if flips else 1)
        e = np.eye(algebra.dim)[a]
        assert np.isclose(algebra.form_B(e, e), algebra.form_B(algebra.sigma.apply(e), algebra.sigma.apply(e)))


def test_four_way_split() -> None:
    algebra = _algebra(3, 1)
    parts = algebra.four_way_split()
    assert sum(part.shape[0] for part in parts) == algebra.dim
    k_minus = {algebra.pairs[int(np.argmax(row))] for row in parts[1]}
    assert k_minus == {(0, 1), (0, 2), (0, 3), (4, 5)}
    plus = algebra.eigenspace_split(algebra.sigma, 1)
    minus = algebra.eigenspace_split(algebra.sigma, -1)
    for u in plus:
        for v in minus:
            assert algebra.form_B(u, v) == 0


def test_defect_sigma_fixed_algebra() -> None:
    algebra = build_algebra(Signature(4, 1), pair_kind=PairKind.DEFECT, p_defect=3)
    assert algebra.eigenspace_split(algebra.sigma, 1).shape[0] == 1 + 10
    euclid = build_algebra(Signature(4, 0), pair_kind=PairKind.DEFECT, p_defect=2)
    assert euclid.eigenspace_split(euclid.sigma, 1).shape[0] == 1 + 6
    with pytest.raises(SignatureError):
        build_algebra(Signature(4, 0), pair_kind=PairKind.DEFECT, p_defect=4)


def test_stabilizer_subalgebra() -> None:
    algebra = _algebra(3, 1)
    d = algebra.signature.d
    v = np.zeros(algebra.n)
    v[0] = v[-1] = 1.0
    stab = algebra.stabilizer_subalgebra(v)
    assert stab.shape[0] == parabolic_dims(d)["total"] == 11
    for row in stab:
        image = algebra.to_matrix(row).real @ v
        assert np.allclose(image - (image @ v) / (v @ v) * v, 0)
    # rotations with both indices away from 0 and d+1 annihilate the null vector
    for mu in range(1, algebra.signature.p + 1):
        for nu in range(mu + 1, algebra.signature.p + 1):
            assert np.allclose(algebra.basis_matrices[algebra.index[(mu, nu)]] @ v, 0)
    with pytest.raises(ValidationError):
        algebra.stabilizer_subalgebra(np.eye(algebra.n)[0])


def test_block_exp_matches_expm() -> None:
    algebra = _algebra(3, 1)
    for mu, nu, angle in [(0, 1, 0.7), (0, 5, 1.3), (3, 4, -0.4 + 0.2j), (1, 5, 2.0j)]:
        x = algebra.element(mu, nu, angle)
        assert np.allclose(block_exp(algebra.eta, mu, nu, angle), expm(algebra.to_matrix(x)))
        assert np.allclose(exp_element(algebra, x), expm(algebra.to_matrix(x)))


def test_adjoint_group_matrix_is_exp_of_ad() -> None:
    algebra = _algebra(3, 1)
    x = 0.3 * algebra.element(0, 1) + 0.5 * algebra.element(2, 5)
    g = exp_element(algebra, x)
    assert np.allclose(algebra.adjoint_group_matrix(g), expm(algebra.adjoint_matrix(x)))


def test_casimir_is_scalar_in_defining_rep() -> None:
    algebra = _algebra(3, 1)
    omega = algebra.casimir_in_rep(algebra.defining_rep())
    assert np.allclose(omega, (algebra.n - 1) / 2 * np.eye(algebra.n))
    omega_adj = algebra.casimir_in_rep(algebra.adjoint_rep())
    assert np.allclose(omega_adj, omega_adj[0, 0] * np.eye(algebra.dim))
