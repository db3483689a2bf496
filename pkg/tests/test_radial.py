import json

import numpy as np
import pytest

from mscasimir.cartan import catalog, find_spec, random_region_point
from mscasimir.errors import ConfigError, ValidationError
from mscasimir.liealg import build_algebra
from mscasimir.models import ChiPoint, PotentialKind, Signature
from mscasimir.radial import (
    K_L_matrices,
    a_operator_residuals,
    build_A_operators,
    check_bimodule,
    commutator_residual,
    defining_bimodule,
    epsilon_consistency,
    left_right_agree,
    load_bimodule,
    m_prime_invariants,
    oracle_check,
    radial_casimir,
    scalar_bimodule,
    spinor_bimodule,
    trivial_bimodule,
    zero_order_commutes,
)


def _setup(p: int, q: int, label: str):
    sig = Signature(p, q)
    algebra = build_algebra(sig)
    return algebra, find_spec(catalog(sig), label)


def test_builtin_bimodules_satisfy_relations() -> None:
    algebra = build_algebra(Signature(3, 0))
    for w in (
        scalar_bimodule(algebra, 0.3, 0.7),
        spinor_bimodule(algebra, 0.3, 0.7),
        defining_bimodule(algebra),
        trivial_bimodule(),
    ):
        residuals = check_bimodule(algebra, w)
        assert max(residuals.values()) <= 1e-12, (w.kind, residuals)


def test_spinor_needs_so41() -> None:
    with pytest.raises(ValidationError):
        spinor_bimodule(build_algebra(Signature(4, 0)), 0.0, 0.0)


def test_load_custom_bimodule(tmp_path) -> None:
    algebra = build_algebra(Signature(3, 0))
    path = tmp_path / "w.json"
    path.write_text(
        json.dumps({"dim": 1, "left": {"F_0_4": [[-0.3]]}, "right": {"F_0_4": [[[-0.7, 0.0]]]}}),
        encoding="utf-8",
    )
    w = load_bimodule(algebra, str(path))
    reference = scalar_bimodule(algebra, 0.3, 0.7)
    a = algebra.index[(0, 4)]
    assert np.allclose(w.left[a], reference.left[a])
    assert np.allclose(w.right[a], reference.right[a])


@pytest.mark.parametrize(
    "payload, error",
    [
        ({"dim": 1, "left": {"F_9_9": [[1.0]]}}, ConfigError),
        ({"dim": 1, "left": {"F_0_1": [[1.0]]}}, ValidationError),
        ({"dim": 2, "left": {"F_0_4": [[1.0]]}}, ConfigError),
        ({"left": {}}, ConfigError),
    ],
)
def test_load_rejects_bad_bimodules(tmp_path, payload, error) -> None:
    algebra = build_algebra(Signature(3, 0))
    path = tmp_path / "w.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    with pytest.raises(error):
        load_bimodule(algebra, str(path))


def test_load_missing_file() -> None:
    with pytest.raises(ConfigError):
        load_bimodule(build_algebra(Signature(3, 0)), "does/not/exist.json")


@pytest.mark.parametrize("p, q, label", [(3, 0, "euclid"), (4, 0, "euclid"), (3, 1, "2"), (3, 1, "02")])
def test_a_operator_properties(p: int, q: int, label: str) -> None:
    algebra, spec = _setup(p, q, label)
    residuals = a_operator_residuals(algebra, spec)
    assert max(residuals.values()) <= 1e-9, residuals


@pytest.mark.parametrize("p, q, label", [(3, 0, "euclid"), (3, 1, "1"), (3, 1, "12")])
def test_commutator_of_root_vectors(p: int, q: int, label: str) -> None:
    algebra, spec = _setup(p, q, label)
    assert commutator_residual(algebra, spec) <= 1e-9


@pytest.mark.parametrize("rep", ["defining", "adjoint"])
def test_casimir_decomposition_euclidean(rep: str) -> None:
    algebra, spec = _setup(3, 0, "euclid")
    rng = np.random.default_rng(4)
    for _ in range(3):
        pt = random_region_point(spec, rng)
        assert oracle_check(algebra, spec, pt, rep) <= 1e-8


@pytest.mark.parametrize("label", ["empty", "0", "1", "2", "01", "02", "12"])
def test_casimir_decomposition_lorentzian(label: str) -> None:
    algebra, spec = _setup(3, 1, label)
    pt = random_region_point(spec, np.random.default_rng(7))
    assert oracle_check(algebra, spec, pt) <= 1e-8


def test_unknown_representation_rejected() -> None:
    algebra, spec = _setup(3, 0, "euclid")
    with pytest.raises(ValidationError):
        oracle_check(algebra, spec, ChiPoint.of(-0.5 + 1j, 0.5 + 1j), rep="spin")


def test_scalar_euclidean_potential() -> None:
    algebra, spec = _setup(3, 0, "euclid")
    alpha, beta = 0.3, 0.7
    op = radial_casimir(algebra, spec, scalar_bimodule(algebra, alpha, beta))
    assert op.dim == 1
    assert len(op.first_order) == len(spec.decomposition.roots)
    assert {term.weight for term in op.first_order} == {0.5}
    full = [complex(t.matrix[0, 0]) for t in op.zero_order if t.kind is PotentialKind.FULL]
    half = [complex(t.matrix[0, 0]) for t in op.zero_order if t.kind is PotentialKind.HALF]
    assert full and half
    assert np.allclose(full, -((alpha + beta) ** 2) / 8)
    assert np.allclose(half, alpha * beta / 8)


def test_scalar_potential_for_subset_2() -> None:
    algebra, spec = _setup(3, 1, "2")
    alpha, beta = 0.3, 0.7
    op = radial_casimir(algebra, spec, scalar_bimodule(algebra, alpha, beta))
    full = [complex(t.matrix[0, 0]) for t in op.zero_order if t.kind is PotentialKind.FULL]
    half = [complex(t.matrix[0, 0]) for t in op.zero_order if t.kind is PotentialKind.HALF]
    assert np.allclose(full, -((alpha - beta) ** 2) / 8)
    assert np.allclose(half, -alpha * beta / 8)


def test_trivial_bimodule_has_no_potential() -> None:
    algebra, spec = _setup(3, 0, "euclid")
    op = radial_casimir(algebra, spec, trivial_bimodule())
    assert op.zero_order == []
    assert np.allclose(op.constant, 0)


@pytest.mark.parametrize("p, q, label", [(3, 0, "euclid"), (3, 0, "spinor"), (3, 1, "2"), (3, 1, "12")])
def test_left_and_right_forms_agree(p: int, q: int, label: str) -> None:
    sig = Signature(p, q)
    algebra = build_algebra(sig)
    if label == "spinor":
        from mscasimir.cartan import build_spec, spinor_spec

        spec = build_spec(algebra, spinor_spec(algebra))
    else:
        spec = find_spec(catalog(sig), label)
    for w in (scalar_bimodule(algebra, 0.3, 0.7), defining_bimodule(algebra)):
        assert left_right_agree(algebra, spec, w) <= 1e-9
        assert epsilon_consistency(algebra, spec, w) <= 1e-9
    if label in ("euclid", "spinor"):
        w = spinor_bimodule(algebra, 0.3, 0.7)
        assert left_right_agree(algebra, spec, w) <= 1e-9


def test_defining_invariants_dimension() -> None:
    algebra, spec = _setup(5, 0, "euclid")
    w = defining_bimodule(algebra)
    frame = m_prime_invariants(algebra, spec, w)
    assert frame.shape == (49, 17)
    op = radial_casimir(algebra, spec, w)
    assert op.dim == 17
    assert zero_order_commutes(algebra, spec, w, op) <= 1e-8


def test_k_l_keys_are_root_labels() -> None:
    algebra, spec = _setup(3, 0, "euclid")
    kl = K_L_matrices(algebra, spec, scalar_bimodule(algebra, 0.2, 0.4))
    assert set(kl) == {tuple(float(x) for x in label) for label in spec.labels}


def test_missing_subset_has_no_radial_part() -> None:
    algebra, spec = _setup(3, 1, "1'")
    with pytest.raises(ValidationError):
        radial_casimir(algebra, spec, scalar_bimodule(algebra, 0.1, 0.2))


def test_a_operators_follow_root_spaces() -> None:
    algebra, spec = _setup(3, 1, "01")
    ops = build_A_operators(algebra, spec)
    assert len(ops) == len(spec.decomposition.roots)
    for op, root in zip(ops, spec.decomposition.roots):
        assert len(op.summands) == root.multiplicity
