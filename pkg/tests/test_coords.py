import numpy as np
import pytest

from mscasimir.coords import (
    apply_word,
    chart,
    classify_causal,
    cross_ratios,
    cross_ratios_from_corners,
    describe_point,
    f_map,
    frame_points,
    in_y,
    infinity,
    iota,
    is_null,
    jacobian_constant,
    jacobian_nonzero,
    weyl_reduce,
    z_zbar,
)
from mscasimir.errors import ValidationError
from mscasimir.liealg import build_algebra, exp_element
from mscasimir.models import ChiPoint, Signature


def _group_element(sig: Signature, seed: int) -> np.ndarray:
    algebra = build_algebra(sig)
    rng = np.random.default_rng(seed)
    return exp_element(algebra, 0.3 * rng.normal(size=algebra.dim)).real


def test_iota_is_null_and_charted() -> None:
    sig = Signature(2, 1)
    x = np.array([0.3, -1.2, 0.5])
    v = iota(sig, x)
    assert is_null(sig, v)
    assert np.allclose(chart(sig, v), x)
    assert is_null(sig, infinity(sig))
    with pytest.raises(ValidationError):
        chart(sig, infinity(sig))


def test_corner_formula_matches_cross_ratios() -> None:
    sig = Signature(3, 1)
    for seed in range(4):
        g = _group_element(sig, seed)
        u, v = cross_ratios(sig, frame_points(sig, g))
        u2, v2 = cross_ratios_from_corners(g)
        assert np.isclose(u, u2)
        assert np.isclose(v, v2)


def test_cross_ratios_need_general_position() -> None:
    sig = Signature(3, 0)
    base = iota(sig, np.zeros(3))
    other = iota(sig, np.array([1.0, 0.0, 0.0]))
    with pytest.raises(ValidationError):
        cross_ratios(sig, [base, base, other, infinity(sig)])
    with pytest.raises(ValidationError):
        cross_ratios(sig, [base, other, np.ones(5), infinity(sig)])


def test_f_is_weyl_invariant() -> None:
    chi = np.array([0.4 + 0.3j, 1.1 + 0.8j])
    want = np.array(f_map(chi))
    for word in ([0], [1], [2], [0, 1, 2, 1], [2, 0, 2]):
        assert np.allclose(np.array(f_map(apply_word(chi, word))), want)


def test_generators_are_involutions() -> None:
    chi = np.array([0.4 + 0.3j, 1.1 + 0.8j])
    for s in (0, 1, 2):
        assert np.allclose(apply_word(chi, [s, s]), chi)
    with pytest.raises(ValidationError):
        apply_word(chi, [3])


def test_f_rejects_points_outside_domain() -> None:
    with pytest.raises(ValidationError):
        f_map([0.0, 1.0])
    with pytest.raises(ValidationError):
        f_map([0.7, 0.7])
    with pytest.raises(ValidationError):
        jacobian_nonzero([0.5, 0.5 + 2j * np.pi])


def test_jacobian_constant_is_a_quarter() -> None:
    mean, spread = jacobian_constant(samples=20, seed=1)
    assert abs(mean - 0.25) < 1e-4
    assert spread < 1e-3


def test_z_zbar_reproduce_cross_ratios() -> None:
    chi = [0.6, 1.7]
    u, v = f_map(chi)
    z, zbar = z_zbar(chi)
    assert np.isclose(u, z * zbar)
    assert np.isclose(v, (1 - z) * (1 - zbar))


def test_reduce_point_already_in_domain() -> None:
    result = weyl_reduce(ChiPoint.of(0.5, 1.2))
    assert result.word == []
    assert result.region is not None and result.region.face == "12"
    assert not result.boundary


@pytest.mark.parametrize(
    "chi, word",
    [
        ((1.2, 0.5), [1]),
        ((-0.5, 1.2), [2]),
        ((0.5, -1.2), [1, 2, 1]),
    ],
)
def test_reduce_real_points(chi, word) -> None:
    result = weyl_reduce(ChiPoint.of(*chi))
    assert result.word == word
    assert np.allclose(result.representative.coords, [0.5, 1.2])
    assert result.region.face == "12"


def test_reduce_moves_imaginary_parts_into_alcove() -> None:
    pt = ChiPoint.of(0.3 - 0.4j, 0.9 + 5.0j)
    result = weyl_reduce(pt)
    rep = result.representative.coords
    assert 0 <= rep[0].imag <= rep[1].imag <= np.pi + 1e-12
    assert np.allclose(apply_word(pt.coords, result.word), rep)
    assert np.allclose(f_map(rep), f_map(pt.coords))


def test_reduce_flags_points_on_a_wall() -> None:
    result = weyl_reduce(ChiPoint.of(0.5 + 1e-11j, 1.2))
    assert result.boundary
    assert result.region is None
    assert "y1=0" in result.walls


def test_region_membership() -> None:
    assert in_y("12", [0.4, 1.3])
    assert not in_y("12", [1.3, 0.4])
    assert in_y("1", [-0.7 + 0.5j, 0.7 + 0.5j])
    assert in_y("02", [0.4, 0.9 + 1j * np.pi])
    assert not in_y("02", [0.4, 0.9 + 1j * np.pi - 0.01j])
    assert in_y("0", [0.4j, 0.9 + 1j * np.pi])
    assert in_y("empty", [0.4j, 1.2j])
    assert not in_y("12", [0.0, 1.3])
    assert in_y("12", [0.0, 1.3], closed=True)
    with pytest.raises(ValidationError):
        in_y("3", [0.4, 1.3])


def test_classify_and_describe() -> None:
    assert classify_causal(ChiPoint.of(0.4, 1.3)).face == "12"
    assert classify_causal(ChiPoint.of(0.4 + 1j * np.pi, 1.3 + 1j * np.pi)).face == "01"
    with pytest.raises(ValidationError):
        classify_causal(ChiPoint.of(0.3 + 0.2j, 0.9))

    info = describe_point(ChiPoint.of(0.4, 1.3))
    assert info["region"] == "12"
    assert abs(complex(info["u"]).imag) < 1e-12
