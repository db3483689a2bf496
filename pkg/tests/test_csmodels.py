import numpy as np
import pytest
import sympy as sp

from mscasimir.cartan import build_spec, catalog, find_spec, random_region_point, spinor_spec
from mscasimir.csmodels import (
    SPINOR_FLOAT_CHECKS,
    b_system,
    bc2_system,
    c2_system,
    defect_k,
    defect_match,
    fourpoint_k,
    gauge,
    hamiltonian_check,
    ho_laplacian,
    mismatched_entries,
    multiplicity_from_roots,
    operator_residual,
    plain_symbol,
    poschl_teller,
    probes,
    rational_matrix,
    rho_norm,
    scalar_grid,
    scalar_l2,
    scalar_m,
    scalar_match,
    spinor_match,
    spinor_potential_form,
    spinor_tables,
)
from mscasimir.errors import ValidationError
from mscasimir.liealg import build_algebra
from mscasimir.models import MultiplicityVector, Signature, XPower
from mscasimir.radial import radial_casimir, trivial_bimodule


def test_root_system_sizes() -> None:
    assert len(bc2_system().positive_roots()) == 6
    assert len(c2_system().positive_roots()) == 4
    b3 = b_system(3)
    assert b3.name == "B_3"
    assert len(b3.positive_roots()) == 9
    d3 = b_system(3, with_short=False)
    assert d3.name == "D_3"
    assert len(d3.positive_roots()) == 6
    assert np.isclose(b3.inner(b3.orbits["long"][0], b3.orbits["long"][0]), 4.0)


@pytest.mark.parametrize("d", [3, 4, 5, 6, 7, 8])
def test_fourpoint_rho_norm(d: int) -> None:
    assert np.isclose(rho_norm(bc2_system(), fourpoint_k(d)), (d * d - 2 * d + 2) / 4)


def test_rho_norm_of_zero_multiplicity() -> None:
    assert rho_norm(bc2_system(), MultiplicityVector(system="BC_2")) == 0.0


def test_scalar_rho_norm_is_recomputed() -> None:
    d, alpha, beta = 4, 1.0, 2.0
    value = rho_norm(bc2_system(), scalar_m(d, alpha, beta))
    assert np.isclose(value, ((d + beta - 1) ** 2 + (beta + 1) ** 2) / 4)
    assert not np.isclose(value, ((d + beta - 1) ** 2 + (d + 1) ** 2) / 4)


def test_multiplicity_must_be_weyl_invariant() -> None:
    system = bc2_system()
    k = multiplicity_from_roots(system, {(1.0, 1.0): 0.5, (1.0, -1.0): 0.5, (-2.0, 0.0): 0.25})
    assert k.values == {"ee": 0.5, "2e": 0.25}
    with pytest.raises(ValidationError):
        multiplicity_from_roots(system, {(1.0, 1.0): 0.5, (1.0, -1.0): 0.7})
    with pytest.raises(ValidationError):
        multiplicity_from_roots(system, {(3.0, 0.0): 1.0})


def test_laplacian_rejects_foreign_multiplicity() -> None:
    with pytest.raises(ValidationError):
        ho_laplacian(bc2_system(), defect_k(5, 1))
    with pytest.raises(ValidationError):
        ho_laplacian(c2_system(), MultiplicityVector(system="C_2", values={"e": 1.0}))


def test_zero_multiplicity_gives_flat_laplacian() -> None:
    op = ho_laplacian(bc2_system(), MultiplicityVector(system="BC_2"))
    chi = np.array([0.4, 1.3])
    probe = np.array([0.7, -1.1])
    assert np.isclose(op.symbol(chi, probe)[0, 0], probe @ probe)


def test_gauge_exponents_for_scalar() -> None:
    delta = gauge(bc2_system(), scalar_m(4, 1.0, 2.0), fourpoint_k(4))
    assert delta.exponents == {"e": 1.0, "ee": 0.0, "2e": 0.5}
    assert scalar_l2(1.0, 2.0).values == {"e": -2.0, "ee": 0.0, "2e": -0.25}


@pytest.mark.parametrize("p, q, label", [(3, 0, "euclid"), (4, 0, "euclid"), (3, 1, "2"), (3, 1, "12")])
def test_trivial_bimodule_gives_fourpoint_laplacian(p: int, q: int, label: str) -> None:
    sig = Signature(p, q)
    algebra = build_algebra(sig)
    spec = find_spec(catalog(sig), label)
    radial = radial_casimir(algebra, spec, trivial_bimodule())
    target = ho_laplacian(bc2_system(), fourpoint_k(sig.d))
    residual, _ = operator_residual(plain_symbol(radial), plain_symbol(target), scalar_grid(4), probes(2, 0))
    assert residual <= 1e-9


@pytest.mark.parametrize(
    "p, q, label, alpha, beta",
    [
        (3, 0, None, 1.0, 2.0),
        (4, 0, None, 1.0, 2.0),
        (3, 0, None, 0.5, -0.3),
        (4, 0, None, 0.5, -0.3),
        (3, 1, "2", 1.0, 2.0),
        (3, 1, "01", 0.5, -0.3),
    ],
)
def test_scalar_match(p: int, q: int, label, alpha: float, beta: float) -> None:
    report = scalar_match(Signature(p, q), alpha, beta, label=label)
    residuals = report["residuals"]
    assert residuals["radial_vs_conjugated"] <= 1e-9, report["locations"]
    assert residuals["k_level"] <= 1e-9
    assert residuals["delta_closed_form"] <= 1e-9
    assert residuals["shift_vs_rho"] <= 1e-12
    assert report["m_vector"]["values"]["e"] == alpha


def test_scalar_match_without_weights_has_no_shift() -> None:
    report = scalar_match(Signature(4, 0), 0.0, 0.0)
    assert report["shift"] == 0.0
    assert report["residuals"]["radial_vs_conjugated"] <= 1e-9


@pytest.mark.parametrize(
    "system, k",
    [
        (bc2_system(), MultiplicityVector(system="BC_2", values={"e": 0.3, "ee": 0.7, "2e": 0.45})),
        (b_system(3), MultiplicityVector(system="B_3", values={"short": 1.5, "long": 0.5})),
    ],
)
def test_hamiltonian_form(system, k) -> None:
    residual, _ = hamiltonian_check(system, k)
    assert residual <= 1e-9


def test_poschl_teller_at_real_point() -> None:
    alpha, beta = 0.4, 1.1
    xpower = XPower(phase=1.0, exponents=np.array([1.0, 0.0], dtype=complex))
    value = poschl_teller(alpha, beta, xpower, [0.7, 0.0])
    expected = ((alpha + beta) ** 2 + 0.25) / np.sinh(0.7) ** 2 - alpha * beta / np.sinh(0.35) ** 2
    assert np.isclose(value, expected)


def test_spinor_table_entries() -> None:
    tables = spinor_tables(2, 3)
    assert tables[(0.0, 1.0)]["K"][0, 0] == -sp.Rational(121, 8)
    assert tables[(1.0, 0.0)]["K"][0, 0] == -sp.Rational(81, 8)
    assert tables[(0.5, 0.5)]["L_gauged"] == sp.diag(1, 1, -1, -1) / 16


@pytest.mark.parametrize("alpha, beta", [(1, 0), (2, 3), (-1, 1)])
def test_spinor_match(alpha: float, beta: float) -> None:
    report = spinor_match(alpha, beta)
    residuals = report["residuals"]
    assert residuals["exact_gauge_tables"] == 0.0, report["locations"]["exact_gauge_tables"]
    exact = {name: value for name, value in residuals.items() if name not in SPINOR_FLOAT_CHECKS}
    assert len(exact) == 8 * 4 + 1
    bad = {name: report["locations"][name] for name, value in exact.items() if value != 0.0}
    assert not bad, bad
    assert residuals["rounding_gap"] <= 1e-9
    assert residuals["poschl_teller_form"] <= 1e-9, report["locations"]["poschl_teller_form"]


@pytest.mark.parametrize(
    "d, p, name, short",
    [(4, 1, "D_3", 0), (5, 1, "B_3", 1), (6, 3, "B_3", 2), (5, 3, "B_2", 1)],
)
def test_defect_match(d: int, p: int, name: str, short: int) -> None:
    report = defect_match(d, p)
    assert report["expected_type"] == name
    assert report["expected_multiplicities"] == {"short": short, "long": 1}
    assert report["cartans"]
    for entry in report["cartans"]:
        assert entry["type_matches"], entry
        assert entry["residual"] <= 1e-9, entry
    assert report["primed_root_data_agree"]


def test_defect_match_rejects_bad_dimension() -> None:
    with pytest.raises(ValidationError):
        defect_match(4, 4)


def test_rational_matrix_recovers_exact_entries() -> None:
    numeric = np.array([[-121 / 8 + 3e-15, 0.0], [1e-16j, 1 / 3 - 2e-15]])
    exact, gap = rational_matrix(numeric)
    assert exact == sp.Matrix([[-sp.Rational(121, 8), 0], [0, sp.Rational(1, 3)]])
    assert gap < 1e-13
    shifted, _ = rational_matrix(numeric + np.array([[0.0, 0.0], [0.0, 0.01]]))
    assert mismatched_entries(shifted, exact) == [[1, 1]]


def _positive(label) -> tuple:
    values = [float(np.real(x)) for x in label]
    if values[0] < -1e-9 or (abs(values[0]) <= 1e-9 and values[1] < 0):
        values = [-x for x in values]
    return tuple(round(x, 6) + 0.0 for x in values)


@pytest.mark.parametrize("alpha, beta", [(2, 3), (0.5, -1.5)])
def test_spinor_potential_form_matches_gauged_tables(alpha: float, beta: float) -> None:
    algebra = build_algebra(Signature(3, 0))
    spec = build_spec(algebra, spinor_spec(algebra))
    tables = spinor_tables(alpha, beta)
    chi = random_region_point(spec, np.random.default_rng(11)).coords
    from_tables = np.zeros((4, 4), dtype=complex)
    for label, xpower in zip(spec.labels, spec.xpowers):
        table = tables[_positive(label)]
        k = np.array(table["K_gauged"].evalf(), dtype=complex)
        l = np.array(table["L_gauged"].evalf(), dtype=complex)
        from_tables += k * xpower.csch_sq(chi) + l * xpower.csch_sq_half(chi)
    form = spinor_potential_form(alpha, beta, spec, chi)
    assert np.allclose(form, from_tables)
    assert not np.allclose(np.diag(form), form[0, 0])
