from __future__ import annotations

import logging
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy as sp

from mscasimir.cartan import build_spec, catalog_for, find_spec, random_region_point, spinor_spec
from mscasimir.config import DEFAULT_TOLERANCES, Tolerances
from mscasimir.errors import ValidationError
from mscasimir.liealg import build_algebra
from mscasimir.models import (
    CartanSubsetSpec,
    FirstOrderTerm,
    GaugeData,
    MultiplicityVector,
    PairKind,
    RadialOperator,
    RootSystem,
    Signature,
    XPower,
    complex_pair,
)
from mscasimir.radial import K_L_matrices, radial_casimir, scalar_bimodule, spinor_bimodule, trivial_bimodule
from mscasimir.rootspace import root_type

logger = logging.getLogger(__name__)

REFERENCE_POINT = np.array([1.0, 2.0])
PROBE_COUNT = 20
EXACT_DENOMINATOR = 10**4

# (1,0) carries the lower sign, (0,1) the upper one
SPINOR_LONG_SIGNS: Dict[Tuple[float, float], int] = {(1.0, 0.0): -1, (0.0, 1.0): 1}
# diagonal entries where a short root contributes sech^2 of its half
SPINOR_SHORT_SECH: Dict[Tuple[float, float], Tuple[int, ...]] = {(0.5, 0.5): (0, 1), (0.5, -0.5): (0, 2)}
SPINOR_FLOAT_CHECKS = ("rounding_gap", "poschl_teller_form")

Symbol = Callable[[np.ndarray, np.ndarray], np.ndarray]


def bc2_system() -> RootSystem:
    return RootSystem(
        name="BC_2",
        orbits={
            "e": np.array([[1.0, 0.0], [0.0, 1.0]]),
            "ee": np.array([[1.0, 1.0], [1.0, -1.0]]),
            "2e": np.array([[2.0, 0.0], [0.0, 2.0]]),
        },
        metric=np.eye(2),
    )


def c2_system() -> RootSystem:
    system = bc2_system()
    del system.orbits["e"]
    system.name = "C_2"
    return system


def b_system(n: int, with_short: bool = True, scale: float = np.sqrt(2)) -> RootSystem:
    """B_N (or D_N without the short roots) with roots scale*e_i and scale*(e_i +- e_j)."""
    if n < 1:
        raise ValidationError(f"rank must be positive, got {n}")
    eye = np.eye(n)
    long = [scale * (eye[i] + s * eye[j]) for i in range(n) for j in range(i + 1, n) for s in (1, -1)]
    orbits: Dict[str, np.ndarray] = {}
    if with_short:
        orbits["short"] = scale * eye
    orbits["long"] = np.array(long).reshape(-1, n)
    return RootSystem(name=f"{'B' if with_short else 'D'}_{n}", orbits=orbits, metric=np.eye(n))


def multiplicity_from_roots(system: RootSystem, per_root: Dict[Tuple[float, ...], float]) -> MultiplicityVector:
    """Collect per-root values into orbit values; unequal values on one orbit are rejected."""
    values: Dict[str, float] = {}
    for root, value in per_root.items():
        orbit = system.orbit_of(root)
        if orbit is None:
            raise ValidationError(f"{root} is not a root of {system.name}")
        if orbit in values and not np.isclose(values[orbit], value):
            raise ValidationError(f"multiplicity is not Weyl invariant on orbit {orbit}: {values[orbit]} vs {value}")
        values[orbit] = float(value)
    return MultiplicityVector(system=system.name, values=values)


def _check_multiplicity(system: RootSystem, k: MultiplicityVector) -> None:
    if k.system != system.name:
        raise ValidationError(f"multiplicity for {k.system} used with root system {system.name}")
    unknown = sorted(set(k.values) - set(system.orbits))
    if unknown:
        raise ValidationError(f"unknown orbits for {system.name}: {unknown}")


def fourpoint_k(d: int) -> MultiplicityVector:
    return MultiplicityVector(system="BC_2", values={"e": 0.0, "ee": (d - 2) / 2, "2e": 0.5})


def scalar_m(d: int, alpha: float, beta: float) -> MultiplicityVector:
    return MultiplicityVector(
        system="BC_2", values={"e": float(alpha), "ee": (d - 2) / 2, "2e": (1 - alpha + beta) / 2}
    )


def scalar_l2(alpha: float, beta: float) -> MultiplicityVector:
    return MultiplicityVector(
        system="BC_2", values={"e": -alpha * beta, "ee": 0.0, "2e": -(((alpha - beta) / 2) ** 2)}
    )


def defect_k(d: int, p: int) -> MultiplicityVector:
    short = abs(d - 2 - 2 * p)
    name = f"{'B' if short else 'D'}_{min(p + 2, d - p)}"
    values = {"long": 0.5}
    if short:
        values["short"] = short / 2
    return MultiplicityVector(system=name, values=values)


def ho_laplacian(system: RootSystem, k: MultiplicityVector) -> RadialOperator:
    """L(k) = Laplacian + sum over positive roots of k coth(alpha/2) d_alpha, as a scalar RadialOperator."""
    _check_multiplicity(system, k)
    first: List[FirstOrderTerm] = []
    for orbit, root in system.positive_roots():
        for half in (root / 2, -root / 2):
            first.append(
                FirstOrderTerm(
                    root=tuple(float(x) for x in half),
                    weight=k.of(orbit),
                    direction=(system.metric @ half).astype(complex),
                    xpower=XPower(phase=1.0, exponents=half.astype(complex)),
                )
            )
    return RadialOperator(
        second_order=system.metric.astype(complex),
        first_order=first,
        constant=np.zeros((1, 1), dtype=complex),
    )


def rho(system: RootSystem, k: MultiplicityVector) -> np.ndarray:
    return sum((k.of(orbit) * root / 2 for orbit, root in system.positive_roots()), np.zeros(system.rank))


def rho_norm(system: RootSystem, k: MultiplicityVector) -> float:
    vec = rho(system, k)
    return system.inner(vec, vec)


def gauge(system: RootSystem, m: MultiplicityVector, k: MultiplicityVector) -> GaugeData:
    exponents = {orbit: m.of(orbit) - k.of(orbit) for orbit in system.orbits}
    return GaugeData(system=system, exponents=exponents)


def normalize_gauge(gauge_data: GaugeData, closed_form: Callable[[np.ndarray], complex]) -> GaugeData:
    """Fix the free constant of delta so that it agrees with closed_form at the reference point."""
    gauge_data.scale = 1.0
    gauge_data.scale = closed_form(REFERENCE_POINT) / gauge_data.value(REFERENCE_POINT)
    return gauge_data


def scalar_delta_closed_form(alpha: float, beta: float) -> Callable[[np.ndarray], complex]:
    def evaluate(chi: np.ndarray) -> complex:
        chi = np.asarray(chi, dtype=complex)
        half = chi / 2
        return complex(
            np.prod(np.cosh(half) ** ((beta - alpha) / 2)) * np.prod(np.sinh(half) ** ((alpha + beta) / 2))
        )

    return evaluate


def conjugated_symbol(op: RadialOperator, gauge_data: GaugeData, shift: complex = 0.0) -> Symbol:
    """Symbol of delta (op + shift) delta^{-1} on exponential probes."""

    def evaluate(chi: np.ndarray, probe: np.ndarray) -> np.ndarray:
        grad = probe - gauge_data.gradient(chi)
        values = op.symbol(chi, grad, -gauge_data.hessian(chi))
        return values + shift * np.eye(values.shape[0])

    return evaluate


def plain_symbol(op: RadialOperator) -> Symbol:
    return lambda chi, probe: op.symbol(chi, probe)


def hamiltonian_potential(system: RootSystem, k: MultiplicityVector, chi: Sequence[complex]) -> complex:
    """-sum k_a (k_a + 2 k_2a - 1) <a, a> / (4 sinh^2(a/2)) over positive roots."""
    _check_multiplicity(system, k)
    chi = np.asarray(chi, dtype=complex)
    total = 0.0 + 0.0j
    for orbit, root in system.positive_roots():
        ka = k.of(orbit)
        k2a = k.of(system.orbit_of(2 * root))
        total -= ka * (ka + 2 * k2a - 1) * system.inner(root, root) / (4 * np.sinh(root @ chi / 2) ** 2)
    return complex(total)


def poschl_teller(alpha: float, beta: float, xpower: XPower, chi: Sequence[complex]) -> complex:
    """((a+b)^2 + 1/4) csch^2 - a b csch^2 of the half root."""
    chi = np.asarray(chi, dtype=complex)
    return complex(((alpha + beta) ** 2 + 0.25) * xpower.csch_sq(chi) - alpha * beta * xpower.csch_sq_half(chi))


def scalar_grid(size: int = 10) -> List[np.ndarray]:
    axis = np.linspace(0.3, 2.0, size)
    return [np.array([a, b + 0.0913]) for a in axis for b in axis]


def probes(rank: int, seed: int, count: int = PROBE_COUNT) -> np.ndarray:
    return np.random.default_rng(seed).normal(size=(count, rank))


def operator_residual(
    lhs: Symbol, rhs: Symbol, points: Sequence[np.ndarray], probe_set: np.ndarray
) -> Tuple[float, Optional[Dict[str, Any]]]:
    """Worst relative disagreement of two operators on exponential probes, with its location."""
    worst, where = 0.0, None
    for chi in points:
        for probe in probe_set:
            left = lhs(chi, probe)
            diff = float(np.max(np.abs(left - rhs(chi, probe))))
            residual = diff / max(1.0, float(np.max(np.abs(left))))
            if residual > worst or where is None:
                worst = residual
                where = {"chi": [float(np.real(x)) for x in chi], "probe": [float(x) for x in probe]}
    return worst, where


def hamiltonian_check(
    system: RootSystem, k: MultiplicityVector, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> Tuple[float, Optional[Dict[str, Any]]]:
    """Compare delta(k)^{1/2} (L(k) + |rho|^2) delta(k)^{-1/2} with Laplacian + hamiltonian_potential."""
    half = GaugeData(system=system, exponents=dict(k.values))
    lhs = conjugated_symbol(ho_laplacian(system, k), half, rho_norm(system, k))

    def rhs(chi: np.ndarray, probe: np.ndarray) -> np.ndarray:
        value = probe @ system.metric @ probe + hamiltonian_potential(system, k, chi)
        return np.array([[value]], dtype=complex)

    points = scalar_grid(5) if system.rank == 2 else _b_points(system.rank, tolerances.seed)
    return operator_residual(lhs, rhs, points, probes(system.rank, tolerances.seed))


def _fourpoint_spec(sig: Signature, label: Optional[str], tolerances: Tolerances):
    algebra = build_algebra(sig)
    specs = catalog_for(algebra, tolerances)
    if label is None:
        return algebra, next(spec for spec in specs if spec.exists)
    spec = find_spec(specs, label)
    if not spec.exists:
        raise ValidationError(f"Cartan subset {spec.label} does not exist for {sig.p},{sig.q}")
    return algebra, spec


def scalar_match(
    sig: Signature,
    alpha: float,
    beta: float,
    label: Optional[str] = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> Dict[str, Any]:
    d = sig.d
    algebra, spec = _fourpoint_spec(sig, label, tolerances)
    system = bc2_system()
    k, m, l2 = fourpoint_k(d), scalar_m(d, alpha, beta), scalar_l2(alpha, beta)
    closed = scalar_delta_closed_form(alpha, beta)
    delta = normalize_gauge(gauge(system, m, k), closed)
    shift = beta * (beta + d) / 2

    radial = radial_casimir(algebra, spec, scalar_bimodule(algebra, alpha, beta), tolerances)
    target = conjugated_symbol(ho_laplacian(system, m), delta, shift)
    points = scalar_grid()
    probe_set = probes(2, tolerances.seed)
    residual, location = operator_residual(plain_symbol(radial), target, points, probe_set)

    laplacian = ho_laplacian(system, k)

    def k_level(chi: np.ndarray, probe: np.ndarray) -> np.ndarray:
        chi = np.asarray(chi, dtype=complex)
        extra = sum(
            l2.of(orbit) * system.inner(root, root) / (4 * np.sinh(root @ chi / 2) ** 2)
            for orbit, root in system.positive_roots()
        )
        return laplacian.symbol(chi, probe) + extra

    k_residual, k_location = operator_residual(k_level, target, points, probe_set)
    delta_residual = max(abs(delta.value(chi) / closed(chi) - 1) for chi in points)

    rho_m_printed = ((d + beta - 1) ** 2 + (d + 1) ** 2) / 4
    report = {
        "signature": sig.to_dict(),
        "cartan": spec.label,
        "alpha": float(alpha),
        "beta": float(beta),
        "m_vector": m.to_dict(),
        "l2_vector": l2.to_dict(),
        "delta_exponents": delta.to_dict()["exponents"],
        "shift": float(shift),
        "rho_norm_k": rho_norm(system, k),
        "rho_norm_m": rho_norm(system, m),
        "rho_norm_m_printed": float(rho_m_printed),
        "residuals": {
            "radial_vs_conjugated": residual,
            "k_level": k_residual,
            "delta_closed_form": float(delta_residual),
            "shift_vs_rho": abs(rho_norm(system, m) - rho_norm(system, k) - shift),
        },
        "locations": {"radial_vs_conjugated": location, "k_level": k_location},
    }
    logger.info("scalar match d=%d (%s, %s) on %s: residual %.2e", d, alpha, beta, spec.label, residual)
    return report


def spinor_gauge() -> sp.Matrix:
    return sp.Matrix([[1, 0, 0, 1], [0, 1, 1, 0], [0, -1, 1, 0], [-1, 0, 0, 1]]) / sp.sqrt(2)


def _exact(value: float) -> sp.Rational:
    return sp.nsimplify(value, rational=True)


def rational_matrix(numeric: np.ndarray) -> Tuple[sp.Matrix, float]:
    """Nearest matrix of small-denominator Gaussian rationals, and the largest rounding gap."""
    numeric = np.asarray(numeric, dtype=complex)
    gap = 0.0

    def entry(i: int, j: int) -> sp.Expr:
        nonlocal gap
        parts = []
        value_ij = complex(numeric[int(i), int(j)])
        for part in (value_ij.real, value_ij.imag):
            value = sp.Rational(part).limit_denominator(EXACT_DENOMINATOR)
            gap = max(gap, abs(float(value) - part))
            parts.append(value)
        return parts[0] + sp.I * parts[1]

    return sp.Matrix(numeric.shape[0], numeric.shape[1], entry), gap


def mismatched_entries(computed: sp.Matrix, table: sp.Matrix) -> List[List[int]]:
    diff = (computed - table).applyfunc(sp.simplify)
    return [[i, j] for i in range(diff.rows) for j in range(diff.cols) if diff[i, j] != 0]


def spinor_tables(alpha: float, beta: float) -> Dict[Tuple[float, float], Dict[str, sp.Matrix]]:
    """Exact K, L and their gauged forms per positive root label."""
    a, b = _exact(alpha), _exact(beta)
    s = 2 * a + 2 * b
    eye = sp.eye(4)
    flip = sp.Matrix(4, 4, lambda i, j: 1 if i + j == 3 else 0)
    twist = sp.Matrix([[0, 0, 0, 1], [0, 0, -1, 0], [0, -1, 0, 0], [1, 0, 0, 0]])
    tables: Dict[Tuple[float, float], Dict[str, sp.Matrix]] = {
        (0.5, 0.5): {
            "K": -(eye + flip) / 8,
            "L": flip / 16,
            "K_gauged": -sp.diag(1, 1, 0, 0) / 4,
            "L_gauged": sp.diag(1, 1, -1, -1) / 16,
        },
        (0.5, -0.5): {
            "K": -(eye + twist) / 8,
            "L": twist / 16,
            "K_gauged": -sp.diag(1, 0, 1, 0) / 4,
            "L_gauged": sp.diag(1, -1, 1, -1) / 16,
        },
    }
    for label, sign in SPINOR_LONG_SIGNS.items():
        h = sp.Rational(sign, 2)
        t = a + b
        tables[label] = {
            "K": -sp.diag((s + sign) ** 2, s**2, s**2, (s - sign) ** 2) / 8,
            "L": sp.diag(
                (2 * a + h) * (2 * b + h),
                (2 * a + h) * (2 * b - h),
                (2 * a - h) * (2 * b + h),
                (2 * a - h) * (2 * b - h),
            )
            / 8,
            "K_gauged": -sp.Matrix(
                [
                    [t**2 + sp.Rational(1, 4), 0, 0, -sign * t],
                    [0, t**2, 0, 0],
                    [0, 0, t**2, 0],
                    [-sign * t, 0, 0, t**2 + sp.Rational(1, 4)],
                ]
            )
            / 2,
            "L_gauged": sp.Matrix(
                [
                    [4 * a * b + sp.Rational(1, 4), 0, 0, -sign * t],
                    [0, 4 * a * b - sp.Rational(1, 4), sign * (a - b), 0],
                    [0, sign * (a - b), 4 * a * b - sp.Rational(1, 4), 0],
                    [-sign * t, 0, 0, 4 * a * b + sp.Rational(1, 4)],
                ]
            )
            / 8,
        }
    return tables


def _positive_key(label: Tuple[float, ...]) -> Tuple[float, float]:
    values = [round(float(x), 6) + 0.0 for x in label]
    first = next((x for x in values if abs(x) > 1e-9), 0.0)
    if first < 0:
        values = [-x + 0.0 for x in values]
    return (values[0], values[1])


def _exact_gauge_mismatch(tables: Dict[Tuple[float, float], Dict[str, sp.Matrix]]) -> List[str]:
    g = spinor_gauge()
    bad: List[str] = []
    for label, table in tables.items():
        for name in ("K", "L"):
            if mismatched_entries(g * table[name] * g.T, table[f"{name}_gauged"]):
                bad.append(f"{name}{label}")
    return bad


def spinor_potential_form(alpha: float, beta: float, spec: CartanSubsetSpec, chi: np.ndarray) -> np.ndarray:
    """Gauged spinor potential as -V_PT per long root pair plus the remaining hyperbolic terms.

    Each root of a +- pair carries half of its pair's share, so the sum runs over all labels.
    """
    out = np.zeros((4, 4), dtype=complex)
    for label, xpower in zip(spec.labels, spec.xpowers):
        key = _positive_key(tuple(np.real(label)))
        csch_half, sech_half = xpower.csch_sq_half(chi), xpower.sech_sq_half(chi)
        if key in SPINOR_LONG_SIGNS:
            sign = SPINOR_LONG_SIGNS[key]
            remaining = np.array([csch_half, -sech_half, -sech_half, csch_half]) / 16
            out += np.diag(remaining - poschl_teller(alpha, beta, xpower, chi)) / 2
            corner = -sign * (alpha + beta) * sech_half / 8
            middle = sign * (alpha - beta) * csch_half / 8
            out[0, 3] += corner
            out[3, 0] += corner
            out[1, 2] += middle
            out[2, 1] += middle
        else:
            sech_entries = SPINOR_SHORT_SECH[key]
            out += np.diag([sech_half if i in sech_entries else -csch_half for i in range(4)]) / 16
    return out


def spinor_match(alpha: float, beta: float, tolerances: Tolerances = DEFAULT_TOLERANCES) -> Dict[str, Any]:
    algebra = build_algebra(Signature(3, 0))
    spec = build_spec(algebra, spinor_spec(algebra), tolerances)
    w = spinor_bimodule(algebra, alpha, beta)
    kl = K_L_matrices(algebra, spec, w, tolerances)
    tables = spinor_tables(alpha, beta)
    g_exact = spinor_gauge()

    residuals: Dict[str, float] = {}
    locations: Dict[str, Any] = {}
    gap = 0.0
    for key, (k, l) in sorted(kl.items()):
        table = tables.get(_positive_key(key))
        if table is None:
            raise ValidationError(f"unexpected root label {key} for the spinor Cartan subset")
        for name, numeric in (("K", k), ("L", l)):
            exact, rounding = rational_matrix(numeric)
            gap = max(gap, rounding)
            for tag_name, computed in ((name, exact), (f"{name}_gauged", g_exact * exact * g_exact.T)):
                bad = mismatched_entries(computed, table[tag_name])
                tag = f"{tag_name}{tuple(key)}"
                residuals[tag] = float(len(bad))
                locations[tag] = bad
    residuals["rounding_gap"] = float(gap)

    mismatched = _exact_gauge_mismatch(tables)
    residuals["exact_gauge_tables"] = float(len(mismatched))
    locations["exact_gauge_tables"] = mismatched

    op = radial_casimir(algebra, spec, w, tolerances)
    g = np.array(g_exact.evalf(), dtype=complex)
    rng = np.random.default_rng(tolerances.seed)
    worst, where = 0.0, None
    for _ in range(3):
        chi = random_region_point(spec, rng).coords
        gauged = g @ op.hyperbolic_potential(chi) @ g.T
        expected = spinor_potential_form(alpha, beta, spec, chi)
        value = float(np.max(np.abs(gauged - expected))) / max(1.0, float(np.max(np.abs(expected))))
        if value >= worst:
            worst, where = value, [complex_pair(c) for c in chi]
    residuals["poschl_teller_form"] = worst
    locations["poschl_teller_form"] = where

    mismatches = sum(1 for name, value in residuals.items() if value and name not in SPINOR_FLOAT_CHECKS)
    logger.info("spinor match (%s, %s): %d inexact tables, potential residual %.2e", alpha, beta, mismatches, worst)
    return {"alpha": float(alpha), "beta": float(beta), "residuals": residuals, "locations": locations}


def _b_points(n: int, seed: int, count: int = 5) -> List[np.ndarray]:
    rng = np.random.default_rng(seed)
    return [np.sort(rng.uniform(0.3, 2.0, size=n)) + 0.17 * np.arange(n) for _ in range(count)]


def defect_match(d: int, p: int, tolerances: Tolerances = DEFAULT_TOLERANCES) -> Dict[str, Any]:
    if not 0 < p < d:
        raise ValidationError(f"defect dimension must satisfy 0 < p < d, got p={p}, d={d}")
    algebra = build_algebra(Signature(d, 0), pair_kind=PairKind.DEFECT, p_defect=p)
    specs = catalog_for(algebra, tolerances)
    short = abs(d - 2 - 2 * p)
    n = min(p + 2, d - p)
    k = defect_k(d, p)
    system = b_system(n, with_short=bool(short))
    expected_mults = {"short": short, "long": 1}
    laplacian = ho_laplacian(system, k)
    points = _b_points(n, tolerances.seed)
    probe_set = probes(n, tolerances.seed)

    entries: List[Dict[str, Any]] = []
    labels_seen: Dict[str, List[Tuple[float, ...]]] = {}
    for spec in specs:
        name, mults = root_type(algebra, spec.decomposition, spec.rank2_name)
        op = radial_casimir(algebra, spec, trivial_bimodule(), tolerances)
        residual, location = operator_residual(plain_symbol(op), plain_symbol(laplacian), points, probe_set)
        labels_seen[spec.label] = sorted(tuple(round(float(x), 9) + 0.0 for x in np.real(lab)) for lab in spec.labels)
        entries.append(
            {
                "cartan": spec.label,
                "root_type": name,
                "multiplicities": mults,
                "type_matches": name == system.name and mults == expected_mults,
                "residual": residual,
                "location": location,
            }
        )

    primed = [label for label in labels_seen if label.startswith("C'")]
    same_roots = all(labels_seen[label] == labels_seen[label.replace("C'", "C")] for label in primed)
    logger.info("defect match d=%d p=%d: %d Cartan subsets, type %s", d, p, len(entries), system.name)
    return {
        "d": d,
        "p": p,
        "expected_type": system.name,
        "expected_multiplicities": expected_mults,
        "k": k.to_dict(),
        "cartans": entries,
        "primed_root_data_agree": same_roots,
    }
