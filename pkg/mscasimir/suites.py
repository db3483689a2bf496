from __future__ import annotations

import logging
from typing import Callable, Dict, List, Tuple

import numpy as np

from mscasimir.cartan import catalog_for, corner_residual, random_region_point, verify_spec
from mscasimir.config import Tolerances
from mscasimir.coords import FACES, apply_word, classify_causal, f_map
from mscasimir.csmodels import SPINOR_FLOAT_CHECKS, defect_match, scalar_match, spinor_match
from mscasimir.errors import ValidationError
from mscasimir.liealg import build_algebra
from mscasimir.models import ChiPoint, Signature, SuiteReport
from mscasimir.radial import (
    a_operator_residuals,
    commutator_residual,
    epsilon_consistency,
    left_right_agree,
    oracle_check,
    scalar_bimodule,
)
from mscasimir.rootspace import decomposition_residuals, root_decomposition, root_type

logger = logging.getLogger(__name__)

ALGEBRA_CASES: List[Tuple[int, int]] = [(3, 0), (3, 1), (4, 0), (4, 1)]
ORACLE_SIGNATURES: List[Tuple[int, int]] = [(3, 0), (3, 1)]
ORACLE_POINTS = 20
SCALAR_CASES: List[Tuple[int, float, float]] = [(3, 1.0, 2.0), (3, 0.5, -0.3), (4, 1.0, 2.0), (4, 0.5, -0.3)]
SPINOR_CASES: List[Tuple[int, int]] = [(1, 0), (2, 3), (-1, 1)]
DEFECT_CASES: List[Tuple[int, int]] = [(4, 1), (5, 1), (6, 3), (5, 3)]

# one hand-placed point per open region
CAUSAL_POINTS: Dict[str, Tuple[complex, complex]] = {
    "empty": (0.4j, 1.2j),
    "0": (0.4j, 0.9 + 1j * np.pi),
    "1": (-0.7 + 0.5j, 0.7 + 0.5j),
    "2": (0.7, 0.9j),
    "01": (0.4 + 1j * np.pi, 1.3 + 1j * np.pi),
    "02": (0.4, 0.9 + 1j * np.pi),
    "12": (0.4, 1.3),
}


def _structural(report: SuiteReport, name: str, ok: bool, **detail: object) -> None:
    report.add(name, 0.0 if ok else 1.0, 0.5, **detail)


def run_algebra(tol: Tolerances) -> SuiteReport:
    report = SuiteReport(suite="algebra")
    rng = np.random.default_rng(tol.seed)
    for p, q in ALGEBRA_CASES:
        algebra = build_algebra(Signature(p, q))
        report.add(f"jacobi({p},{q})", algebra.jacobi_residual(), tol.residual)
        worst = 0.0
        for _ in range(5):
            z, x, y = (rng.normal(size=algebra.dim) for _ in range(3))
            value = algebra.form_B(algebra.bracket(z, x), y) + algebra.form_B(x, algebra.bracket(z, y))
            worst = max(worst, abs(value))
        report.add(f"ad_invariance({p},{q})", worst, tol.residual)
        casimir = algebra.casimir_in_rep(algebra.defining_rep())
        scalar = casimir[0, 0] * np.eye(algebra.n)
        report.add(f"casimir_scalar({p},{q})", float(np.max(np.abs(casimir - scalar))), tol.residual)
    return report


def run_rootspaces(tol: Tolerances) -> SuiteReport:
    report = SuiteReport(suite="rootspaces")
    for d in (3, 4, 5, 6):
        sig = Signature(d, 0)
        algebra = build_algebra(sig)
        spec = catalog_for(algebra, tol)[0]
        decomp = spec.decomposition
        name, mults = root_type(algebra, decomp, "C")
        expected = {"short": d - 2, "long": 1}
        _structural(
            report,
            f"euclid_d{d}",
            name == "C_2" and mults == expected and decomp.zero_dim == (d - 2) * (d - 3) // 2 + 2,
            root_type=name,
            multiplicities=mults,
            zero_dim=decomp.zero_dim,
        )
        report.add(f"euclid_d{d}_residuals", max(decomposition_residuals(algebra, decomp).values()), tol.residual)

    for p, q in ((3, 1), (4, 1), (5, 1)):
        algebra = build_algebra(Signature(p, q))
        d = p + q
        cprime = np.array([algebra.element(a, d + 1 - a, -1.0) for a in range(q + 1)])
        decomp = root_decomposition(
            algebra, cprime, involution="theta", seed=tol.seed, cluster_gap=tol.cluster_gap, residual=tol.residual
        )
        name, mults = root_type(algebra, decomp, "B")
        expected = {"short": p - q, "long": 1}
        ok = name == f"B_{q + 1}" and mults == expected
        _structural(report, f"split_rank({p},{q})", ok, root_type=name, multiplicities=mults)
    return report


def run_cartan(tol: Tolerances) -> SuiteReport:
    report = SuiteReport(suite="cartan")
    for p, q in ((3, 0), (4, 0), (3, 1)):
        algebra = build_algebra(Signature(p, q))
        specs = catalog_for(algebra, tol)
        if q == 1:
            _structural(report, "lorentzian_catalog_size", len(specs) == 8, labels=[s.label for s in specs])
        for spec in specs:
            name, mults = root_type(algebra, spec.decomposition, spec.rank2_name)
            expected = {"short": p + q - 2, "long": 1}
            _structural(report, f"{spec.label}({p},{q})_type", name == "C_2" and mults == expected, root_type=name)
            if not spec.exists:
                continue
            residuals = verify_spec(algebra, spec)
            worst = max(residuals, key=residuals.get)
            report.add(f"{spec.label}({p},{q})_laws", residuals[worst], tol.residual, location=worst)
    return report


def run_oracle(tol: Tolerances) -> SuiteReport:
    report = SuiteReport(suite="oracle")
    for p, q in ORACLE_SIGNATURES:
        algebra = build_algebra(Signature(p, q))
        w = scalar_bimodule(algebra, 0.3, 0.7)
        for spec in catalog_for(algebra, tol):
            if not spec.exists:
                continue
            rng = np.random.default_rng(tol.seed)
            worst, where = 0.0, None
            for _ in range(ORACLE_POINTS):
                pt = random_region_point(spec, rng)
                value = oracle_check(algebra, spec, pt)
                if value >= worst:
                    worst, where = value, pt.to_dict()["chi"]
            tag = f"{spec.label}({p},{q})"
            report.add(f"{tag}_casimir", worst, tol.oracle, location=where)
            a_res = a_operator_residuals(algebra, spec, tol.seed)
            worst_a = max(a_res, key=a_res.get)
            report.add(f"{tag}_A_operators", a_res[worst_a], tol.residual, location=worst_a)
            report.add(f"{tag}_root_commutator", commutator_residual(algebra, spec), tol.residual)
            report.add(f"{tag}_left_right", left_right_agree(algebra, spec, w, tol), tol.residual)
            report.add(f"{tag}_epsilon", epsilon_consistency(algebra, spec, w), tol.residual)
    return report


def run_scalar(tol: Tolerances) -> SuiteReport:
    report = SuiteReport(suite="scalar")
    for d, alpha, beta in SCALAR_CASES:
        result = scalar_match(Signature(d, 0), alpha, beta, tolerances=tol)
        for name, value in result["residuals"].items():
            report.add(
                f"d{d}({alpha},{beta})_{name}",
                value,
                tol.residual,
                location=result["locations"].get(name),
            )
        report.cases[-1].detail.update(
            rho_norm_m=result["rho_norm_m"], rho_norm_m_printed=result["rho_norm_m_printed"], shift=result["shift"]
        )
    return report


def run_spinor(tol: Tolerances) -> SuiteReport:
    report = SuiteReport(suite="spinor")
    for alpha, beta in SPINOR_CASES:
        result = spinor_match(alpha, beta, tol)
        for name, value in result["residuals"].items():
            limit = tol.residual if name in SPINOR_FLOAT_CHECKS else 0.5
            report.add(f"({alpha},{beta})_{name}", value, limit, location=result["locations"].get(name))
    return report


def run_defect(tol: Tolerances) -> SuiteReport:
    report = SuiteReport(suite="defect")
    for d, p in DEFECT_CASES:
        result = defect_match(d, p, tol)
        for entry in result["cartans"]:
            tag = f"d{d}p{p}_{entry['cartan']}"
            _structural(report, f"{tag}_type", entry["type_matches"], root_type=entry["root_type"])
            report.add(f"{tag}_laplacian", entry["residual"], tol.residual, location=entry["location"])
        _structural(report, f"d{d}p{p}_primed_roots", result["primed_root_data_agree"])
    return report


def run_coords(tol: Tolerances) -> SuiteReport:
    report = SuiteReport(suite="coords")
    rng = np.random.default_rng(tol.seed)
    chi = np.array([0.4 + 0.3j, 1.1 + 0.8j])
    want = np.array(f_map(chi))
    words = [[0], [1], [2]] + [list(rng.integers(0, 3, size=rng.integers(1, 8))) for _ in range(20)]
    worst, where = 0.0, None
    for word in words:
        value = float(np.max(np.abs(np.array(f_map(apply_word(chi, word))) - want)))
        if value >= worst:
            worst, where = value, [int(s) for s in word]
    report.add("f_weyl_invariance", worst, tol.coords * 100, location=where)

    for p, q in ORACLE_SIGNATURES:
        algebra = build_algebra(Signature(p, q))
        for spec in catalog_for(algebra, tol):
            if not spec.exists:
                continue
            pt = random_region_point(spec, np.random.default_rng(tol.seed))
            report.add(
                f"corners_{spec.label}({p},{q})",
                corner_residual(algebra, spec, pt),
                tol.residual,
                location=pt.to_dict()["chi"],
            )

    for face in FACES:
        got = classify_causal(ChiPoint.of(*CAUSAL_POINTS[face]), tol.wall)
        _structural(report, f"causal_{face}", got.face == face, causal=got.causal)
    return report


SUITES: Dict[str, Callable[[Tolerances], SuiteReport]] = {
    "algebra": run_algebra,
    "rootspaces": run_rootspaces,
    "cartan": run_cartan,
    "oracle": run_oracle,
    "scalar": run_scalar,
    "spinor": run_spinor,
    "defect": run_defect,
    "coords": run_coords,
}


def run_suite(name: str, tol: Tolerances) -> List[SuiteReport]:
    if name != "all" and name not in SUITES:
        raise ValidationError(f"unknown suite {name!r}; choose from {sorted(SUITES)} or all")
    names = list(SUITES) if name == "all" else [name]
    reports: List[SuiteReport] = []
    for item in names:
        report = SUITES[item](tol)
        logger.info("suite %s: %d cases, %d failures", item, len(report.cases), len(report.failures))
        for case in report.cases:
            logger.debug("%s/%s residual %.3e", item, case.name, case.residual)
        reports.append(report)
    return reports
