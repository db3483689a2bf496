from __future__ import annotations

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm, lstsq

from mscasimir.config import DEFAULT_TOLERANCES, Tolerances
from mscasimir.coords import in_y
from mscasimir.errors import ComputationError, SignatureError, ValidationError
from mscasimir.liealg import LieAlgebra, block_exp, build_algebra
from mscasimir.models import CartanSubsetSpec, ChiPoint, PairKind, Signature, XPower
from mscasimir.rootspace import restricted_gram, root_decomposition

logger = logging.getLogger(__name__)

PI = np.pi
FOURPOINT_LABELS = ["empty", "0", "1", "1'", "2", "01", "02", "12"]
LABEL_ALIASES = {"1p": "1'", "Cp_0": "C'_0", "{}": "empty", "none": "empty"}

_EUCLID_A = np.array([[1 / 2j, 1 / 2j], [0.5, -0.5]])
_COMPACT_A = np.array([[1 / 2j, 1 / 2j], [1 / 2j, -1 / 2j]])
_SPLIT_A = np.array([[0.5, 0.5], [0.5, -0.5]])
_EUCLID_SHIFT = np.array([-PI, 0.0])


def canonical_label(label: str) -> str:
    return LABEL_ALIASES.get(label, label)


def t_matrix(algebra: LieAlgebra, phi: float, psi: float) -> np.ndarray:
    """t_{phi,psi} = exp(phi F_{0,1}) exp(psi F_{d,d+1})."""
    d = algebra.signature.d
    return (block_exp(algebra.eta, 0, 1, phi) @ block_exp(algebra.eta, d, d + 1, psi)).real


def _spec(
    algebra: LieAlgebra,
    label: str,
    generators: Sequence[Dict[Tuple[int, int], complex]],
    log_matrix: np.ndarray,
    log_shift: np.ndarray,
    t: Optional[np.ndarray] = None,
    epsilon: Tuple[complex, ...] = (1, 1),
    epsilon_stated: Optional[Tuple[complex, ...]] = None,
    region: str = "",
) -> CartanSubsetSpec:
    return CartanSubsetSpec(
        label=label,
        signature=algebra.signature,
        pair_kind=algebra.pair_kind,
        cprime=np.array([algebra.from_terms(terms) for terms in generators]),
        log_matrix=np.asarray(log_matrix, dtype=complex),
        log_shift=np.asarray(log_shift, dtype=complex),
        t=np.eye(algebra.n) if t is None else np.asarray(t),
        epsilon_generators=tuple(complex(e) for e in epsilon),
        epsilon_stated=None if epsilon_stated is None else tuple(complex(e) for e in epsilon_stated),
        region=region or label,
    )


def euclidean_spec(algebra: LieAlgebra) -> CartanSubsetSpec:
    d = algebra.signature.d
    return _spec(algebra, "euclid", [{(0, 1): 1}, {(d, d + 1): 1}], _EUCLID_A, _EUCLID_SHIFT, region="1")


def spinor_spec(algebra: LieAlgebra) -> CartanSubsetSpec:
    """Euclidean Cartan subset with the roles of the indices 1 and 2 exchanged."""
    d = algebra.signature.d
    spec = _spec(algebra, "spinor", [{(0, 2): 1}, {(d, d + 1): 1}], _EUCLID_A, _EUCLID_SHIFT, region="1")
    return spec


def _lorentzian_specs(algebra: LieAlgebra) -> List[CartanSubsetSpec]:
    d = algebra.signature.d
    rot_pair = [{(0, 1): 1, (d, d + 1): 1}, {(0, d): 1, (1, d + 1): -1}]
    split_pair = [{(0, d): 1}, {(1, d + 1): 1}]
    t_0pi = t_matrix(algebra, 0, PI)
    t_half = t_matrix(algebra, PI / 2, PI / 2)
    specs = [
        _spec(algebra, "empty", [{(0, 1): 1}, {(d, d + 1): 1}], _COMPACT_A, _EUCLID_SHIFT),
        _spec(algebra, "0", rot_pair, [[1 / 2j, 0], [0, 0.5]], [-PI / 2, -1j * PI / 2]),
        _spec(algebra, "1", [{(0, 1): 1}, {(2, d + 1): 1}], _EUCLID_A, _EUCLID_SHIFT),
        _spec(algebra, "1'", [{(d, d + 1): 1}, {(0, d - 1): 1}], _EUCLID_A, _EUCLID_SHIFT),
        _spec(algebra, "2", rot_pair, [[0, 1 / 2j], [0.5, 0]], [0, 0], t_0pi, epsilon_stated=(-1, 1)),
        _spec(algebra, "01", split_pair, _SPLIT_A, [-1j * PI, 0]),
        _spec(algebra, "02", split_pair, _SPLIT_A, [-1j * PI / 2, 1j * PI / 2], t_half, epsilon=(1j, -1j)),
        _spec(algebra, "12", split_pair, _SPLIT_A, [0, 0], t_0pi, epsilon=(-1, 1), epsilon_stated=(1, 1)),
    ]
    for spec in specs:
        if spec.epsilon_stated is None:
            spec.epsilon_stated = spec.epsilon_generators
    specs[3].exists = False
    specs[3].notes.append("listed among the eight parametrized subsets but does not exist for q=1")
    return specs


def _defect_generator(algebra: LieAlgebra, mu: int, nu: int) -> Tuple[Dict[Tuple[int, int], complex], complex]:
    compact = algebra.eta[mu] * algebra.eta[nu] > 0
    return {(mu, nu): 1}, (1 / (1j * np.sqrt(2)) if compact else 1 / np.sqrt(2))


def _defect_from_pairs(
    algebra: LieAlgebra, label: str, pairs: Sequence[Tuple[int, int]], t: Optional[np.ndarray] = None
) -> CartanSubsetSpec:
    generators, scales = zip(*(_defect_generator(algebra, mu, nu) for mu, nu in pairs))
    rank = len(pairs)
    spec = _spec(algebra, label, generators, np.diag(scales), np.zeros(rank), t, epsilon=(), region="real")
    spec.epsilon_stated = None
    spec.rank2_name = "B"
    return spec


def _defect_specs(algebra: LieAlgebra) -> List[CartanSubsetSpec]:
    d = algebra.signature.d
    p = algebra.sigma.p_defect
    if 2 * p >= d - 1:
        fund = [(i, d - i) for i in range(d - p)]
        zero = [(j, d - j) for j in range(1, d - p)] + [(0, d + 1)]
        t_pi = block_exp(algebra.eta, 0, d, PI).real
        return [
            _defect_from_pairs(algebra, "fund", fund),
            _defect_from_pairs(algebra, "C_0", zero),
            _defect_from_pairs(algebra, "C'_0", zero, t_pi),
        ]
    fund = [(i + 1, d - i) for i in range(p + 1)] + [(0, d + 1)]
    return [_defect_from_pairs(algebra, "fund", fund)]


def _round_label(values: np.ndarray, residual: float) -> np.ndarray:
    if np.max(np.abs(values.imag)) > residual:
        raise ComputationError(f"root label {values} is not real")
    rounded = np.round(2 * values.real) / 2
    if np.max(np.abs(rounded - values.real)) > 1e-8:
        raise ComputationError(f"root label {values.real} is not on the half-integer lattice")
    return rounded


def epsilon_of(spec: CartanSubsetSpec, label: np.ndarray, generators: Optional[Tuple[complex, ...]] = None) -> complex:
    """Character value on a label (a, b), built from its values on (e1 +- e2)/2."""
    gens = spec.epsilon_generators if generators is None else generators
    if not gens:
        return 1.0
    a, b = float(np.real(label[0])), float(np.real(label[1]))
    plus, minus = a + b, a - b
    if abs(plus - round(plus)) > 1e-8 or abs(minus - round(minus)) > 1e-8:
        raise ValidationError(f"({a}, {b}) is not in the root lattice")
    return complex(gens[0] ** int(round(plus)) * gens[1] ** int(round(minus)))


def _functional_from_label(spec: CartanSubsetSpec, label: np.ndarray) -> np.ndarray:
    """Values on the c' basis of the functional whose values on the V_j are label."""
    return np.linalg.solve(spec.log_matrix.T, np.asarray(label, dtype=complex))


def xpower_for(spec: CartanSubsetSpec, label: Sequence[float]) -> XPower:
    label = np.asarray(label, dtype=complex)
    if label.shape != (spec.rank,):
        raise ValidationError(f"label needs {spec.rank} entries")
    functional = _functional_from_label(spec, label)
    phase = epsilon_of(spec, label) * np.exp(functional @ spec.log_shift)
    return XPower(phase=complex(phase), exponents=label)


def x_power(spec: CartanSubsetSpec, pt: ChiPoint, label: Sequence[float]) -> complex:
    return xpower_for(spec, label).value(pt.coords)


def hyperbolic_coeffs(
    spec: CartanSubsetSpec, pt: ChiPoint, label: Sequence[float], tol: float = 1e-12
) -> Tuple[complex, complex, complex]:
    """(coth, csch^2, csch^2 of the half root) at pt."""
    xpower = xpower_for(spec, label)
    x = xpower.value(pt.coords)
    if abs(x - 1 / x) <= tol * max(1.0, abs(x)):
        raise ValidationError(f"x^alpha = x^-alpha at {pt.coords.tolist()} for root {list(label)}")
    return xpower.coth(pt.coords), xpower.csch_sq(pt.coords), xpower.csch_sq_half(pt.coords)


def coordinate_gram(algebra: LieAlgebra, spec: CartanSubsetSpec) -> np.ndarray:
    return restricted_gram(algebra, spec.coordinate_basis)


def _t_action(algebra: LieAlgebra, spec: CartanSubsetSpec, residual: float) -> np.ndarray:
    """M with Ad(t)^{-1} Z_j = sum_k M[k, j] Z_k."""
    ad_t = algebra.adjoint_group_matrix(spec.t)
    back = np.linalg.solve(ad_t, spec.cprime.T)
    coeffs, *_ = lstsq(spec.cprime.T, back)
    if np.max(np.abs(spec.cprime.T @ coeffs - back)) > residual:
        raise ComputationError(f"Ad(t) does not preserve c' for {spec.label}")
    return coeffs


def _build_phi(algebra: LieAlgebra, spec: CartanSubsetSpec) -> np.ndarray:
    decomp = spec.decomposition
    columns = []
    scales = []
    for root, eps in zip(decomp.roots, spec.epsilons):
        columns.extend(root.basis)
        scales.extend([1 / eps] * root.multiplicity)
    zero_rows = [decomp.cprime]
    if decomp.mprime.size:
        zero_rows.append(decomp.mprime.astype(complex))
    for rows in zero_rows:
        columns.extend(rows)
        scales.extend([1.0] * rows.shape[0])
    frame = np.array(columns).T
    ad_t = algebra.adjoint_group_matrix(spec.t)
    return ad_t @ frame @ np.diag(scales) @ np.linalg.inv(frame)


def build_spec(
    algebra: LieAlgebra, spec: CartanSubsetSpec, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> CartanSubsetSpec:
    """Compute root data, x-powers, epsilons, the t-action and phi for a tabulated spec."""
    spec.decomposition = root_decomposition(
        algebra,
        spec.cprime,
        seed=tolerances.seed,
        cluster_gap=tolerances.cluster_gap,
        residual=tolerances.residual,
    )
    gram = coordinate_gram(algebra, spec)
    spec.metric = np.linalg.inv(gram)
    if not spec.exists:
        logger.info("cartan %s: root data only", spec.label)
        return spec

    spec.labels = []
    for root in spec.decomposition.roots:
        raw = spec.log_matrix.T @ root.functional
        label = _round_label(raw, 1e-8) if spec.pair_kind is PairKind.FOURPOINT else raw.real
        root.label = label
        spec.labels.append(label)
    spec.epsilons = [epsilon_of(spec, label) for label in spec.labels]
    spec.xpowers = [
        XPower(phase=complex(eps * np.exp(root.functional @ spec.log_shift)), exponents=label.astype(complex))
        for root, eps, label in zip(spec.decomposition.roots, spec.epsilons, spec.labels)
    ]

    m = _t_action(algebra, spec, tolerances.residual)
    spec.t_action = []
    for root in spec.decomposition.roots:
        image = m.T @ root.functional
        try:
            spec.t_action.append(spec.decomposition.index_of(image))
        except ValidationError as exc:
            raise ComputationError(f"t does not permute the roots of {spec.label}") from exc
    spec.phi = _build_phi(algebra, spec)
    logger.info("cartan %s: %d roots, rank %d", spec.label, len(spec.labels), spec.rank)
    return spec


def catalog_for(algebra: LieAlgebra, tolerances: Tolerances = DEFAULT_TOLERANCES) -> List[CartanSubsetSpec]:
    sig = algebra.signature
    if algebra.pair_kind is PairKind.DEFECT:
        raw = _defect_specs(algebra)
    elif sig.q == 0:
        raw = [euclidean_spec(algebra)]
    elif sig.q == 1:
        raw = _lorentzian_specs(algebra)
    else:
        raise SignatureError(f"Cartan subsets for q = {sig.q} are not cataloged (only q <= 1)")
    return [build_spec(algebra, spec, tolerances) for spec in raw]


def catalog(
    sig: Signature,
    pair_kind: PairKind = PairKind.FOURPOINT,
    p_defect: Optional[int] = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> List[CartanSubsetSpec]:
    if pair_kind is PairKind.FOURPOINT and sig.q >= 2:
        raise SignatureError(f"Cartan subsets for q = {sig.q} are not cataloged (only q <= 1)")
    algebra = build_algebra(sig, pair_kind=pair_kind, p_defect=p_defect)
    return catalog_for(algebra, tolerances)


def find_spec(specs: Sequence[CartanSubsetSpec], label: str) -> CartanSubsetSpec:
    wanted = canonical_label(label)
    for spec in specs:
        if spec.label == wanted:
            return spec
    raise ValidationError(f"no Cartan subset labelled {label!r}; have {[s.label for s in specs]}")


def in_closure(spec: CartanSubsetSpec, chi: Sequence[complex], tol: float = 1e-9) -> bool:
    if spec.region == "real":
        coeffs = spec.cprime_coefficients(chi)
        return bool(np.max(np.abs(coeffs.imag), initial=0.0) <= tol)
    return in_y(spec.region, chi, tol, closed=True)


def log_element(spec: CartanSubsetSpec, chi: Sequence[complex]) -> np.ndarray:
    """X in c'_C with x = exp(X) t, in F coordinates."""
    return spec.cprime_coefficients(chi) @ spec.cprime


def parametrize(
    algebra: LieAlgebra, spec: CartanSubsetSpec, pt: ChiPoint, check_closure: bool = True, tol: float = 1e-9
) -> np.ndarray:
    if check_closure and not in_closure(spec, pt.coords, tol):
        raise ValidationError(f"point {pt.coords.tolist()} is outside the closed region of {spec.label}")
    x = expm(algebra.to_matrix(log_element(spec, pt.coords))) @ spec.t
    if check_closure:
        if np.max(np.abs(x.imag)) > 1e-10 * max(1.0, np.max(np.abs(x))):
            raise ComputationError(f"parametrization of {spec.label} left the real group")
        return x.real
    return x


def verify_spec(algebra: LieAlgebra, spec: CartanSubsetSpec) -> Dict[str, float]:
    """Residuals of the Ad(t) decomposition, phi and epsilon laws."""
    decomp = spec.decomposition
    if decomp is None or spec.phi is None:
        raise ValidationError(f"spec {spec.label} has not been built")
    phi = spec.phi
    gram = np.diag(algebra.gram)
    sigma = np.diag(algebra.sigma.signs).astype(complex)
    ad_t = algebra.adjoint_group_matrix(spec.t)
    ads = [algebra.adjoint_matrix(z) for z in decomp.cprime]
    m = _t_action(algebra, spec, 1.0)

    ad_t_residual = 0.0
    root_map = 0.0
    for idx, (root, eps) in enumerate(zip(decomp.roots, spec.epsilons)):
        image = decomp.roots[spec.t_action[idx]].functional
        for e in root.basis:
            ad_t_residual = max(ad_t_residual, float(np.max(np.abs(ad_t @ e - eps * (phi @ e)))))
            mapped = phi @ e
            for ad, value in zip(ads, image):
                root_map = max(root_map, float(np.max(np.abs(ad @ mapped - value * mapped))))
        expected = m.T @ root.functional
        root_map = max(root_map, float(np.max(np.abs(expected - image))))

    t_invariance = 0.0
    inverse = 0.0
    additive = 0.0
    for idx, eps in enumerate(spec.epsilons):
        t_invariance = max(t_invariance, abs(spec.epsilons[spec.t_action[idx]] - eps))
        inverse = max(inverse, abs(eps * spec.epsilons[decomp.negative_index(idx)] - 1))
        for jdx, other in enumerate(spec.epsilons):
            total = decomp.roots[idx].functional + decomp.roots[jdx].functional
            try:
                kdx = decomp.index_of(total)
            except ValidationError:
                continue
            additive = max(additive, abs(eps * other - spec.epsilons[kdx]))

    return {
        "ad_t_decomposition": ad_t_residual,
        "phi_involutive": float(np.max(np.abs(phi @ phi - np.eye(algebra.dim)))),
        "phi_orthogonal": float(np.max(np.abs(phi.T @ gram @ phi - gram))),
        "phi_sigma": float(np.max(np.abs(phi @ sigma - sigma @ phi))),
        "phi_root_map": root_map,
        "epsilon_t_invariance": float(t_invariance),
        "epsilon_inverse": float(inverse),
        "epsilon_additive": float(additive),
    }


def stated_epsilon_residuals(spec: CartanSubsetSpec) -> Dict[str, float]:
    """The epsilon laws evaluated with the literally stated generator values."""
    if spec.epsilon_stated is None or not spec.labels:
        return {}
    stated = [epsilon_of(spec, label, spec.epsilon_stated) for label in spec.labels]
    t_invariance = max(abs(stated[spec.t_action[i]] - e) for i, e in enumerate(stated))
    return {"epsilon_t_invariance": float(t_invariance)}


def corner_residual(algebra: LieAlgebra, spec: CartanSubsetSpec, pt: ChiPoint) -> float:
    """|(u, v)(parametrize(pt)) - f(pt)| through the corner formula."""
    from mscasimir.coords import cross_ratios_from_corners, f_map

    x = parametrize(algebra, spec, pt)
    got = np.array(cross_ratios_from_corners(x))
    want = np.array(f_map(pt.coords))
    return float(np.max(np.abs(got - want)))


def random_region_point(spec: CartanSubsetSpec, rng: np.random.Generator) -> ChiPoint:
    """A random point in the open region Y_I of the Cartan subset."""
    region = spec.region
    a, b = np.sort(rng.uniform(0.15, 2.5, size=2))
    if b - a < 0.1:
        b = a + 0.3
    c = rng.uniform(0.15, PI - 0.15)
    if region == "empty":
        lo, hi = np.sort(rng.uniform(0.15, PI - 0.15, size=2))
        if hi - lo < 0.1:
            lo, hi = 0.5, 2.0
        return ChiPoint.of(1j * lo, 1j * hi)
    if region == "0":
        return ChiPoint.of(1j * c, a + 1j * PI)
    if region == "1":
        return ChiPoint.of(-a + 1j * c, a + 1j * c)
    if region == "2":
        return ChiPoint.of(a, 1j * c)
    if region == "01":
        return ChiPoint.of(a + 1j * PI, b + 1j * PI)
    if region == "02":
        return ChiPoint.of(a, b + 1j * PI)
    if region == "12":
        return ChiPoint.of(a, b)
    if region == "real":
        magnitudes = rng.uniform(0.2, 0.6, size=spec.rank) + np.arange(1, spec.rank + 1) * 0.7
        return ChiPoint(coords=_real_locus(spec, magnitudes))
    raise ValidationError(f"no sampler for region {region!r}")


def _real_locus(spec: CartanSubsetSpec, magnitudes: np.ndarray) -> np.ndarray:
    """chi whose c' coefficients are the given real magnitudes."""
    return np.linalg.solve(spec.log_matrix, magnitudes.astype(complex) - spec.log_shift)
