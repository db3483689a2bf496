from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import null_space

from mscasimir.cartan import parametrize
from mscasimir.config import DEFAULT_TOLERANCES, Tolerances
from mscasimir.errors import ComputationError, ConfigError, ValidationError
from mscasimir.liealg import LieAlgebra
from mscasimir.models import (
    Bimodule,
    BimoduleKind,
    CartanSubsetSpec,
    ChiPoint,
    FirstOrderTerm,
    PairKind,
    PotentialKind,
    RadialOperator,
    TensorOperator,
    ZeroOrderTerm,
)
from mscasimir.rootspace import dual_element

logger = logging.getLogger(__name__)

ODD_TOL = 1e-8

SPIN_HALF: Dict[Tuple[int, int], np.ndarray] = {
    (1, 2): 0.5j * np.array([[0, 1], [1, 0]], dtype=complex),
    (1, 3): 0.5 * np.array([[0, 1], [-1, 0]], dtype=complex),
    (2, 3): 0.5j * np.array([[1, 0], [0, -1]], dtype=complex),
}


def scalar_bimodule(algebra: LieAlgebra, alpha: float, beta: float) -> Bimodule:
    """One-dimensional bimodule on which F_{0,d+1} acts by -alpha from the left and -beta from the right."""
    if algebra.pair_kind is not PairKind.FOURPOINT:
        raise ValidationError("the scalar bimodule is defined for the four-point pair")
    a = algebra.index[(0, algebra.signature.d + 1)]
    return Bimodule(
        dim=1,
        left={a: np.array([[-alpha]], dtype=complex)},
        right={a: np.array([[-beta]], dtype=complex)},
        kind=BimoduleKind.SCALAR,
        params={"alpha": float(alpha), "beta": float(beta)},
    )


def trivial_bimodule() -> Bimodule:
    return Bimodule(dim=1, left={}, right={}, kind=BimoduleKind.TRIVIAL)


def spinor_bimodule(algebra: LieAlgebra, alpha: float, beta: float) -> Bimodule:
    """End(C^2) for spin one half of so(3), with the dilatation weighted by -2 alpha and -2 beta."""
    sig = algebra.signature
    if algebra.pair_kind is not PairKind.FOURPOINT or (sig.p, sig.q) != (3, 0):
        raise ValidationError("the spinor bimodule is defined for so(4,1) only")
    eye = np.eye(2, dtype=complex)
    left: Dict[int, np.ndarray] = {}
    right: Dict[int, np.ndarray] = {}
    for pair, mat in SPIN_HALF.items():
        a = algebra.index[pair]
        left[a] = np.kron(mat, eye)
        right[a] = np.kron(eye, mat.T)
    dil = algebra.index[(0, 4)]
    left[dil] = -2 * alpha * np.eye(4, dtype=complex)
    right[dil] = -2 * beta * np.eye(4, dtype=complex)
    return Bimodule(
        dim=4, left=left, right=right, kind=BimoduleKind.SPINOR, params={"alpha": float(alpha), "beta": float(beta)}
    )


def defining_bimodule(algebra: LieAlgebra) -> Bimodule:
    """End(R^{d+2}) restricted to h, left multiplication and right multiplication."""
    n = algebra.n
    eye = np.eye(n, dtype=complex)
    left: Dict[int, np.ndarray] = {}
    right: Dict[int, np.ndarray] = {}
    for a in np.flatnonzero(algebra.sigma.signs == 1):
        rho = algebra.basis_matrices[a].astype(complex)
        left[int(a)] = np.kron(rho, eye)
        right[int(a)] = np.kron(eye, rho.T)
    return Bimodule(dim=n * n, left=left, right=right, kind=BimoduleKind.DEFINING)


def _matrix_from_json(data: object, dim: int, where: str) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.shape == (dim, dim):
        return arr.astype(complex)
    if arr.shape == (dim, dim, 2):
        return arr[..., 0] + 1j * arr[..., 1]
    raise ConfigError(f"{where}: expected a {dim}x{dim} matrix, got shape {arr.shape}")


def load_bimodule(algebra: LieAlgebra, path: str) -> Bimodule:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"bimodule file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed bimodule file {path}: {exc}") from exc
    if not isinstance(payload, dict) or "dim" not in payload:
        raise ConfigError("bimodule JSON must be an object with dim, left and right")

    dim = int(payload["dim"])
    actions: Dict[str, Dict[int, np.ndarray]] = {"left": {}, "right": {}}
    for side in actions:
        for label, data in payload.get(side, {}).items():
            try:
                a = algebra.parse_label(label)
            except ValidationError as exc:
                raise ConfigError(f"{side}: {exc}") from exc
            if algebra.sigma.signs[a] != 1:
                raise ValidationError(f"{label} is not in the fixed-point algebra h")
            actions[side][a] = _matrix_from_json(data, dim, f"{side}[{label}]")
    return Bimodule(dim=dim, left=actions["left"], right=actions["right"], kind=BimoduleKind.CUSTOM)


def _act(algebra: LieAlgebra, action: Dict[int, np.ndarray], coeffs: np.ndarray, dim: int) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(coeffs), initial=0.0)))
    odd = np.abs(coeffs[algebra.sigma.signs == -1])
    if odd.size and np.max(odd) > ODD_TOL * scale:
        raise ValidationError("element does not lie in h")
    out = np.zeros((dim, dim), dtype=complex)
    for a, mat in action.items():
        if coeffs[a] != 0:
            out += coeffs[a] * mat
    return out


def left_of(algebra: LieAlgebra, w: Bimodule, coeffs: np.ndarray) -> np.ndarray:
    return _act(algebra, w.left, coeffs, w.dim)


def right_of(algebra: LieAlgebra, w: Bimodule, coeffs: np.ndarray) -> np.ndarray:
    return _act(algebra, w.right, coeffs, w.dim)


def check_bimodule(algebra: LieAlgebra, w: Bimodule) -> Dict[str, float]:
    """Homomorphism, anti-homomorphism and commutation residuals on all generator pairs of h."""
    h = [int(a) for a in np.flatnonzero(algebra.sigma.signs == 1)]
    eye = np.eye(algebra.dim)
    left_hom = right_anti = commute = 0.0
    for a in h:
        la, ra = left_of(algebra, w, eye[a]), right_of(algebra, w, eye[a])
        for b in h:
            lb, rb = left_of(algebra, w, eye[b]), right_of(algebra, w, eye[b])
            br = algebra.bracket(eye[a], eye[b])
            left_hom = max(left_hom, float(np.max(np.abs(left_of(algebra, w, br) - (la @ lb - lb @ la)))))
            right_anti = max(right_anti, float(np.max(np.abs(right_of(algebra, w, br) + (ra @ rb - rb @ ra)))))
            commute = max(commute, float(np.max(np.abs(la @ rb - rb @ la))))
    return {"left_hom": left_hom, "right_antihom": right_anti, "commute": commute}


def validate_bimodule(algebra: LieAlgebra, w: Bimodule, tol: float = 1e-9) -> None:
    residuals = check_bimodule(algebra, w)
    bad = {k: v for k, v in residuals.items() if v > tol}
    if bad:
        raise ValidationError(f"not an h-bimodule: {bad}")


def _h_vectors(algebra: LieAlgebra, basis: np.ndarray) -> np.ndarray:
    return np.array([e + algebra.sigma.apply(e) for e in basis])


def build_A_operators(algebra: LieAlgebra, spec: CartanSubsetSpec) -> List[TensorOperator]:
    """A_alpha for every root, indexed like the decomposition's roots."""
    return [
        TensorOperator(summands=[(h, h, 1.0) for h in _h_vectors(algebra, root.basis)])
        for root in spec.decomposition.roots
    ]


def rotated_A(algebra: LieAlgebra, spec: CartanSubsetSpec, idx: int, rng: np.random.Generator) -> TensorOperator:
    """A_alpha rebuilt from a randomly rotated orthonormal basis of the same root space."""
    basis = spec.decomposition.roots[idx].basis
    rotation, _ = np.linalg.qr(rng.normal(size=(basis.shape[0], basis.shape[0])))
    return TensorOperator(summands=[(h, h, 1.0) for h in _h_vectors(algebra, rotation @ basis)])


def a_operator_residuals(algebra: LieAlgebra, spec: CartanSubsetSpec, seed: int = 0) -> Dict[str, float]:
    rep = algebra.defining_rep()
    ops = build_A_operators(algebra, spec)
    decomp = spec.decomposition
    rng = np.random.default_rng(seed)
    negation = covariance = swap = rotated = 0.0
    for idx, op in enumerate(ops):
        image = op.image(rep)
        negation = max(negation, float(np.max(np.abs(image - ops[decomp.negative_index(idx)].image(rep)))))
        swap = max(swap, float(np.max(np.abs(image - op.swapped().image(rep)))))
        moved = TensorOperator(summands=[(spec.phi @ u, spec.phi @ v, w) for u, v, w in op.summands])
        covariance = max(covariance, float(np.max(np.abs(moved.image(rep) - ops[spec.t_action[idx]].image(rep)))))
        rotated = max(rotated, float(np.max(np.abs(image - rotated_A(algebra, spec, idx, rng).image(rep)))))
    return {"negation": negation, "t_covariance": covariance, "swap": swap, "basis_independence": rotated}


def m_prime_invariants(
    algebra: LieAlgebra, spec: CartanSubsetSpec, w: Bimodule, kernel_rel: float = 1e-9
) -> np.ndarray:
    """Orthonormal columns spanning {v : L(Ad(t)Y) v = R(Y) v for Y in m'}."""
    mprime = spec.decomposition.mprime
    if mprime.size == 0:
        return np.eye(w.dim, dtype=complex)
    ad_t = algebra.adjoint_group_matrix(spec.t)
    blocks = [left_of(algebra, w, ad_t @ y) - right_of(algebra, w, y.astype(complex)) for y in mprime]
    stacked = np.vstack(blocks)
    if not np.any(stacked):
        return np.eye(w.dim, dtype=complex)
    return null_space(stacked, rcond=kernel_rel)


def _restrict(mat: np.ndarray, frame: np.ndarray, tol: float, what: str) -> np.ndarray:
    small = frame.conj().T @ mat @ frame
    leak = np.max(np.abs(mat @ frame - frame @ small), initial=0.0)
    if leak > tol * max(1.0, float(np.max(np.abs(mat), initial=0.0))):
        raise ComputationError(f"{what} does not preserve the m'-invariants (leak {leak:.2e})")
    return small


def _k_l_pair(
    algebra: LieAlgebra, w: Bimodule, hs: np.ndarray, phi_hs: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    dim = w.dim
    ll = np.zeros((dim, dim), dtype=complex)
    rr = np.zeros((dim, dim), dtype=complex)
    lr = np.zeros((dim, dim), dtype=complex)
    for h, ph in zip(hs, phi_hs):
        left = left_of(algebra, w, h)
        right = right_of(algebra, w, ph)
        ll += left @ left
        rr += right @ right
        lr += left @ right
    return (ll + rr + 2 * lr) / 4, -lr / 4


def K_L_matrices(
    algebra: LieAlgebra,
    spec: CartanSubsetSpec,
    w: Bimodule,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> Dict[Tuple[float, ...], Tuple[np.ndarray, np.ndarray]]:
    """Per root label: the csch^2 coefficient K and the half-root coefficient L on W^{m'}."""
    _require_built(spec)
    frame = m_prime_invariants(algebra, spec, w, tolerances.kernel_rel)
    out: Dict[Tuple[float, ...], Tuple[np.ndarray, np.ndarray]] = {}
    for root, label in zip(spec.decomposition.roots, spec.labels):
        hs = _h_vectors(algebra, root.basis)
        k, l = _k_l_pair(algebra, w, hs, hs @ spec.phi.T)
        key = tuple(float(x) for x in np.real(label))
        out[key] = (
            _restrict(k, frame, tolerances.residual * 100, f"K for root {key}"),
            _restrict(l, frame, tolerances.residual * 100, f"L for root {key}"),
        )
    return out


def _require_built(spec: CartanSubsetSpec) -> None:
    if not spec.exists:
        raise ValidationError(f"Cartan subset {spec.label} does not exist for this signature")
    if spec.decomposition is None or spec.phi is None:
        raise ValidationError(f"Cartan subset {spec.label} has not been built")


def mprime_casimir(algebra: LieAlgebra, spec: CartanSubsetSpec, w: Bimodule) -> np.ndarray:
    mprime = spec.decomposition.mprime.astype(complex)
    if mprime.size == 0:
        return np.zeros((w.dim, w.dim), dtype=complex)
    gram = np.array([[algebra.form_B(a, b) for b in mprime] for a in mprime])
    inv = np.linalg.inv(gram)
    lefts = [left_of(algebra, w, m) for m in mprime]
    return sum(inv[i, j] * lefts[i] @ lefts[j] for i in range(len(lefts)) for j in range(len(lefts)))


def radial_casimir(
    algebra: LieAlgebra,
    spec: CartanSubsetSpec,
    w: Bimodule,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> RadialOperator:
    _require_built(spec)
    frame = m_prime_invariants(algebra, spec, w, tolerances.kernel_rel)
    limit = tolerances.residual * 100
    kl = K_L_matrices(algebra, spec, w, tolerances)

    first: List[FirstOrderTerm] = []
    zero: List[ZeroOrderTerm] = []
    for root, label, xpower in zip(spec.decomposition.roots, spec.labels, spec.xpowers):
        key = tuple(float(x) for x in np.real(label))
        first.append(
            FirstOrderTerm(
                root=key,
                weight=root.multiplicity / 2,
                direction=spec.metric @ np.asarray(label, dtype=complex),
                xpower=xpower,
            )
        )
        k, l = kl[key]
        if np.max(np.abs(k)) > tolerances.residual:
            zero.append(ZeroOrderTerm(root=key, kind=PotentialKind.FULL, matrix=k, xpower=xpower))
        if np.max(np.abs(l)) > tolerances.residual:
            zero.append(ZeroOrderTerm(root=key, kind=PotentialKind.HALF, matrix=l, xpower=xpower))

    constant = _restrict(mprime_casimir(algebra, spec, w), frame, limit, "Omega_m'")
    logger.info(
        "radial part for %s on %s bimodule: %d first-order and %d zero-order terms, W^m' dim %d",
        spec.label,
        w.kind.value,
        len(first),
        len(zero),
        frame.shape[1],
    )
    return RadialOperator(second_order=spec.metric, first_order=first, zero_order=zero, constant=constant)


def left_right_agree(
    algebra: LieAlgebra, spec: CartanSubsetSpec, w: Bimodule, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> float:
    """Compare K, L built from (1 x phi)A_alpha with those built from (phi x 1)A_{t alpha}."""
    _require_built(spec)
    worst = 0.0
    roots = spec.decomposition.roots
    for idx, root in enumerate(roots):
        hs = _h_vectors(algebra, root.basis)
        k, l = _k_l_pair(algebra, w, hs, hs @ spec.phi.T)
        image = _h_vectors(algebra, roots[spec.t_action[idx]].basis)
        dim = w.dim
        ll = sum((left_of(algebra, w, h) @ left_of(algebra, w, h) for h in hs), np.zeros((dim, dim), dtype=complex))
        rr = sum((right_of(algebra, w, h) @ right_of(algebra, w, h) for h in image), np.zeros((dim, dim), dtype=complex))
        lr = sum(
            (left_of(algebra, w, spec.phi @ h) @ right_of(algebra, w, h) for h in image),
            np.zeros((dim, dim), dtype=complex),
        )
        worst = max(worst, float(np.max(np.abs(k - (ll + rr + 2 * lr) / 4))), float(np.max(np.abs(l + lr / 4))))
    return worst


def epsilon_consistency(algebra: LieAlgebra, spec: CartanSubsetSpec, w: Bimodule) -> float:
    """K, L recomputed with phi replaced by Ad(t)/epsilon on each root space."""
    _require_built(spec)
    ad_t = algebra.adjoint_group_matrix(spec.t)
    roots = spec.decomposition.roots
    worst = 0.0
    for idx, root in enumerate(roots):
        neg = spec.decomposition.negative_index(idx)
        hs = _h_vectors(algebra, root.basis)
        phi_hs = np.array(
            [
                ad_t @ e / spec.epsilons[idx] + ad_t @ algebra.sigma.apply(e) / spec.epsilons[neg]
                for e in root.basis
            ]
        )
        k, l = _k_l_pair(algebra, w, hs, hs @ spec.phi.T)
        k2, l2 = _k_l_pair(algebra, w, hs, phi_hs)
        worst = max(worst, float(np.max(np.abs(k - k2))), float(np.max(np.abs(l - l2))))
    return worst


def _representation(algebra: LieAlgebra, rep: str) -> Tuple[np.ndarray, Callable[[np.ndarray], np.ndarray]]:
    if rep == "defining":
        return algebra.defining_rep(), lambda g: np.asarray(g, dtype=complex)
    if rep == "adjoint":
        return algebra.adjoint_rep(), algebra.adjoint_group_matrix
    raise ValidationError(f"unknown representation {rep!r}")


def _image(rep: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    return np.tensordot(np.asarray(coeffs, dtype=complex), rep, axes=1)


def casimir_decomposition_rhs(
    algebra: LieAlgebra, spec: CartanSubsetSpec, pt: ChiPoint, rep: str = "defining"
) -> np.ndarray:
    """Right-hand side of the Casimir decomposition at x = exp(X) t in a representation."""
    _require_built(spec)
    matrices, group = _representation(algebra, rep)
    chi = pt.coords
    x = group(parametrize(algebra, spec, pt, check_closure=False))
    x_inv = np.linalg.inv(x)
    decomp = spec.decomposition

    vbasis = spec.coordinate_basis
    images_v = [_image(matrices, v) for v in vbasis]
    total = sum(
        spec.metric[j, k] * images_v[j] @ images_v[k] for j in range(len(vbasis)) for k in range(len(vbasis))
    )
    if decomp.mprime.size:
        mprime = decomp.mprime.astype(complex)
        gram = np.array([[algebra.form_B(a, b) for b in mprime] for a in mprime])
        inv = np.linalg.inv(gram)
        images_m = [_image(matrices, m) for m in mprime]
        total = total + sum(
            inv[i, j] * images_m[i] @ images_m[j] for i in range(len(mprime)) for j in range(len(mprime))
        )

    for root, xpower in zip(decomp.roots, spec.xpowers):
        xa = xpower.value(chi)
        delta = xa - 1 / xa
        if abs(delta) < 1e-12:
            raise ValidationError(f"point {chi.tolist()} is singular for root {root.functional}")
        coth = (xa + 1 / xa) / delta
        total = total + (root.multiplicity / 2) * coth * _image(matrices, dual_element(algebra, decomp, root.functional))
        for h in _h_vectors(algebra, root.basis):
            rh = _image(matrices, h)
            hat = x @ _image(matrices, spec.phi @ h) @ x_inv
            total = total + (rh @ rh + hat @ hat - (xa + 1 / xa) * rh @ hat) / delta**2
    return total


def oracle_check(algebra: LieAlgebra, spec: CartanSubsetSpec, pt: ChiPoint, rep: str = "defining") -> float:
    matrices, _ = _representation(algebra, rep)
    lhs = algebra.casimir_in_rep(matrices)
    rhs = casimir_decomposition_rhs(algebra, spec, pt, rep)
    return float(np.max(np.abs(lhs - rhs)))


def commutator_residual(algebra: LieAlgebra, spec: CartanSubsetSpec) -> float:
    """max |[E, sigma E] + B_sigma(E, E) C_alpha| in the defining representation."""
    decomp = spec.decomposition
    worst = 0.0
    for root in decomp.roots:
        c_alpha = algebra.to_matrix(dual_element(algebra, decomp, root.functional))
        for e in root.basis:
            se = algebra.sigma.apply(e)
            me, mse = algebra.to_matrix(e), algebra.to_matrix(se)
            norm = algebra.form_Bsigma(e, e)
            worst = max(worst, float(np.max(np.abs(me @ mse - mse @ me + norm * c_alpha))))
    return worst


def zero_order_commutes(
    algebra: LieAlgebra, spec: CartanSubsetSpec, w: Bimodule, op: RadialOperator, kernel_rel: float = 1e-9
) -> float:
    """Zero-order matrices against the residual m' action restricted to W^{m'}."""
    mprime = spec.decomposition.mprime
    if mprime.size == 0:
        return 0.0
    frame = m_prime_invariants(algebra, spec, w, kernel_rel)
    worst = 0.0
    for y in mprime.astype(complex):
        action = frame.conj().T @ right_of(algebra, w, y) @ frame
        for term in op.zero_order:
            worst = max(worst, float(np.max(np.abs(term.matrix @ action - action @ term.matrix))))
    return worst
