from __future__ import annotations

import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import eigvals, lstsq, null_space, qr, svd

from mscasimir.errors import ComputationError, ValidationError
from mscasimir.liealg import Involution, LieAlgebra
from mscasimir.models import CartanSubsetSpec, RootDatum, RootDecomposition

logger = logging.getLogger(__name__)

ZERO_TOL = 1e-9


def _clean(values: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    values = np.asarray(values, dtype=complex)
    re = np.where(np.abs(values.real) < tol, 0.0, values.real)
    im = np.where(np.abs(values.imag) < tol, 0.0, values.imag)
    return re + 1j * im


def principal_sqrt(value: complex, tol: float = 1e-12) -> complex:
    """Square root with Re >= 0, and Im >= 0 when Re vanishes."""
    root = complex(np.sqrt(complex(value)))
    if root.real < -tol * abs(root) or (abs(root.real) <= tol * abs(root) and root.imag < 0):
        root = -root
    return root


def is_positive(functional: np.ndarray, tol: float = ZERO_TOL) -> bool:
    for value in functional:
        if abs(value.real) > tol:
            return value.real > 0
        if abs(value.imag) > tol:
            return value.imag > 0
    return False


def _cluster(values: np.ndarray, gap: float) -> List[Tuple[complex, int]]:
    order = sorted(range(len(values)), key=lambda i: (values[i].real, values[i].imag))
    clusters: List[List[complex]] = []
    for i in order:
        for members in clusters:
            if abs(values[i] - members[0]) < gap:
                members.append(values[i])
                break
        else:
            clusters.append([values[i]])
    centres = [(complex(np.mean(members)), len(members)) for members in clusters]
    for a in range(len(centres)):
        for b in range(a + 1, len(centres)):
            distance = abs(centres[a][0] - centres[b][0])
            if distance < 10 * gap:
                raise ComputationError(
                    f"ambiguous eigenvalue clustering: centres {centres[a][0]:.3e} and "
                    f"{centres[b][0]:.3e} are {distance:.3e} apart with gap {gap:.1e}"
                )
    return centres


def _canonical_rows(vectors: np.ndarray) -> np.ndarray:
    """Rows spanning the same space, normalized to the identity on pivot columns."""
    rows = np.asarray(vectors, dtype=complex)
    _, _, piv = qr(rows, pivoting=True)
    pivots = piv[: rows.shape[0]]
    return np.linalg.solve(rows[:, pivots], rows)


def _orthonormalize(algebra: LieAlgebra, inv: Involution, rows: np.ndarray) -> np.ndarray:
    """Gram-Schmidt for the bilinear form B_inv(X, Y) = -B(X, inv Y)."""

    def form(u: np.ndarray, v: np.ndarray) -> complex:
        return -algebra.form_B(u, inv.apply(v))

    pending = [row.copy() for row in rows]
    basis: List[np.ndarray] = []
    while pending:
        norms = [abs(form(v, v)) for v in pending]
        pick = int(np.argmax(norms))
        if norms[pick] < ZERO_TOL:
            if len(pending) == 1:
                raise ComputationError("restricted form is degenerate on a root space")
            cross = [abs(form(pending[0], v)) for v in pending[1:]]
            j = int(np.argmax(cross)) + 1
            if cross[j - 1] < ZERO_TOL:
                raise ComputationError("restricted form is degenerate on a root space")
            pending[0] = pending[0] + pending[j]
            continue
        vec = pending.pop(pick)
        vec = vec / principal_sqrt(form(vec, vec))
        basis.append(vec)
        pending = [v - form(v, vec) * vec for v in pending]
    return np.array(basis)


def centralizer(algebra: LieAlgebra, subspace: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Real combinations of the basis rows commuting with every row of subspace."""
    blocks = []
    for z in subspace:
        image = algebra.adjoint_matrix(z) @ np.asarray(basis).T
        blocks.extend([image.real, image.imag])
    if not blocks or basis.shape[0] == 0:
        return np.zeros((0, algebra.dim))
    kernel = null_space(np.vstack(blocks))
    return _clean((kernel.T @ np.asarray(basis)).real).real


def root_decomposition(
    algebra: LieAlgebra,
    cprime: np.ndarray,
    involution: str = "sigma",
    seed: int = 0,
    rng: Optional[np.random.Generator] = None,
    cluster_gap: float = 1e-7,
    residual: float = 1e-9,
    require_cartan: bool = True,
) -> RootDecomposition:
    cprime = np.atleast_2d(np.asarray(cprime, dtype=complex))
    inv = algebra.involution(involution)
    rank = cprime.shape[0]
    if np.linalg.matrix_rank(cprime, tol=ZERO_TOL) < rank:
        raise ValidationError("c' basis is linearly dependent")

    for i in range(rank):
        for j in range(i + 1, rank):
            if np.max(np.abs(algebra.bracket(cprime[i], cprime[j]))) > residual:
                raise ValidationError("c' basis is not commutative")
    theta_images = np.array([algebra.theta.apply(z) for z in cprime])
    coeffs, *_ = lstsq(cprime.T, theta_images.T)
    if np.max(np.abs(cprime.T @ coeffs - theta_images.T)) > residual:
        raise ValidationError("span of c' is not theta-stable")
    if np.max(np.abs(np.array([inv.apply(z) for z in cprime]) + cprime)) > residual:
        raise ValidationError(f"c' is not contained in the -1 eigenspace of {involution}")

    ads = [algebra.adjoint_matrix(z) for z in cprime]
    rng = rng if rng is not None else np.random.default_rng(seed)
    weights = rng.integers(1, 1000, size=rank) / 997
    generic = sum(w * ad for w, ad in zip(weights, ads))
    centres = _cluster(eigvals(generic), cluster_gap)

    zero_block: Optional[np.ndarray] = None
    spaces: List[Tuple[np.ndarray, np.ndarray]] = []
    for centre, size in centres:
        _, _, vh = svd(generic - centre * np.eye(algebra.dim))
        vecs = vh[-size:].conj()
        functional = np.array([np.trace(vecs.conj() @ ad @ vecs.T) / size for ad in ads])
        functional = _clean(functional)
        for ad, value in zip(ads, functional):
            worst = np.max(np.abs(ad @ vecs.T - value * vecs.T))
            if worst > residual * max(1.0, np.max(np.abs(ad))):
                raise ComputationError(f"eigenvector residual {worst:.2e} exceeds tolerance for root {functional}")
        if np.max(np.abs(functional)) < ZERO_TOL:
            zero_block = vecs
        else:
            spaces.append((functional, vecs))

    if zero_block is None:
        raise ComputationError("no zero eigenspace found")

    if require_cartan:
        h_basis = algebra.eigenspace_split(inv, 1)
        mprime = centralizer(algebra, cprime, h_basis)
        if zero_block.shape[0] != rank + mprime.shape[0]:
            raise ComputationError(
                f"zero space has dimension {zero_block.shape[0]}, expected {rank} + {mprime.shape[0]}"
            )
        even = zero_block[:, inv.signs == 1]
        odd = zero_block[:, inv.signs == -1]
        if np.linalg.matrix_rank(even, tol=1e-8) != mprime.shape[0] or np.linalg.matrix_rank(odd, tol=1e-8) != rank:
            raise ComputationError("zero space does not split as c' plus its centralizer in h")
    else:
        # c' need not be maximal here: keep the full centralizer minus the c' directions
        full = centralizer(algebra, cprime, np.eye(algebra.dim))
        complement = null_space(cprime.real @ full.T)
        mprime = _clean(complement.T @ full).real

    positives = [(f, v) for f, v in spaces if is_positive(f)]
    negatives = [(f, v) for f, v in spaces if not is_positive(f)]
    positives.sort(key=lambda item: tuple((round(x.real, 9), round(x.imag, 9)) for x in item[0]), reverse=True)

    plus: List[RootDatum] = []
    minus: List[RootDatum] = []
    for functional, vecs in positives:
        partner = next((v for f, v in negatives if np.max(np.abs(f + functional)) < 1e-7), None)
        if partner is None or partner.shape[0] != vecs.shape[0]:
            raise ComputationError(f"root {functional} has no matching negative root space")
        basis = _orthonormalize(algebra, inv, _canonical_rows(vecs))
        plus.append(RootDatum(functional=functional, multiplicity=basis.shape[0], basis=basis))
        minus.append(
            RootDatum(
                functional=-functional,
                multiplicity=basis.shape[0],
                basis=np.array([inv.apply(e) for e in basis]),
            )
        )

    decomp = RootDecomposition(cprime=cprime, roots=plus + minus, mprime=mprime, involution=involution)
    if decomp.total_dim != algebra.dim:
        raise ComputationError(f"dimension count {decomp.total_dim} differs from dim g = {algebra.dim}")
    logger.debug(
        "root decomposition: %d positive roots, zero space %d (m' %d)",
        len(plus),
        decomp.zero_dim,
        mprime.shape[0],
    )
    return decomp


def restricted_gram(algebra: LieAlgebra, cprime: np.ndarray) -> np.ndarray:
    return np.array([[algebra.form_B(a, b) for b in cprime] for a in cprime])


def dual_element(algebra: LieAlgebra, decomp: RootDecomposition, functional: np.ndarray) -> np.ndarray:
    """C_alpha in c'_C with B(C_alpha, Z_j) = alpha(Z_j)."""
    gram = restricted_gram(algebra, decomp.cprime)
    if abs(np.linalg.det(gram)) < ZERO_TOL:
        raise ComputationError("trace form restricted to c' is degenerate")
    coeffs = np.linalg.solve(gram.T, np.asarray(functional, dtype=complex))
    return coeffs @ decomp.cprime


def root_inner(algebra: LieAlgebra, decomp: RootDecomposition, a: np.ndarray, b: np.ndarray) -> complex:
    """<a, b> = B(C_a, C_b)."""
    return algebra.form_B(dual_element(algebra, decomp, a), dual_element(algebra, decomp, b))


def sigma_intersection(algebra: LieAlgebra, t: np.ndarray) -> np.ndarray:
    """Real basis of g^{-sigma} intersected with Ad(t) g^{-sigma}."""
    ad_t = algebra.adjoint_group_matrix(t)
    odd = algebra.eigenspace_split(algebra.sigma, -1)
    even_rows = algebra.sigma.signs == 1
    back = np.linalg.inv(ad_t) @ odd.T
    condition = back[even_rows]
    kernel = null_space(np.vstack([condition.real, condition.imag]))
    return _clean((kernel.T @ odd)).real


def is_regular(spec: CartanSubsetSpec, chi: np.ndarray, tol: float = 1e-12) -> bool:
    """x^alpha != x^-alpha for every root of the Cartan subset."""
    chi = np.asarray(chi, dtype=complex)
    for xpower in spec.xpowers:
        x = xpower.value(chi)
        if abs(x - 1 / x) <= tol * max(1.0, abs(x)):
            return False
    return True


def _length_classes(lengths: List[float], rel: float = 1e-6) -> List[float]:
    classes: List[float] = []
    for value in sorted(lengths):
        if not classes or abs(value - classes[-1]) > rel * max(1.0, abs(value)):
            classes.append(value)
    return classes


def root_type(algebra: LieAlgebra, decomp: RootDecomposition, rank2_name: str = "C") -> Tuple[str, Dict[str, int]]:
    """Name the restricted root system and its multiplicities per length class."""
    positives = decomp.positive_roots()
    lengths = [abs(root_inner(algebra, decomp, r.functional, r.functional)) for r in positives]
    classes = _length_classes(lengths)
    rank = decomp.rank

    def class_of(value: float) -> int:
        return int(np.argmin([abs(value - c) for c in classes]))

    mults: Dict[int, set] = {}
    counts: Dict[int, int] = {}
    for root, length in zip(positives, lengths):
        idx = class_of(length)
        mults.setdefault(idx, set()).add(root.multiplicity)
        counts[idx] = counts.get(idx, 0) + 1
    if any(len(values) != 1 for values in mults.values()):
        raise ComputationError("root multiplicities are not constant on a length class")
    mult = {idx: values.pop() for idx, values in mults.items()}

    if len(classes) == 1:
        if rank == 1:
            return "A_1", {"long": mult[0]}
        return f"D_{rank}", {"short": 0, "long": mult[0]}
    if len(classes) == 3:
        return f"BC_{rank}", {"short": mult[0], "middle": mult[1], "long": mult[2]}
    if len(classes) == 2:
        ratio = classes[1] / classes[0]
        if abs(ratio - 4) < 1e-6:
            return f"BC_{rank}", {"short": mult[0], "long": mult[1]}
        if abs(ratio - 2) > 1e-6:
            raise ComputationError(f"unexpected squared length ratio {ratio:.6f}")
        if rank == 2:
            name = rank2_name
        elif counts[0] == rank:
            name = "B"
        else:
            name = "C"
        return f"{name}_{rank}", {"short": mult[0], "long": mult[1]}
    raise ComputationError(f"unexpected number of root lengths: {len(classes)}")


def decomposition_residuals(algebra: LieAlgebra, decomp: RootDecomposition) -> Dict[str, float]:
    """Worst violations of the root decomposition invariants."""
    inv = algebra.involution(decomp.involution)
    ads = [algebra.adjoint_matrix(z) for z in decomp.cprime]
    zero_span = np.vstack([decomp.cprime, decomp.mprime.astype(complex)]) if decomp.mprime.size else decomp.cprime

    eigen = 0.0
    ortho = 0.0
    orthonormal = 0.0
    closure = 0.0
    for root in decomp.roots:
        for ad, value in zip(ads, root.functional):
            eigen = max(eigen, float(np.max(np.abs(ad @ root.basis.T - value * root.basis.T))))
        gram = np.array([[-algebra.form_B(u, inv.apply(v)) for v in root.basis] for u in root.basis])
        orthonormal = max(orthonormal, float(np.max(np.abs(gram - np.eye(root.multiplicity)))))

    for i, first in enumerate(decomp.roots):
        for second in decomp.roots[i:]:
            total = first.functional + second.functional
            if np.max(np.abs(total)) < ZERO_TOL:
                target = zero_span
            else:
                try:
                    target = decomp.roots[decomp.index_of(total)].basis
                except ValidationError:
                    target = None
                for u in first.basis:
                    for v in second.basis:
                        ortho = max(ortho, abs(algebra.form_B(u, v)))
            for u in first.basis:
                for v in second.basis:
                    br = algebra.bracket(u, v)
                    if target is None:
                        closure = max(closure, float(np.max(np.abs(br))))
                        continue
                    coeffs, *_ = lstsq(target.T, br)
                    closure = max(closure, float(np.max(np.abs(target.T @ coeffs - br))))

    pairing = 0.0
    half = len(decomp.roots) // 2
    for idx in range(half):
        pos, neg = decomp.roots[idx], decomp.roots[idx + half]
        mapped = np.array([inv.apply(e) for e in pos.basis])
        pairing = max(pairing, float(np.max(np.abs(mapped - neg.basis))))

    return {
        "eigen": eigen,
        "bracket_closure": closure,
        "b_orthogonality": ortho,
        "orthonormality": orthonormal,
        "sigma_pairing": pairing,
        "dimension": float(abs(decomp.total_dim - algebra.dim)),
    }
