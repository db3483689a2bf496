from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy
from scipy.linalg import expm, null_space

from mscasimir.errors import SignatureError, ValidationError
from mscasimir.models import PairKind, Signature

logger = logging.getLogger(__name__)

NULL_VECTOR_TOL = 1e-10


class InvolutionKind(str, Enum):
    THETA = "theta"
    SIGMA_FOURPOINT = "sigma4pt"
    SIGMA_DEFECT = "sigmaDefect"


@dataclass(slots=True)
class Involution:
    """Conjugation by a diagonal sign matrix, cached as signs on the F-basis."""

    kind: InvolutionKind
    conj: np.ndarray
    signs: np.ndarray
    p_defect: Optional[int] = None

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.conj)

    def apply(self, coeffs: np.ndarray) -> np.ndarray:
        return self.signs * np.asarray(coeffs)

    def on_matrix(self, mat: np.ndarray) -> np.ndarray:
        return self.conj[:, None] * mat * self.conj[None, :]


@dataclass(slots=True)
class LieAlgebra:
    signature: Signature
    eta: np.ndarray
    pairs: List[Tuple[int, int]]
    basis_matrices: np.ndarray
    structure: Dict[Tuple[int, int], Dict[int, int]]
    f: np.ndarray
    gram: np.ndarray
    theta: Involution
    sigma: Involution
    pair_kind: PairKind = PairKind.FOURPOINT
    index: Dict[Tuple[int, int], int] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.pairs)

    @property
    def n(self) -> int:
        return self.signature.n

    def label(self, a: int) -> str:
        mu, nu = self.pairs[a]
        return f"F_{mu}_{nu}"

    def labels(self) -> List[str]:
        return [self.label(a) for a in range(self.dim)]

    def parse_label(self, text: str) -> int:
        try:
            _, mu, nu = text.split("_")
            return self.index[(int(mu), int(nu))]
        except (ValueError, KeyError) as exc:
            raise ValidationError(f"unknown basis label {text!r}") from exc

    def element(self, mu: int, nu: int, coeff: complex = 1.0) -> np.ndarray:
        """Coefficient vector of coeff * F_{mu,nu}, honouring F_{nu,mu} = -F_{mu,nu}."""
        out = np.zeros(self.dim, dtype=complex)
        if mu == nu:
            return out
        if mu < nu:
            out[self.index[(mu, nu)]] = coeff
        else:
            out[self.index[(nu, mu)]] = -coeff
        return out

    def from_terms(self, terms: Dict[Tuple[int, int], complex]) -> np.ndarray:
        out = np.zeros(self.dim, dtype=complex)
        for (mu, nu), coeff in terms.items():
            out += self.element(mu, nu, coeff)
        return out

    def to_matrix(self, coeffs: np.ndarray) -> np.ndarray:
        return np.tensordot(np.asarray(coeffs), self.basis_matrices, axes=1)

    def from_matrix(self, mat: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        mat = np.asarray(mat)
        defect = np.swapaxes(mat, -1, -2) @ np.diag(self.eta) + np.diag(self.eta) @ mat
        if np.max(np.abs(defect), initial=0.0) > tol * max(1.0, np.max(np.abs(mat))):
            raise ValidationError("matrix does not lie in so(eta)")
        mus = np.array([mu for mu, _ in self.pairs])
        nus = np.array([nu for _, nu in self.pairs])
        return mat[..., mus, nus] * self.eta[nus]

    def bracket(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.einsum("a,b,abc->c", x, y, self.f)

    def adjoint_matrix(self, x: np.ndarray) -> np.ndarray:
        """ad(x) acting on F-coordinates, column b holds [x, F_b]."""
        return np.einsum("a,abc->cb", np.asarray(x, dtype=complex), self.f)

    def adjoint_group_matrix(self, g: np.ndarray) -> np.ndarray:
        """Ad(g) on F-coordinates for g in O(eta)."""
        g = np.asarray(g, dtype=complex)
        ginv = np.diag(self.eta) @ g.T @ np.diag(self.eta)
        if np.max(np.abs(ginv @ g - np.eye(self.n))) > 1e-9:
            raise ValidationError("group element is not eta-orthogonal")
        conj = g[None, :, :] @ self.basis_matrices @ ginv[None, :, :]
        return self.from_matrix(conj).T

    def form_B(self, x: np.ndarray, y: np.ndarray) -> complex:
        return complex(np.sum(np.asarray(x) * np.asarray(y) * self.gram))

    def form_Btheta(self, x: np.ndarray, y: np.ndarray) -> complex:
        return -self.form_B(x, self.theta.apply(y))

    def form_Bsigma(self, x: np.ndarray, y: np.ndarray) -> complex:
        return -self.form_B(x, self.sigma.apply(y))

    def involution(self, name: str) -> Involution:
        if name == "theta":
            return self.theta
        if name == "sigma":
            return self.sigma
        raise ValidationError(f"unknown involution {name!r}")

    def eigenspace_split(self, inv: Involution, sign: int) -> np.ndarray:
        rows = np.eye(self.dim)
        return rows[inv.signs == sign]

    def four_way_split(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(k^sigma, k^-sigma, p^sigma, p^-sigma) as rows of F-coordinates."""
        rows = np.eye(self.dim)
        t, s = self.theta.signs, self.sigma.signs
        return (
            rows[(t == 1) & (s == 1)],
            rows[(t == 1) & (s == -1)],
            rows[(t == -1) & (s == 1)],
            rows[(t == -1) & (s == -1)],
        )

    def stabilizer_subalgebra(self, v: Sequence[float], tol: float = NULL_VECTOR_TOL) -> np.ndarray:
        """Real basis of {X : Xv in Rv} for a null vector v."""
        v = np.asarray(v, dtype=float)
        norm_sq = float(v @ v)
        if norm_sq == 0.0:
            raise ValidationError("stabilizer of the zero vector is undefined")
        if abs(float(v @ (self.eta * v))) > tol * norm_sq:
            raise ValidationError("vector is not null for eta")
        projector = np.eye(self.n) - np.outer(v, v) / norm_sq
        columns = np.stack([projector @ (np.real(m) @ v) for m in self.basis_matrices], axis=1)
        return null_space(columns).T

    def dual_basis(self) -> np.ndarray:
        """Rows are the B-dual elements F^a."""
        return np.diag(1.0 / self.gram)

    def defining_rep(self) -> np.ndarray:
        return self.basis_matrices.astype(complex)

    def adjoint_rep(self) -> np.ndarray:
        return np.stack([self.adjoint_matrix(row) for row in np.eye(self.dim)])

    def casimir_in_rep(self, rep: np.ndarray) -> np.ndarray:
        """Sum over dual bases rho(F_a) rho(F^a)."""
        return np.einsum("a,aij,ajk->ik", 1.0 / self.gram, rep, rep)

    def jacobi_residual(self) -> float:
        f = self.f
        total = (
            np.einsum("bcg,age->abce", f, f)
            + np.einsum("cag,bge->abce", f, f)
            + np.einsum("abg,cge->abce", f, f)
        )
        return float(np.max(np.abs(total)))

    def structure_constants_exact(self) -> Dict[Tuple[int, int], Dict[int, sympy.Integer]]:
        return {
            key: {c: sympy.Integer(v) for c, v in entries.items()} for key, entries in self.structure.items()
        }

    def adjoint_matrix_exact(self, coeffs: Sequence[sympy.Expr]) -> sympy.Matrix:
        out = sympy.zeros(self.dim, self.dim)
        table = self.structure_constants_exact()
        for (a, b), entries in table.items():
            if coeffs[a] == 0:
                continue
            for c, value in entries.items():
                out[c, b] += coeffs[a] * value
        return out

    def bracket_exact(self, x: Sequence[sympy.Expr], y: Sequence[sympy.Expr]) -> sympy.Matrix:
        return self.adjoint_matrix_exact(x) * sympy.Matrix(y)


def metric_eta(sig: Signature) -> np.ndarray:
    return np.array([1.0] * (sig.p + 1) + [-1.0] * (sig.q + 1))


def block_exp(eta: np.ndarray, mu: int, nu: int, angle: complex) -> np.ndarray:
    """exp(angle * F_{mu,nu}) from the closed rotation or boost formula."""
    n = len(eta)
    out = np.eye(n, dtype=complex)
    if eta[mu] * eta[nu] > 0:
        c, s = np.cos(angle), np.sin(angle)
    else:
        c, s = np.cosh(angle), np.sinh(angle)
    out[mu, mu] = c
    out[nu, nu] = c
    out[mu, nu] = s * eta[nu]
    out[nu, mu] = -s * eta[mu]
    return out


def exp_element(algebra: LieAlgebra, coeffs: np.ndarray) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=complex)
    support = np.flatnonzero(np.abs(coeffs) > 0)
    if len(support) == 1:
        mu, nu = algebra.pairs[support[0]]
        return block_exp(algebra.eta, mu, nu, coeffs[support[0]])
    return expm(algebra.to_matrix(coeffs))


def parabolic_dims(d: int) -> Dict[str, int]:
    """Dimensions of m, a, n for the stabilizer of a null line."""
    return {"m": d * (d - 1) // 2, "a": 1, "n": d, "total": d * (d - 1) // 2 + 1 + d}


def _structure_table(eta: np.ndarray, pairs: List[Tuple[int, int]], index: Dict[Tuple[int, int], int]) -> Dict[Tuple[int, int], Dict[int, int]]:
    def add(entries: Dict[int, int], mu: int, nu: int, coeff: int) -> None:
        if coeff == 0 or mu == nu:
            return
        if mu < nu:
            c, sign = index[(mu, nu)], 1
        else:
            c, sign = index[(nu, mu)], -1
        entries[c] = entries.get(c, 0) + sign * coeff
        if entries[c] == 0:
            del entries[c]

    def g(a: int, b: int) -> int:
        return int(eta[a]) if a == b else 0

    table: Dict[Tuple[int, int], Dict[int, int]] = {}
    for a, (mu, nu) in enumerate(pairs):
        for b, (rho, sig) in enumerate(pairs):
            entries: Dict[int, int] = {}
            add(entries, mu, sig, g(nu, rho))
            add(entries, nu, rho, g(mu, sig))
            add(entries, nu, sig, -g(mu, rho))
            add(entries, mu, rho, -g(nu, sig))
            if entries:
                table[(a, b)] = entries
    return table


def _involution(kind: InvolutionKind, conj: np.ndarray, pairs: List[Tuple[int, int]], p_defect: Optional[int] = None) -> Involution:
    signs = np.array([conj[mu] * conj[nu] for mu, nu in pairs])
    return Involution(kind=kind, conj=conj, signs=signs, p_defect=p_defect)


def build_algebra(
    sig: Signature,
    pair_kind: PairKind = PairKind.FOURPOINT,
    p_defect: Optional[int] = None,
    allow_exploratory: bool = False,
) -> LieAlgebra:
    sig.validate(allow_exploratory=allow_exploratory)
    n = sig.n
    eta = metric_eta(sig)
    pairs = [(mu, nu) for mu in range(n) for nu in range(mu + 1, n)]
    index = {pair: a for a, pair in enumerate(pairs)}

    basis = np.zeros((len(pairs), n, n))
    for a, (mu, nu) in enumerate(pairs):
        basis[a, mu, nu] = eta[nu]
        basis[a, nu, mu] = -eta[mu]

    structure = _structure_table(eta, pairs, index)
    f = np.zeros((len(pairs),) * 3)
    for (a, b), entries in structure.items():
        for c, value in entries.items():
            f[a, b, c] = value

    gram = np.array([-2.0 * eta[mu] * eta[nu] for mu, nu in pairs])
    theta = _involution(InvolutionKind.THETA, eta.copy(), pairs)

    if pair_kind is PairKind.FOURPOINT:
        conj = np.ones(n)
        conj[0] = -1.0
        conj[-1] = -1.0
        sigma = _involution(InvolutionKind.SIGMA_FOURPOINT, conj, pairs)
    else:
        if p_defect is None or not 0 <= p_defect <= sig.d - 1:
            raise SignatureError(f"defect dimension must satisfy 0 <= p < d, got {p_defect}")
        conj = np.array([1.0] * (sig.d - p_defect) + [-1.0] * (p_defect + 2))
        sigma = _involution(InvolutionKind.SIGMA_DEFECT, conj, pairs, p_defect=p_defect)

    algebra = LieAlgebra(
        signature=sig,
        eta=eta,
        pairs=pairs,
        basis_matrices=basis,
        structure=structure,
        f=f,
        gram=gram,
        theta=theta,
        sigma=sigma,
        pair_kind=pair_kind,
        index=index,
    )
    logger.info("built so(%d,%d) with dim %d and %s", sig.p + 1, sig.q + 1, algebra.dim, sigma.kind.value)
    return algebra
