from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from mscasimir.errors import SignatureError, ValidationError


def complex_pair(value: complex) -> List[float]:
    value = complex(value)
    return [float(value.real), float(value.imag)]


def array_to_json(values: np.ndarray) -> Any:
    """Nested lists with complex entries written as [re, im]."""
    values = np.asarray(values)
    if values.ndim == 0:
        return complex_pair(values.item())
    return [array_to_json(item) for item in values]


def array_from_json(data: Any) -> np.ndarray:
    def convert(item: Any) -> Any:
        if isinstance(item, (int, float)):
            return complex(item)
        # array_to_json writes every scalar as a pair, so a pair of numbers is one entry
        if len(item) == 2 and all(isinstance(x, (int, float)) for x in item):
            return complex(item[0], item[1])
        return [convert(x) for x in item]

    return np.asarray(convert(data), dtype=complex)


class PairKind(str, Enum):
    FOURPOINT = "fourpoint"
    DEFECT = "defect"


@dataclass(slots=True)
class Signature:
    p: int
    q: int

    @property
    def d(self) -> int:
        return self.p + self.q

    @property
    def n(self) -> int:
        return self.d + 2

    def validate(self, allow_exploratory: bool = False) -> None:
        if self.p < 0 or self.q < 0:
            raise SignatureError(f"signature entries must be nonnegative, got ({self.p},{self.q})")
        if allow_exploratory:
            if self.d < 1:
                raise SignatureError("need p+q >= 1")
            return
        if self.p < self.q:
            raise SignatureError(f"need p >= q, got ({self.p},{self.q})")
        if self.d <= 2:
            raise SignatureError(f"need d = p+q > 2, got d = {self.d}")

    def to_dict(self) -> Dict[str, Any]:
        return {"p": self.p, "q": self.q, "d": self.d}


@dataclass(slots=True)
class ChiPoint:
    coords: np.ndarray

    @classmethod
    def of(cls, *values: complex) -> "ChiPoint":
        return cls(coords=np.asarray(values, dtype=complex))

    @property
    def chi1(self) -> complex:
        return complex(self.coords[0])

    @property
    def chi2(self) -> complex:
        return complex(self.coords[1])

    @property
    def rank(self) -> int:
        return int(self.coords.shape[0])

    def to_dict(self) -> Dict[str, Any]:
        return {"chi": [complex_pair(c) for c in self.coords]}


@dataclass(slots=True)
class RootDatum:
    functional: np.ndarray
    multiplicity: int
    basis: np.ndarray
    label: Optional[np.ndarray] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "functional": array_to_json(self.functional),
            "multiplicity": self.multiplicity,
            "label": None if self.label is None else [float(x) for x in np.real(self.label)],
            "basis": array_to_json(self.basis),
        }


@dataclass(slots=True)
class RootDecomposition:
    cprime: np.ndarray
    roots: List[RootDatum]
    mprime: np.ndarray
    involution: str = "sigma"

    @property
    def rank(self) -> int:
        return int(self.cprime.shape[0])

    @property
    def zero_dim(self) -> int:
        return self.rank + int(self.mprime.shape[0])

    @property
    def total_dim(self) -> int:
        return self.zero_dim + sum(root.multiplicity for root in self.roots)

    def positive_roots(self) -> List[RootDatum]:
        return self.roots[: len(self.roots) // 2]

    def index_of(self, functional: np.ndarray, tol: float = 1e-7) -> int:
        for idx, root in enumerate(self.roots):
            if np.max(np.abs(root.functional - functional)) < tol:
                return idx
        raise ValidationError("functional is not a root of this decomposition")

    def negative_index(self, idx: int) -> int:
        half = len(self.roots) // 2
        return idx + half if idx < half else idx - half

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rank": self.rank,
            "involution": self.involution,
            "cprime": array_to_json(self.cprime),
            "mprime": array_to_json(self.mprime),
            "zero_dim": self.zero_dim,
            "roots": [root.to_dict() for root in self.roots],
        }


@dataclass(slots=True)
class XPower:
    """x^gamma along the chart, phase * exp(exponents . chi)."""

    phase: complex
    exponents: np.ndarray

    def value(self, chi: np.ndarray) -> complex:
        return complex(self.phase * np.exp(np.dot(self.exponents, chi)))

    def coth(self, chi: np.ndarray) -> complex:
        x = self.value(chi)
        return (x + 1 / x) / (x - 1 / x)

    def csch_sq(self, chi: np.ndarray) -> complex:
        x = self.value(chi)
        return 4 / (x - 1 / x) ** 2

    def csch_sq_half(self, chi: np.ndarray) -> complex:
        x = self.value(chi)
        return 4 * (x + 1 / x + 2) / (x - 1 / x) ** 2

    def sech_sq_half(self, chi: np.ndarray) -> complex:
        x = self.value(chi)
        return 4 / (x + 1 / x + 2)

    def to_dict(self) -> Dict[str, Any]:
        return {"phase": complex_pair(self.phase), "exponents": array_to_json(self.exponents)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "XPower":
        return cls(phase=complex(*data["phase"]), exponents=array_from_json(data["exponents"]))


class PotentialKind(str, Enum):
    FULL = "inv_sinh_sq_full"
    HALF = "inv_sinh_sq_half"


@dataclass(slots=True)
class FirstOrderTerm:
    root: Tuple[float, ...]
    weight: float
    direction: np.ndarray
    xpower: XPower

    def to_dict(self) -> Dict[str, Any]:
        return {
            "root": list(self.root),
            "coefficient": self.weight,
            "direction": array_to_json(self.direction),
            "xpower": self.xpower.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FirstOrderTerm":
        return cls(
            root=tuple(float(x) for x in data["root"]),
            weight=float(data["coefficient"]),
            direction=array_from_json(data["direction"]),
            xpower=XPower.from_dict(data["xpower"]),
        )


@dataclass(slots=True)
class ZeroOrderTerm:
    root: Tuple[float, ...]
    kind: PotentialKind
    matrix: np.ndarray
    xpower: XPower

    def coefficient(self, chi: np.ndarray) -> complex:
        if self.kind is PotentialKind.FULL:
            return self.xpower.csch_sq(chi)
        return self.xpower.csch_sq_half(chi)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "root": list(self.root),
            "kind": self.kind.value,
            "matrix": array_to_json(self.matrix),
            "xpower": self.xpower.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ZeroOrderTerm":
        return cls(
            root=tuple(float(x) for x in data["root"]),
            kind=PotentialKind(data["kind"]),
            matrix=array_from_json(data["matrix"]),
            xpower=XPower.from_dict(data["xpower"]),
        )


@dataclass(slots=True)
class RadialOperator:
    second_order: np.ndarray
    first_order: List[FirstOrderTerm] = field(default_factory=list)
    zero_order: List[ZeroOrderTerm] = field(default_factory=list)
    constant: Optional[np.ndarray] = None

    @property
    def rank(self) -> int:
        return int(self.second_order.shape[0])

    @property
    def dim(self) -> int:
        if self.constant is not None:
            return int(self.constant.shape[0])
        if self.zero_order:
            return int(self.zero_order[0].matrix.shape[0])
        return 1

    def hyperbolic_potential(self, chi: np.ndarray) -> np.ndarray:
        total = np.zeros((self.dim, self.dim), dtype=complex)
        for term in self.zero_order:
            total += term.coefficient(chi) * term.matrix
        return total

    def potential(self, chi: np.ndarray) -> np.ndarray:
        total = self.hyperbolic_potential(chi)
        if self.constant is not None:
            total += self.constant
        return total

    def symbol(self, chi: np.ndarray, grad: np.ndarray, hess: Optional[np.ndarray] = None) -> np.ndarray:
        """Value of e^{-g} P e^{g} at chi for a function g with the given gradient and Hessian."""
        chi = np.asarray(chi, dtype=complex)
        grad = np.asarray(grad, dtype=complex)
        scalar = grad @ self.second_order @ grad
        if hess is not None:
            scalar += np.sum(self.second_order * hess)
        for term in self.first_order:
            scalar += term.weight * term.xpower.coth(chi) * (term.direction @ grad)
        return scalar * np.eye(self.dim, dtype=complex) + self.potential(chi)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "second_order": array_to_json(self.second_order),
            "first_order": [term.to_dict() for term in self.first_order],
            "zero_order": [term.to_dict() for term in self.zero_order],
            "constant": None if self.constant is None else array_to_json(self.constant),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RadialOperator":
        constant = data.get("constant")
        return cls(
            second_order=array_from_json(data["second_order"]),
            first_order=[FirstOrderTerm.from_dict(item) for item in data.get("first_order", [])],
            zero_order=[ZeroOrderTerm.from_dict(item) for item in data.get("zero_order", [])],
            constant=None if constant is None else array_from_json(constant),
        )


class BimoduleKind(str, Enum):
    SCALAR = "scalar"
    SPINOR = "spinor"
    TRIVIAL = "trivial"
    DEFINING = "defining"
    CUSTOM = "custom"


@dataclass(slots=True)
class Bimodule:
    dim: int
    left: Dict[int, np.ndarray]
    right: Dict[int, np.ndarray]
    kind: BimoduleKind = BimoduleKind.CUSTOM
    params: Dict[str, float] = field(default_factory=dict)

    def to_dict(self, labels: Sequence[str]) -> Dict[str, Any]:
        return {
            "dim": self.dim,
            "kind": self.kind.value,
            "params": dict(self.params),
            "left": {labels[k]: array_to_json(m) for k, m in sorted(self.left.items())},
            "right": {labels[k]: array_to_json(m) for k, m in sorted(self.right.items())},
        }


@dataclass(slots=True)
class TensorOperator:
    """Sum of weight * u (x) v with u, v given in F coordinates."""

    summands: List[Tuple[np.ndarray, np.ndarray, complex]] = field(default_factory=list)

    def image(self, rep: np.ndarray) -> np.ndarray:
        """Kronecker image sum w rho(u) (x) rho(v) for a rep given by basis images."""
        total = None
        for u, v, weight in self.summands:
            term = weight * np.kron(np.tensordot(u, rep, axes=1), np.tensordot(v, rep, axes=1))
            total = term if total is None else total + term
        return total

    def swapped(self) -> "TensorOperator":
        return TensorOperator(summands=[(v, u, w) for u, v, w in self.summands])


@dataclass(slots=True)
class CartanSubsetSpec:
    label: str
    signature: Signature
    pair_kind: PairKind
    cprime: np.ndarray
    log_matrix: np.ndarray
    log_shift: np.ndarray
    t: np.ndarray
    epsilon_generators: Tuple[complex, ...] = ()
    epsilon_stated: Optional[Tuple[complex, ...]] = None
    decomposition: Optional[RootDecomposition] = None
    phi: Optional[np.ndarray] = None
    labels: List[np.ndarray] = field(default_factory=list)
    xpowers: List[XPower] = field(default_factory=list)
    epsilons: List[complex] = field(default_factory=list)
    t_action: List[int] = field(default_factory=list)
    metric: Optional[np.ndarray] = None
    region: str = ""
    rank2_name: str = "C"
    exists: bool = True
    notes: List[str] = field(default_factory=list)

    @property
    def rank(self) -> int:
        return int(self.cprime.shape[0])

    @property
    def coordinate_basis(self) -> np.ndarray:
        """V_j = d X / d chi_j, rows in F coordinates."""
        return self.log_matrix.T @ self.cprime

    def cprime_coefficients(self, chi: np.ndarray) -> np.ndarray:
        return self.log_matrix @ np.asarray(chi, dtype=complex) + self.log_shift

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "signature": self.signature.to_dict(),
            "pair_kind": self.pair_kind.value,
            "rank": self.rank,
            "region": self.region,
            "exists": self.exists,
            "notes": list(self.notes),
            "cprime": array_to_json(self.cprime),
            "log_matrix": array_to_json(self.log_matrix),
            "log_shift": array_to_json(self.log_shift),
            "t": array_to_json(self.t),
            "epsilon_generators": [complex_pair(e) for e in self.epsilon_generators],
            "epsilon_stated": None
            if self.epsilon_stated is None
            else [complex_pair(e) for e in self.epsilon_stated],
            "roots": [
                {
                    "label": [float(x) for x in np.real(label)],
                    "multiplicity": root.multiplicity,
                    "epsilon": complex_pair(eps),
                    "t_image": [float(x) for x in np.real(self.labels[image])],
                }
                for root, label, eps, image in zip(
                    self.decomposition.roots if self.decomposition else [],
                    self.labels,
                    self.epsilons,
                    self.t_action,
                )
            ],
        }


@dataclass(slots=True)
class RootSystem:
    """Positive roots grouped by Weyl orbit, in chi coordinates."""

    name: str
    orbits: Dict[str, np.ndarray]
    metric: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.metric.shape[0])

    def positive_roots(self) -> List[Tuple[str, np.ndarray]]:
        return [(orbit, root) for orbit, roots in self.orbits.items() for root in roots]

    def inner(self, a: np.ndarray, b: np.ndarray) -> float:
        return float(np.real(np.asarray(a) @ self.metric @ np.asarray(b)))

    def orbit_of(self, root: Sequence[float], tol: float = 1e-9) -> Optional[str]:
        root = np.asarray(root, dtype=float)
        for orbit, candidate in self.positive_roots():
            if np.allclose(candidate, root, atol=tol) or np.allclose(candidate, -root, atol=tol):
                return orbit
        return None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "orbits": {orbit: np.asarray(roots, dtype=float).tolist() for orbit, roots in self.orbits.items()},
            "metric": np.asarray(self.metric, dtype=float).tolist(),
        }


@dataclass(slots=True)
class MultiplicityVector:
    system: str
    values: Dict[str, float] = field(default_factory=dict)

    def of(self, orbit: Optional[str]) -> float:
        if orbit is None:
            return 0.0
        return float(self.values.get(orbit, 0.0))

    def to_dict(self) -> Dict[str, Any]:
        return {"system": self.system, "values": {k: float(v) for k, v in sorted(self.values.items())}}


@dataclass(slots=True)
class GaugeData:
    """delta = scale * prod over positive roots of (2 sinh(gamma . chi / 2))^exponent."""

    system: RootSystem
    exponents: Dict[str, float]
    scale: complex = 1.0

    def _terms(self) -> List[Tuple[float, np.ndarray]]:
        return [
            (self.exponents[orbit], root)
            for orbit, root in self.system.positive_roots()
            if abs(self.exponents.get(orbit, 0.0)) > 0
        ]

    def log_value(self, chi: np.ndarray) -> complex:
        chi = np.asarray(chi, dtype=complex)
        return complex(sum(e * np.log(2 * np.sinh(root @ chi / 2)) for e, root in self._terms()))

    def value(self, chi: np.ndarray) -> complex:
        return complex(self.scale * np.exp(self.log_value(chi)))

    def gradient(self, chi: np.ndarray) -> np.ndarray:
        chi = np.asarray(chi, dtype=complex)
        grad = np.zeros(self.system.rank, dtype=complex)
        for e, root in self._terms():
            grad += e * (root / 2) / np.tanh(root @ chi / 2)
        return grad

    def hessian(self, chi: np.ndarray) -> np.ndarray:
        chi = np.asarray(chi, dtype=complex)
        hess = np.zeros((self.system.rank, self.system.rank), dtype=complex)
        for e, root in self._terms():
            hess -= e * np.outer(root, root) / 4 / np.sinh(root @ chi / 2) ** 2
        return hess

    def to_dict(self) -> Dict[str, Any]:
        return {
            "system": self.system.name,
            "exponents": {k: float(v) for k, v in sorted(self.exponents.items())},
            "scale": complex_pair(self.scale),
        }


CAUSAL_TAGS: Dict[str, str] = {
    "empty": "E_tu",
    "0": "U",
    "1": "E_stu",
    "2": "T",
    "01": "E_su",
    "02": "S",
    "12": "E_st",
}


@dataclass(slots=True)
class RegionLabel:
    face: str
    causal: Optional[str] = None

    @classmethod
    def for_face(cls, face: str) -> "RegionLabel":
        return cls(face=face, causal=CAUSAL_TAGS.get(face))

    def to_dict(self) -> Dict[str, Any]:
        return {"region": self.face, "causal": self.causal}


@dataclass(slots=True)
class CaseResult:
    name: str
    residual: float
    passed: bool
    location: Optional[Any] = None
    detail: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "residual": float(self.residual),
            "passed": self.passed,
            "location": self.location,
            "detail": self.detail,
        }


@dataclass(slots=True)
class SuiteReport:
    suite: str
    cases: List[CaseResult] = field(default_factory=list)

    @property
    def failures(self) -> List[CaseResult]:
        return [case for case in self.cases if not case.passed]

    @property
    def passed(self) -> bool:
        return not self.failures

    def add(self, name: str, residual: float, limit: float, location: Any = None, **detail: Any) -> CaseResult:
        case = CaseResult(
            name=name,
            residual=float(residual),
            passed=bool(residual <= limit),
            location=location,
            detail=detail,
        )
        self.cases.append(case)
        return case

    def to_dict(self) -> Dict[str, Any]:
        return {
            "suite": self.suite,
            "cases": [case.to_dict() for case in self.cases],
            "failures": [
                {"name": c.name, "residual": float(c.residual), "location": c.location} for c in self.failures
            ],
        }


@dataclass(slots=True)
class WeylReduction:
    region: Optional[RegionLabel]
    representative: ChiPoint
    word: List[int] = field(default_factory=list)
    boundary: bool = False
    walls: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "boundary": self.boundary,
            "walls": list(self.walls),
            "word": list(self.word),
            "representative": self.representative.to_dict()["chi"],
        }
        if self.region is not None:
            data.update(self.region.to_dict())
        return data
