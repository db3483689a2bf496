from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from mscasimir.errors import ComputationError, ConfigError, ValidationError
from mscasimir.models import ChiPoint, RegionLabel, Signature, WeylReduction

logger = logging.getLogger(__name__)

PI = np.pi
FACES = ["empty", "0", "1", "2", "01", "02", "12"]
MAX_REDUCTION_STEPS = 10_000


def _eta_pq(sig: Signature) -> np.ndarray:
    return np.array([1.0] * sig.p + [-1.0] * sig.q)


def _eta_full(sig: Signature) -> np.ndarray:
    return np.array([1.0] * (sig.p + 1) + [-1.0] * (sig.q + 1))


def eta_product(sig: Signature, v: np.ndarray, w: np.ndarray) -> complex:
    return complex(np.sum(_eta_full(sig) * np.asarray(v) * np.asarray(w)))


def iota(sig: Signature, x: Sequence[float]) -> np.ndarray:
    """Null representative (1 - x.x, 2x, 1 + x.x) of the compactified point."""
    x = np.asarray(x)
    if x.shape != (sig.d,):
        raise ValidationError(f"expected a vector of length {sig.d}, got shape {x.shape}")
    norm = np.sum(_eta_pq(sig) * x * x)
    return np.concatenate([[1 - norm], 2 * x, [1 + norm]])


def infinity(sig: Signature) -> np.ndarray:
    out = np.zeros(sig.n)
    out[0] = 1.0
    out[-1] = -1.0
    return out


def chart(sig: Signature, v: Sequence[float], tol: float = 1e-12) -> np.ndarray:
    v = np.asarray(v)
    denominator = v[0] + v[-1]
    if abs(denominator) <= tol * max(1.0, float(np.max(np.abs(v)))):
        raise ValidationError("point at infinity has no affine chart value")
    return v[1:-1] / denominator


def is_null(sig: Signature, v: np.ndarray, tol: float = 1e-10) -> bool:
    v = np.asarray(v)
    scale = float(np.sum(np.abs(v) ** 2))
    return scale > 0 and abs(eta_product(sig, v, v)) <= tol * scale


def cross_ratios(sig: Signature, points: Sequence[np.ndarray], tol: float = 1e-12) -> Tuple[complex, complex]:
    if len(points) != 4:
        raise ValidationError("cross-ratios need exactly four points")
    for v in points:
        if not is_null(sig, v, tol=max(tol, 1e-10)):
            raise ValidationError("cross-ratio input is not a null vector")

    def pair(i: int, j: int) -> complex:
        value = eta_product(sig, points[i], points[j])
        scale = np.linalg.norm(points[i]) * np.linalg.norm(points[j])
        if abs(value) <= tol * scale:
            raise ValidationError(f"points {i + 1} and {j + 1} are not in general position")
        return value

    e12, e13, e14 = pair(0, 1), pair(0, 2), pair(0, 3)
    e23, e24, e34 = pair(1, 2), pair(1, 3), pair(2, 3)
    return e12 * e34 / (e13 * e24), e14 * e23 / (e13 * e24)


def _corners(g: np.ndarray) -> Tuple[complex, complex, complex, complex]:
    g = np.asarray(g)
    return g[0, 0], g[0, -1], g[-1, 0], g[-1, -1]


def in_g_tilde(g: np.ndarray, tol: float = 1e-12) -> bool:
    a, c, gg, i = _corners(g)
    minus = (a - i) ** 2 - (c - gg) ** 2
    plus = (a + i) ** 2 - (c + gg) ** 2
    return abs(minus) > tol and abs(plus) > tol


def cross_ratios_from_corners(g: np.ndarray, tol: float = 1e-12) -> Tuple[complex, complex]:
    """(u, v) of (iota(0), inf, g iota(0), g inf) from the four corner entries."""
    if not in_g_tilde(g, tol):
        raise ValidationError("group element sends the base pair out of general position")
    a, c, gg, i = _corners(g)
    minus = (a - i) ** 2 - (c - gg) ** 2
    return complex(4 / minus), complex(((a + i) ** 2 - (c + gg) ** 2) / minus)


def load_group_element(path: str) -> np.ndarray:
    """Square matrix from JSON, either bare or under "matrix"; complex entries as [re, im]."""
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"matrix file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed matrix file {path}: {exc}") from exc
    data = payload.get("matrix") if isinstance(payload, dict) else payload
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: matrix entries must be numbers or [re, im] pairs") from exc
    if arr.ndim == 3 and arr.shape[-1] == 2:
        arr = arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 4:
        raise ConfigError(f"{path}: expected a square group matrix, got shape {arr.shape}")
    return arr.astype(complex)


def frame_points(sig: Signature, g: np.ndarray) -> List[np.ndarray]:
    base = iota(sig, np.zeros(sig.d))
    inf = infinity(sig)
    return [base, inf, np.asarray(g) @ base, np.asarray(g) @ inf]


def in_domain(chi: Sequence[complex], tol: float = 1e-12) -> bool:
    """chi_1, chi_2 and (chi_1 +- chi_2)/2 avoid i*pi*Z."""
    chi1, chi2 = complex(chi[0]), complex(chi[1])
    for value in (chi1, chi2, (chi1 + chi2) / 2, (chi1 - chi2) / 2):
        if abs(value.real) <= tol:
            k = round(value.imag / PI)
            if abs(value.imag - k * PI) <= tol:
                return False
    return True


def _require_domain(chi: Sequence[complex], tol: float) -> None:
    if not in_domain(chi, tol):
        raise ValidationError(f"point {tuple(complex(c) for c in chi)} is outside the domain D")


def g_map(chi: Sequence[complex]) -> Tuple[complex, complex]:
    a, b = complex(chi[0]) / 2, complex(chi[1]) / 2
    return (
        complex(np.sinh(a) ** 2 * np.sinh(b) ** 2),
        complex(np.cosh(a) ** 2 * np.cosh(b) ** 2),
    )


def f_map(chi: Sequence[complex], tol: float = 1e-12) -> Tuple[complex, complex]:
    _require_domain(chi, tol)
    g1, g2 = g_map(chi)
    return 1 / g2, g1 / g2


def jacobian_factor(chi: Sequence[complex]) -> complex:
    chi1, chi2 = complex(chi[0]), complex(chi[1])
    return complex(
        np.sinh(chi1) * np.sinh(chi2) * np.sinh((chi2 - chi1) / 2) * np.sinh((chi2 + chi1) / 2)
    )


def jacobian_nonzero(chi: Sequence[complex], tol: float = 1e-12) -> bool:
    _require_domain(chi, tol)
    return abs(jacobian_factor(chi)) > tol


def jacobian_fd(chi: Sequence[complex], step: float = 1e-6) -> complex:
    """det Df by central differences in the holomorphic coordinates."""
    chi = np.asarray(chi, dtype=complex)
    columns = []
    for j in range(2):
        offset = np.zeros(2, dtype=complex)
        offset[j] = step
        plus = np.array(f_map(chi + offset))
        minus = np.array(f_map(chi - offset))
        columns.append((plus - minus) / (2 * step))
    return complex(np.linalg.det(np.stack(columns, axis=1)))


def jacobian_constant(samples: int = 50, seed: int = 0, step: float = 1e-6) -> Tuple[float, float]:
    """Mean and spread of det(Df) g_2^3 / jacobian_factor over random real points."""
    rng = np.random.default_rng(seed)
    ratios = []
    while len(ratios) < samples:
        chi = rng.uniform(0.2, 2.0, size=2)
        if abs(chi[0] - chi[1]) < 0.1:
            continue
        _, g2 = g_map(chi)
        ratios.append(jacobian_fd(chi, step) * g2**3 / jacobian_factor(chi))
    ratios = np.asarray(ratios)
    return float(np.mean(ratios.real)), float(np.max(np.abs(ratios - np.mean(ratios))))


def _s0(chi: np.ndarray) -> np.ndarray:
    return np.array([chi[0], 2j * PI - chi[1]])


def _s1(chi: np.ndarray) -> np.ndarray:
    return np.array([chi[1], chi[0]])


def _s2(chi: np.ndarray) -> np.ndarray:
    return np.array([-chi[0], chi[1]])


WEYL_GENERATORS: Dict[int, Callable[[np.ndarray], np.ndarray]] = {0: _s0, 1: _s1, 2: _s2}


def apply_word(chi: Sequence[complex], word: Sequence[int]) -> np.ndarray:
    """Apply generators in the listed order, first entry first."""
    out = np.asarray(chi, dtype=complex)
    for s in word:
        try:
            out = WEYL_GENERATORS[int(s)](out)
        except KeyError as exc:
            raise ValidationError(f"unknown Weyl generator s{s}") from exc
    return out


def _imaginary_step(chi: np.ndarray) -> Optional[int]:
    y1, y2 = chi[0].imag, chi[1].imag
    if y1 < 0:
        return 2
    if y1 > y2:
        return 1
    if y2 > PI:
        return 0
    return None


def _face_of(chi: np.ndarray, tol: float) -> str:
    y1, y2 = chi[0].imag, chi[1].imag
    walls = ""
    if abs(y2 - PI) <= tol:
        walls += "0"
    if abs(y1 - y2) <= tol:
        walls += "1"
    if abs(y1) <= tol:
        walls += "2"
    return walls or "empty"


def _real_step(face: str, chi: np.ndarray) -> List[int]:
    x1, x2 = chi[0].real, chi[1].real
    if face == "0":
        return [0] if x2 < 0 else []
    if face == "1":
        return [1] if x1 > x2 else []
    if face == "2":
        return [2] if x1 < 0 else []
    if face == "01":
        if x2 < 0:
            return [0]
        if x1 > x2:
            return [1]
        if x1 < 0:
            return [1, 0, 1]
        return []
    if face == "02":
        if x1 < 0:
            return [2]
        if x2 < 0:
            return [0]
        return []
    if face == "12":
        if x1 < 0:
            return [2]
        if x1 > x2:
            return [1]
        if x2 < 0:
            return [1, 2, 1]
        return []
    return []


def _real_walls(face: str, chi: np.ndarray, tol: float) -> List[str]:
    x1, x2 = chi[0].real, chi[1].real
    checks = {
        "0": [("x2=0", abs(x2))],
        "1": [("x1=x2", abs(x1 - x2))],
        "2": [("x1=0", abs(x1))],
        "01": [("x1=0", abs(x1)), ("x1=x2", abs(x1 - x2))],
        "02": [("x1=0", abs(x1)), ("x2=0", abs(x2))],
        "12": [("x1=0", abs(x1)), ("x1=x2", abs(x1 - x2))],
    }.get(face, [])
    return [name for name, gap in checks if gap <= tol]


def weyl_reduce(pt: ChiPoint, tol: float = 1e-9) -> WeylReduction:
    """Move pt into the fundamental domain X and name its face."""
    _require_domain(pt.coords, 1e-12)
    chi = np.asarray(pt.coords, dtype=complex)
    word: List[int] = []
    for _ in range(MAX_REDUCTION_STEPS):
        step = _imaginary_step(chi)
        if step is None:
            break
        chi = WEYL_GENERATORS[step](chi)
        word.append(step)
    else:
        raise ComputationError("imaginary parts did not reach the fundamental alcove")

    face = _face_of(chi, tol)
    if len(face) == 3:
        raise ComputationError("alcove walls do not meet in a single point")
    for _ in range(MAX_REDUCTION_STEPS):
        steps = _real_step(face, chi)
        if not steps:
            break
        chi = apply_word(chi, steps)
        word.extend(steps)
    else:
        raise ComputationError(f"real parts did not settle on face {face}")

    representative = ChiPoint(coords=apply_word(pt.coords, word))
    walls = _real_walls(face, representative.coords, tol)
    imag = representative.coords.imag
    for name, gap in (("y2=pi", abs(imag[1] - PI)), ("y1=y2", abs(imag[0] - imag[1])), ("y1=0", abs(imag[0]))):
        if 0 < gap <= tol:
            walls.append(name)
    boundary = bool(walls)
    region = None if boundary else RegionLabel.for_face(face)
    logger.debug("weyl_reduce: face %s word %s boundary %s", face, word, boundary)
    return WeylReduction(region=region, representative=representative, word=word, boundary=boundary, walls=walls)


def in_y(label: str, chi: Sequence[complex], tol: float = 1e-9, closed: bool = False) -> bool:
    """Membership in the real slice Y_I, or its closure when closed is set."""
    chi1, chi2 = complex(chi[0]), complex(chi[1])
    x1, y1, x2, y2 = chi1.real, chi1.imag, chi2.real, chi2.imag

    def near(value: float, target: float) -> bool:
        return abs(value - target) <= tol

    def less(a: float, b: float) -> bool:
        return a <= b + tol if closed else a < b - tol

    if label == "empty":
        return near(x1, 0) and near(x2, 0) and less(0, y1) and less(y1, y2) and less(y2, PI)
    if label == "0":
        return near(x1, 0) and less(0, x2) and less(0, y1) and less(y1, PI) and near(y2, PI)
    if label in ("1", "1'", "euclid", "spinor"):
        return near(x1, -x2) and less(0, x2) and near(y1, y2) and less(0, y1) and less(y1, PI)
    if label == "2":
        return less(0, x1) and near(x2, 0) and near(y1, 0) and less(0, y2) and less(y2, PI)
    if label == "01":
        return near(y1, PI) and near(y2, PI) and less(0, x1) and less(x1, x2)
    if label == "02":
        return near(y1, 0) and near(y2, PI) and less(0, x1) and less(0, x2)
    if label == "12":
        return near(y1, 0) and near(y2, 0) and less(0, x1) and less(x1, x2)
    raise ValidationError(f"unknown region label {label!r}")


def z_zbar(chi: Sequence[complex]) -> Tuple[complex, complex]:
    """z from chi_1 and zbar from chi_2, both as sech^2 of the half angle."""
    return (
        complex(1 / np.cosh(complex(chi[0]) / 2) ** 2),
        complex(1 / np.cosh(complex(chi[1]) / 2) ** 2),
    )


def classify_causal(pt: ChiPoint, tol: float = 1e-9) -> RegionLabel:
    for face in FACES:
        if in_y(face, pt.coords, tol):
            return RegionLabel.for_face(face)
    raise ValidationError(f"point {pt.coords.tolist()} is not on the real locus Y")


def describe_point(pt: ChiPoint, tol: float = 1e-9) -> Dict[str, object]:
    region = classify_causal(pt, tol)
    u, v = f_map(pt.coords)
    z, zbar = z_zbar(pt.coords)
    return {"region": region.face, "causal": region.causal, "u": u, "v": v, "z": z, "zbar": zbar}
