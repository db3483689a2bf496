from __future__ import annotations

from typing import Any, Dict, List, Sequence

from mscasimir.models import RadialOperator, SuiteReport


def _num(value: Any) -> str:
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(isinstance(x, float) for x in value):
        re, im = value
        if abs(im) < 1e-15:
            return f"{re:.6g}"
        return f"{re:.6g}{im:+.6g}i"
    if isinstance(value, complex):
        return _num([value.real, value.imag])
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _vector(values: Sequence[Any]) -> str:
    return "(" + ", ".join(_num(v) for v in values) + ")"


def render_suites(reports: Sequence[SuiteReport]) -> str:
    lines: List[str] = []
    for report in reports:
        lines.append(f"=== {report.suite} ===")
        for case in report.cases:
            mark = "PASS" if case.passed else "FAIL"
            line = f"[{mark}] {case.name}: {case.residual:.3e}"
            if not case.passed and case.location is not None:
                line += f" at {case.location}"
            lines.append(line)
        lines.append(f"-- {len(report.cases) - len(report.failures)}/{len(report.cases)} passed --")
    return "\n".join(lines)


def render_rootdata(payload: Dict[str, Any]) -> str:
    spec = payload["cartan"]
    lines = [
        f"Cartan subset {spec['label']} ({spec['pair_kind']}, rank {spec['rank']}, region {spec['region']})",
        f"root system: {payload['root_type']} {payload['multiplicities']}",
    ]
    if not spec["exists"]:
        lines.append("no real Cartan subset for this label, root data only")
    lines.extend(f"note: {note}" for note in spec["notes"])
    for root in spec["roots"]:
        lines.append(
            f"  root {_vector(root['label'])}  mult {root['multiplicity']}  epsilon {_num(root['epsilon'])}"
        )
    return "\n".join(lines)


def render_catalog(specs: Sequence[Dict[str, Any]]) -> str:
    lines = [f"{len(specs)} Cartan subsets"]
    for spec in specs:
        flag = "" if spec["exists"] else "  (root data only)"
        lines.append(f"  {spec['label']:<6} rank {spec['rank']} region {spec['region']}{flag}")
    return "\n".join(lines)


def render_radial(op: RadialOperator) -> str:
    lines = [f"radial Casimir on W^m' of dimension {op.dim}"]
    lines.append("second order: " + " ".join(_vector(row) for row in op.second_order.tolist()))
    for term in op.first_order:
        lines.append(f"  {term.weight:g} coth x^{_vector(term.root)} d_{_vector(term.direction.real.tolist())}")
    if not op.zero_order:
        lines.append("no potential terms")
    for term in op.zero_order:
        lines.append(f"  {term.kind.value} at {_vector(term.root)}: {term.matrix.shape[0]}x{term.matrix.shape[1]}")
    return "\n".join(lines)


def render_coords(info: Dict[str, Any]) -> str:
    lines = []
    for key in sorted(info):
        value = info[key]
        nested = isinstance(value, list) and bool(value) and isinstance(value[0], list)
        lines.append(f"{key}: {_vector(value) if nested else _num(value)}")
    return "\n".join(lines)
