from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from mscasimir.cartan import catalog_for, find_spec
from mscasimir.config import DEFAULT_CONFIG_PATH, Tolerances, load_tolerances
from mscasimir.coords import (
    cross_ratios_from_corners,
    describe_point,
    f_map,
    load_group_element,
    weyl_reduce,
    z_zbar,
)
from mscasimir.errors import ConfigError, MscasimirError, SignatureError, ValidationError
from mscasimir.liealg import LieAlgebra, build_algebra
from mscasimir.models import Bimodule, ChiPoint, PairKind, Signature, complex_pair
from mscasimir.radial import (
    defining_bimodule,
    load_bimodule,
    radial_casimir,
    scalar_bimodule,
    spinor_bimodule,
    trivial_bimodule,
    validate_bimodule,
)
from mscasimir.render import render_catalog, render_coords, render_radial, render_rootdata, render_suites
from mscasimir.rootspace import root_type
from mscasimir.suites import SUITES, run_suite

logger = logging.getLogger(__name__)

SCHEMA = "mscasimir/1"
EXIT_OK = 0
EXIT_INVALID = 2
EXIT_FAILED = 3

BUILTIN_BIMODULES = ("scalar", "spinor", "defining", "trivial")

DESCRIPTION = (
    "Casimir radial parts for so(p+1,q+1) symmetric pairs.\n"
    "Every command prints one JSON document (or text with --format text)\n"
    "that embeds the resolved run configuration. Floats are written with\n"
    "Python's shortest round-trip repr."
)


@dataclass(slots=True)
class RunConfig:
    command: str
    signature: Signature
    pair_kind: PairKind = PairKind.FOURPOINT
    p_defect: Optional[int] = None
    cartan: Optional[str] = None
    bimodule: str = "scalar"
    alpha: float = 0.0
    beta: float = 0.0
    suite: Optional[str] = None
    chi: List[complex] = field(default_factory=list)
    matrix: Optional[str] = None
    output: str = "json"
    allow_exploratory: bool = False
    tolerances: Tolerances = field(default_factory=Tolerances)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "signature": self.signature.to_dict(),
            "pair_kind": self.pair_kind.value,
            "p_defect": self.p_defect,
            "cartan": self.cartan,
            "bimodule": self.bimodule,
            "alpha": self.alpha,
            "beta": self.beta,
            "suite": self.suite,
            "chi": [complex_pair(c) for c in self.chi],
            "matrix": self.matrix,
            "format": self.output,
            "allow_exploratory": self.allow_exploratory,
            "tolerances": self.tolerances.to_dict(),
        }


def _signature_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--p", type=int, default=3, help="p in so(p+1,q+1) (default 3)")
    parser.add_argument("--q", type=int, default=0, help="q in so(p+1,q+1) (default 0)")
    parser.add_argument("--pair", choices=[k.value for k in PairKind], default=PairKind.FOURPOINT.value)
    parser.add_argument(
        "--defect",
        "--p-defect",
        dest="p_defect",
        type=int,
        default=None,
        help="defect dimension (selects --pair defect)",
    )
    parser.add_argument("--allow-exploratory", action="store_true", help="accept signatures outside p >= q, d > 2")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--verbose", action="store_true", help="log at INFO instead of WARNING")
    common.add_argument("--seed", type=int, default=None, help="override the random seed")
    common.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE", help="override one tolerance")
    common.add_argument("--config", default=DEFAULT_CONFIG_PATH, help="tolerance file (JSON object)")
    common.add_argument("--format", choices=["json", "text"], default="json")

    parser = argparse.ArgumentParser(prog="mscasimir", description=DESCRIPTION)
    sub = parser.add_subparsers(dest="command", required=True)

    rootdata = sub.add_parser("rootdata", parents=[common], help="restricted root data of a Cartan subset")
    _signature_args(rootdata)
    rootdata.add_argument("--cartan", default=None, help="Cartan subset label (default: first cataloged)")

    cartan = sub.add_parser("cartan", parents=[common], help="list the cataloged Cartan subsets")
    _signature_args(cartan)

    radial = sub.add_parser("radial", parents=[common], help="radial part of the Casimir")
    _signature_args(radial)
    radial.add_argument("--cartan", default=None)
    radial.add_argument(
        "--bimodule",
        default="scalar",
        help=f"one of {', '.join(BUILTIN_BIMODULES)} or a bimodule JSON file",
    )
    radial.add_argument("--alpha", type=float, default=0.0)
    radial.add_argument("--beta", type=float, default=0.0)

    verify = sub.add_parser("verify", parents=[common], help="run verification suites")
    verify.add_argument("--suite", choices=[*SUITES, "all"], default="all")

    coords = sub.add_parser("coords", parents=[common], help="cross-ratio coordinates")
    coords.add_argument("action", choices=["classify", "uv"])
    coords.add_argument("--chi", default=None, help="both coordinates as complex numbers, e.g. 0.4,1.3+3.14159j")
    coords.add_argument("--chi1", default=None, metavar="RE,IM")
    coords.add_argument("--chi2", default=None, metavar="RE,IM")
    coords.add_argument("--matrix", default=None, help="group element JSON for uv (corner cross ratios)")
    return parser


def parse_chi(text: str) -> List[complex]:
    try:
        values = [complex(item.strip().replace(" ", "")) for item in text.split(",")]
    except ValueError as exc:
        raise ValidationError(f"cannot parse chi {text!r}") from exc
    if len(values) != 2:
        raise ValidationError(f"chi needs two entries, got {len(values)}")
    return values


def parse_coordinate(text: str) -> complex:
    """"re,im" or a single complex literal."""
    parts = [item.strip() for item in text.split(",")]
    try:
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
        if len(parts) == 1:
            return complex(parts[0].replace(" ", ""))
    except ValueError as exc:
        raise ValidationError(f"cannot parse coordinate {text!r}") from exc
    raise ValidationError(f"coordinate needs re,im, got {text!r}")


def _coords_point(args: argparse.Namespace) -> List[complex]:
    if args.chi is not None:
        if args.chi1 is not None or args.chi2 is not None:
            raise ValidationError("give either --chi or --chi1/--chi2")
        return parse_chi(args.chi)
    if (args.chi1 is None) != (args.chi2 is None):
        raise ValidationError("--chi1 and --chi2 go together")
    if args.chi1 is not None and args.chi2 is not None:
        return [parse_coordinate(args.chi1), parse_coordinate(args.chi2)]
    if args.matrix is not None:
        return []
    raise ValidationError("coords needs --chi, --chi1 and --chi2, or --matrix")


def resolve_config(args: argparse.Namespace) -> RunConfig:
    tolerances = load_tolerances(args.config).with_overrides(args.tol)
    if args.seed is not None:
        tolerances.seed = args.seed
    cfg = RunConfig(
        command=args.command,
        signature=Signature(getattr(args, "p", 3), getattr(args, "q", 0)),
        output=args.format,
        tolerances=tolerances,
    )
    if hasattr(args, "pair"):
        cfg.pair_kind = PairKind.DEFECT if args.p_defect is not None else PairKind(args.pair)
        cfg.p_defect = args.p_defect
        cfg.allow_exploratory = args.allow_exploratory
    cfg.cartan = getattr(args, "cartan", None)
    if args.command == "radial":
        cfg.bimodule, cfg.alpha, cfg.beta = args.bimodule, args.alpha, args.beta
    if args.command == "verify":
        cfg.suite = args.suite
    if args.command == "coords":
        cfg.suite = args.action
        if args.matrix is not None and args.action != "uv":
            raise ValidationError("--matrix only applies to uv")
        cfg.matrix = args.matrix
        cfg.chi = _coords_point(args)
        if cfg.matrix is not None and cfg.chi:
            raise ValidationError("give either a point or --matrix")

    return cfg


def to_jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return complex_pair(value)
    return value


def dump(cfg: RunConfig, result: Any) -> str:
    payload = {"schema": SCHEMA, "config": cfg.to_dict(), "result": result}
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2)


def _algebra(cfg: RunConfig) -> LieAlgebra:
    return build_algebra(
        cfg.signature, pair_kind=cfg.pair_kind, p_defect=cfg.p_defect, allow_exploratory=cfg.allow_exploratory
    )


def _spec(cfg: RunConfig, algebra: LieAlgebra):
    specs = catalog_for(algebra, cfg.tolerances)
    if cfg.cartan is None:
        return specs[0]
    return find_spec(specs, cfg.cartan)


def make_bimodule(cfg: RunConfig, algebra: LieAlgebra) -> Bimodule:
    if cfg.bimodule == "scalar":
        return scalar_bimodule(algebra, cfg.alpha, cfg.beta)
    if cfg.bimodule == "spinor":
        return spinor_bimodule(algebra, cfg.alpha, cfg.beta)
    if cfg.bimodule == "defining":
        return defining_bimodule(algebra)
    if cfg.bimodule == "trivial":
        return trivial_bimodule()
    w = load_bimodule(algebra, cfg.bimodule)
    validate_bimodule(algebra, w, cfg.tolerances.residual)
    return w


def cmd_rootdata(cfg: RunConfig) -> tuple[int, str]:
    algebra = _algebra(cfg)
    spec = _spec(cfg, algebra)
    name, mults = root_type(algebra, spec.decomposition, spec.rank2_name)
    result = {
        "cartan": spec.to_dict(),
        "root_type": name,
        "multiplicities": mults,
        "decomposition": spec.decomposition.to_dict(),
    }
    text = render_rootdata(to_jsonable(result)) if cfg.output == "text" else dump(cfg, result)
    return EXIT_OK, text


def cmd_cartan(cfg: RunConfig) -> tuple[int, str]:
    algebra = _algebra(cfg)
    specs = [spec.to_dict() for spec in catalog_for(algebra, cfg.tolerances)]
    text = render_catalog(specs) if cfg.output == "text" else dump(cfg, {"cartans": specs})
    return EXIT_OK, text


def cmd_radial(cfg: RunConfig) -> tuple[int, str]:
    algebra = _algebra(cfg)
    spec = _spec(cfg, algebra)
    w = make_bimodule(cfg, algebra)
    op = radial_casimir(algebra, spec, w, cfg.tolerances)
    if cfg.output == "text":
        return EXIT_OK, render_radial(op)
    result = {"cartan": spec.label, "bimodule": w.to_dict(algebra.labels()), "operator": op.to_dict()}
    return EXIT_OK, dump(cfg, result)


def cmd_verify(cfg: RunConfig) -> tuple[int, str]:
    reports = run_suite(cfg.suite or "all", cfg.tolerances)
    code = EXIT_OK if all(report.passed for report in reports) else EXIT_FAILED
    if cfg.output == "text":
        return code, render_suites(reports)
    return code, dump(cfg, {"suites": [report.to_dict() for report in reports]})


def cmd_coords(cfg: RunConfig) -> tuple[int, str]:
    if cfg.matrix is not None:
        u, v = cross_ratios_from_corners(load_group_element(cfg.matrix), cfg.tolerances.coords)
        result: Dict[str, Any] = {"u": u, "v": v}
        text = render_coords(to_jsonable(result)) if cfg.output == "text" else dump(cfg, result)
        return EXIT_OK, text
    pt = ChiPoint(coords=np.asarray(cfg.chi, dtype=complex))
    if cfg.suite == "uv":
        u, v = f_map(pt.coords, cfg.tolerances.coords)
        z, zbar = z_zbar(pt.coords)
        result = {"u": u, "v": v, "z": z, "zbar": zbar}
    else:
        reduction = weyl_reduce(pt, cfg.tolerances.wall)
        result = reduction.to_dict()
        if reduction.region is not None:
            result.update(describe_point(reduction.representative, cfg.tolerances.wall))
    text = render_coords(to_jsonable(result)) if cfg.output == "text" else dump(cfg, result)
    return EXIT_OK, text


COMMANDS = {
    "rootdata": cmd_rootdata,
    "cartan": cmd_cartan,
    "radial": cmd_radial,
    "verify": cmd_verify,
    "coords": cmd_coords,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        level=logging.INFO if args.verbose else logging.WARNING,
    )
    try:
        cfg = resolve_config(args)
        code, text = COMMANDS[cfg.command](cfg)
    except (SignatureError, ValidationError, ConfigError) as exc:
        logger.exception("invalid input")
        print(json.dumps({"schema": SCHEMA, "error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_INVALID
    except MscasimirError as exc:
        logger.exception("computation failed")
        print(json.dumps({"schema": SCHEMA, "error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_FAILED
    print(text)
    return code
