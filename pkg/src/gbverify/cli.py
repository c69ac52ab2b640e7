"""Command-line driver: ``gbverify {pf,angles,gb-const,gb-surface,transgression,all}``.

Exit status is 0 when every check passes, 1 when one fails and 2 for
malformed input. Reports are deterministic for fixed inputs, seed,
sample count and quadrature settings.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .calculus import Polynomial
from .io import InputError, load_input
from .multilinear import BilinearForm, SkewForm, pfaffian, pfaffian_matching
from .polytope import Polytope, euclidean_angle_sum
from .report import Report
from .spaceforms import GeodesicPolytope, gauss_bonnet_constant_curvature, ideal_4simplex_volume_check
from .suites import SUITES, SuiteConfig
from .surface import region_from_json, surface_gauss_bonnet
from .transgression import AngleFamily, ConnectionChart, NormalizedFamily, pf_closed_check, verify_transgression_derivative

COMMANDS = ("pf", "angles", "gb-const", "gb-surface", "transgression", "all")
# --suite names for the transgression command; the short labels are accepted aliases
TRANSGRESSION_SUITES = {
    "standard": "transgression",
    "experimental": "transgression-experimental",
    "thT": "transgression",
    "thT-experimental": "transgression-experimental",
}


def _parse_tol(items: Sequence[str]) -> Dict[str, float]:
    out = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"--tol expects name=value, got {item!r}")
        out[name.strip()] = float(value)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gbverify", description="Numerical checks of Gauss-Bonnet identities.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--input", help="JSON input; without it the built-in suite runs")
        p.add_argument("--seed", type=int, default=7)
        p.add_argument("--samples", type=int, default=1_000_000)
        p.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE", help="override a check's tolerance")
        p.add_argument("--quad-points", type=int, default=32)
        p.add_argument("--grid-points", type=int, default=9, help="probe grid points per axis")
        p.add_argument("--output", help="write the report document here")
        p.add_argument("--format", choices=("json", "markdown"), default="json")
        if name == "transgression":
            p.add_argument("--suite", choices=tuple(TRANSGRESSION_SUITES), default="standard")
    return parser


# ---------------------------------------------------------------- input handlers


def _pf_from_input(data, cfg: SuiteConfig) -> List[Report]:
    if "omega" in data:
        return [pf_closed_check(ConnectionChart.from_json(data), cfg.points_per_axis)]
    out = []
    for i, item in enumerate(data["matrices"]):
        entries = np.asarray(item["entries"], dtype=float)
        signs = item.get("signature", [1] * len(entries))
        a = SkewForm(BilinearForm(tuple(signs)), entries)
        ha = a.form.matrix @ a.entries
        pf = pfaffian(a)
        scale = max(1.0, float(np.abs(ha).max())) ** (len(ha) // 2)
        out.append(Report(f"pf_matrix{i}", pf, pfaffian_matching(ha), 0.0, 1e-12 * scale, None, {"oracle": "matching expansion"}))
        det = float(np.linalg.det(ha))
        out.append(Report(f"pf_squared_det{i}", pf * pf, det, 0.0, 1e-9 * max(abs(det), 1e-300), None))
    return out


def _family_from_json(spec, base_dim: int, h: BilinearForm):
    l = int(spec.get("param_dim", 0))
    nvars = base_dim + l
    if spec["kind"] == "angle":
        if "theta" not in spec:
            raise InputError("angle family needs 'theta'")
        return AngleFamily(Polynomial.from_terms(nvars, spec["theta"]), l)
    if "components" not in spec:
        raise InputError("normalized family needs 'components'")
    return NormalizedFamily([Polynomial.from_terms(nvars, c) for c in spec["components"]], h, l)


def _transgression_from_input(data, cfg: SuiteConfig) -> List[Report]:
    chart = ConnectionChart.from_json(data["connection"])
    family = _family_from_json(data["family"], chart.base_dim, chart.h)
    allow = family.param_dim > 1
    return [verify_transgression_derivative(chart, family, cfg.points_per_axis, cfg.quad_points, data.get("mode"), allow_experimental=allow)]


def _gb_from_input(data, cfg: SuiteConfig) -> List[Report]:
    poly = GeodesicPolytope.from_json(data)
    if any(poly.ideal):
        return [ideal_4simplex_volume_check(poly, cfg.seed, cfg.samples)]
    return [gauss_bonnet_constant_curvature(poly, cfg.seed, cfg.samples)]


HANDLERS = {
    "pf": _pf_from_input,
    "angles": lambda data, cfg: [euclidean_angle_sum(Polytope.from_json(data), cfg.seed, cfg.samples)],
    "gb-const": _gb_from_input,
    "gb-surface": lambda data, cfg: [surface_gauss_bonnet(region_from_json(data))],
    "transgression": _transgression_from_input,
}


# ---------------------------------------------------------------- driver


def apply_tolerances(reports: List[Report], overrides: Dict[str, float]) -> None:
    for r in reports:
        if r.check in overrides:
            r.tolerance = overrides[r.check]
            r.passed = bool(r.discrepancy <= r.abs_error + r.tolerance)


def collect(command: str, cfg: SuiteConfig, data=None, suite: Optional[str] = None) -> List[Report]:
    if data is not None:
        return HANDLERS[command](data, cfg)
    if command == "all":
        names = ["pf", "angles", "gb-const", "gb-surface", "transgression"]
        return [r for n in names for r in SUITES[n](cfg)]
    if command == "transgression":
        return SUITES[TRANSGRESSION_SUITES[suite or "standard"]](cfg)
    return SUITES[command](cfg)


def document(command, cfg: SuiteConfig, reports: List[Report], inputs, suite=None) -> dict:
    passed = sum(bool(r.passed) for r in reports)
    return {
        "tool": "gbverify",
        "version": __version__,
        "command": command,
        "config": {
            "seed": cfg.seed,
            "samples": cfg.samples,
            "quad_points": cfg.quad_points,
            "grid_points": cfg.points_per_axis,
            "tolerances": dict(sorted(cfg.tolerances.items())),
            "suite": suite,
        },
        "inputs": inputs,
        "pass": passed == len(reports),
        "summary": {"total": len(reports), "passed": passed},
        "reports": [r.to_dict() for r in reports],
    }


def render(doc: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(doc, indent=2) + "\n"
    lines = [
        f"# gbverify {doc['command']}",
        "",
        f"seed {doc['config']['seed']}, samples {doc['config']['samples']}, "
        f"{doc['summary']['passed']}/{doc['summary']['total']} passed",
        "",
        "| check | case | lhs | rhs | abs_error | tolerance | pass |",
        "|---|---|---|---|---|---|---|",
    ]
    for r in doc["reports"]:
        lines.append(
            f"| {r['check']} | {r.get('case', '')} | {r['lhs']!r} | {r['rhs']!r} | {r['abs_error']!r} | {r['tolerance']!r} | {'yes' if r['pass'] else 'NO'} |"
        )
    return "\n".join(lines) + "\n"


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        tolerances = _parse_tol(args.tol)
    except (argparse.ArgumentTypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    cfg = SuiteConfig(args.seed, args.samples, args.quad_points, args.grid_points, tolerances)
    suite = getattr(args, "suite", None)
    inputs = []
    data = None
    try:
        if args.input:
            if args.command == "all":
                raise InputError("'all' runs the built-in suites and takes no --input")
            data, digest = load_input(args.input, args.command)
            inputs.append({"path": args.input, "sha256": digest})
        reports = collect(args.command, cfg, data, suite)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError, IndexError) as exc:
        if data is None and not args.input:
            raise
        print(f"error: invalid input {args.input}: {exc}", file=sys.stderr)
        return 2
    apply_tolerances(reports, tolerances)
    doc = document(args.command, cfg, reports, inputs, suite)
    text = render(doc, args.format)
    if args.output:
        Path(args.output).write_text(text)
        for r in reports:
            print(r.line())
    else:
        sys.stdout.write(text)
    return 0 if doc["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
