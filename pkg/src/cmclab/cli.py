"""Command-line front end: ``verify``, ``roots``, ``generate`` and ``convergence``.

Exit codes: 0 all applicable verdicts pass, 1 a residual verdict failed,
2 input error.  JSON output is the contract; tables are a convenience view.
Floats are written with 17 significant digits so reports round-trip exactly
and are byte-identical across runs.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from importlib.metadata import PackageNotFoundError, version

import jsonschema
import numpy as np

from . import catalog, identities, thresholds
from .ambient import ChartDomainError
from .calculus import GridError, GridSpec, SurfaceGrid
from .catalog import CatalogError
from .expr import ExprError
from .immersion import DegenerateImmersionError, NotCMCError
from .profile import AXIS_EPS, ProfileError

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
DEFAULT_NODE_LIMIT = 1024 * 1024

_RANGE = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
DEFINITION_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema", "c", "source"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "c": {"enum": [1, -1]},
        "source": {
            "type": "object",
            "minProperties": 1,
            "maxProperties": 1,
            "additionalProperties": False,
            "properties": {
                "catalog": {
                    "type": "object",
                    "required": ["kind"],
                    "additionalProperties": False,
                    "properties": {
                        "kind": {"enum": [k for k in catalog.KINDS if k != "custom"]},
                        "H": {"type": "number"},
                        "t0": {"type": "number"},
                        "neck_radius": {"type": "number", "exclusiveMinimum": 0},
                    },
                },
                "custom": {
                    "type": "object",
                    "required": ["u", "v", "t"],
                    "additionalProperties": False,
                    "properties": {
                        "u": {"type": "string"},
                        "v": {"type": "string"},
                        "t": {"type": "string"},
                        "params": {"type": "object", "additionalProperties": {"type": "number"}},
                    },
                },
            },
        },
        "domain": {
            "type": "object",
            "required": ["x", "y", "nx", "ny"],
            "additionalProperties": False,
            "properties": {
                "x": _RANGE,
                "y": _RANGE,
                "nx": {"type": "integer", "minimum": 5},
                "ny": {"type": "integer", "minimum": 5},
                "periodic_x": {"type": "boolean"},
                "periodic_y": {"type": "boolean"},
            },
        },
        "declared": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"complete": {"type": "boolean"}, "closed": {"type": "boolean"}},
        },
        "jet_order": {"type": "integer", "minimum": 3, "maximum": 8},
        "profile": {"type": "object"},
    },
}


class InputError(Exception):
    """Anything wrong with the user's input; always exit code 2."""


def tool_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:  # pragma: no cover - running from a source tree
        return "0.0.0"


# -- deterministic JSON ---------------------------------------------------------


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with 17-significant-digit floats and sorted-free, insertion-ordered keys."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


# -- surface definitions -----------------------------------------------------------


def load_definition(path: str) -> dict:
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    validate_definition(doc, path)
    return doc


def validate_definition(doc, origin: str = "<definition>"):
    validator = jsonschema.Draft202012Validator(DEFINITION_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = "/" + "/".join(str(p) for p in err.absolute_path)
        raise InputError(f"{origin}: schema violation at {where}: {err.message}")


def _grid_override(text: str | None):
    if text is None:
        return None
    try:
        nx, ny = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise InputError(f"--grid expects NxM, got {text!r}") from None
    return nx, ny


def build_surface(doc: dict, grid: tuple[int, int] | None = None, jet_order: int | None = None) -> SurfaceGrid:
    """Turn a validated definition into a grid; library errors become :class:`InputError`."""
    c = doc["c"]
    order = jet_order or doc.get("jet_order", 3)
    try:
        if "catalog" in doc["source"]:
            src = doc["source"]["catalog"]
            kind = src["kind"]
            spec = catalog.CatalogSpec(kind=kind, c=c, H=src.get("H"), t0=src.get("t0", 0.0),
                                       neck_radius=src.get("neck_radius"))
        else:
            src = doc["source"]["custom"]
            spec = catalog.CatalogSpec(kind="custom", c=c, exprs=(src["u"], src["v"], src["t"]),
                                       params=dict(src.get("params", {})))
        if "domain" in doc:
            d = doc["domain"]
            gspec = GridSpec(tuple(d["x"]), tuple(d["y"]), d["nx"], d["ny"],
                             d.get("periodic_x", False), d.get("periodic_y", False))
        elif spec.kind == "custom":
            raise InputError("custom surfaces need a domain")
        else:
            gspec = spec.grid_spec()
        if grid is not None:
            gspec = gspec.with_nodes(*grid)
        spec.grid = gspec
        return spec.build(order)
    except InputError:
        raise
    except (CatalogError, ExprError, ChartDomainError, DegenerateImmersionError, GridError, ProfileError,
            NotCMCError, ValueError) as exc:
        raise InputError(f"{type(exc).__name__}: {exc}") from None


def declared_flags(doc: dict) -> tuple[bool, bool]:
    d = doc.get("declared", {})
    return bool(d.get("complete", False)), bool(d.get("closed", False))


def _check_nodes(spec: GridSpec, levels: int, limit: int):
    nx, ny = spec.nx, spec.ny
    for _ in range(levels):
        if nx * ny > limit:
            raise InputError(f"refinement would need a {nx}x{ny} grid, above the node limit {limit}")
        s = GridSpec(spec.x, spec.y, nx, ny, spec.periodic_x, spec.periodic_y).refined()
        nx, ny = s.nx, s.ny


# -- reports -------------------------------------------------------------------------


def _apply_severity(reports, published_flag: bool):
    for r in reports:
        if r.id == "simons_S_published" and r.verdict != "not-applicable":
            r.severity = "warning" if published_flag else "info"
    return reports


def run_report(doc: dict, grids: list[SurfaceGrid], tolerance: float, published_flag: bool) -> tuple[dict, int]:
    reports = _apply_severity(identities.run_ledger(grids, tolerance=tolerance), published_flag)
    grid = grids[0]
    inv = thresholds.SurfaceInvariants.from_shape(grid.shape)
    complete, closed = declared_flags(doc)
    thr = thresholds.classify(inv, grid.c, complete=complete, closed=closed)
    failures = [r.id for r in reports if r.verdict == "fail" and r.severity == "error"]
    flagged = [
        {"id": r.id, "severity": r.severity, "sup": r.sup, "status": r.status,
         "note": "documented discrepancy between the published and the re-derived S-equation"}
        for r in reports
        if r.id == "simons_S_published" and r.verdict != "not-applicable" and r.sup > identities.EXACT_TOL
    ]
    code = EXIT_FAIL if failures else EXIT_OK
    report = {
        "schema": SCHEMA_VERSION,
        "tool": {"name": "cmclab", "version": tool_version()},
        "surface": doc,
        "grid": grids[-1].spec.to_dict(),
        "levels": len(grids),
        "invariants": inv.to_dict(),
        "residuals": [r.to_dict() for r in reports],
        "thresholds": thr.to_dict(),
        "status": {"exit_code": code, "failures": failures, "flagged": flagged},
    }
    return report, code


def format_table(report: dict) -> str:
    lines = [f"{'identity':22s} {'kind':8s} {'sup':>12s} {'order':>7s}  verdict / status"]
    for r in report["residuals"]:
        order = "" if r["order"] is None else f"{r['order']:.2f}"
        sup = "n/a" if r["sup"] is None or (isinstance(r["sup"], float) and math.isnan(r["sup"])) else f"{r['sup']:.4e}"
        sev = "" if r["severity"] == "error" else f" [{r['severity']}]"
        lines.append(f"{r['id']:22s} {r['kind']:8s} {sup:>12s} {order:>7s}  {r['verdict']} / {r['status']}{sev}")
    inv = report["invariants"]
    lines.append("")
    lines.append(f"H = {inv['H']:.10g}   cmc deviation = {inv['cmc_deviation']:.3e}   sup|S| = {inv['sup_S']:.10g}")
    for t in report["thresholds"]["theorems"]:
        lines.append(f"  {t['id']:32s} {t['verdict']}")
    lines.append(f"exit status {report['status']['exit_code']}")
    return "\n".join(lines)


def _emit(obj_text: str, table: str | None, output: str | None, fmt: str):
    if output and output != "-":
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(obj_text + "\n")
        if table:
            print(table)
    elif fmt == "table" and table:
        print(table)
    else:
        sys.stdout.write(obj_text + "\n")


def _sanitize(report):
    """Replace non-finite floats by ``None`` so the JSON carries ``null``."""
    if isinstance(report, dict):
        return {k: _sanitize(v) for k, v in report.items()}
    if isinstance(report, (list, tuple)):
        return [_sanitize(v) for v in report]
    if isinstance(report, float) and not math.isfinite(report):
        return None
    return report


# -- subcommands ---------------------------------------------------------------------------


def cmd_verify(args) -> int:
    doc = load_definition(args.definition)
    grid = build_surface(doc, _grid_override(args.grid), args.jet_order)
    levels = 2 if args.refine else 1
    _check_nodes(grid.spec, levels, args.max_nodes)
    grids = identities.refinement_levels(grid, levels)
    report, code = run_report(doc, grids, args.tolerance, args.published_simons)
    report = _sanitize(report)
    _emit(dumps(report), format_table(report), args.output, args.format)
    return code


def cmd_roots(args) -> int:
    if args.H:
        Hs = list(args.H)
    else:
        if args.num < 1 or args.H_max < args.H_min:
            raise InputError("empty H range")
        Hs = list(np.linspace(args.H_min, args.H_max, args.num))
    if not Hs:
        raise InputError("empty H range")
    if any(h <= 0 for h in Hs):
        raise InputError("H values must be positive")
    rows = thresholds.roots_table(Hs)
    doc = {"schema": SCHEMA_VERSION, "H_star": thresholds.H_STAR, "rows": rows}
    lines = [f"{'H':>12s} {'L_H':>20s} {'|p_H(L_H)|':>12s} {'M_H':>20s} {'|q_H(M_H)|':>12s}"]
    for r in rows:
        cell = lambda v, w, f: ("n/a" if v is None else format(v, f)).rjust(w)  # noqa: E731
        lines.append(f"{r['H']:12.6g} {cell(r['L_H'], 20, '.15g')} {cell(r['p_residual'], 12, '.2e')} "
                     f"{cell(r['M_H'], 20, '.15g')} {cell(r['q_residual'], 12, '.2e')}")
    _emit(dumps(doc), "\n".join(lines), args.output, args.format)
    return EXIT_OK


def cmd_generate(args) -> int:
    source = {"kind": args.kind}
    if args.H is not None:
        source["H"] = args.H
    if args.kind == "slice":
        source["t0"] = args.t0
    if args.neck_radius is not None:
        source["neck_radius"] = args.neck_radius
    c = -1 if args.kind == "vertical_plane" else args.c
    doc = {"schema": SCHEMA_VERSION, "c": c, "source": {"catalog": source}}
    try:
        cspec = catalog.CatalogSpec(kind=args.kind, c=c, H=args.H, t0=args.t0, neck_radius=args.neck_radius)
        nx, ny = _grid_override(args.grid) or (33, 33)
        gspec = cspec.grid_spec(nx, ny)
    except (CatalogError, ProfileError, GridError, ValueError) as exc:
        raise InputError(f"{type(exc).__name__}: {exc}") from None
    doc["domain"] = gspec.to_dict()
    doc["declared"] = {
        "complete": args.kind in ("slice", "vertical_plane", "cmc_cylinder", "rotational_cmc_sphere"),
        "closed": args.kind == "rotational_cmc_sphere",
    }
    doc["jet_order"] = args.jet_order or 3
    if args.kind == "rotational_cmc_sphere":
        prof = catalog.cached_sphere_profile(c, args.H)
        doc["profile"] = {
            "length": prof.length,
            "axis_offset": float(AXIS_EPS),
            "columns": ["s", "rho", "t", "sigma"],
            "table": prof.table(args.profile_rows),
        }
    validate_definition(doc)
    grid = build_surface(doc)
    inv = thresholds.SurfaceInvariants.from_shape(grid.shape)
    summary = {"kind": args.kind, "c": c, "H_achieved": inv.H, "cmc_deviation": inv.cmc_deviation,
               "sup_S": inv.sup_S, "grid": gspec.to_dict()}
    text = dumps(doc)
    if args.output and args.output != "-":
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        print(dumps(_sanitize(summary)) if args.format == "json" else
              f"{args.kind}: H = {inv.H:.12g}, cmc deviation = {inv.cmc_deviation:.3e}, sup|S| = {inv.sup_S:.12g}")
    else:
        sys.stdout.write(text + "\n")
        print(f"{args.kind}: H = {inv.H:.12g}, cmc deviation = {inv.cmc_deviation:.3e}, "
              f"sup|S| = {inv.sup_S:.12g}", file=sys.stderr)
    return EXIT_OK


def cmd_convergence(args) -> int:
    if args.levels < 2:
        raise InputError("convergence needs at least 2 levels")
    doc = load_definition(args.definition)
    grid = build_surface(doc, _grid_override(args.grid), args.jet_order)
    _check_nodes(grid.spec, args.levels, args.max_nodes)
    grids = identities.refinement_levels(grid, args.levels)
    reports = _apply_severity(identities.run_ledger(grids, identities.GRID_IDENTITIES, args.tolerance),
                              args.published_simons)
    rows = []
    for r in reports:
        rows.append({
            "id": r.id,
            "sup_by_level": r.parts.get("sup_by_level"),
            "orders": r.parts.get("orders"),
            "verdict": r.verdict,
            "status": r.status,
            "severity": r.severity,
        })
    failures = [r.id for r in reports if r.verdict == "fail" and r.severity == "error"]
    code = EXIT_FAIL if failures else EXIT_OK
    out = _sanitize({
        "schema": SCHEMA_VERSION,
        "tool": {"name": "cmclab", "version": tool_version()},
        "surface": doc,
        "levels": [g.spec.to_dict() for g in grids],
        "identities": rows,
        "status": {"exit_code": code, "failures": failures},
    })
    lines = [f"{'identity':22s} " + " ".join(f"{'sup@' + str(g.spec.nx) + 'x' + str(g.spec.ny):>14s}" for g in grids)
             + "   orders            status"]
    for row in out["identities"]:
        sups = row["sup_by_level"] or [None] * len(grids)
        orders = ", ".join("inf" if o is None else f"{o:.2f}" for o in (row["orders"] or []))
        lines.append(f"{row['id']:22s} " + " ".join(("n/a" if s is None else f"{s:.4e}").rjust(14) for s in sups)
                     + f"   {orders:16s}  {row['status']}" + ("" if row["severity"] == "error" else f" [{row['severity']}]"))
    _emit(dumps(out), "\n".join(lines), args.output, args.format)
    return code


# -- entry point ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cmclab", description="Residual checks for CMC surfaces in M^2(c) x R.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {tool_version()}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, definition=True):
        if definition:
            p.add_argument("definition", help="surface-definition JSON file ('-' for stdin)")
            p.add_argument("--grid", metavar="NxM", help="override the node counts")
            p.add_argument("--jet-order", type=int, choices=range(3, 9), metavar="K", help="jet order (3-8)")
            p.add_argument("--tolerance", type=float, default=identities.ANALYTIC_TOL,
                           help="absolute tolerance for pointwise identities")
            p.add_argument("--published-simons", action="store_true",
                           help="grade the published S-equation as a warning instead of information")
            p.add_argument("--max-nodes", type=int, default=DEFAULT_NODE_LIMIT, help="node limit per level")
        p.add_argument("-o", "--output", help="write JSON here ('-' for stdout)")
        p.add_argument("--format", choices=("json", "table"), default="json")

    p = sub.add_parser("verify", help="run the residual ledger and the theorem classifier")
    common(p)
    p.add_argument("--refine", action="store_true", help="also run the h/2 grid and report observed orders")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("roots", help="tabulate L_H and M_H")
    common(p, definition=False)
    p.add_argument("--H", type=float, nargs="+", help="explicit H values")
    p.add_argument("--H-min", type=float, default=0.5)
    p.add_argument("--H-max", type=float, default=3.0)
    p.add_argument("--num", type=int, default=11)
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("generate", help="write a surface definition for a catalog surface")
    common(p, definition=False)
    p.add_argument("kind", choices=[k for k in catalog.KINDS if k != "custom"])
    p.add_argument("--c", type=int, choices=(1, -1), default=1)
    p.add_argument("--H", type=float)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--neck-radius", type=float)
    p.add_argument("--grid", metavar="NxM")
    p.add_argument("--jet-order", type=int, choices=range(3, 9), metavar="K")
    p.add_argument("--profile-rows", type=int, default=65)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("convergence", help="refinement study of the grid identities")
    common(p)
    p.add_argument("--levels", type=int, default=3)
    p.set_defaults(func=cmd_convergence)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2 already
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"cmclab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
