"""Command-line front end.

One command per invocation; reports go to standard error, artifacts to the
output directory, and the exit code mirrors the report severity: 0 clean,
1 warnings, 2 errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import layout as layout_mod
from .analysis import AnalysisError, neurulated_groups, soma_processes
from .composer import CACHE_ENV_VAR, CachePolicy, join, merge, resolve_imports
from .document import canonical_dumps, from_document, serialize_model, to_document
from .editor import EditError, run_script
from .exporter import (
    DEFAULT_BASE_IRI,
    output_names,
    serialize_generated,
    serialize_jsonld,
    serialize_resource_map,
)
from .generator import generate
from .resources import ModelSpec
from .schema import Severity, ValidationReport, render_report, validate_references, validate_syntax
from .tabular import load_tabular_model, spec_to_workbook, write_csv_bundle


def _exit_code(report: ValidationReport) -> int:
    return {Severity.NONE: 0, Severity.WARNING: 1, Severity.ERROR: 2}[report.max_severity]


def _emit_report(report: ValidationReport) -> None:
    print(render_report(report), file=sys.stderr)


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _is_tabular(path: str) -> bool:
    return path != "-" and (Path(path).is_dir() or Path(path).suffix.lower() == ".xlsx")


def _load_model(path: str, report: ValidationReport) -> ModelSpec | None:
    """Load a model from JSON, an XLSX workbook, or a CSV bundle."""
    if _is_tabular(path):
        model, tab_report = load_tabular_model(path)
        report.extend(tab_report)
        doc = to_document(model, include_external=False)
        report.extend(validate_syntax(doc))
        return None if not report.ok() else model
    text = _read_text(path)
    syntax = validate_syntax(text)
    report.extend(syntax)
    if not syntax.ok():
        return None
    return from_document(json.loads(text), report)


def _stem(path: str) -> str:
    return "model" if path == "-" else Path(path).stem


def _link_imports(model: ModelSpec, args, report: ValidationReport) -> None:
    if not model.imports:
        return
    if getattr(args, "import_cache", None):
        os.environ[CACHE_ENV_VAR] = args.import_cache
    policy = CachePolicy.ALWAYS_FETCH if getattr(args, "always_fetch", False) else CachePolicy.CACHE_OK
    _, import_report = resolve_imports(model, policy=policy)
    report.extend(import_report)


def _generated(model: ModelSpec, report: ValidationReport):
    result = generate(model)
    report.extend(result.report)
    return result.model


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    report = ValidationReport()
    model = _load_model(args.model, report)
    if model is not None:
        _link_imports(model, args, report)
        linked = {m.namespace for m in model.imported}
        report.extend(validate_references(model, linked))
    _emit_report(report)
    return _exit_code(report)


def cmd_convert(args) -> int:
    report = ValidationReport()
    model = _load_model(args.input, report)
    if model is None:
        _emit_report(report)
        return _exit_code(report)
    out = Path(args.output)
    if out.suffix.lower() == ".json":
        _write(out, serialize_model(model))
    elif out.suffix.lower() == ".xlsx":
        report.error("format", "XLSX output is not supported; emit a CSV bundle or JSON", None, str(out))
    else:
        write_csv_bundle(spec_to_workbook(model), out)
    _emit_report(report)
    return _exit_code(report)


def cmd_generate(args) -> int:
    report = ValidationReport()
    model = _load_model(args.model, report)
    if model is None:
        _emit_report(report)
        return 2
    _link_imports(model, args, report)
    linked = {m.namespace for m in model.imported}
    report.extend(validate_references(model, linked))
    if not report.ok():
        _emit_report(report)
        return 2
    gen = _generated(model, report)
    if gen is not None and report.ok():
        out = Path(args.output) / output_names(_stem(args.model))["generated"]
        _write(out, serialize_generated(gen))
        print(out)
    _emit_report(report)
    return _exit_code(report)


def cmd_merge(args) -> int:
    return _combine(args, merge)


def cmd_join(args) -> int:
    return _combine(args, join)


def _combine(args, how) -> int:
    report = ValidationReport()
    base = _load_model(args.base, report)
    other = _load_model(args.other, report)
    if base is None or other is None:
        _emit_report(report)
        return 2
    combined, combine_report = how(base, other)
    report.extend(combine_report)
    _write(Path(args.output), serialize_model(combined))
    _emit_report(report)
    return _exit_code(report)


def cmd_neurulate(args) -> int:
    report = ValidationReport()
    model = _load_model(args.model, report)
    if model is None:
        _emit_report(report)
        return 2
    _link_imports(model, args, report)
    gen = _generated(model, report)
    if gen is None:
        _emit_report(report)
        return 2
    print("group,class,member")
    for group in neurulated_groups(gen):
        for page, cls in (("links", "Link"), ("nodes", "Node"), ("lyphs", "Lyph")):
            for ref in group.props.get(page, []):
                print(f"{group.ref_in(gen)},{cls},{ref}")
    if args.output:
        out = Path(args.output) / output_names(_stem(args.model))["generated"]
        _write(out, serialize_generated(gen))
    _emit_report(report)
    return _exit_code(report)


def cmd_query(args) -> int:
    report = ValidationReport()
    model = _load_model(args.model, report)
    if model is None:
        _emit_report(report)
        return 2
    _link_imports(model, args, report)
    gen = _generated(model, report)
    if gen is None:
        _emit_report(report)
        return 2
    try:
        group = soma_processes(gen, args.start, report)
    except AnalysisError as exc:
        report.error("query", str(exc), args.start)
        _emit_report(report)
        return 2
    print("group,class,member")
    for page, cls in (("links", "Link"), ("nodes", "Node"), ("lyphs", "Lyph")):
        for ref in group.props.get(page, []):
            print(f"{group.id},{cls},{ref}")
    if args.output:
        gen.add(group)
        out = Path(args.output) / output_names(_stem(args.model))["generated"]
        _write(out, serialize_generated(gen))
    _emit_report(report)
    return _exit_code(report)


def cmd_layout(args) -> int:
    report = ValidationReport()
    model = _load_model(args.model, report)
    if model is None:
        _emit_report(report)
        return 2
    _link_imports(model, args, report)
    gen = _generated(model, report)
    if gen is None:
        _emit_report(report)
        return 2
    groups = set(args.groups.split(",")) if args.groups else None
    state = layout_mod.layout_pipeline(gen, seed=args.seed, iterations=args.iters,
                                       mode=args.mode, groups=groups, report=report)
    out = Path(args.output) / output_names(_stem(args.model))["layout"]
    _write(out, state.serialize())
    print(out)
    if args.figure:
        from .figures import render_scene
        figure_path = render_scene(gen, state, args.figure)
        print(figure_path)
    _emit_report(report)
    return _exit_code(report)


def cmd_export(args) -> int:
    report = ValidationReport()
    model = _load_model(args.model, report)
    if model is None:
        _emit_report(report)
        return 2
    _link_imports(model, args, report)
    gen = _generated(model, report)
    if gen is None or not report.ok():
        _emit_report(report)
        return 2
    names = output_names(_stem(args.model))
    outdir = Path(args.output)
    _write(outdir / names["generated"], serialize_generated(gen))
    _write(outdir / names["jsonld"], serialize_jsonld(gen, base_iri=args.base_iri))
    _write(outdir / names["resource_map"], serialize_resource_map(gen))
    for key in ("generated", "jsonld", "resource_map"):
        print(outdir / names[key])
    _emit_report(report)
    return _exit_code(report)


def cmd_edit(args) -> int:
    report = ValidationReport()
    model = _load_model(args.model, report)
    if model is None:
        _emit_report(report)
        return 2
    try:
        records = json.loads(_read_text(args.script))
        if not isinstance(records, list):
            raise EditError("edit script must be a JSON list of operations")
        edited, log, diffs = run_script(model, records)
    except EditError as exc:
        report.error("edit", str(exc))
        _emit_report(report)
        return 2
    for diff in diffs:
        print(diff.render())
    outdir = Path(args.output)
    stem = _stem(args.model)
    _write(outdir / f"{stem}.edited.json", serialize_model(edited))
    _write(outdir / f"{stem}.editlog.json", canonical_dumps(log.to_document()))
    _emit_report(report)
    return _exit_code(report)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lyphkit",
        description="Compile, link, analyze, lay out and export multiscale "
                    "anatomical connectivity models.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="syntactic, structural and reference validation")
    p.add_argument("model", help="model document (.json, .xlsx, CSV directory, or - for stdin)")
    _import_flags(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("convert", help="convert between JSON and workbook formats")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True,
                   help=".json file or a directory for a CSV bundle")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("generate", help="expand a model spec into a generated model")
    p.add_argument("model")
    p.add_argument("-o", "--output", default=".", help="output directory")
    _import_flags(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("merge", help="mix another model's definitions into the base namespace")
    p.add_argument("base")
    p.add_argument("other")
    p.add_argument("-o", "--output", required=True, help="merged model file")
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("join", help="keep another model separate inside a new group")
    p.add_argument("base")
    p.add_argument("other")
    p.add_argument("-o", "--output", required=True, help="joined model file")
    p.set_defaults(func=cmd_join)

    p = sub.add_parser("neurulate", help="list closed components as dynamic groups")
    p.add_argument("model")
    p.add_argument("-o", "--output", default="", help="also write the generated model here")
    _import_flags(p)
    p.set_defaults(func=cmd_neurulate)

    p = sub.add_parser("query", help="soma processes reachable from a start resource")
    p.add_argument("model")
    p.add_argument("--start", required=True, help="node or lyph identifier")
    p.add_argument("-o", "--output", default="", help="also write the generated model with the group")
    _import_flags(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("layout", help="compute a constrained force-directed layout")
    p.add_argument("model")
    p.add_argument("-o", "--output", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iters", type=int, default=layout_mod.DEFAULT_ITERATIONS)
    p.add_argument("--mode", choices=("2d", "3d"), default="2d")
    p.add_argument("--groups", default="", help="comma-separated active group ids (default: whole graph)")
    p.add_argument("--figure", default="", help="render the scene to this image file (png, svg, ...)")
    _import_flags(p)
    p.set_defaults(func=cmd_layout)

    p = sub.add_parser("export", help="write generated model, JSON-LD and resource map")
    p.add_argument("model")
    p.add_argument("-o", "--output", default=".", help="output directory")
    p.add_argument("--base-iri", default=DEFAULT_BASE_IRI)
    _import_flags(p)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("edit", help="apply an edit script transactionally")
    p.add_argument("model")
    p.add_argument("script", help="JSON list of edit operations")
    p.add_argument("-o", "--output", default=".", help="output directory")
    p.set_defaults(func=cmd_edit)
    return parser


def _import_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--import-cache", default="", help=f"import cache directory (also {CACHE_ENV_VAR})")
    p.add_argument("--always-fetch", action="store_true", help="bypass the import cache")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
