"""Canonical model documents.

The on-disk shape is one JSON object: model metadata at the top level and
one list per resource page.  Inline nested definitions in reference slots
are hoisted into their own records at parse time, so an in-memory model is
always flat.
"""

from __future__ import annotations

import json
from typing import Any

from .identifiers import parse_identifier
from .resources import ModelSpec, Resource
from .schema import ANY, Kind, PAGES, ValidationReport, props_of


def canonical_dumps(doc: Any) -> str:
    """Canonical JSON text: UTF-8, LF, 2-space indent, sorted keys."""
    return json.dumps(doc, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def _strip_own_prefix(ref: str, namespace: str) -> str:
    ident = parse_identifier(ref)
    if ident.prefix == namespace:
        return ident.local
    return ref


def _hoist(value: Any, cls: str, model: ModelSpec, report: ValidationReport, loc: str) -> str | None:
    """Register an inline definition as a declared resource, return its ref."""
    rid = value.get("id")
    if not isinstance(rid, str):
        report.error("inline-id", "inline definition without an id", None, loc)
        return None
    _add_record(value, cls, model, report, loc)
    return rid


def _parse_props(record: dict, cls: str, model: ModelSpec, report: ValidationReport, loc: str) -> dict:
    table = props_of(cls)
    props: dict[str, Any] = {}
    for prop, value in record.items():
        if prop == "id":
            continue
        spec = table.get(prop)
        if spec is None:
            props[prop] = value  # unknown, preserved verbatim
            continue
        if spec.kind is Kind.REF:
            if isinstance(value, dict):
                target = spec.targets[0] if spec.targets and spec.targets != ANY else cls
                ref = _hoist(value, target, model, report, f"{loc}/{prop}")
                if ref is not None:
                    props[prop] = _strip_own_prefix(ref, model.namespace)
            elif isinstance(value, str):
                props[prop] = _strip_own_prefix(value, model.namespace)
            else:
                props[prop] = value
        elif spec.kind is Kind.REFLIST and isinstance(value, list):
            out = []
            for i, item in enumerate(value):
                if isinstance(item, dict):
                    target = spec.targets[0] if spec.targets and spec.targets != ANY else cls
                    ref = _hoist(item, target, model, report, f"{loc}/{prop}/{i}")
                    if ref is not None:
                        out.append(_strip_own_prefix(ref, model.namespace))
                elif isinstance(item, str):
                    out.append(_strip_own_prefix(item, model.namespace))
                else:
                    out.append(item)
            props[prop] = out
        else:
            props[prop] = value
    return props


def _add_record(record: dict, cls: str, model: ModelSpec, report: ValidationReport, loc: str) -> None:
    rid = record.get("id")
    if not isinstance(rid, str):
        report.error("required", f"{cls} record without an id", None, loc)
        return
    ident = parse_identifier(rid)
    namespace = ident.prefix or model.namespace
    props = _parse_props(record, cls, model, report, loc)
    model.add(Resource(id=ident.local, cls=cls, namespace=namespace, props=props))


def from_document(doc: dict, report: ValidationReport | None = None) -> ModelSpec:
    """Build a ModelSpec from a decoded document mapping."""
    report = report if report is not None else ValidationReport()
    model = ModelSpec()
    if isinstance(doc.get("namespace"), str):
        model.namespace = doc["namespace"]
    if isinstance(doc.get("description"), str):
        model.description = doc["description"]
    if isinstance(doc.get("imports"), list):
        model.imports = list(doc["imports"])
    if isinstance(doc.get("clades"), list):
        model.clades = [c for c in doc["clades"] if isinstance(c, str)]
    model.generated = bool(doc.get("generated", False))
    for key, value in doc.items():
        if key not in PAGES and key not in ("namespace", "description", "imports", "clades",
                                            "generated", "schemaVersion"):
            model.unknown[key] = value
    for page, cls in PAGES.items():
        records = doc.get(page)
        if not isinstance(records, list):
            continue
        for i, record in enumerate(records):
            if isinstance(record, dict):
                _add_record(record, cls, model, report, f"/{page}/{i}")
    return model


def parse_model(text: str | bytes, report: ValidationReport | None = None) -> ModelSpec:
    return from_document(json.loads(text), report)


def resource_record(res: Resource, model: ModelSpec) -> dict:
    record = dict(res.props)
    record["id"] = res.ref_in(model)
    return record


def to_document(model: ModelSpec, include_external: bool | None = None) -> dict:
    """Render the model as a document mapping.

    Imported (external) resources are excluded from input serializations
    and included in generated ones, unless overridden.
    """
    if include_external is None:
        include_external = model.generated
    doc: dict[str, Any] = {"namespace": model.namespace}
    if model.description:
        doc["description"] = model.description
    if model.imports:
        doc["imports"] = model.imports
    if model.clades:
        doc["clades"] = sorted(model.clades)
    if model.generated:
        doc["generated"] = True
    for key, value in model.unknown.items():
        doc[key] = value
    for page, cls in PAGES.items():
        records = [resource_record(r, model) for r in model.resources
                   if r.cls == cls and (include_external or not r.external)]
        if records:
            doc[page] = records
    return doc


def serialize_model(model: ModelSpec) -> str:
    return canonical_dumps(to_document(model))


def models_equal(a: ModelSpec, b: ModelSpec) -> bool:
    """Structural equality through the canonical serialization."""
    return serialize_model(a) == serialize_model(b)
