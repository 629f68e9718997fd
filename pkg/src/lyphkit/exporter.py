"""Serialization of generated models: canonical JSON, JSON-LD, resource map."""

from __future__ import annotations

from typing import Any

from .document import canonical_dumps, to_document
from .identifiers import parse_identifier
from .resources import ModelSpec
from .schema import CLASSES, Kind, props_of

DEFAULT_BASE_IRI = "https://apinatomy.example/models/"
VOCAB_IRI = "https://apinatomy.example/vocab#"
TERM_RESOLVER = "https://identifiers.org/"


class ExportError(Exception):
    pass


def serialize_generated(model: ModelSpec) -> str:
    """Canonical document text for a generated model; reloads as-is."""
    return canonical_dumps(to_document(model, include_external=True))


# ---------------------------------------------------------------------------
# JSON-LD
# ---------------------------------------------------------------------------

def build_context(model: ModelSpec, base_iri: str = DEFAULT_BASE_IRI) -> dict[str, Any]:
    """Term mapping covering every serialized property of every class.

    Reference-valued properties are type-coerced to identifiers; ontology
    term prefixes found in the model resolve through identifiers.org.
    """
    context: dict[str, Any] = {"@vocab": VOCAB_IRI}
    for cls in CLASSES:
        context[cls] = VOCAB_IRI + cls
        for prop, spec in props_of(cls).items():
            if prop in ("id",) or prop in context:
                continue
            if spec.kind in (Kind.REF, Kind.REFLIST):
                context[prop] = {"@id": VOCAB_IRI + prop, "@type": "@id"}
            elif spec.kind is Kind.CURIELIST:
                context[prop] = {"@id": VOCAB_IRI + prop, "@type": "@id"}
            else:
                context[prop] = VOCAB_IRI + prop
    prefixes = set()
    for res in model.resources:
        for term in res.ontology_terms:
            prefixes.add(term.split(":", 1)[0])
    for prefix in sorted(prefixes):
        context[prefix] = f"{TERM_RESOLVER}{prefix}:"
    return context


def resource_iri(model: ModelSpec, ref: str, base_iri: str = DEFAULT_BASE_IRI) -> str:
    ident = parse_identifier(ref)
    namespace = ident.prefix or model.namespace
    return f"{base_iri}{namespace}#{ident.local}"


def to_jsonld(model: ModelSpec, context: dict[str, Any] | None = None,
              base_iri: str = DEFAULT_BASE_IRI) -> dict[str, Any]:
    """Linked-data rendering: one identified, typed node per resource."""
    ctx = context if context is not None else build_context(model, base_iri)
    missing: set[str] = set()
    graph: list[dict[str, Any]] = []
    for res in model.resources:
        node: dict[str, Any] = {
            "@id": resource_iri(model, res.ref_in(model), base_iri),
            "@type": res.cls,
        }
        table = props_of(res.cls)
        for prop in sorted(res.props):
            value = res.props[prop]
            if prop == "id" or value is None:
                continue
            spec = table.get(prop)
            if spec is None:
                continue  # unknown props stay in the canonical JSON only
            if prop not in ctx:
                missing.add(prop)
                continue
            if spec is not None and spec.kind is Kind.REF and isinstance(value, str):
                node[prop] = resource_iri(model, value, base_iri)
            elif spec is not None and spec.kind is Kind.REFLIST and isinstance(value, list):
                node[prop] = [resource_iri(model, v, base_iri) if isinstance(v, str) else v
                              for v in value]
            else:
                node[prop] = value
        graph.append(node)
    if missing:
        raise ExportError("no context term for properties: " + ", ".join(sorted(missing)))
    graph.sort(key=lambda n: n["@id"])
    return {"@context": ctx, "@graph": graph}


def serialize_jsonld(model: ModelSpec, base_iri: str = DEFAULT_BASE_IRI) -> str:
    return canonical_dumps(to_jsonld(model, base_iri=base_iri))


# ---------------------------------------------------------------------------
# Resource map
# ---------------------------------------------------------------------------

def resource_map(model: ModelSpec) -> dict[str, Any]:
    """One entry per resource with class, terms, provenance and namespace."""
    entries: dict[str, Any] = {}
    for res in model.resources:
        ref = res.ref_in(model)
        entries[ref] = {
            "class": res.cls,
            "ontologyTerms": res.ontology_terms,
            "provenance": "generated" if res.generated else "declared",
            "namespace": res.namespace or model.namespace,
        }
    return {"model": model.namespace, "entries": entries}


def serialize_resource_map(model: ModelSpec) -> str:
    return canonical_dumps(resource_map(model))


def output_names(stem: str) -> dict[str, str]:
    """Conventional artifact file names for a model stem."""
    return {
        "generated": f"{stem}.generated.json",
        "jsonld": f"{stem}.jsonld",
        "resource_map": f"{stem}.resource-map.json",
        "layout": f"{stem}.layout.json",
    }
