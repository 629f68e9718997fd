"""Combining models: merge, join, import resolution.

Merging mixes definitions into the base namespace; joining keeps the other
model separate behind a new group; imports fetch published models so that
foreign-prefixed references resolve.
"""

from __future__ import annotations

import hashlib
import json
import os
import urllib.request
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable

from .document import from_document
from .identifiers import IdentifierError, parse_identifier
from .resources import ModelSpec, Resource
from .schema import Kind, ValidationReport, reference_props

CACHE_ENV_VAR = "LYPHKIT_IMPORT_CACHE"


class CachePolicy(Enum):
    ALWAYS_FETCH = "always-fetch"
    CACHE_OK = "cache-ok"


@dataclass
class ImportSource:
    url: str
    namespace: str = ""
    cache_policy: CachePolicy = CachePolicy.CACHE_OK


Fetcher = Callable[[ImportSource], str]


# ---------------------------------------------------------------------------
# merge / join
# ---------------------------------------------------------------------------

def _rewrite_refs(res: Resource, fn: Callable[[str], str]) -> None:
    for prop, spec in reference_props(res.cls).items():
        value = res.props.get(prop)
        if value is None:
            continue
        if spec.kind is Kind.REF and isinstance(value, str):
            res.props[prop] = fn(value)
        elif spec.kind is Kind.REFLIST and isinstance(value, list):
            res.props[prop] = [fn(v) if isinstance(v, str) else v for v in value]


def merge(base: ModelSpec, other: ModelSpec) -> tuple[ModelSpec, ValidationReport]:
    """Mix the other model's definitions into the base namespace.

    Identifier collisions keep both definitions; the base one wins on
    lookup and each collided id yields one duplicate warning.
    """
    report = ValidationReport()
    merged = base.clone()
    existing = {(r.cls, r.id) for r in merged.resources if (r.namespace or merged.namespace) == merged.namespace}

    def localize(ref: str) -> str:
        try:
            ident = parse_identifier(ref)
        except IdentifierError:
            return ref
        if ident.prefix and ident.prefix in (other.namespace, merged.namespace):
            return ident.local
        return ref

    for res in other.resources:
        adopted = res.clone()
        adopted.namespace = merged.namespace
        _rewrite_refs(adopted, localize)
        if (adopted.cls, adopted.id) in existing:
            report.warning("duplicate", f"duplicate definition of {adopted.cls} {adopted.id!r} after merge "
                           "(first wins)", adopted.id)
        merged.resources.append(adopted)
        existing.add((adopted.cls, adopted.id))
    merged.clades = sorted(set(merged.clades) | set(other.clades))
    return merged, report


def join(base: ModelSpec, other: ModelSpec) -> tuple[ModelSpec, ValidationReport]:
    """Keep the other model separate inside a new group named after it.

    Namespaces are preserved: the joined resources stay addressable with
    their own prefix.
    """
    report = ValidationReport()
    joined = base.clone()

    def absolutize(ref: str) -> str:
        try:
            ident = parse_identifier(ref)
        except IdentifierError:
            return ref
        if ident.prefix:
            return ident.local if ident.prefix == joined.namespace else ref
        return f"{other.namespace}:{ident.local}"

    members: dict[str, list[str]] = {"nodes": [], "links": [], "lyphs": [], "groups": []}
    member_page = {"Node": "nodes", "Link": "links", "Lyph": "lyphs", "Group": "groups"}
    for res in other.resources:
        adopted = res.clone()
        adopted.namespace = res.namespace or other.namespace
        if adopted.namespace != joined.namespace:
            _rewrite_refs(adopted, absolutize)
        joined.resources.append(adopted)
        page = member_page.get(adopted.cls)
        if page is not None:
            members[page].append(adopted.ref_in(joined))

    group_id = other.namespace
    while joined.has_id(group_id):
        report.warning("duplicate", f"group id {group_id!r} already taken; joined group renamed", group_id)
        group_id = group_id + "_group"
    group = Resource(id=group_id, cls="Group", props={
        "generated": True,
        "description": "user",
        "name": f"joined model {other.namespace}",
    })
    for page, refs in members.items():
        if refs:
            group.props[page] = refs
    joined.add(group)
    joined.clades = sorted(set(joined.clades) | set(other.clades))
    return joined, report


# ---------------------------------------------------------------------------
# Imports
# ---------------------------------------------------------------------------

def _cache_dir() -> Path | None:
    path = os.environ.get(CACHE_ENV_VAR)
    return Path(path) if path else None


def default_fetcher(source: ImportSource) -> str:
    """Fetch a document from a filesystem path or an HTTP(S) URL.

    HTTP responses land in the on-disk cache (keyed by URL) when the
    cache directory is configured; CACHE_OK serves cached copies without
    going back to the network.
    """
    if source.url.startswith(("http://", "https://")):
        cache = _cache_dir()
        key = hashlib.sha256(source.url.encode("utf-8")).hexdigest()
        if cache is not None and source.cache_policy is CachePolicy.CACHE_OK:
            hit = cache / key
            if hit.exists():
                return hit.read_text(encoding="utf-8")
        with urllib.request.urlopen(source.url) as response:  # follows redirects
            body = response.read().decode("utf-8")
        if cache is not None:
            cache.mkdir(parents=True, exist_ok=True)
            (cache / key).write_text(body, encoding="utf-8")
        return body
    return Path(source.url).read_text(encoding="utf-8")


def _import_sources(model: ModelSpec, policy: CachePolicy) -> list[ImportSource]:
    sources = []
    for entry in model.imports:
        if isinstance(entry, str):
            sources.append(ImportSource(url=entry, cache_policy=policy))
        elif isinstance(entry, dict) and isinstance(entry.get("url"), str):
            sources.append(ImportSource(url=entry["url"], namespace=entry.get("namespace", ""),
                                        cache_policy=policy))
    return sorted(sources, key=lambda s: s.url)


def resolve_imports(spec: ModelSpec, fetcher: Fetcher | None = None,
                    policy: CachePolicy = CachePolicy.CACHE_OK) -> tuple[list[ModelSpec], ValidationReport]:
    """Fetch the transitive import closure and link it into the model.

    Imported definitions make foreign-prefixed references resolvable; the
    fetched set is deterministic for a deterministic fetcher (queue is
    processed in sorted URL order).  Fetch failures and import cycles are
    errors.
    """
    fetcher = fetcher if fetcher is not None else default_fetcher
    report = ValidationReport()
    loaded: dict[str, ModelSpec] = {}
    edges: dict[str, list[str]] = {}
    queue = _import_sources(spec, policy)
    origin: dict[str, str] = {s.url: "<root>" for s in queue}
    linked: list[ModelSpec] = []

    while queue:
        source = queue.pop(0)
        if source.url in loaded:
            continue
        try:
            body = fetcher(source)
        except Exception as exc:
            report.error("fetch", f"cannot fetch import {source.url!r}: {exc}", None, source.url)
            loaded[source.url] = ModelSpec(namespace=source.namespace or "unavailable")
            continue
        try:
            imported = from_document(json.loads(body), report)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            report.error("parse", f"import {source.url!r} is unreadable: {exc}", None, source.url)
            continue
        if source.namespace and imported.namespace != source.namespace:
            report.warning("namespace", f"import {source.url!r} declares namespace "
                           f"{imported.namespace!r}, expected {source.namespace!r}", None, source.url)
        loaded[source.url] = imported
        linked.append(imported)
        nested = _import_sources(imported, policy)
        edges[source.url] = [n.url for n in nested]
        for entry in nested:
            if entry.url not in origin:
                origin[entry.url] = source.url
                queue.append(entry)

    cycle = _find_cycle(edges)
    if cycle:
        report.error("import-cycle", "import cycle: " + " -> ".join(cycle), None, cycle[0])

    spec.imported = list(spec.imported) + linked
    for model in linked:
        model.imported = [m for m in linked if m is not model]
    return linked, report


def _find_cycle(edges: dict[str, list[str]]) -> list[str] | None:
    state: dict[str, int] = {}
    stack: list[str] = []

    def visit(url: str) -> list[str] | None:
        state[url] = 1
        stack.append(url)
        for succ in edges.get(url, []):
            if state.get(succ, 0) == 1:
                return stack[stack.index(succ):] + [succ]
            if state.get(succ, 0) == 0:
                found = visit(succ)
                if found:
                    return found
        stack.pop()
        state[url] = 2
        return None

    for url in sorted(edges):
        if state.get(url, 0) == 0:
            found = visit(url)
            if found:
                return found
    return None
