"""Model vocabulary and validation.

The property table below is the single source of truth for what each
resource class may declare: value kinds, reference targets, required
fields, and enumerations.  Reference classification drives stub
generation, relation closure, reference rewriting in the editor, and the
linked-data context, so everything reads from this table.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Optional, TYPE_CHECKING

from .identifiers import IdentifierError, PREFIX_RE, parse_identifier

if TYPE_CHECKING:
    from .resources import ModelSpec

SCHEMA_VERSION = "1.0"

CURIE_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.-]*:\S+$")


# ---------------------------------------------------------------------------
# Severities and reports
# ---------------------------------------------------------------------------

class Severity(Enum):
    NONE = 0
    WARNING = 1
    ERROR = 2

    def __lt__(self, other: "Severity") -> bool:
        return self.value < other.value


@dataclass
class Issue:
    severity: Severity
    code: str
    message: str
    resource: Optional[str] = None
    location: str = ""

    def render(self) -> str:
        tag = "E" if self.severity is Severity.ERROR else "W"
        res = self.resource or "-"
        loc = self.location or "-"
        return f"{tag} {self.code} {loc} {res} {self.message}"


@dataclass
class ValidationReport:
    issues: list[Issue] = field(default_factory=list)

    @property
    def max_severity(self) -> Severity:
        if not self.issues:
            return Severity.NONE
        return max(i.severity for i in self.issues)

    def ok(self) -> bool:
        return self.max_severity is not Severity.ERROR

    def warning(self, code: str, message: str, resource: str | None = None, location: str = "") -> None:
        self.issues.append(Issue(Severity.WARNING, code, message, resource, location))

    def error(self, code: str, message: str, resource: str | None = None, location: str = "") -> None:
        self.issues.append(Issue(Severity.ERROR, code, message, resource, location))

    def extend(self, other: "ValidationReport") -> None:
        self.issues.extend(other.issues)

    def errors(self) -> list[Issue]:
        return [i for i in self.issues if i.severity is Severity.ERROR]

    def warnings(self) -> list[Issue]:
        return [i for i in self.issues if i.severity is Severity.WARNING]


def render_report(report: ValidationReport) -> str:
    """Stable one-issue-per-line rendering; errors sort before warnings."""
    if not report.issues:
        return "OK"
    ordered = sorted(
        report.issues,
        key=lambda i: (-i.severity.value, i.code, i.location, i.resource or "", i.message),
    )
    return "\n".join(i.render() for i in ordered)


# ---------------------------------------------------------------------------
# Property table
# ---------------------------------------------------------------------------

class Kind(Enum):
    STR = "string"
    BOOL = "boolean"
    INT = "integer"
    FLOAT = "number"
    VEC = "coordinates"
    STRLIST = "string list"
    CURIELIST = "curie list"
    REF = "reference"
    REFLIST = "reference list"
    ENUM = "enumeration"


# Sentinel target set meaning "any resource class".
ANY = ("*",)


@dataclass(frozen=True)
class PropSpec:
    kind: Kind
    targets: tuple[str, ...] = ()
    values: tuple[str, ...] = ()
    required: bool = False


TOPOLOGIES = ("TUBE", "BAG-LEFT", "BAG-RIGHT", "CYST")
LINK_GEOMETRIES = ("LINE", "SPLINE")
WIRE_GEOMETRIES = ("LINE", "ARC", "SPLINE")
COALESCENCE_KINDS = ("CONNECTING", "EMBEDDING")
GROUP_ORIGINS = ("NEURULATED", "QUERY", "VARIANCE")

COMMON_PROPS: dict[str, PropSpec] = {
    "id": PropSpec(Kind.STR, required=True),
    "name": PropSpec(Kind.STR),
    "ontologyTerms": PropSpec(Kind.CURIELIST),
    "generated": PropSpec(Kind.BOOL),
    "external": PropSpec(Kind.BOOL),
    "isVisible": PropSpec(Kind.BOOL),
}

CLASS_PROPS: dict[str, dict[str, PropSpec]] = {
    "Node": {
        "layout": PropSpec(Kind.VEC),
        "fixed": PropSpec(Kind.BOOL),
        "controlNodes": PropSpec(Kind.REFLIST, targets=("Node",)),
        "hostedBy": PropSpec(Kind.REF, targets=("Link",)),
        "offset": PropSpec(Kind.FLOAT),
        "internalIn": PropSpec(Kind.REF, targets=("Lyph",)),
        "anchoredTo": PropSpec(Kind.REF, targets=("Anchor",)),
        "onBorderOf": PropSpec(Kind.REFLIST, targets=("Lyph",)),
        "sourceOf": PropSpec(Kind.REFLIST, targets=("Link",)),
        "targetOf": PropSpec(Kind.REFLIST, targets=("Link",)),
        "rootOf": PropSpec(Kind.REFLIST, targets=("Chain",)),
        "leafOf": PropSpec(Kind.REFLIST, targets=("Chain",)),
    },
    "Link": {
        "source": PropSpec(Kind.REF, targets=("Node",), required=True),
        "target": PropSpec(Kind.REF, targets=("Node",), required=True),
        "conveyingLyph": PropSpec(Kind.REF, targets=("Lyph",)),
        "hostedNodes": PropSpec(Kind.REFLIST, targets=("Node",)),
        "levelIn": PropSpec(Kind.REF, targets=("Chain",)),
        "length": PropSpec(Kind.FLOAT),
        "geometry": PropSpec(Kind.ENUM, values=LINK_GEOMETRIES),
    },
    "Lyph": {
        "isTemplate": PropSpec(Kind.BOOL),
        "supertype": PropSpec(Kind.REF, targets=("Lyph",)),
        "subtypes": PropSpec(Kind.REFLIST, targets=("Lyph",)),
        "layers": PropSpec(Kind.REFLIST, targets=("Lyph", "Material")),
        "layerIn": PropSpec(Kind.REF, targets=("Lyph",)),
        "internalLyphs": PropSpec(Kind.REFLIST, targets=("Lyph",)),
        "internalNodes": PropSpec(Kind.REFLIST, targets=("Node",)),
        "internalIn": PropSpec(Kind.REF, targets=("Lyph", "Region")),
        "conveys": PropSpec(Kind.REF, targets=("Link",)),
        "topology": PropSpec(Kind.ENUM, values=TOPOLOGIES),
        "hostedBy": PropSpec(Kind.REF, targets=("Region",)),
        "angle": PropSpec(Kind.FLOAT),
        "materials": PropSpec(Kind.REFLIST, targets=("Material", "Lyph")),
        "materialIn": PropSpec(Kind.REFLIST, targets=("Material", "Lyph")),
    },
    "Material": {
        "materials": PropSpec(Kind.REFLIST, targets=("Material", "Lyph")),
        "materialIn": PropSpec(Kind.REFLIST, targets=("Material", "Lyph")),
        "layerIn": PropSpec(Kind.REF, targets=("Lyph",)),
    },
    "Chain": {
        "numLevels": PropSpec(Kind.INT),
        "lyphTemplate": PropSpec(Kind.REF, targets=("Lyph",)),
        "lyphs": PropSpec(Kind.REFLIST, targets=("Lyph",)),
        "housingLyphs": PropSpec(Kind.REFLIST, targets=("Lyph",)),
        "levels": PropSpec(Kind.REFLIST, targets=("Link",)),
        "root": PropSpec(Kind.REF, targets=("Node",)),
        "leaf": PropSpec(Kind.REF, targets=("Node",)),
        "wiredTo": PropSpec(Kind.REF, targets=("Wire",)),
        "startFromLeaf": PropSpec(Kind.BOOL),
        "hostedBy": PropSpec(Kind.REF, targets=("Region",)),
        "group": PropSpec(Kind.REF, targets=("Group",)),
    },
    "Group": {
        "nodes": PropSpec(Kind.REFLIST, targets=("Node",)),
        "links": PropSpec(Kind.REFLIST, targets=("Link",)),
        "lyphs": PropSpec(Kind.REFLIST, targets=("Lyph",)),
        "groups": PropSpec(Kind.REFLIST, targets=("Group",)),
        "dynamic": PropSpec(Kind.BOOL),
        "description": PropSpec(Kind.STR),
        "origin": PropSpec(Kind.ENUM, values=GROUP_ORIGINS),
        "seed": PropSpec(Kind.REF, targets=ANY),
    },
    "Coalescence": {
        "lyphs": PropSpec(Kind.REFLIST, targets=("Lyph",)),
        "kind": PropSpec(Kind.ENUM, values=COALESCENCE_KINDS),
    },
    "Scaffold": {
        "anchors": PropSpec(Kind.REFLIST, targets=("Anchor",)),
        "wires": PropSpec(Kind.REFLIST, targets=("Wire",)),
        "regions": PropSpec(Kind.REFLIST, targets=("Region",)),
    },
    "Anchor": {
        "layout": PropSpec(Kind.VEC),
        "hostedBy": PropSpec(Kind.REF, targets=("Wire", "Region")),
    },
    "Wire": {
        "source": PropSpec(Kind.REF, targets=("Anchor",), required=True),
        "target": PropSpec(Kind.REF, targets=("Anchor",), required=True),
        "geometry": PropSpec(Kind.ENUM, values=WIRE_GEOMETRIES),
        "curvature": PropSpec(Kind.FLOAT),
    },
    "Region": {
        "border": PropSpec(Kind.REFLIST, targets=("Anchor", "Wire")),
        "hostedLyphs": PropSpec(Kind.REFLIST, targets=("Lyph", "Group")),
    },
    "Variance": {
        "resource": PropSpec(Kind.REF, targets=ANY, required=True),
        "clades": PropSpec(Kind.STRLIST, required=True),
    },
}

#: document pages (and workbook sheets) in canonical order
PAGES: dict[str, str] = {
    "nodes": "Node",
    "links": "Link",
    "lyphs": "Lyph",
    "materials": "Material",
    "chains": "Chain",
    "groups": "Group",
    "coalescences": "Coalescence",
    "scaffolds": "Scaffold",
    "anchors": "Anchor",
    "wires": "Wire",
    "regions": "Region",
    "variances": "Variance",
}

PAGE_OF_CLASS = {cls: page for page, cls in PAGES.items()}
CLASSES = tuple(PAGES.values())

#: preference order used when a stub's class must be picked from candidates
STUB_PRECEDENCE = ("Lyph", "Material", "Node", "Link", "Chain", "Group",
                   "Coalescence", "Anchor", "Wire", "Region", "Scaffold")

MAIN_KEYS = ("namespace", "description", "imports", "clades", "generated", "schemaVersion")


def props_of(cls: str) -> dict[str, PropSpec]:
    table = dict(COMMON_PROPS)
    table.update(CLASS_PROPS.get(cls, {}))
    return table


def prop_spec(cls: str, prop: str) -> PropSpec | None:
    return props_of(cls).get(prop)


def reference_props(cls: str) -> dict[str, PropSpec]:
    return {p: s for p, s in props_of(cls).items() if s.kind in (Kind.REF, Kind.REFLIST)}


# ---------------------------------------------------------------------------
# Bidirectional relationship pairs
# ---------------------------------------------------------------------------

class Card(Enum):
    ONE = "one"
    MANY = "many"


@dataclass(frozen=True)
class RelationPair:
    """One closed bidirectional relationship.

    `owner_cls.owner_prop` points at resources whose `inverse_prop` must
    point back.  `inverse_cls` restricts which resource classes carry the
    inverse property (internalIn is shared by two pairs and disambiguated
    by the subject class).
    """

    owner_cls: tuple[str, ...]
    owner_prop: str
    owner_card: Card
    inverse_cls: tuple[str, ...]
    inverse_prop: str
    inverse_card: Card


RELATION_PAIRS: tuple[RelationPair, ...] = (
    RelationPair(("Lyph",), "layers", Card.MANY, ("Lyph", "Material"), "layerIn", Card.ONE),
    RelationPair(("Link",), "conveyingLyph", Card.ONE, ("Lyph",), "conveys", Card.ONE),
    RelationPair(("Lyph",), "internalNodes", Card.MANY, ("Node",), "internalIn", Card.ONE),
    RelationPair(("Lyph",), "internalLyphs", Card.MANY, ("Lyph",), "internalIn", Card.ONE),
    RelationPair(("Link",), "hostedNodes", Card.MANY, ("Node",), "hostedBy", Card.ONE),
    RelationPair(("Link",), "source", Card.ONE, ("Node",), "sourceOf", Card.MANY),
    RelationPair(("Link",), "target", Card.ONE, ("Node",), "targetOf", Card.MANY),
    RelationPair(("Chain",), "root", Card.ONE, ("Node",), "rootOf", Card.MANY),
    RelationPair(("Chain",), "leaf", Card.ONE, ("Node",), "leafOf", Card.MANY),
    RelationPair(("Lyph",), "supertype", Card.ONE, ("Lyph",), "subtypes", Card.MANY),
    RelationPair(("Material", "Lyph"), "materials", Card.MANY, ("Material", "Lyph"), "materialIn", Card.MANY),
)

#: composition properties whose transitive closure must stay acyclic
COMPOSITION_PROPS = ("layers", "internalLyphs", "materials")


# ---------------------------------------------------------------------------
# Syntax validation
# ---------------------------------------------------------------------------

def _check_value(value: Any, spec: PropSpec, loc: str, report: ValidationReport, resource: str | None) -> None:
    kind = spec.kind
    if kind is Kind.STR:
        if not isinstance(value, str):
            report.error("type", f"expected a string, got {type(value).__name__}", resource, loc)
    elif kind is Kind.BOOL:
        if not isinstance(value, bool):
            report.error("type", f"expected a boolean, got {type(value).__name__}", resource, loc)
    elif kind is Kind.INT:
        if not isinstance(value, int) or isinstance(value, bool):
            report.error("type", f"expected an integer, got {type(value).__name__}", resource, loc)
    elif kind is Kind.FLOAT:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            report.error("type", f"expected a number, got {type(value).__name__}", resource, loc)
    elif kind is Kind.VEC:
        ok = (isinstance(value, list) and len(value) in (2, 3)
              and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value))
        if not ok:
            report.error("type", "expected a list of 2 or 3 numbers", resource, loc)
    elif kind is Kind.STRLIST:
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            report.error("type", "expected a list of strings", resource, loc)
    elif kind is Kind.CURIELIST:
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            report.error("type", "expected a list of strings", resource, loc)
        else:
            for i, term in enumerate(value):
                if not CURIE_RE.match(term):
                    report.error("curie", f"term {term!r} does not match source:identifier", resource, f"{loc}/{i}")
    elif kind is Kind.ENUM:
        if not isinstance(value, str) or value not in spec.values:
            report.error("enum", f"expected one of {', '.join(spec.values)}, got {value!r}", resource, loc)
    elif kind is Kind.REF:
        _check_ref(value, loc, report, resource)
    elif kind is Kind.REFLIST:
        if not isinstance(value, list):
            report.error("type", f"expected a list of references, got {type(value).__name__}", resource, loc)
        else:
            for i, item in enumerate(value):
                _check_ref(item, f"{loc}/{i}", report, resource)


def _check_ref(value: Any, loc: str, report: ValidationReport, resource: str | None) -> None:
    if isinstance(value, dict):
        # inline nested definition; hoisted at parse time
        if "id" not in value:
            report.error("inline-id", "inline definition without an id", resource, loc)
        return
    if not isinstance(value, str):
        report.error("type", f"expected a reference, got {type(value).__name__}", resource, loc)
        return
    try:
        parse_identifier(value)
    except IdentifierError as exc:
        report.error("identifier", str(exc), resource, loc)


def _check_resource(record: Any, cls: str, loc: str, report: ValidationReport) -> None:
    if not isinstance(record, dict):
        report.error("type", f"expected an object, got {type(record).__name__}", None, loc)
        return
    rid = record.get("id")
    resource = rid if isinstance(rid, str) else None
    table = props_of(cls)
    for prop, spec in table.items():
        if spec.required and prop not in record:
            report.error("required", f"{cls} is missing required property {prop!r}", resource, f"{loc}/{prop}")
    for prop, value in record.items():
        spec = table.get(prop)
        if spec is None:
            report.warning("unknown-prop", f"unknown property {prop!r} on {cls} (preserved verbatim)",
                           resource, f"{loc}/{prop}")
            continue
        _check_value(value, spec, f"{loc}/{prop}", report, resource)
        if spec.kind is Kind.REF and isinstance(value, dict):
            target = spec.targets[0] if spec.targets and spec.targets != ANY else cls
            _check_resource(value, target, f"{loc}/{prop}", report)
        if spec.kind is Kind.REFLIST and isinstance(value, list):
            target = spec.targets[0] if spec.targets and spec.targets != ANY else cls
            for i, item in enumerate(value):
                if isinstance(item, dict):
                    _check_resource(item, target, f"{loc}/{prop}/{i}", report)
    if isinstance(rid, str):
        try:
            ident = parse_identifier(rid)
            if ident.prefix and record.get("external") is not True and record.get("generated") is not True:
                report.warning("foreign-id", "declared id carries a namespace prefix", resource, f"{loc}/id")
        except IdentifierError as exc:
            report.error("identifier", str(exc), resource, f"{loc}/id")
    elif rid is not None:
        report.error("type", "id must be a string", None, f"{loc}/id")
    _check_class_rules(record, cls, loc, report, resource)


def _check_class_rules(record: dict, cls: str, loc: str, report: ValidationReport, resource: str | None) -> None:
    if cls == "Link" or cls == "Wire":
        src, tgt = record.get("source"), record.get("target")
        if isinstance(src, str) and isinstance(tgt, str) and src == tgt:
            report.error("self-link", f"{cls.lower()} source equals target", resource, f"{loc}/target")
    if cls == "Node":
        if "offset" in record:
            off = record["offset"]
            if isinstance(off, (int, float)) and not isinstance(off, bool) and not 0 <= off <= 1:
                report.error("range", "offset must lie in [0, 1]", resource, f"{loc}/offset")
            if "hostedBy" not in record:
                report.error("offset-host", "offset requires hostedBy", resource, f"{loc}/offset")
    if cls == "Lyph":
        if record.get("isTemplate") and record.get("conveys"):
            report.error("template-conveys", "a template lyph cannot convey a link", resource, f"{loc}/conveys")
    if cls == "Chain":
        methods = [m for m in ("numLevels", "lyphs", "housingLyphs") if m in record]
        if len(methods) > 1:
            report.error("chain-ambiguous",
                         f"ambiguous chain definition ({' and '.join(methods)})", resource, loc)
        elif not methods:
            report.error("chain-undefined", "chain defines none of numLevels, lyphs, housingLyphs", resource, loc)
        if "numLevels" in record:
            n = record["numLevels"]
            if isinstance(n, int) and not isinstance(n, bool) and n <= 0:
                report.error("range", "numLevels must be positive", resource, f"{loc}/numLevels")
            if "lyphTemplate" not in record:
                report.error("chain-template", "numLevels requires a lyphTemplate", resource, f"{loc}/numLevels")
    if cls == "Coalescence":
        lyphs = record.get("lyphs")
        if isinstance(lyphs, list) and len(lyphs) < 2:
            report.error("coalescence-size", "a coalescence needs at least 2 lyphs", resource, f"{loc}/lyphs")
    if cls == "Region":
        border = record.get("border")
        if isinstance(border, list) and not border:
            report.error("region-border", "region border must not be empty", resource, f"{loc}/border")


def validate_syntax(document: str | bytes | dict) -> ValidationReport:
    """Well-formedness and conformance of a raw model document.

    Accepts the document text or an already-decoded mapping; never mutates
    its input.  Issues point back into the document with /page/index/prop
    locations.
    """
    report = ValidationReport()
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            report.error("parse", f"unreadable document: {exc}", None, "/")
            return report
    else:
        doc = document
    if not isinstance(doc, dict):
        report.error("type", "model document must be an object", None, "/")
        return report

    ns = doc.get("namespace")
    if ns is not None and (not isinstance(ns, str) or not PREFIX_RE.match(ns)):
        report.error("namespace", f"invalid namespace {ns!r}", None, "/namespace")
    for key in ("imports", "clades"):
        val = doc.get(key)
        if val is not None and (not isinstance(val, list)):
            report.error("type", f"{key} must be a list", None, f"/{key}")
    version = doc.get("schemaVersion")
    if version is not None and version != SCHEMA_VERSION:
        report.warning("schema-version", f"document declares schema {version}, shipped schema is {SCHEMA_VERSION}",
                       None, "/schemaVersion")

    declared_clades = doc.get("clades") if isinstance(doc.get("clades"), list) else None
    if declared_clades is not None:
        rows = doc.get("variances")
        if isinstance(rows, list):
            for i, row in enumerate(rows):
                if not isinstance(row, dict):
                    continue
                for clade in row.get("clades", []) if isinstance(row.get("clades"), list) else []:
                    if clade not in declared_clades:
                        report.error("clade-undeclared",
                                     f"variance references undeclared clade {clade!r}",
                                     row.get("id"), f"/variances/{i}/clades")

    seen: dict[tuple[str, str], str] = {}
    for page, cls in PAGES.items():
        records = doc.get(page)
        if records is None:
            continue
        if not isinstance(records, list):
            report.error("type", f"page {page!r} must be a list", None, f"/{page}")
            continue
        for i, record in enumerate(records):
            loc = f"/{page}/{i}"
            _check_resource(record, cls, loc, report)
            if isinstance(record, dict):
                rid = record.get("id")
                if isinstance(rid, str):
                    key = (cls, rid)
                    if key in seen:
                        report.warning("duplicate", f"duplicate definition of {cls} {rid!r} (first wins)",
                                       rid, loc)
                    else:
                        seen[key] = loc
    for key in doc:
        if key not in PAGES and key not in MAIN_KEYS:
            report.warning("unknown-key", f"unknown top-level key {key!r} (preserved verbatim)", None, f"/{key}")
    return report


# ---------------------------------------------------------------------------
# Reference validation
# ---------------------------------------------------------------------------

def validate_references(model: "ModelSpec", linked: Iterable[str] = ()) -> ValidationReport:
    """Check every reference in the model against declared resources.

    Foreign-prefixed references into namespaces absent from `linked` are
    errors; local dangling references are stub-eligible warnings; duplicate
    identifiers are warnings.
    """
    from .relations import resolve, Resolution

    report = ValidationReport()
    known = set(linked) | {model.namespace} | {m.namespace for m in model.imported}
    known |= {r.namespace for r in model.resources if r.namespace}

    counts: dict[tuple[str, str], int] = {}
    for res in model.resources:
        key = (res.cls, res.ref_in(model))
        counts[key] = counts.get(key, 0) + 1
    for (cls, rid), n in sorted(counts.items()):
        if n > 1:
            report.warning("duplicate", f"{n} definitions of {cls} {rid!r} (first wins)", rid)

    for res in model.resources:
        table = reference_props(res.cls)
        for prop, spec in table.items():
            value = res.props.get(prop)
            if value is None:
                continue
            refs = value if spec.kind is Kind.REFLIST else [value]
            for i, ref in enumerate(refs):
                if not isinstance(ref, str):
                    continue
                loc = f"/{PAGE_OF_CLASS[res.cls]}/{res.id}/{prop}" + (f"/{i}" if spec.kind is Kind.REFLIST else "")
                try:
                    outcome = resolve(ref, model, expected=spec.targets)
                except IdentifierError as exc:
                    report.error("identifier", str(exc), res.ref_in(model), loc)
                    continue
                if outcome.status is Resolution.FOUND:
                    continue
                if outcome.status is Resolution.UNRESOLVED_FOREIGN:
                    if outcome.identifier.prefix in known:
                        report.warning("dangling", f"reference {ref!r} not defined in linked namespace",
                                       res.ref_in(model), loc)
                    else:
                        report.error("unresolved-foreign",
                                     f"reference {ref!r} points into unlinked namespace "
                                     f"{outcome.identifier.prefix!r}", res.ref_in(model), loc)
                else:
                    report.warning("stub-eligible", f"reference {ref!r} is not defined (stub will be generated)",
                                   res.ref_in(model), loc)
    return report
