"""Resource graph containers.

Resources are property bags: every declared or generated property lives in
`props`, keyed exactly as it appears in the model document.  References
are stored as strings ("local" or "prefix:local") and resolved against the
owning model, which keeps serialization trivial and lets the editor rewrite
references textually.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Any, Iterator, Optional

from .identifiers import IdentifierError, parse_identifier, render_ref
from .schema import Kind, reference_props

DEFAULT_NAMESPACE = "local"


@dataclass
class Resource:
    id: str
    cls: str
    namespace: str = ""
    props: dict[str, Any] = field(default_factory=dict)

    def get(self, prop: str, default: Any = None) -> Any:
        return self.props.get(prop, default)

    def __getitem__(self, prop: str) -> Any:
        return self.props[prop]

    def __setitem__(self, prop: str, value: Any) -> None:
        self.props[prop] = value

    def __contains__(self, prop: str) -> bool:
        return prop in self.props

    @property
    def name(self) -> str:
        return self.props.get("name", "")

    @property
    def generated(self) -> bool:
        return bool(self.props.get("generated", False))

    @property
    def external(self) -> bool:
        return bool(self.props.get("external", False))

    @property
    def ontology_terms(self) -> list[str]:
        return list(self.props.get("ontologyTerms", []))

    def ref_in(self, model: "ModelSpec") -> str:
        """Rendered reference to this resource as seen from `model`."""
        return render_ref(self.id, self.namespace, model.namespace)

    def refs(self) -> Iterator[tuple[str, Kind, list[str]]]:
        """Yield (prop, kind, values) for every populated reference property."""
        for prop, spec in reference_props(self.cls).items():
            value = self.props.get(prop)
            if value is None:
                continue
            if spec.kind is Kind.REF:
                if isinstance(value, str):
                    yield prop, spec.kind, [value]
            else:
                yield prop, spec.kind, [v for v in value if isinstance(v, str)]

    def clone(self) -> "Resource":
        return Resource(self.id, self.cls, self.namespace, copy.deepcopy(self.props))


@dataclass
class ModelSpec:
    """A parsed input model: declared resources plus namespace metadata."""

    namespace: str = DEFAULT_NAMESPACE
    description: str = ""
    imports: list[Any] = field(default_factory=list)
    clades: list[str] = field(default_factory=list)
    resources: list[Resource] = field(default_factory=list)
    imported: list["ModelSpec"] = field(default_factory=list)
    generated: bool = False
    unknown: dict[str, Any] = field(default_factory=dict)

    # -- registry ----------------------------------------------------------

    def add(self, resource: Resource) -> Resource:
        if not resource.namespace:
            resource.namespace = self.namespace
        self.resources.append(resource)
        return resource

    def remove(self, resource: Resource) -> None:
        self.resources.remove(resource)

    def of_class(self, cls: str) -> list[Resource]:
        return [r for r in self.resources if r.cls == cls]

    def find(self, ref: str, cls: str | None = None) -> Optional[Resource]:
        """Look a reference up; first declaration wins on duplicates.

        Foreign-prefixed references also search linked (imported) models.
        Malformed references resolve to nothing (validation reports them).
        """
        try:
            ident = parse_identifier(ref)
        except IdentifierError:
            return None
        ns = ident.prefix or self.namespace
        for res in self.resources:
            if res.id == ident.local and (res.namespace or self.namespace) == ns:
                if cls is None or res.cls == cls:
                    return res
        if ident.prefix and ident.prefix != self.namespace:
            for other in self.imported:
                if other.namespace == ns:
                    found = other.find(ident.local, cls)
                    if found is not None:
                        return found
        return None

    def has_id(self, local: str) -> bool:
        return any(r.id == local and (r.namespace or self.namespace) == self.namespace
                   for r in self.resources)

    def all_models(self) -> Iterator["ModelSpec"]:
        """This model followed by the transitive closure of linked models."""
        seen = {id(self)}
        queue = [self]
        while queue:
            model = queue.pop(0)
            yield model
            for other in model.imported:
                if id(other) not in seen:
                    seen.add(id(other))
                    queue.append(other)

    def clone(self) -> "ModelSpec":
        dup = copy.copy(self)
        dup.resources = [r.clone() for r in self.resources]
        dup.imports = copy.deepcopy(self.imports)
        dup.clades = list(self.clades)
        dup.unknown = copy.deepcopy(self.unknown)
        dup.imported = list(self.imported)
        return dup


@dataclass
class GenerationTrace:
    """Provenance for every resource created during generation."""

    created: list[tuple[str, str]] = field(default_factory=list)
    source_template: dict[str, str] = field(default_factory=dict)

    def record(self, ref: str, cause: str) -> None:
        self.created.append((ref, cause))

    def created_ids(self) -> set[str]:
        return {ref for ref, _ in self.created}

    def by_cause(self, cause: str) -> list[str]:
        return [ref for ref, c in self.created if c == cause]


@dataclass
class GeneratedModel(ModelSpec):
    """The expanded, relation-closed model; reloads without re-generation."""

    trace: GenerationTrace = field(default_factory=GenerationTrace)

    def __post_init__(self) -> None:
        self.generated = True

    @classmethod
    def from_spec(cls, spec: ModelSpec) -> "GeneratedModel":
        gen = cls(
            namespace=spec.namespace,
            description=spec.description,
            imports=copy.deepcopy(spec.imports),
            clades=list(spec.clades),
            resources=[r.clone() for r in spec.resources],
            imported=list(spec.imported),
            unknown=copy.deepcopy(spec.unknown),
        )
        return gen
