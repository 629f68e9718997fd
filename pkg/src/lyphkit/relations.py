"""Reference resolution and bidirectional relation closure."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .identifiers import Identifier, parse_identifier
from .resources import ModelSpec, Resource
from .schema import ANY, Card, COMPOSITION_PROPS, RELATION_PAIRS, ValidationReport


class Resolution(Enum):
    FOUND = "found"
    UNRESOLVED_LOCAL = "unresolved-local"
    UNRESOLVED_FOREIGN = "unresolved-foreign"


@dataclass
class Resolved:
    status: Resolution
    identifier: Identifier
    resource: Optional[Resource] = None

    @property
    def stub_eligible(self) -> bool:
        return self.status is Resolution.UNRESOLVED_LOCAL


def resolve(ref: str, model: ModelSpec, expected: tuple[str, ...] = ()) -> Resolved:
    """Resolve a reference against the model and its linked namespaces.

    A dangling local reference is stub-eligible; a dangling foreign one is
    not.  Raises IdentifierError on malformed input.
    """
    ident = parse_identifier(ref)
    classes = None if not expected or expected == ANY else expected
    if classes:
        for cls in classes:
            found = model.find(ref, cls)
            if found is not None:
                return Resolved(Resolution.FOUND, ident, found)
    found = model.find(ref)
    if found is not None:
        return Resolved(Resolution.FOUND, ident, found)
    if ident.prefix and ident.prefix != model.namespace:
        return Resolved(Resolution.UNRESOLVED_FOREIGN, ident)
    return Resolved(Resolution.UNRESOLVED_LOCAL, ident)


def _as_list(value) -> list:
    if value is None:
        return []
    return value if isinstance(value, list) else [value]


def _ensure_member(res: Resource, prop: str, ref: str) -> bool:
    current = res.props.setdefault(prop, [])
    if ref not in current:
        current.append(ref)
        return True
    return False


def _close_pair(model: ModelSpec, pair, report: ValidationReport) -> None:
    # forward direction: owner.prop -> target, maintain target.inverse
    for owner in list(model.resources):
        if owner.cls not in pair.owner_cls:
            continue
        value = owner.props.get(pair.owner_prop)
        for ref in _as_list(value):
            if not isinstance(ref, str):
                continue
            target = model.find(ref)
            if target is None or target.cls not in pair.inverse_cls:
                continue
            back = owner.ref_in(model)
            if pair.inverse_card is Card.MANY:
                _ensure_member(target, pair.inverse_prop, back)
            else:
                existing = target.props.get(pair.inverse_prop)
                if existing is None:
                    target.props[pair.inverse_prop] = back
                elif existing != back:
                    report.error(
                        "relation-conflict",
                        f"{target.ref_in(model)}.{pair.inverse_prop} is {existing!r} but "
                        f"{back!r}.{pair.owner_prop} also claims it",
                        target.ref_in(model),
                    )
    # reverse direction: target.inverse -> owner, maintain owner.prop
    for target in list(model.resources):
        if target.cls not in pair.inverse_cls:
            continue
        value = target.props.get(pair.inverse_prop)
        for ref in _as_list(value):
            if not isinstance(ref, str):
                continue
            owner = model.find(ref)
            if owner is None or owner.cls not in pair.owner_cls:
                continue
            back = target.ref_in(model)
            if pair.owner_card is Card.MANY:
                _ensure_member(owner, pair.owner_prop, back)
            else:
                existing = owner.props.get(pair.owner_prop)
                if existing is None:
                    owner.props[pair.owner_prop] = back
                elif existing != back:
                    report.error(
                        "relation-conflict",
                        f"{owner.ref_in(model)}.{pair.owner_prop} is {existing!r} but "
                        f"{back!r}.{pair.inverse_prop} also claims it",
                        owner.ref_in(model),
                    )


def sync_relations(model: ModelSpec, report: ValidationReport | None = None) -> ValidationReport:
    """Populate both directions of every known relationship pair, in place.

    Idempotent: re-running on a closed model changes nothing.  Conflicting
    assertions (two owners claiming the same to-one inverse) are critical.
    """
    report = report if report is not None else ValidationReport()
    for pair in RELATION_PAIRS:
        _close_pair(model, pair, report)
    return report


def relations_consistent(model: ModelSpec) -> list[str]:
    """List every broken pair direction; empty means fully closed."""
    problems: list[str] = []
    for pair in RELATION_PAIRS:
        for owner in model.resources:
            if owner.cls not in pair.owner_cls:
                continue
            for ref in _as_list(owner.props.get(pair.owner_prop)):
                target = model.find(ref) if isinstance(ref, str) else None
                if target is None or target.cls not in pair.inverse_cls:
                    continue
                back = owner.ref_in(model)
                inv = target.props.get(pair.inverse_prop)
                if pair.inverse_card is Card.MANY:
                    if back not in _as_list(inv):
                        problems.append(f"{target.ref_in(model)}.{pair.inverse_prop} misses {back}")
                elif inv != back:
                    problems.append(f"{target.ref_in(model)}.{pair.inverse_prop} != {back}")
        for target in model.resources:
            if target.cls not in pair.inverse_cls:
                continue
            for ref in _as_list(target.props.get(pair.inverse_prop)):
                owner = model.find(ref) if isinstance(ref, str) else None
                if owner is None or owner.cls not in pair.owner_cls:
                    continue
                back = target.ref_in(model)
                fwd = owner.props.get(pair.owner_prop)
                if pair.owner_card is Card.MANY:
                    if back not in _as_list(fwd):
                        problems.append(f"{owner.ref_in(model)}.{pair.owner_prop} misses {back}")
                elif fwd != back:
                    problems.append(f"{owner.ref_in(model)}.{pair.owner_prop} != {back}")
    return problems


# ---------------------------------------------------------------------------
# Composition acyclicity
# ---------------------------------------------------------------------------

def composition_edges(model: ModelSpec) -> dict[str, set[str]]:
    """Directed containment graph over layers, internal lyphs and materials."""
    graph: dict[str, set[str]] = {}
    for res in model.resources:
        src = res.ref_in(model)
        graph.setdefault(src, set())
        for prop in COMPOSITION_PROPS:
            for ref in _as_list(res.props.get(prop)):
                if isinstance(ref, str) and model.find(ref) is not None:
                    graph[src].add(ref)
                    graph.setdefault(ref, set())
    return graph


def _strongly_connected(graph: dict[str, set[str]]) -> list[list[str]]:
    """Iterative Tarjan; components come out in a deterministic order."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    components: list[list[str]] = []
    counter = 0

    for start in sorted(graph):
        if start in index:
            continue
        work = [(start, iter(sorted(graph[start])))]
        index[start] = low[start] = counter
        counter += 1
        stack.append(start)
        on_stack.add(start)
        while work:
            node, edges = work[-1]
            advanced = False
            for succ in edges:
                if succ not in index:
                    index[succ] = low[succ] = counter
                    counter += 1
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(sorted(graph[succ]))))
                    advanced = True
                    break
                if succ in on_stack:
                    low[node] = min(low[node], index[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    comp.append(member)
                    if member == node:
                        break
                components.append(sorted(comp))
    return components


def composition_cycle_check(model: ModelSpec, report: ValidationReport | None = None) -> ValidationReport:
    """Report every cycle in the material/layer/internal composition graph."""
    report = report if report is not None else ValidationReport()
    graph = composition_edges(model)
    for comp in _strongly_connected(graph):
        cyclic = len(comp) > 1 or (len(comp) == 1 and comp[0] in graph[comp[0]])
        if cyclic:
            report.error(
                "composition-cycle",
                "composition cycle: " + " -> ".join(comp + [comp[0]]),
                comp[0],
            )
    return report


def resources_in_cycles(model: ModelSpec) -> set[str]:
    graph = composition_edges(model)
    out: set[str] = set()
    for comp in _strongly_connected(graph):
        if len(comp) > 1 or (len(comp) == 1 and comp[0] in graph[comp[0]]):
            out.update(comp)
    return out
