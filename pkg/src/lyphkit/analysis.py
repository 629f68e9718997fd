"""Connectivity analyses over a generated model.

Closed component search walks link components and checks that every
terminal attachment is sealed by the conveyed lyph's topology; query and
clade filters build on the same component structure.  Results materialize
as dynamic groups.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .resources import ModelSpec, Resource
from .schema import ValidationReport

QueryBackend = Callable[[ModelSpec, str, Optional[ValidationReport]], Resource]


class AnalysisError(Exception):
    pass


#: axial ends sealed by each topology, per link orientation
SEALED_ENDS = {
    "TUBE": frozenset(),
    "BAG-LEFT": frozenset({"source"}),
    "BAG-RIGHT": frozenset({"target"}),
    "CYST": frozenset({"source", "target"}),
}


@dataclass
class LinkComponent:
    links: list[Resource]
    nodes: set[str]

    def link_refs(self, model: ModelSpec) -> list[str]:
        return [l.ref_in(model) for l in self.links]


def link_components(model: ModelSpec) -> list[LinkComponent]:
    """Connected components of links joined through shared end nodes."""
    links = [r for r in model.resources if r.cls == "Link"
             and isinstance(r.props.get("source"), str) and isinstance(r.props.get("target"), str)]
    incident: dict[str, list[int]] = {}
    for i, link in enumerate(links):
        incident.setdefault(link.props["source"], []).append(i)
        incident.setdefault(link.props["target"], []).append(i)
    seen: set[int] = set()
    components: list[LinkComponent] = []
    for i, link in enumerate(links):
        if i in seen:
            continue
        queue = [i]
        seen.add(i)
        members: list[int] = []
        nodes: set[str] = set()
        while queue:
            j = queue.pop(0)
            members.append(j)
            for end in ("source", "target"):
                node = links[j].props[end]
                nodes.add(node)
                for k in incident[node]:
                    if k not in seen:
                        seen.add(k)
                        queue.append(k)
        components.append(LinkComponent(links=[links[j] for j in sorted(members)], nodes=nodes))
    return components


def _topology_of(link: Resource, model: ModelSpec, report: ValidationReport | None,
                 warned: set[str]) -> str | None:
    """Topology of the conveyed lyph; None when the link conveys nothing."""
    ref = link.props.get("conveyingLyph")
    if not isinstance(ref, str):
        return None
    lyph = model.find(ref, "Lyph")
    if lyph is None:
        return None
    topology = lyph.props.get("topology")
    if topology not in SEALED_ENDS:
        if report is not None and ref not in warned:
            warned.add(ref)
            report.warning("topology-missing", f"lyph {ref!r} has no topology; treated as TUBE", ref)
        return "TUBE"
    return topology


def component_is_sealed(component: LinkComponent, model: ModelSpec,
                        report: ValidationReport | None = None,
                        warned: set[str] | None = None) -> bool:
    """True when every link end at a degree-1 node is closed off."""
    warned = warned if warned is not None else set()
    degree: dict[str, int] = {}
    for link in component.links:
        for end in ("source", "target"):
            node = link.props[end]
            degree[node] = degree.get(node, 0) + 1
    for link in component.links:
        for end in ("source", "target"):
            node = link.props[end]
            if degree[node] != 1:
                continue
            topology = _topology_of(link, model, report, warned)
            if topology is None or end not in SEALED_ENDS[topology]:
                return False
    return True


def _free_group_id(base: str, model: ModelSpec) -> str:
    candidate = base
    bump = 1
    while model.has_id(candidate):
        bump += 1
        candidate = f"{base}_{bump}"
    return candidate


def neurulate(model: ModelSpec, report: ValidationReport | None = None) -> list[Resource]:
    """Find closed components and materialize them as dynamic groups.

    A component qualifies when the lyph at every terminal attachment seals
    that end, so the whole component reads as one cellular entity.  Groups
    are appended to the model; a generated input keeps its existing ones.
    """
    warned: set[str] = set()
    groups: list[Resource] = []
    index = 0
    for component in link_components(model):
        if not component_is_sealed(component, model, report, warned):
            continue
        index += 1
        lyphs = []
        for link in component.links:
            ref = link.props.get("conveyingLyph")
            if isinstance(ref, str) and model.find(ref, "Lyph") is not None:
                lyphs.append(ref)
        group = Resource(
            id=_free_group_id(f"neurulated_{index}", model),
            cls="Group",
            props={
                "generated": True,
                "dynamic": True,
                "origin": "NEURULATED",
                "description": "neurulated",
                "links": sorted(component.link_refs(model)),
                "nodes": sorted(component.nodes),
                "lyphs": sorted(set(lyphs)),
            },
        )
        model.add(group)
        groups.append(group)
    return groups


def neurulated_groups(model: ModelSpec) -> list[Resource]:
    return [r for r in model.of_class("Group") if r.props.get("origin") == "NEURULATED"]


def soma_processes(model: ModelSpec, start: str,
                   report: ValidationReport | None = None) -> Resource:
    """Dynamic group of everything reachable from a soma location.

    The start may name a node or a lyph (the soma itself or its housing
    lyph); the result is the whole closed component around it, a collective
    union with no per-collateral split.  Components that are not sealed
    produce an empty group and a warning.
    """
    seed = model.find(start)
    if seed is None:
        raise AnalysisError(f"unresolved query start {start!r}")
    seed_links: set[str] = set()
    if seed.cls == "Node":
        node_ref = seed.ref_in(model)
        for link in model.of_class("Link"):
            if link.props.get("source") == node_ref or link.props.get("target") == node_ref:
                seed_links.add(link.ref_in(model))
    elif seed.cls == "Lyph":
        lyph_ref = seed.ref_in(model)
        for link in model.of_class("Link"):
            conveyed = link.props.get("conveyingLyph")
            if conveyed == lyph_ref:
                seed_links.add(link.ref_in(model))
                continue
            if isinstance(conveyed, str):
                inner = model.find(conveyed, "Lyph")
                if inner is not None and inner.props.get("internalIn") == lyph_ref:
                    seed_links.add(link.ref_in(model))
    else:
        raise AnalysisError(f"query start {start!r} is a {seed.cls}, not a node or lyph")

    links: set[str] = set()
    nodes: set[str] = set()
    lyphs: set[str] = set()
    warned: set[str] = set()
    matched = False
    for component in link_components(model):
        refs = set(component.link_refs(model))
        if not refs & seed_links:
            continue
        matched = True
        if not component_is_sealed(component, model, None, warned):
            continue
        links |= refs
        nodes |= component.nodes
        for link in component.links:
            conveyed = link.props.get("conveyingLyph")
            if isinstance(conveyed, str):
                lyphs.add(conveyed)
    if report is not None and matched and not links:
        report.warning("open-component", f"start {start!r} lies in an open component", start)
    local = start.replace(":", "_")
    return Resource(
        id=_free_group_id(f"query_{local}", model),
        cls="Group",
        props={
            "generated": True,
            "dynamic": True,
            "origin": "QUERY",
            "seed": start,
            "description": "query",
            "links": sorted(links),
            "nodes": sorted(nodes),
            "lyphs": sorted(lyphs),
        },
    )


# Alternative query engines can register here; "local" is the built-in
# reachability semantics used by soma_processes.
QUERY_BACKENDS: dict[str, "QueryBackend"] = {}


def register_query_backend(name: str, backend: "QueryBackend") -> None:
    QUERY_BACKENDS[name] = backend


def run_query(model: ModelSpec, start: str, backend: str = "local",
              report: ValidationReport | None = None) -> Resource:
    try:
        handler = QUERY_BACKENDS[backend]
    except KeyError:
        raise AnalysisError(f"unknown query backend {backend!r}; "
                            f"registered: {', '.join(sorted(QUERY_BACKENDS))}")
    return handler(model, start, report)


QUERY_BACKENDS["local"] = soma_processes


def declared_clades(model: ModelSpec) -> set[str]:
    clades = set(model.clades)
    for row in model.of_class("Variance"):
        clades.update(row.props.get("clades", []))
    return clades


def filter_by_clade(model: ModelSpec, clade: str) -> dict[str, bool]:
    """Visibility assignment for one clade.

    Resources absent from the clade per the variance rows are hidden, and
    hiding propagates so no visible link keeps a hidden end node or lyph.
    """
    if clade not in declared_clades(model):
        raise AnalysisError(f"unknown clade {clade!r}")
    visible: dict[str, bool] = {r.ref_in(model): True for r in model.resources}
    for row in model.of_class("Variance"):
        ref = row.props.get("resource")
        if isinstance(ref, str) and ref in visible:
            if clade not in row.props.get("clades", []):
                visible[ref] = False
    for link in model.of_class("Link"):
        ref = link.ref_in(model)
        if not visible.get(ref, True):
            continue
        ends = [link.props.get("source"), link.props.get("target"), link.props.get("conveyingLyph")]
        for end in ends:
            if isinstance(end, str) and visible.get(end) is False:
                visible[ref] = False
                break
    return visible


def clade_group(model: ModelSpec, clade: str) -> Resource:
    """Materialize one clade's visible subset as a dynamic group."""
    assignment = filter_by_clade(model, clade)
    members: dict[str, list[str]] = {"nodes": [], "links": [], "lyphs": []}
    page = {"Node": "nodes", "Link": "links", "Lyph": "lyphs"}
    for res in model.resources:
        if res.cls in page and assignment.get(res.ref_in(model), True):
            members[page[res.cls]].append(res.ref_in(model))
    props: dict = {
        "generated": True,
        "dynamic": True,
        "origin": "VARIANCE",
        "description": "variance",
        "name": clade,
    }
    for key, refs in members.items():
        if refs:
            props[key] = sorted(refs)
    return Resource(id=_free_group_id(f"clade_{clade}", model), cls="Group", props=props)
