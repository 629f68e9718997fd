"""Visible subgraph computation from group toggles."""

from __future__ import annotations

from ..resources import ModelSpec, Resource


def _group_members(model: ModelSpec, group: Resource, seen: set[str],
                   nodes: set[str], links: set[str], lyphs: set[str]) -> None:
    ref = group.ref_in(model)
    if ref in seen:
        return
    seen.add(ref)
    nodes.update(r for r in group.props.get("nodes", []) if isinstance(r, str))
    links.update(r for r in group.props.get("links", []) if isinstance(r, str))
    lyphs.update(r for r in group.props.get("lyphs", []) if isinstance(r, str))
    for nested_ref in group.props.get("groups", []):
        nested = model.find(nested_ref, "Group") if isinstance(nested_ref, str) else None
        if nested is not None:
            _group_members(model, nested, seen, nodes, links, lyphs)


def visible_subgraph(model: ModelSpec, active_groups: set[str]) -> tuple[set[str], set[str]]:
    """Visible nodes and links implied by the active group set.

    Group membership is transitive through nested groups; the closure then
    keeps links and their end nodes consistent: a visible link shows its
    ends, and a link whose ends are both visible is shown as well.
    """
    nodes: set[str] = set()
    links: set[str] = set()
    lyphs: set[str] = set()
    seen: set[str] = set()
    for ref in sorted(active_groups):
        group = model.find(ref, "Group")
        if group is not None:
            _group_members(model, group, seen, nodes, links, lyphs)

    all_links = {r.ref_in(model): r for r in model.of_class("Link")}
    for lyph_ref in lyphs:
        lyph = model.find(lyph_ref, "Lyph")
        if lyph is None:
            continue
        conveys = lyph.props.get("conveys")
        if isinstance(conveys, str) and conveys in all_links:
            links.add(conveys)

    changed = True
    while changed:
        changed = False
        for ref in list(links):
            link = all_links.get(ref)
            if link is None:
                links.discard(ref)
                changed = True
                continue
            for end in ("source", "target"):
                node = link.props.get(end)
                if isinstance(node, str) and node not in nodes:
                    nodes.add(node)
                    changed = True
        for ref, link in all_links.items():
            if ref in links:
                continue
            src, tgt = link.props.get("source"), link.props.get("target")
            if isinstance(src, str) and isinstance(tgt, str) and src in nodes and tgt in nodes:
                links.add(ref)
                changed = True
    return nodes, links
