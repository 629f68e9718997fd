"""Spring-electric solver with ranked constraint projection.

Each iteration accumulates spring forces along visible links, pairwise
repulsion between visible nodes and magnet attraction toward declared
layout coordinates, then projects constraints from the strongest rank
down.  Displacements are capped by a geometrically cooling temperature,
so runs are reproducible bit for bit.
"""

from __future__ import annotations

import math

import numpy as np

from ..resources import ModelSpec, Resource
from .geometry import (
    link_curve,
    lyph_axis,
    lyph_center,
    node_position,
    perpendicular,
    region_centroid,
    wire_curve,
)
from .state import ConstraintRank, LayoutState, classify_node

K_REPULSION = 30.0
K_SPRING = 4.0
K_MAGNET = 1.0
REST_LENGTH = 5.0
DAMPING = 0.9
START_TEMPERATURE = 2.0
DEFAULT_ITERATIONS = 300


def _visible_nodes(model: ModelSpec, state: LayoutState) -> dict[str, Resource]:
    table = {r.ref_in(model): r for r in model.of_class("Node")}
    return {ref: table[ref] for ref in sorted(state.visible_nodes) if ref in table}


def _anchor_position(model: ModelSpec, anchor: Resource) -> np.ndarray:
    layout = anchor.props.get("layout")
    if isinstance(layout, list):
        pos = np.zeros(3)
        for i, value in enumerate(layout[:3]):
            pos[i] = float(value)
        return pos
    host_ref = anchor.props.get("hostedBy")
    if isinstance(host_ref, str):
        host = model.find(host_ref)
        if host is not None and host.cls == "Wire":
            curve = wire_curve(model, host)
            if curve is not None:
                return curve.point_at(0.5)
        if host is not None and host.cls == "Region":
            return region_centroid(model, host)
    return np.zeros(3)


def _default_size(model: ModelSpec, state: LayoutState, lyph: Resource) -> tuple[float, float]:
    size = state.sizes.get(lyph.ref_in(model))
    if size is not None:
        return size
    conveys = lyph.props.get("conveys")
    if isinstance(conveys, str):
        link = model.find(conveys, "Link")
        if link is not None:
            curve = link_curve(model, state, link)
            if curve is not None:
                length = 0.8 * curve.length()
                layers = lyph.props.get("layers", [])
                aspect = 2.0 + (len(layers) if isinstance(layers, list) else 0)
                return (length, length / aspect)
    return (4.0, 2.0)


def _project(model: ModelSpec, state: LayoutState, nodes: dict[str, Resource]) -> None:
    ranked: dict[ConstraintRank, list[str]] = {}
    for ref, node in nodes.items():
        ranked.setdefault(classify_node(node), []).append(ref)

    for rank in (ConstraintRank.ANCHORED, ConstraintRank.FIXED, ConstraintRank.HOSTED_BY_LINK,
                 ConstraintRank.BORDER_HOSTED, ConstraintRank.INTERNAL_IN,
                 ConstraintRank.CONTROL_CENTROID):
        for ref in ranked.get(rank, []):
            node = nodes[ref]
            target = _constraint_target(model, state, node, rank)
            if target is not None:
                if state.mode == "2d":
                    target = target.copy()
                    target[2] = 0.0
                state.positions[ref] = target


def _constraint_target(model: ModelSpec, state: LayoutState, node: Resource,
                       rank: ConstraintRank) -> np.ndarray | None:
    if rank is ConstraintRank.ANCHORED:
        anchor = model.find(node.props["anchoredTo"], "Anchor")
        if anchor is None:
            return None
        return _anchor_position(model, anchor)

    if rank is ConstraintRank.FIXED:
        layout = node.props["layout"]
        pos = np.zeros(3)
        for i, value in enumerate(layout[:3]):
            pos[i] = float(value)
        return pos

    if rank is ConstraintRank.HOSTED_BY_LINK:
        link = model.find(node.props["hostedBy"], "Link")
        if link is None:
            return None
        curve = link_curve(model, state, link)
        if curve is None:
            return None
        offset = node.props.get("offset")
        if offset is None:
            hosted = [r for r in link.props.get("hostedNodes", []) if isinstance(r, str)]
            without = [r for r in hosted
                       if (model.find(r, "Node") or Resource("", "Node")).props.get("offset") is None]
            ref = node.ref_in(model)
            if ref in without:
                offset = (without.index(ref) + 1) / (len(without) + 1)
            else:
                offset = 0.5
        return curve.point_at(float(offset))

    if rank is ConstraintRank.BORDER_HOSTED:
        hosts = [model.find(r, "Lyph") for r in node.props.get("onBorderOf", []) if isinstance(r, str)]
        hosts = [h for h in hosts if h is not None]
        if not hosts:
            return None
        centers = [lyph_center(model, state, h) for h in hosts]
        centers = [c for c in centers if c is not None]
        if not centers:
            return None
        if len(centers) >= 2:
            return (centers[0] + centers[1]) / 2.0
        # a single host: the outer cap of its long axis, nearer to the node
        host = hosts[0]
        axis = lyph_axis(model, state, host)
        length = _default_size(model, state, host)[0]
        current = state.positions.get(node.ref_in(model))
        sign = 1.0
        if current is not None and float(np.dot(current - centers[0], axis)) < 0:
            sign = -1.0
        return centers[0] + axis * (sign * length / 2.0)

    if rank is ConstraintRank.INTERNAL_IN:
        host = model.find(node.props["internalIn"])
        if host is None:
            return None
        if host.cls == "Region":
            return region_centroid(model, host)
        center = lyph_center(model, state, host)
        if center is None:
            return None
        siblings = [r for r in host.props.get("internalNodes", []) if isinstance(r, str)]
        ref = node.ref_in(model)
        if len(siblings) <= 1 or ref not in siblings:
            return center
        return _pattern_position(model, state, host, center, siblings.index(ref), len(siblings))

    if rank is ConstraintRank.CONTROL_CENTROID:
        points = []
        for ref in node.props.get("controlNodes", []):
            pos = node_position(state, ref) if isinstance(ref, str) else None
            if pos is not None:
                points.append(pos)
        if not points:
            return None
        return np.mean(np.stack(points), axis=0)

    return None


def _pattern_position(model: ModelSpec, state: LayoutState, host: Resource,
                      center: np.ndarray, index: int, count: int) -> np.ndarray:
    """Circular arrangement up to 6 internal nodes, grid above."""
    length, width = _default_size(model, state, host)
    axis = lyph_axis(model, state, host)
    perp = perpendicular(axis)
    if count <= 6:
        radius = max(min(length, width) / 4.0, 1e-3)
        angle = 2.0 * math.pi * index / count
        return center + axis * (radius * math.cos(angle)) + perp * (radius * math.sin(angle))
    cols = math.ceil(math.sqrt(count))
    rows = math.ceil(count / cols)
    col = index % cols
    row = index // cols
    fx = (col + 0.5) / cols - 0.5
    fy = (row + 0.5) / rows - 0.5
    return center + axis * (fx * length * 0.9) + perp * (fy * width * 0.9)


def solve(model: ModelSpec, state: LayoutState, iterations: int = DEFAULT_ITERATIONS) -> LayoutState:
    """Run the force loop for the given iteration budget, in place.

    A non-positive budget is a no-op.  Output satisfies the constraint
    ranks exactly: the final pass projects after the last force step.
    """
    if iterations <= 0:
        return state
    nodes = _visible_nodes(model, state)
    refs = sorted(nodes)
    if not refs:
        return state
    index = {ref: i for i, ref in enumerate(refs)}
    links = [r for r in model.of_class("Link")
             if r.ref_in(model) in state.visible_links
             and r.props.get("source") in index and r.props.get("target") in index]
    magnets = []
    for ref in refs:
        node = nodes[ref]
        layout = node.props.get("layout")
        if isinstance(layout, list) and not node.props.get("fixed"):
            target = np.zeros(3)
            for i, value in enumerate(layout[:3]):
                target[i] = float(value)
            magnets.append((index[ref], target))

    pos = np.stack([state.positions[ref] for ref in refs]).astype(float)
    temperature = START_TEMPERATURE
    for _ in range(iterations):
        force = np.zeros_like(pos)
        # pairwise repulsion
        diff = pos[:, None, :] - pos[None, :, :]
        dist2 = np.sum(diff * diff, axis=2)
        np.fill_diagonal(dist2, np.inf)
        dist2 = np.maximum(dist2, 1e-6)
        magnitude = K_REPULSION / dist2
        force += np.sum(diff / np.sqrt(dist2)[:, :, None] * magnitude[:, :, None], axis=1)
        # springs
        for link in links:
            i = index[link.props["source"]]
            j = index[link.props["target"]]
            d = pos[j] - pos[i]
            dist = float(np.linalg.norm(d))
            if dist < 1e-9:
                continue
            rest = link.props.get("length", REST_LENGTH)
            pull = K_SPRING * (dist - float(rest)) * d / dist
            force[i] += pull
            force[j] -= pull
        # magnets
        for i, target in magnets:
            force[i] += K_MAGNET * (target - pos[i])

        norms = np.linalg.norm(force, axis=1)
        step = np.where(norms > 1e-12, np.minimum(norms * 0.5, temperature) / np.maximum(norms, 1e-12), 0.0)
        pos += force * step[:, None]
        if state.mode == "2d":
            pos[:, 2] = 0.0
        for ref, i in index.items():
            state.positions[ref] = pos[i]
        _project(model, state, nodes)
        for ref, i in index.items():
            pos[i] = state.positions[ref]
        temperature *= DAMPING
        state.iteration += 1

    _project(model, state, nodes)
    return state


def project_constraints(model: ModelSpec, state: LayoutState) -> LayoutState:
    """One projection pass without force steps."""
    _project(model, state, _visible_nodes(model, state))
    return state
