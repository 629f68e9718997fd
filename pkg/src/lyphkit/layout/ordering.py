"""Slot ordering that minimizes link crossings inside a host.

Slots sit along the host's axis; chain links connect slots.  Two links
cross when their slot intervals interleave.  Up to 8 slots the search is
exhaustive; above that a barycenter sweep never worse than the input
ordering is used.
"""

from __future__ import annotations

import itertools

from ..resources import ModelSpec, Resource

EXACT_LIMIT = 8
BARYCENTER_ROUNDS = 32


def count_crossings(order: list[int], edges: list[tuple[int, int]]) -> int:
    position = {slot: i for i, slot in enumerate(order)}
    crossings = 0
    spans = []
    for a, b in edges:
        if a not in position or b not in position:
            continue
        lo, hi = sorted((position[a], position[b]))
        spans.append((lo, hi))
    for i in range(len(spans)):
        a_lo, a_hi = spans[i]
        for j in range(i + 1, len(spans)):
            b_lo, b_hi = spans[j]
            if a_lo < b_lo < a_hi < b_hi or b_lo < a_lo < b_hi < a_hi:
                crossings += 1
    return crossings


def _exact(n_slots: int, edges: list[tuple[int, int]]) -> list[int]:
    best_order = list(range(n_slots))
    best = count_crossings(best_order, edges)
    for perm in itertools.permutations(range(n_slots)):
        crossings = count_crossings(list(perm), edges)
        if crossings < best:
            best = crossings
            best_order = list(perm)
            if best == 0:
                break
    return best_order


def _barycenter(n_slots: int, edges: list[tuple[int, int]]) -> list[int]:
    neighbors: dict[int, list[int]] = {i: [] for i in range(n_slots)}
    for a, b in edges:
        if a in neighbors and b in neighbors:
            neighbors[a].append(b)
            neighbors[b].append(a)
    order = list(range(n_slots))
    best_order = list(order)
    best = count_crossings(order, edges)
    for _ in range(BARYCENTER_ROUNDS):
        position = {slot: i for i, slot in enumerate(order)}
        keys = {}
        for slot in order:
            near = neighbors[slot]
            keys[slot] = (sum(position[n] for n in near) / len(near)) if near else position[slot]
        order = sorted(order, key=lambda s: (keys[s], position[s]))
        crossings = count_crossings(order, edges)
        if crossings < best:
            best = crossings
            best_order = list(order)
        if best == 0:
            break
    return best_order


def minimize_crossings(n_slots: int, edges: list[tuple[int, int]]) -> list[int]:
    if n_slots <= 1:
        return list(range(n_slots))
    if n_slots <= EXACT_LIMIT:
        return _exact(n_slots, edges)
    return _barycenter(n_slots, edges)


def order_chain_in_host(model: ModelSpec, host: Resource,
                        slots: list[str] | None = None) -> list[int]:
    """Slot ordering for the lyphs hosted by a lyph or region.

    Edges come from every chain threading consecutive housing lyphs that
    live in the host; the returned permutation maps new position -> slot
    index in the input ordering.
    """
    if slots is None:
        slots = _hosted_slots(model, host)
    index = {ref: i for i, ref in enumerate(slots)}
    edges: list[tuple[int, int]] = []
    for chain in model.of_class("Chain"):
        sequence = [r for r in chain.props.get("housingLyphs", []) if isinstance(r, str)]
        if not sequence:
            sequence = [r for r in chain.props.get("lyphs", []) if isinstance(r, str)]
        for a, b in zip(sequence, sequence[1:]):
            if a in index and b in index:
                edges.append((index[a], index[b]))
    return minimize_crossings(len(slots), edges)


def _hosted_slots(model: ModelSpec, host: Resource) -> list[str]:
    slots: list[str] = []
    if host.cls == "Region":
        slots.extend(r for r in host.props.get("hostedLyphs", []) if isinstance(r, str))
    if host.cls == "Lyph":
        slots.extend(r for r in host.props.get("internalLyphs", []) if isinstance(r, str))
    host_ref = host.ref_in(model)
    for lyph in model.of_class("Lyph"):
        ref = lyph.ref_in(model)
        if ref in slots:
            continue
        if lyph.props.get("hostedBy") == host_ref or lyph.props.get("internalIn") == host_ref:
            slots.append(ref)
    return slots
