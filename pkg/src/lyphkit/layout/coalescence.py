"""Coalescence alignment.

Connecting coalescences force the conveying links of the member lyphs onto
parallel adjacent lines, rotated so the outermost layers face each other;
embedding coalescences co-locate the embedded lyph on the host's layer.
"""

from __future__ import annotations

import numpy as np

from ..resources import ModelSpec, Resource
from ..schema import ValidationReport
from .geometry import link_curve, perpendicular
from .state import LayoutState


def _member_lyphs(model: ModelSpec, coalescence: Resource) -> list[Resource]:
    members = []
    for ref in coalescence.props.get("lyphs", []):
        lyph = model.find(ref, "Lyph") if isinstance(ref, str) else None
        if lyph is not None and not lyph.props.get("isTemplate"):
            members.append(lyph)
    return members


def _conveying_link(model: ModelSpec, lyph: Resource) -> Resource | None:
    ref = lyph.props.get("conveys")
    return model.find(ref, "Link") if isinstance(ref, str) else None


def _size_of(model: ModelSpec, state: LayoutState, lyph: Resource) -> tuple[float, float]:
    size = state.sizes.get(lyph.ref_in(model))
    if size is not None:
        return size
    link = _conveying_link(model, lyph)
    if link is not None:
        curve = link_curve(model, state, link)
        if curve is not None:
            length = 0.8 * curve.length()
            layers = lyph.props.get("layers", [])
            aspect = 2.0 + (len(layers) if isinstance(layers, list) else 0)
            return (length, length / aspect)
    return (4.0, 2.0)


def _layer_width(model: ModelSpec, state: LayoutState, lyph: Resource) -> float:
    layers = lyph.props.get("layers", [])
    count = len(layers) if isinstance(layers, list) else 0
    width = _size_of(model, state, lyph)[1]
    if count == 0:
        return 0.0
    return width / count


def _move_link(state: LayoutState, link: Resource, center: np.ndarray,
               axis: np.ndarray, length: float) -> None:
    src, tgt = link.props.get("source"), link.props.get("target")
    half = axis * (length / 2.0)
    if isinstance(src, str):
        state.positions[src] = center - half
    if isinstance(tgt, str):
        state.positions[tgt] = center + half


def align_coalescences(model: ModelSpec, state: LayoutState,
                       report: ValidationReport | None = None) -> LayoutState:
    aligned: set[str] = set()
    for coalescence in model.of_class("Coalescence"):
        members = _member_lyphs(model, coalescence)
        if len(members) < 2:
            continue
        clashing = [m.id for m in members if m.ref_in(model) in aligned]
        if clashing:
            if report is not None:
                report.warning("over-constrained",
                               f"coalescence {coalescence.id!r} reuses already aligned lyphs "
                               f"{', '.join(clashing)}; the first coalescence wins", coalescence.id)
            continue
        kind = coalescence.props.get("kind", "CONNECTING")
        if kind == "EMBEDDING":
            _align_embedding(model, state, members)
        else:
            _align_connecting(model, state, members)
        aligned.update(m.ref_in(model) for m in members)
    return state


def _align_connecting(model: ModelSpec, state: LayoutState, members: list[Resource]) -> None:
    reference = members[0]
    ref_link = _conveying_link(model, reference)
    if ref_link is None:
        return
    src = state.positions.get(ref_link.props.get("source", ""))
    tgt = state.positions.get(ref_link.props.get("target", ""))
    if src is None or tgt is None:
        return
    axis = tgt - src
    norm = float(np.linalg.norm(axis))
    if norm < 1e-12:
        axis = np.array([1.0, 0.0, 0.0])
        norm = 1.0
    axis = axis / norm
    perp = perpendicular(axis)
    center = (src + tgt) / 2.0
    state.rotations.setdefault(reference.ref_in(model), float(reference.props.get("angle", 0.0)))

    offset = 0.0
    previous = reference
    for lyph in members[1:]:
        link = _conveying_link(model, lyph)
        if link is None:
            continue
        a = state.positions.get(link.props.get("source", ""))
        b = state.positions.get(link.props.get("target", ""))
        length = float(np.linalg.norm(b - a)) if a is not None and b is not None else norm
        if length < 1e-12:
            length = norm
        shared = min(_layer_width(model, state, previous), _layer_width(model, state, lyph))
        gap = (_size_of(model, state, previous)[1] + _size_of(model, state, lyph)[1]) / 2.0 - shared
        offset += gap
        _move_link(state, link, center + perp * offset, axis, length)
        # outermost layers face each other across the shared band
        state.rotations[lyph.ref_in(model)] = 180.0
        previous = lyph


def _align_embedding(model: ModelSpec, state: LayoutState, members: list[Resource]) -> None:
    host = members[0]
    host_link = _conveying_link(model, host)
    if host_link is None:
        return
    src = state.positions.get(host_link.props.get("source", ""))
    tgt = state.positions.get(host_link.props.get("target", ""))
    if src is None or tgt is None:
        return
    axis = tgt - src
    norm = float(np.linalg.norm(axis))
    if norm < 1e-12:
        return
    axis = axis / norm
    perp = perpendicular(axis)
    center = (src + tgt) / 2.0
    host_length, host_width = _size_of(model, state, host)
    band = _layer_width(model, state, host)
    # band center of the outermost layer
    band_center = center + perp * (host_width / 2.0 - band / 2.0 if band > 0 else 0.0)
    for lyph in members[1:]:
        link = _conveying_link(model, lyph)
        length, width = _size_of(model, state, lyph)
        length = min(length, host_length * 0.9)
        state.sizes[lyph.ref_in(model)] = (length, width)
        state.lyph_centers[lyph.ref_in(model)] = band_center.copy()
        if link is not None:
            _move_link(state, link, band_center, axis, length / 0.8)
        state.rotations.setdefault(lyph.ref_in(model), float(lyph.props.get("angle", 0.0)))
