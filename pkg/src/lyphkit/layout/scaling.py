"""Default size rules.

A conveyed lyph takes 80% of its link's length; its width comes from an
aspect ratio that grows with the layer count, and layers split the width
equally.  Internal lyphs are scaled uniformly onto a grid that fits the
host with a 10% margin.
"""

from __future__ import annotations

import math

import numpy as np

from ..resources import ModelSpec, Resource
from ..schema import ValidationReport
from .geometry import link_curve, lyph_axis, lyph_center, perpendicular, region_centroid
from .state import LayoutState

LINK_FRACTION = 0.8
FIT_MARGIN = 0.9
MIN_LENGTH = 1e-6
BASE_SIZE = (4.0, 2.0)


def _aspect(lyph: Resource) -> float:
    layers = lyph.props.get("layers", [])
    count = len(layers) if isinstance(layers, list) else 0
    return 2.0 + count


def compute_scaling(model: ModelSpec, state: LayoutState,
                    report: ValidationReport | None = None) -> LayoutState:
    lyphs = model.of_class("Lyph")
    by_ref = {l.ref_in(model): l for l in lyphs}

    for lyph in lyphs:
        if lyph.props.get("isTemplate"):
            continue
        ref = lyph.ref_in(model)
        conveys = lyph.props.get("conveys")
        link = model.find(conveys, "Link") if isinstance(conveys, str) else None
        if link is not None:
            curve = link_curve(model, state, link)
            if curve is None:
                continue
            link_length = curve.length()
            if link_length < MIN_LENGTH:
                if report is not None:
                    report.warning("zero-length", f"link {conveys!r} has zero length; "
                                   f"lyph {ref!r} gets an epsilon size", ref)
                link_length = MIN_LENGTH
            length = LINK_FRACTION * link_length
            state.sizes[ref] = (length, length / _aspect(lyph))
        elif ref not in state.sizes:
            state.sizes[ref] = BASE_SIZE
        if ref not in state.rotations:
            state.rotations[ref] = float(lyph.props.get("angle", 0.0))

    # internal lyphs share one uniform scale so the grid fits the host
    for host in lyphs:
        internal = [by_ref.get(r) for r in host.props.get("internalLyphs", []) if isinstance(r, str)]
        internal = [l for l in internal if l is not None]
        if not internal:
            continue
        _fit_internal(model, state, host, internal)

    for region in model.of_class("Region"):
        hosted = [by_ref.get(r) for r in region.props.get("hostedLyphs", []) if isinstance(r, str)]
        hosted = [l for l in hosted if l is not None]
        if hosted:
            _fit_internal(model, state, region, hosted)
    return state


def _host_bounds(model: ModelSpec, state: LayoutState, host: Resource) -> tuple[np.ndarray, float, float]:
    if host.cls == "Region":
        center = region_centroid(model, host)
        points = []
        for ref in host.props.get("border", []):
            anchor = model.find(ref, "Anchor") if isinstance(ref, str) else None
            if anchor is not None and isinstance(anchor.props.get("layout"), list):
                xy = anchor.props["layout"]
                points.append((float(xy[0]), float(xy[1])))
        if points:
            xs = [p[0] for p in points]
            ys = [p[1] for p in points]
            return center, max(max(xs) - min(xs), 1.0), max(max(ys) - min(ys), 1.0)
        return center, 10.0, 10.0
    center = lyph_center(model, state, host)
    if center is None:
        center = np.zeros(3)
    size = state.sizes.get(host.ref_in(model), BASE_SIZE)
    return center, size[0], size[1]


def _fit_internal(model: ModelSpec, state: LayoutState, host: Resource,
                  internal: list[Resource]) -> None:
    center, host_length, host_width = _host_bounds(model, state, host)
    count = len(internal)
    cols = math.ceil(math.sqrt(count))
    rows = math.ceil(count / cols)
    base_sizes = [state.sizes.get(l.ref_in(model), BASE_SIZE) for l in internal]
    max_l = max(s[0] for s in base_sizes)
    max_w = max(s[1] for s in base_sizes)
    cell_l = FIT_MARGIN * host_length / cols
    cell_w = FIT_MARGIN * host_width / rows
    scale = min(cell_l / max_l, cell_w / max_w, 1.0)
    axis = lyph_axis(model, state, host) if host.cls == "Lyph" else np.array([1.0, 0.0, 0.0])
    perp = perpendicular(axis)
    for i, lyph in enumerate(internal):
        ref = lyph.ref_in(model)
        base = base_sizes[i]
        state.sizes[ref] = (base[0] * scale, base[1] * scale)
        col = i % cols
        row = i // cols
        fx = (col + 0.5) / cols - 0.5
        fy = (row + 0.5) / rows - 0.5
        state.lyph_centers[ref] = center + axis * (fx * host_length * FIT_MARGIN) \
            + perp * (fy * host_width * FIT_MARGIN)
