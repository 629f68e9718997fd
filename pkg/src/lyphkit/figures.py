"""Scene rendering for desk inspection.

Draws the laid-out graph (links, nodes, lyph rectangles, scaffold wires)
with matplotlib and writes it wherever savefig understands, SVG included.
Purely an emitter; nothing interactive lives here.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.patches import Polygon  # noqa: E402

from .layout.geometry import link_curve, lyph_axis, lyph_center, perpendicular, wire_curve
from .layout.state import LayoutState
from .resources import ModelSpec

NODE_COLOR = "#1f4e79"
LINK_COLOR = "#444444"
LYPH_COLOR = "#8ecae6"
WIRE_COLOR = "#bc4749"


def _lyph_patch(model: ModelSpec, state: LayoutState, lyph) -> Polygon | None:
    ref = lyph.ref_in(model)
    center = lyph_center(model, state, lyph)
    if center is None:
        return None
    length, width = state.sizes.get(ref, (4.0, 2.0))
    axis = lyph_axis(model, state, lyph)
    perp = perpendicular(axis)
    if state.rotations.get(ref, 0.0) % 360.0 == 180.0:
        perp = -perp
    half_l = axis * (length / 2.0)
    half_w = perp * (width / 2.0)
    corners = [center - half_l - half_w, center + half_l - half_w,
               center + half_l + half_w, center - half_l + half_w]
    return Polygon([(c[0], c[1]) for c in corners], closed=True,
                   facecolor=LYPH_COLOR, edgecolor="#457b9d", alpha=0.55, linewidth=0.8)


def render_scene(model: ModelSpec, state: LayoutState, path: str | Path,
                 show_labels: bool = True) -> Path:
    """Render the visible scene to an image file; returns the path."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(8, 8))

    for wire in model.of_class("Wire"):
        curve = wire_curve(model, wire)
        if curve is None:
            continue
        pts = np.stack([curve.point_at(t) for t in np.linspace(0, 1, 64)])
        ax.plot(pts[:, 0], pts[:, 1], color=WIRE_COLOR, linewidth=1.0, linestyle="--", zorder=1)

    for lyph in model.of_class("Lyph"):
        if lyph.props.get("isTemplate"):
            continue
        ref = lyph.ref_in(model)
        if ref not in state.sizes and ref not in state.lyph_centers:
            continue
        patch = _lyph_patch(model, state, lyph)
        if patch is not None:
            ax.add_patch(patch)

    for link in model.of_class("Link"):
        ref = link.ref_in(model)
        if state.visible_links and ref not in state.visible_links:
            continue
        curve = link_curve(model, state, link)
        if curve is None:
            continue
        pts = np.stack([curve.point_at(t) for t in np.linspace(0, 1, 32)])
        ax.plot(pts[:, 0], pts[:, 1], color=LINK_COLOR, linewidth=1.4, zorder=3)

    xs, ys, labels = [], [], []
    for ref in sorted(state.positions):
        pos = state.positions[ref]
        xs.append(pos[0])
        ys.append(pos[1])
        labels.append(ref)
    if xs:
        ax.scatter(xs, ys, s=24, color=NODE_COLOR, zorder=4)
        if show_labels and len(xs) <= 60:
            for x, y, text in zip(xs, ys, labels):
                ax.annotate(text, (x, y), textcoords="offset points", xytext=(3, 3), fontsize=6)

    for anchor in model.of_class("Anchor"):
        layout = anchor.props.get("layout")
        if isinstance(layout, list) and len(layout) >= 2:
            ax.scatter([layout[0]], [layout[1]], marker="s", s=30, color=WIRE_COLOR, zorder=4)

    ax.set_aspect("equal", adjustable="datalim")
    ax.set_title(f"{model.namespace} layout (seed {state.seed}, {state.iteration} iterations)")
    ax.grid(True, linewidth=0.3, alpha=0.4)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
