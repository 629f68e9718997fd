"""Constrained force-directed placement of the visible graph."""

from __future__ import annotations

from ..resources import ModelSpec
from ..schema import ValidationReport
from .state import ConstraintRank, LayoutState, classify_node
from .visibility import visible_subgraph
from .solver import DEFAULT_ITERATIONS, project_constraints, solve
from .wires import stretch_along_wires
from .coalescence import align_coalescences
from .ordering import count_crossings, minimize_crossings, order_chain_in_host
from .scaling import compute_scaling
from .geometry import Curve, Line, Arc, Spline, link_curve, wire_curve, lyph_axis, lyph_center


def layout_pipeline(model: ModelSpec, seed: int = 0, iterations: int = DEFAULT_ITERATIONS,
                    mode: str = "2d", groups: set[str] | None = None,
                    report: ValidationReport | None = None) -> LayoutState:
    """Full placement pass: solve, wire stretching, scaling, coalescence
    alignment, then a final constraint projection."""
    visible = visible_subgraph(model, groups) if groups is not None else None
    state = LayoutState.initialize(model, seed=seed, mode=mode, visible=visible)
    solve(model, state, iterations)
    stretch_along_wires(model, state, report)
    compute_scaling(model, state, report)
    align_coalescences(model, state, report)
    project_constraints(model, state)
    return state

__all__ = [
    "ConstraintRank",
    "LayoutState",
    "classify_node",
    "visible_subgraph",
    "solve",
    "layout_pipeline",
    "project_constraints",
    "stretch_along_wires",
    "align_coalescences",
    "count_crossings",
    "minimize_crossings",
    "order_chain_in_host",
    "compute_scaling",
    "Curve",
    "Line",
    "Arc",
    "Spline",
    "link_curve",
    "wire_curve",
    "lyph_axis",
    "lyph_center",
]
