"""Stretching wired chains along scaffold wires."""

from __future__ import annotations

import numpy as np

from ..resources import ModelSpec
from ..schema import ValidationReport
from .geometry import wire_curve
from .state import LayoutState


def chain_path_nodes(model: ModelSpec, chain) -> list[str]:
    """Node refs along the chain's levels, root first."""
    levels = [model.find(r, "Link") for r in chain.props.get("levels", []) if isinstance(r, str)]
    levels = [l for l in levels if l is not None]
    if not levels:
        return []
    path = [levels[0].props.get("source")]
    for link in levels:
        path.append(link.props.get("target"))
    return [p for p in path if isinstance(p, str)]


def stretch_along_wires(model: ModelSpec, state: LayoutState,
                        report: ValidationReport | None = None) -> LayoutState:
    """Pin wired chains onto their wires.

    The root lands on the wire's source and the leaf on its target (swapped
    by startFromLeaf); the interior nodes sit at arc-length fractions i/N
    along the wire's trajectory.
    """
    for chain in model.of_class("Chain"):
        wire_ref = chain.props.get("wiredTo")
        if not isinstance(wire_ref, str):
            continue
        wire = model.find(wire_ref, "Wire")
        if wire is None:
            continue
        curve = wire_curve(model, wire)
        if curve is None:
            continue
        path = chain_path_nodes(model, chain)
        if len(path) < 2:
            continue
        if curve.length() < 1e-12 and report is not None:
            report.warning("degenerate-wire", f"wire {wire_ref!r} has coincident ends; "
                           f"chain {chain.id!r} collapses onto the anchor", chain.id)
        if chain.props.get("startFromLeaf"):
            path = list(reversed(path))
        n = len(path) - 1
        for i, node_ref in enumerate(path):
            # chain ends sit exactly on the wire's anchors
            if i == 0:
                point = curve_start(curve)
            elif i == n:
                point = curve_end(curve)
            else:
                point = curve.point_at(i / n)
            if state.mode == "2d":
                point = point.copy()
                point[2] = 0.0
            state.positions[node_ref] = np.asarray(point, dtype=float)
    return state


def curve_start(curve) -> np.ndarray:
    return np.asarray(curve.a, dtype=float).copy()


def curve_end(curve) -> np.ndarray:
    return np.asarray(curve.b, dtype=float).copy()
