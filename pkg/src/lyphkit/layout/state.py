"""Layout state and node constraint ranks."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from ..document import canonical_dumps
from ..resources import ModelSpec, Resource


class ConstraintRank(IntEnum):
    """Placement precedence; anchoring overrides every other method."""

    FREE = 0
    CONTROL_CENTROID = 1
    INTERNAL_IN = 2
    BORDER_HOSTED = 3
    HOSTED_BY_LINK = 4
    FIXED = 5
    ANCHORED = 6


def classify_node(node: Resource) -> ConstraintRank:
    """Effective rank of a node for this step; exactly one applies."""
    if node.props.get("anchoredTo"):
        return ConstraintRank.ANCHORED
    if node.props.get("fixed") and isinstance(node.props.get("layout"), list):
        return ConstraintRank.FIXED
    if node.props.get("hostedBy"):
        return ConstraintRank.HOSTED_BY_LINK
    if node.props.get("onBorderOf"):
        return ConstraintRank.BORDER_HOSTED
    if node.props.get("internalIn"):
        return ConstraintRank.INTERNAL_IN
    if node.props.get("controlNodes"):
        return ConstraintRank.CONTROL_CENTROID
    return ConstraintRank.FREE


@dataclass
class LayoutState:
    seed: int = 0
    mode: str = "2d"
    iteration: int = 0
    positions: dict[str, np.ndarray] = field(default_factory=dict)
    rotations: dict[str, float] = field(default_factory=dict)
    sizes: dict[str, tuple[float, float]] = field(default_factory=dict)
    lyph_centers: dict[str, np.ndarray] = field(default_factory=dict)
    visible_nodes: set[str] = field(default_factory=set)
    visible_links: set[str] = field(default_factory=set)

    @classmethod
    def initialize(cls, model: ModelSpec, seed: int = 0, mode: str = "2d",
                   visible: tuple[set[str], set[str]] | None = None) -> "LayoutState":
        """Seeded starting positions for the visible subgraph.

        Without an explicit visible set the whole graph participates.
        Nodes with declared layout coordinates start at them.
        """
        state = cls(seed=seed, mode=mode)
        if visible is None:
            state.visible_nodes = {r.ref_in(model) for r in model.of_class("Node")}
            state.visible_links = {r.ref_in(model) for r in model.of_class("Link")}
        else:
            state.visible_nodes, state.visible_links = set(visible[0]), set(visible[1])
        rng = np.random.default_rng(seed)
        nodes = {r.ref_in(model): r for r in model.of_class("Node")}
        for ref in sorted(state.visible_nodes):
            pos = rng.uniform(-5.0, 5.0, 3)
            node = nodes.get(ref)
            if node is not None and isinstance(node.props.get("layout"), list):
                declared = node.props["layout"]
                for i, value in enumerate(declared[:3]):
                    pos[i] = float(value)
                if len(declared) < 3:
                    pos[2] = 0.0
            if mode == "2d":
                pos[2] = 0.0
            state.positions[ref] = pos
        return state

    def to_document(self) -> dict:
        return {
            "seed": self.seed,
            "mode": self.mode,
            "iterations": self.iteration,
            "positions": {ref: [float(x) for x in pos] for ref, pos in sorted(self.positions.items())},
            "rotations": {ref: float(a) for ref, a in sorted(self.rotations.items())},
            "sizes": {ref: [float(s[0]), float(s[1])] for ref, s in sorted(self.sizes.items())},
            "centers": {ref: [float(x) for x in c] for ref, c in sorted(self.lyph_centers.items())},
        }

    def serialize(self) -> str:
        return canonical_dumps(self.to_document())
