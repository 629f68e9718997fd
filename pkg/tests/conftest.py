"""Shared fixtures and model builders."""

from __future__ import annotations

import json

import pytest

from lyphkit.document import from_document
from lyphkit.resources import ModelSpec, Resource


def build_model(namespace: str = "test", **pages) -> ModelSpec:
    """Model from page keyword arguments, e.g. lyphs=[{...}, ...]."""
    doc = {"namespace": namespace}
    doc.update(pages)
    return from_document(doc)


def add(model: ModelSpec, cls: str, rid: str, **props) -> Resource:
    return model.add(Resource(id=rid, cls=cls, props=props))


@pytest.fixture
def chain_spec_text() -> str:
    return json.dumps({
        "namespace": "demo",
        "lyphs": [
            {"id": "lt", "isTemplate": True, "topology": "TUBE", "layers": ["la", "lb"]},
            {"id": "la"},
            {"id": "lb"},
        ],
        "chains": [{"id": "ch1", "numLevels": 3, "lyphTemplate": "lt"}],
    })


@pytest.fixture
def ganglion_spec() -> ModelSpec:
    """A lyph template used as a layer of another lyph, plus bystanders."""
    return build_model(
        "curation",
        lyphs=[
            {"id": "Ganglion", "isTemplate": True, "name": "Ganglion"},
            {"id": "visceral-wall-ganglion", "name": "Autonomic ganglion in the visceral wall",
             "layers": ["Ganglion", "wall-layer"]},
            {"id": "wall-layer"},
        ],
        nodes=[{"id": "n1"}],
    )
