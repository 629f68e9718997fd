import json

from lyphkit.document import from_document, models_equal, parse_model, serialize_model, to_document


def test_round_trip_structural_equality():
    doc = {
        "namespace": "demo",
        "description": "a tiny model",
        "nodes": [{"id": "a", "layout": [0, 1, 2], "fixed": True}],
        "links": [{"id": "l", "source": "a", "target": "b"}],
    }
    model = from_document(doc)
    again = parse_model(serialize_model(model))
    assert models_equal(model, again)


def test_serialize_is_canonical_fixpoint():
    text = serialize_model(parse_model(json.dumps({"namespace": "m", "nodes": [{"id": "z"}, {"id": "a"}]})))
    assert serialize_model(parse_model(text)) == text
    assert text.endswith("\n")


def test_unknown_properties_survive_round_trip():
    doc = {"namespace": "m", "lyphs": [{"id": "x", "futureProp": {"nested": [1, 2]}}], "vendor": "keep"}
    model = from_document(doc)
    out = to_document(model)
    assert out["vendor"] == "keep"
    assert out["lyphs"][0]["futureProp"] == {"nested": [1, 2]}


def test_inline_definition_hoisted_to_own_record():
    doc = {"namespace": "m", "lyphs": [{"id": "outer", "layers": [{"id": "inner", "name": "hoisted"}, "mat"]}]}
    model = from_document(doc)
    inner = model.find("inner")
    assert inner is not None
    assert inner.cls == "Lyph"
    assert inner.props["name"] == "hoisted"
    assert model.find("outer").props["layers"] == ["inner", "mat"]


def test_own_namespace_prefix_is_normalized():
    doc = {"namespace": "m", "links": [{"id": "l", "source": "m:a", "target": "other:b"}]}
    model = from_document(doc)
    link = model.find("l")
    assert link.props["source"] == "a"
    assert link.props["target"] == "other:b"


def test_empty_pages_omitted():
    model = from_document({"namespace": "m", "nodes": [{"id": "n"}], "chains": []})
    doc = to_document(model)
    assert "chains" not in doc
    assert "links" not in doc
