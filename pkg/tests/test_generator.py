import json
import random

import pytest

from lyphkit.document import parse_model
from lyphkit.exporter import serialize_generated
from lyphkit.generator import (
    GenerationError,
    autogenerate_stubs,
    expand_chain,
    generate,
    instantiate_lyph_template,
)
from lyphkit.resources import GenerationTrace

from conftest import build_model


# ---------------------------------------------------------------------------
# stubs
# ---------------------------------------------------------------------------

def test_undefined_link_source_becomes_node_stub():
    model = build_model("m", links=[{"id": "l", "source": "n1", "target": "n2"}])
    trace = GenerationTrace()
    report = autogenerate_stubs(model, trace)
    assert report.ok()
    stub = model.find("n1")
    assert stub.cls == "Node"
    assert stub.generated
    assert set(trace.by_cause("stub")) == {"n1", "n2"}


def test_foreign_reference_left_untouched():
    model = build_model("m", chains=[{"id": "c", "numLevels": 1, "lyphTemplate": "wbkg:lt"}])
    autogenerate_stubs(model)
    assert model.find("wbkg:lt") is None


def test_class_conflicting_reference_is_error():
    model = build_model(
        "m",
        lyphs=[{"id": "holder", "layers": ["x"]}],
        links=[{"id": "l", "source": "a", "target": "x"}],
    )
    report = autogenerate_stubs(model)
    assert any(i.code == "stub-conflict" for i in report.errors())


# ---------------------------------------------------------------------------
# template instantiation
# ---------------------------------------------------------------------------

def test_instance_ids_and_layer_counts():
    model = build_model("m", lyphs=[
        {"id": "neuron-seg", "isTemplate": True, "topology": "TUBE", "layers": ["l1", "l2"]},
        {"id": "l1"}, {"id": "l2"},
    ])
    trace = GenerationTrace()
    instance = instantiate_lyph_template(model.find("neuron-seg"), "ch1_lnk1", model, trace)
    assert instance.id == "neuron-seg_ch1_lnk1"
    assert len(instance.props["layers"]) == 2
    assert len(set(instance.props["layers"])) == 2
    assert instance.props["supertype"] == "neuron-seg"
    assert instance.props["topology"] == "TUBE"
    copies = [model.find(r) for r in instance.props["layers"]]
    assert all(c is not None and c.generated for c in copies)


def test_layerless_template_instance():
    model = build_model("m", lyphs=[{"id": "t", "isTemplate": True}])
    instance = instantiate_lyph_template(model.find("t"), "ctx", model)
    assert instance.props.get("layers") is None
    assert instance.props["supertype"] == "t"
    assert model.find("t").props["subtypes"] == ["t_ctx"]


def test_two_instantiations_are_fresh_and_both_subtyped():
    model = build_model("m", lyphs=[{"id": "t", "isTemplate": True}])
    template = model.find("t")
    first = instantiate_lyph_template(template, "c1", model)
    second = instantiate_lyph_template(template, "c2", model)
    assert first.id != second.id
    assert template.props["subtypes"] == [first.id, second.id]


def test_non_template_input_raises():
    model = build_model("m", lyphs=[{"id": "plain"}])
    with pytest.raises(GenerationError):
        instantiate_lyph_template(model.find("plain"), "c", model)


# ---------------------------------------------------------------------------
# chain expansion
# ---------------------------------------------------------------------------

def test_method1_counts_and_group():
    model = build_model("m", lyphs=[{"id": "t", "isTemplate": True}],
                        chains=[{"id": "ch", "numLevels": 3, "lyphTemplate": "t"}])
    trace = GenerationTrace()
    report = expand_chain(model.find("ch"), model, trace)
    assert report.ok()
    chain = model.find("ch")
    assert len(chain.props["levels"]) == 3
    assert len(trace.by_cause("chain-node")) == 4
    assert len(trace.by_cause("template-instance")) == 3
    group = model.find(chain.props["group"])
    members = group.props["nodes"] + group.props["links"] + group.props["lyphs"]
    assert len(members) == 10


def test_method2_single_lyph():
    model = build_model("m", lyphs=[{"id": "A"}], chains=[{"id": "ch", "lyphs": ["A"]}])
    report = expand_chain(model.find("ch"), model)
    assert report.ok()
    chain = model.find("ch")
    assert len(chain.props["levels"]) == 1
    link = model.find(chain.props["levels"][0])
    assert link.props["conveyingLyph"] == "A"
    assert chain.props["root"] == "ch_root" and chain.props["leaf"] == "ch_leaf"


def test_method2_rejects_templates():
    model = build_model("m", lyphs=[{"id": "T", "isTemplate": True}],
                        chains=[{"id": "ch", "lyphs": ["T"]}])
    report = expand_chain(model.find("ch"), model)
    assert not report.ok()


def test_method3_interior_node_sits_between_housing_lyphs():
    model = build_model("m", lyphs=[{"id": "H1"}, {"id": "H2"}],
                        chains=[{"id": "ch", "housingLyphs": ["H1", "H2"]}])
    report = expand_chain(model.find("ch"), model)
    assert report.ok()
    interior = model.find("ch_node1")
    assert interior.props["onBorderOf"] == ["H1", "H2"]
    assert model.find("ch_root").props["onBorderOf"] == ["H1"]
    assert model.find("ch_leaf").props["onBorderOf"] == ["H2"]
    # bare links without a template
    for ref in model.find("ch").props["levels"]:
        assert "conveyingLyph" not in model.find(ref).props


def test_method3_with_template_houses_instances():
    model = build_model("m", lyphs=[{"id": "H1"}, {"id": "H2"}, {"id": "t", "isTemplate": True}],
                        chains=[{"id": "ch", "housingLyphs": ["H1", "H2"], "lyphTemplate": "t"}])
    assert expand_chain(model.find("ch"), model).ok()
    first = model.find(model.find("ch").props["levels"][0])
    conveyed = model.find(first.props["conveyingLyph"])
    assert conveyed.props["internalIn"] == "H1"


def test_unresolved_housing_lyph_is_error():
    model = build_model("m", chains=[{"id": "ch", "housingLyphs": ["wbkg:H1"]}])
    report = expand_chain(model.find("ch"), model)
    assert not report.ok()


def test_zero_levels_is_error():
    model = build_model("m", lyphs=[{"id": "t", "isTemplate": True}],
                        chains=[{"id": "ch", "numLevels": 0, "lyphTemplate": "t"}])
    report = expand_chain(model.find("ch"), model)
    assert not report.ok()


def test_declared_root_and_leaf_are_reused():
    model = build_model("m", nodes=[{"id": "start"}, {"id": "end"}],
                        lyphs=[{"id": "t", "isTemplate": True}],
                        chains=[{"id": "ch", "numLevels": 2, "lyphTemplate": "t",
                                 "root": "start", "leaf": "end"}])
    trace = GenerationTrace()
    assert expand_chain(model.find("ch"), model, trace).ok()
    chain = model.find("ch")
    assert chain.props["root"] == "start"
    assert chain.props["leaf"] == "end"
    assert len(trace.by_cause("chain-node")) == 1  # only the interior node


def _assert_simple_path(model, chain) -> None:
    """Independent path oracle: levels form a simple connected path."""
    levels = [model.find(r) for r in chain.props["levels"]]
    for left, right in zip(levels, levels[1:]):
        assert left.props["target"] == right.props["source"]
    nodes = [levels[0].props["source"]] + [l.props["target"] for l in levels]
    assert len(set(nodes)) == len(nodes)
    assert chain.props["root"] == nodes[0]
    assert chain.props["leaf"] == nodes[-1]


def test_resource_count_law_random_roots():
    rng = random.Random(7)
    for trial in range(25):
        n = rng.randint(1, 20)
        declare_root = rng.random() < 0.5
        declare_leaf = rng.random() < 0.5
        pages = {"lyphs": [{"id": "t", "isTemplate": True}],
                 "chains": [{"id": "ch", "numLevels": n, "lyphTemplate": "t"}]}
        nodes = []
        if declare_root:
            nodes.append({"id": "r0"})
            pages["chains"][0]["root"] = "r0"
        if declare_leaf:
            nodes.append({"id": "lf"})
            pages["chains"][0]["leaf"] = "lf"
        if nodes:
            pages["nodes"] = nodes
        model = build_model("m", **pages)
        trace = GenerationTrace()
        assert expand_chain(model.find("ch"), model, trace).ok()
        chain = model.find("ch")
        assert len(chain.props["levels"]) == n
        assert len(trace.by_cause("chain-node")) == n + 1 - int(declare_root) - int(declare_leaf)
        assert len(trace.by_cause("template-instance")) == n
        _assert_simple_path(model, chain)


# ---------------------------------------------------------------------------
# generate pipeline
# ---------------------------------------------------------------------------

def test_empty_spec_generates_empty_model():
    result = generate(build_model("m"))
    assert result.report.ok()
    assert result.model is not None
    assert result.model.resources == []


def test_generated_output_reloads_without_expansion(chain_spec_text):
    first = generate(parse_model(chain_spec_text))
    assert first.report.ok()
    text = serialize_generated(first.model)
    second = generate(parse_model(text))
    assert second.report.ok()
    assert serialize_generated(second.model) == text
    assert second.trace.created == []


def test_unresolved_foreign_reference_aborts():
    model = build_model("m", chains=[{"id": "ch", "numLevels": 1, "lyphTemplate": "wbkg:lt"}])
    result = generate(model)
    assert result.model is None
    assert not result.report.ok()


def test_generate_is_deterministic(chain_spec_text):
    a = generate(parse_model(chain_spec_text))
    b = generate(parse_model(chain_spec_text))
    assert serialize_generated(a.model) == serialize_generated(b.model)


def test_generated_id_collision_with_declared_is_error():
    model = build_model("m", lyphs=[{"id": "t", "isTemplate": True}],
                        nodes=[{"id": "ch_root"}],
                        chains=[{"id": "ch", "numLevels": 1, "lyphTemplate": "t"}])
    # the declared node is reused only when named as chain root; as a plain
    # bystander it blocks the generated id
    result = generate(model)
    assert result.model is None
    assert any(i.code == "id-collision" for i in result.report.errors())


def test_chain_declaration_order_is_respected():
    doc = {
        "namespace": "m",
        "nodes": [{"id": "shared"}],
        "lyphs": [{"id": "t", "isTemplate": True}],
        "chains": [
            {"id": "c2", "numLevels": 1, "lyphTemplate": "t", "root": "shared"},
            {"id": "c1", "numLevels": 1, "lyphTemplate": "t", "leaf": "shared"},
        ],
    }
    result = generate(parse_model(json.dumps(doc)))
    assert result.report.ok()
    created = [ref for ref, cause in result.trace.created if cause == "chain-level"]
    assert created == ["c2_lnk1", "c1_lnk1"]
