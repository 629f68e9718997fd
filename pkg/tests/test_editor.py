import pytest

from lyphkit.document import models_equal, serialize_model
from lyphkit.editor import EditError, EditKind, EditOp, EditSession, apply, run_script
from lyphkit.schema import validate_references

from conftest import build_model


def _no_dangling(model):
    report = validate_references(model)
    return not any(i.code in ("stub-eligible", "unresolved-foreign") for i in report.issues)


# ---------------------------------------------------------------------------
# delete
# ---------------------------------------------------------------------------

def test_delete_template_revises_referrers(ganglion_spec):
    revised, inverse, diff = apply(EditOp(EditKind.DELETE, target="Ganglion"), ganglion_spec)
    assert revised.find("Ganglion") is None
    wall = revised.find("visceral-wall-ganglion")
    assert wall.props["layers"] == ["wall-layer"]
    assert {"Ganglion", "visceral-wall-ganglion"} <= set(diff.touched)
    assert _no_dangling(revised)
    assert inverse.kind is EditKind.CREATE


def test_delete_unknown_target_is_error(ganglion_spec):
    with pytest.raises(EditError):
        apply(EditOp(EditKind.DELETE, target="nope"), ganglion_spec)


def test_delete_then_undo_restores_bytes(ganglion_spec):
    original = serialize_model(ganglion_spec)
    session = EditSession(ganglion_spec)
    session.apply(EditOp(EditKind.DELETE, target="Ganglion"))
    assert serialize_model(session.model) != original
    assert session.undo()
    assert serialize_model(session.model) == original


def test_delete_level_link_notes_chain_invalidation():
    model = build_model("m", nodes=[{"id": "a"}, {"id": "b"}],
                        links=[{"id": "lv", "source": "a", "target": "b"}],
                        chains=[{"id": "ch", "lyphs": ["x"], "levels": ["lv"]}],
                        lyphs=[{"id": "x"}])
    _, _, diff = apply(EditOp(EditKind.DELETE, target="lv"), model)
    assert any("re-generation" in note for note in diff.notes)


# ---------------------------------------------------------------------------
# rename / update / annotate
# ---------------------------------------------------------------------------

def test_rename_rewrites_every_referrer():
    model = build_model("m",
                        nodes=[{"id": "n1"}, {"id": "x"}],
                        links=[{"id": "l1", "source": "n1", "target": "x"},
                               {"id": "l2", "source": "x", "target": "n1"}],
                        groups=[{"id": "g", "nodes": ["n1"]}])
    revised, inverse, diff = apply(EditOp(EditKind.RENAME, target="n1", payload={"newId": "n1b"}), model)
    assert revised.find("n1") is None
    assert revised.find("l1").props["source"] == "n1b"
    assert revised.find("l2").props["target"] == "n1b"
    assert revised.find("g").props["nodes"] == ["n1b"]
    rewrites = [ref for ref in diff.touched if ref in ("l1", "l2", "g")]
    assert len(rewrites) == 3
    assert _no_dangling(revised)


def test_rename_collision_is_error():
    model = build_model("m", nodes=[{"id": "a"}, {"id": "b"}])
    with pytest.raises(EditError):
        apply(EditOp(EditKind.RENAME, target="a", payload={"newId": "b"}), model)


def test_update_and_inverse():
    model = build_model("m", nodes=[{"id": "n", "fixed": True}])
    op = EditOp(EditKind.UPDATE, target="n", payload={"props": {"fixed": None, "name": "renamed"}})
    revised, inverse, _ = apply(op, model)
    assert "fixed" not in revised.find("n").props
    assert revised.find("n").props["name"] == "renamed"
    back, _, _ = apply(inverse, revised)
    assert models_equal(back, model)


def test_annotate_edits_ontology_terms():
    model = build_model("m", lyphs=[{"id": "k", "ontologyTerms": ["FMA:1"]}])
    op = EditOp(EditKind.ANNOTATE, target="k",
                payload={"add": ["UBERON:2"], "remove": ["FMA:1"]})
    revised, inverse, _ = apply(op, model)
    assert revised.find("k").props["ontologyTerms"] == ["UBERON:2"]
    back, _, _ = apply(inverse, revised)
    assert models_equal(back, model)


# ---------------------------------------------------------------------------
# clone
# ---------------------------------------------------------------------------

def _chain_group_model():
    return build_model(
        "m",
        nodes=[{"id": "n0"}, {"id": "n1"}, {"id": "outside"}],
        links=[{"id": "l0", "source": "n0", "target": "n1"},
               {"id": "lx", "source": "n1", "target": "outside"}],
        groups=[{"id": "g", "nodes": ["n0", "n1"], "links": ["l0"]}],
    )


def test_clone_doubles_members_and_rewrites_internal_refs():
    model = _chain_group_model()
    before = len(model.resources)
    revised, inverse, _ = apply(EditOp(EditKind.CLONE_SUBGRAPH, target="g",
                                       payload={"suffix": "_L"}), model)
    assert len(revised.resources) == before + 4  # group + 2 nodes + 1 link
    copy_link = revised.find("l0_L")
    assert copy_link.props["source"] == "n0_L"
    assert copy_link.props["target"] == "n1_L"
    copy_group = revised.find("g_L")
    assert set(copy_group.props["nodes"]) == {"n0_L", "n1_L"}
    assert inverse.kind is EditKind.DELETE


def test_clone_copies_are_isomorphic():
    model = _chain_group_model()
    revised, _, _ = apply(EditOp(EditKind.CLONE_SUBGRAPH, target="g", payload={"suffix": "_R"}), model)
    for original_ref in ("n0", "n1", "l0"):
        original = revised.find(original_ref)
        copy = revised.find(f"{original_ref}_R")
        for prop, value in original.props.items():
            if prop == "generated":
                continue
            if isinstance(value, str) and revised.find(value) is not None:
                mapped = f"{value}_R" if original_ref != value and revised.find(f"{value}_R") else value
                assert copy.props[prop] in (value, mapped)


def test_clone_empty_group():
    model = build_model("m", groups=[{"id": "empty"}])
    revised, _, _ = apply(EditOp(EditKind.CLONE_SUBGRAPH, target="empty", payload={"suffix": "_2"}), model)
    assert revised.find("empty_2") is not None


def test_clone_then_delete_original_leaves_copies():
    model = _chain_group_model()
    revised, _, _ = apply(EditOp(EditKind.CLONE_SUBGRAPH, target="g", payload={"suffix": "_L"}), model)
    after_delete, _, _ = apply(EditOp(EditKind.DELETE, target="n0"), revised)
    assert after_delete.find("n0_L") is not None
    assert after_delete.find("l0_L").props["source"] == "n0_L"


def test_clone_suffix_collision_is_error():
    model = _chain_group_model()
    model2, _, _ = apply(EditOp(EditKind.CLONE_SUBGRAPH, target="g", payload={"suffix": "_L"}), model)
    with pytest.raises(EditError):
        apply(EditOp(EditKind.CLONE_SUBGRAPH, target="g", payload={"suffix": "_L"}), model2)


# ---------------------------------------------------------------------------
# split / merge chains
# ---------------------------------------------------------------------------

def test_split_then_merge_roundtrip():
    model = build_model("m", lyphs=[{"id": "a"}, {"id": "b"}, {"id": "c"}],
                        chains=[{"id": "ch", "lyphs": ["a", "b", "c"]}])
    split, inverse, _ = apply(EditOp(EditKind.SPLIT_CHAIN, target="ch", payload={"at": 2}), model)
    assert split.find("ch").props["lyphs"] == ["a", "b"]
    assert split.find("ch_tail").props["lyphs"] == ["c"]
    assert split.find("ch").props["leaf"] == split.find("ch_tail").props["root"]
    merged, _, _ = apply(inverse, split)
    assert models_equal(merged, model)


def test_split_point_must_be_interior():
    model = build_model("m", lyphs=[{"id": "a"}], chains=[{"id": "ch", "lyphs": ["a"]}])
    with pytest.raises(EditError):
        apply(EditOp(EditKind.SPLIT_CHAIN, target="ch", payload={"at": 1}), model)


def test_merge_requires_compatible_methods():
    model = build_model("m", lyphs=[{"id": "a"}, {"id": "t", "isTemplate": True}],
                        chains=[{"id": "c1", "lyphs": ["a"]},
                                {"id": "c2", "numLevels": 2, "lyphTemplate": "t"}])
    with pytest.raises(EditError):
        apply(EditOp(EditKind.MERGE_CHAINS, target="c1", payload={"with": "c2"}), model)


# ---------------------------------------------------------------------------
# undo / redo laws
# ---------------------------------------------------------------------------

def test_apply_inverse_is_identity_for_all_kinds(ganglion_spec):
    ops = [
        EditOp(EditKind.CREATE, target="fresh", payload={"class": "Node", "props": {"name": "new"}}),
        EditOp(EditKind.UPDATE, target="wall-layer", payload={"props": {"name": "renamed"}}),
        EditOp(EditKind.DELETE, target="Ganglion"),
        EditOp(EditKind.RENAME, target="n1", payload={"newId": "n1-renamed"}),
        EditOp(EditKind.ANNOTATE, target="wall-layer", payload={"add": ["FMA:77"]}),
    ]
    for op in ops:
        before = serialize_model(ganglion_spec)
        revised, inverse, _ = apply(op, ganglion_spec)
        back, _, _ = apply(inverse, revised)
        assert serialize_model(back) == before, op.kind


def test_undo_redo_restores_post_apply_state(ganglion_spec):
    session = EditSession(ganglion_spec)
    session.apply(EditOp(EditKind.DELETE, target="Ganglion"))
    after_apply = serialize_model(session.model)
    session.undo()
    session.redo()
    assert serialize_model(session.model) == after_apply


def test_five_ops_unwound_to_original(ganglion_spec):
    original = serialize_model(ganglion_spec)
    session = EditSession(ganglion_spec)
    session.apply(EditOp(EditKind.CREATE, target="extra", payload={"class": "Node", "props": {}}))
    session.apply(EditOp(EditKind.UPDATE, target="extra", payload={"props": {"name": "x"}}))
    session.apply(EditOp(EditKind.ANNOTATE, target="wall-layer", payload={"add": ["FMA:9"]}))
    session.apply(EditOp(EditKind.RENAME, target="extra", payload={"newId": "extra2"}))
    session.apply(EditOp(EditKind.DELETE, target="Ganglion"))
    for _ in range(5):
        assert session.undo()
    assert not session.undo()
    assert serialize_model(session.model) == original


def test_empty_history_undo_is_noop(ganglion_spec):
    session = EditSession(ganglion_spec)
    assert session.undo() is False
    assert session.redo() is False


def test_run_script_applies_in_order(ganglion_spec):
    records = [
        {"op": "ANNOTATE", "target": "wall-layer", "add": ["UBERON:5"]},
        {"op": "RENAME", "target": "n1", "newId": "n-renamed"},
    ]
    model, log, diffs = run_script(ganglion_spec, records)
    assert model.find("n-renamed") is not None
    assert model.find("wall-layer").props["ontologyTerms"] == ["UBERON:5"]
    assert len(log.applied) == 2 and len(diffs) == 2


def test_integrity_after_each_operation(ganglion_spec):
    ops = [
        EditOp(EditKind.DELETE, target="Ganglion"),
        EditOp(EditKind.RENAME, target="wall-layer", payload={"newId": "wall2"}),
    ]
    model = ganglion_spec
    for op in ops:
        model, _, _ = apply(op, model)
        assert _no_dangling(model)
