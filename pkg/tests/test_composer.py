import json

from lyphkit.composer import ImportSource, join, merge, resolve_imports
from lyphkit.document import models_equal, serialize_model
from lyphkit.generator import generate
from lyphkit.layout import visible_subgraph
from lyphkit.schema import validate_references

from conftest import build_model


# ---------------------------------------------------------------------------
# merge
# ---------------------------------------------------------------------------

def test_merge_with_empty_is_identity():
    base = build_model("base", lyphs=[{"id": "a"}], nodes=[{"id": "n"}])
    merged, report = merge(base, build_model("other"))
    assert report.ok()
    assert models_equal(base, merged)


def test_merge_shared_id_warns_and_first_wins():
    base = build_model("base", materials=[{"id": "blood", "name": "base blood"}])
    other = build_model("other", materials=[{"id": "blood", "name": "other blood"}])
    merged, report = merge(base, other)
    duplicates = [i for i in report.warnings() if i.code == "duplicate"]
    assert len(duplicates) == 1
    assert merged.find("blood").props["name"] == "base blood"


def test_merge_lookup_count_is_set_union():
    base = build_model("base", lyphs=[{"id": "a"}, {"id": "b"}])
    other = build_model("other", lyphs=[{"id": "b"}, {"id": "c"}])
    merged, _ = merge(base, other)
    distinct = {(r.cls, r.id) for r in merged.resources}
    assert len(distinct) == 3  # |a| + |b| - |shared|
    assert len(merged.resources) == 4  # both kept


def test_merge_localizes_other_namespace_refs():
    other = build_model("other", links=[{"id": "l", "source": "x", "target": "other:y"}])
    merged, _ = merge(build_model("base"), other)
    link = merged.find("l")
    assert link.props["target"] == "y"


# ---------------------------------------------------------------------------
# join
# ---------------------------------------------------------------------------

def test_join_wraps_other_model_in_one_group():
    base = build_model("base", nodes=[{"id": "n0"}])
    other = build_model("x", nodes=[{"id": "a"}, {"id": "b"}],
                        links=[{"id": "l", "source": "a", "target": "b"}])
    joined, report = join(base, other)
    assert report.ok()
    group = joined.find("x", "Group")
    assert group is not None
    assert set(group.props["nodes"]) == {"x:a", "x:b"}
    assert group.props["links"] == ["x:l"]
    assert joined.find("x:a") is not None


def test_join_empty_adds_empty_group():
    joined, _ = join(build_model("base"), build_model("x"))
    group = joined.find("x", "Group")
    assert group is not None
    assert "nodes" not in group.props


def test_join_is_left_biased_and_associative_up_to_groups():
    a = build_model("a", nodes=[{"id": "n"}])
    b = build_model("b", nodes=[{"id": "n"}])
    c = build_model("c", nodes=[{"id": "n"}])
    joined, _ = join(a, b)
    joined, _ = join(joined, c)
    group_ids = {g.id for g in joined.of_class("Group")}
    assert {"b", "c"} <= group_ids
    assert joined.find("n").namespace == "a"


def test_joined_group_toggled_off_hides_its_resources():
    base = build_model("base", nodes=[{"id": "p"}, {"id": "q"}],
                       links=[{"id": "lb", "source": "p", "target": "q"}],
                       groups=[{"id": "g-base", "nodes": ["p", "q"], "links": ["lb"]}])
    other = build_model("x", nodes=[{"id": "a"}, {"id": "b"}],
                        links=[{"id": "l", "source": "a", "target": "b"}])
    joined, _ = join(base, other)
    nodes_on, links_on = visible_subgraph(joined, {"g-base", "x"})
    assert "x:a" in nodes_on and "x:l" in links_on
    nodes_off, links_off = visible_subgraph(joined, {"g-base"})
    assert not any(ref.startswith("x:") for ref in nodes_off | links_off)


# ---------------------------------------------------------------------------
# imports
# ---------------------------------------------------------------------------

TOO_SCAFFOLD = {
    "namespace": "too",
    "anchors": [{"id": "a1", "layout": [0, 0]}, {"id": "a2", "layout": [10, 0]}],
    "wires": [{"id": "w1", "source": "a1", "target": "a2"}],
    "scaffolds": [{"id": "map", "anchors": ["a1", "a2"], "wires": ["w1"]}],
}


def _fixture_fetcher(documents: dict[str, dict]):
    def fetch(source: ImportSource) -> str:
        if source.url not in documents:
            raise IOError(f"unreachable {source.url}")
        return json.dumps(documents[source.url])
    return fetch


def test_imported_scaffold_anchor_resolves():
    spec = build_model("vascular", nodes=[{"id": "root", "anchoredTo": "too:a1"}])
    spec.imports = ["https://models.example/too.json"]
    linked, report = resolve_imports(spec, _fixture_fetcher({"https://models.example/too.json": TOO_SCAFFOLD}))
    assert report.ok()
    assert [m.namespace for m in linked] == ["too"]
    assert spec.find("too:a1") is not None
    ref_report = validate_references(spec, linked={m.namespace for m in linked})
    assert not any(i.code == "unresolved-foreign" for i in ref_report.issues)


def test_import_cycle_is_reported():
    docs = {
        "A": {"namespace": "a", "imports": ["B"]},
        "B": {"namespace": "b", "imports": ["A"]},
    }
    spec = build_model("root")
    spec.imports = ["A"]
    _, report = resolve_imports(spec, _fixture_fetcher(docs))
    assert any(i.code == "import-cycle" for i in report.errors())


def test_unreachable_import_url_is_error_and_base_still_validates():
    spec = build_model("m", nodes=[{"id": "n", "anchoredTo": "too:a1"}])
    spec.imports = ["https://models.example/missing.json"]
    _, report = resolve_imports(spec, _fixture_fetcher({}))
    assert any(i.code == "fetch" for i in report.errors())
    standalone = validate_references(spec, linked=set())
    assert any(i.code == "unresolved-foreign" for i in standalone.errors())


def test_fetch_order_is_sorted_and_deterministic():
    calls = []

    def fetch(source: ImportSource) -> str:
        calls.append(source.url)
        return json.dumps({"namespace": source.url[-1]})

    spec = build_model("m")
    spec.imports = ["zeta", "alpha", "mike"]
    resolve_imports(spec, fetch)
    assert calls == sorted(calls)


def test_imported_resources_excluded_from_input_but_in_generated_output():
    spec = build_model("vascular", nodes=[{"id": "root", "anchoredTo": "too:a1"}])
    spec.imports = ["too.json"]
    resolve_imports(spec, _fixture_fetcher({"too.json": TOO_SCAFFOLD}))
    assert '"too:a1"' not in serialize_model(spec).replace('"anchoredTo": "too:a1"', "")
    result = generate(spec)
    assert result.report.ok()
    doc = json.loads(serialize_model(result.model))
    anchor_ids = [a["id"] for a in doc.get("anchors", [])]
    assert "too:a1" in anchor_ids
    assert all(a.get("external") for a in doc["anchors"])
