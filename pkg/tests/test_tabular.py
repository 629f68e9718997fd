import zipfile

from lyphkit.document import from_document, models_equal, serialize_model
from lyphkit.schema import Severity
from lyphkit.tabular import (
    Page,
    Workbook,
    read_csv_bundle,
    read_xlsx,
    spec_to_workbook,
    workbook_to_spec,
    write_csv_bundle,
)

from conftest import build_model


def _wb(**pages) -> Workbook:
    workbook = Workbook()
    for name, (header, rows) in pages.items():
        workbook.pages[name] = Page(header=header, rows=rows)
    return workbook


# ---------------------------------------------------------------------------
# workbook -> spec
# ---------------------------------------------------------------------------

def test_lyph_row_with_layer_list():
    workbook = _wb(lyphs=(["id", "layers"], [["K_77", "K_85,K_86"]]))
    model, report = workbook_to_spec(workbook)
    assert report.ok()
    lyph = model.find("K_77")
    assert lyph.cls == "Lyph"
    assert lyph.props["layers"] == ["K_85", "K_86"]


def test_empty_workbook_with_main_page_only():
    workbook = _wb(main=(["key", "value"], [["namespace", "bladder"]]))
    model, report = workbook_to_spec(workbook)
    assert report.issues == []
    assert model.namespace == "bladder"
    assert model.resources == []


def test_empty_list_element_dropped_with_warning():
    workbook = _wb(lyphs=(["id", "layers"], [["x", "a,,b"]]))
    model, report = workbook_to_spec(workbook)
    assert model.find("x").props["layers"] == ["a", "b"]
    assert report.max_severity is Severity.WARNING


def test_missing_id_cell_is_error_with_row_coordinate():
    workbook = _wb(nodes=(["id", "name"], [["", "anonymous"]]))
    _, report = workbook_to_spec(workbook)
    errors = report.errors()
    assert len(errors) == 1
    assert "row 2" in errors[0].message and "nodes" in errors[0].message


def test_unknown_page_warns():
    workbook = _wb(main=(["key", "value"], []), notes=(["id"], [["n"]]))
    _, report = workbook_to_spec(workbook)
    assert any(i.code == "unknown-page" for i in report.warnings())


def test_typed_cells_parse():
    workbook = _wb(
        nodes=(["id", "fixed", "layout", "offset"], [["n", "TRUE", "1 2 3", "0.5"]]),
        chains=(["id", "numLevels", "lyphTemplate", "startFromLeaf"], [["c", "4", "t", "false"]]),
    )
    model, report = workbook_to_spec(workbook)
    assert report.ok()
    node = model.find("n")
    assert node.props["fixed"] is True
    assert node.props["layout"] == [1.0, 2.0, 3.0]
    assert node.props["offset"] == 0.5
    chain = model.find("c")
    assert chain.props["numLevels"] == 4
    assert chain.props["startFromLeaf"] is False


# ---------------------------------------------------------------------------
# spec -> workbook
# ---------------------------------------------------------------------------

def test_round_trip_structural_equality():
    model = build_model(
        "demo",
        lyphs=[{"id": "K_77", "layers": ["K_85", "K_86"], "topology": "TUBE"}],
        nodes=[{"id": "n", "layout": [0.0, 1.0, 2.0], "fixed": True}],
    )
    again, report = workbook_to_spec(spec_to_workbook(model))
    assert report.ok()
    assert models_equal(model, again)


def test_nested_inline_definition_round_trips_after_hoisting():
    doc = {"namespace": "m", "lyphs": [{"id": "outer", "layers": [{"id": "inner"}]}]}
    hoisted = from_document(doc)
    again, _ = workbook_to_spec(spec_to_workbook(hoisted))
    assert models_equal(hoisted, again)
    assert {r.id for r in again.of_class("Lyph")} == {"outer", "inner"}


def test_zero_chains_omit_chains_page():
    model = build_model("m", nodes=[{"id": "n"}])
    workbook = spec_to_workbook(model)
    assert "chains" not in workbook.pages
    assert "nodes" in workbook.pages


def test_random_specs_round_trip():
    import random
    rng = random.Random(23)
    for _ in range(15):
        pages = {}
        nodes = [{"id": f"n{i}"} for i in range(rng.randint(0, 5))]
        for node in nodes:
            if rng.random() < 0.4:
                node["fixed"] = rng.random() < 0.5
            if rng.random() < 0.4:
                node["layout"] = [round(rng.uniform(-5, 5), 3) for _ in range(3)]
        if nodes:
            pages["nodes"] = nodes
        lyphs = [{"id": f"L{i}"} for i in range(rng.randint(0, 4))]
        for i, lyph in enumerate(lyphs):
            if i >= 2 and rng.random() < 0.5:
                lyph["layers"] = [f"L{j}" for j in range(i) if rng.random() < 0.5]
                if not lyph["layers"]:
                    del lyph["layers"]
        if lyphs:
            pages["lyphs"] = lyphs
        model = build_model("m", **pages)
        again, report = workbook_to_spec(spec_to_workbook(model))
        assert report.ok()
        assert models_equal(model, again)


# ---------------------------------------------------------------------------
# CSV bundle
# ---------------------------------------------------------------------------

def test_csv_bundle_round_trip(tmp_path):
    model = build_model("demo", lyphs=[{"id": "K_77", "layers": ["a", "b"]}, {"id": "a"}, {"id": "b"}])
    write_csv_bundle(spec_to_workbook(model), tmp_path / "bundle")
    assert (tmp_path / "bundle" / "main.csv").exists()
    assert (tmp_path / "bundle" / "lyphs.csv").exists()
    workbook = read_csv_bundle(tmp_path / "bundle")
    again, report = workbook_to_spec(workbook)
    assert report.ok()
    assert models_equal(model, again)


# ---------------------------------------------------------------------------
# XLSX reading
# ---------------------------------------------------------------------------

def _write_xlsx(path, sheets):
    """Minimal writer used only to exercise the reader."""
    content_types = ['<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
                     '<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types">'
                     '<Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/>'
                     '<Default Extension="xml" ContentType="application/xml"/>'
                     '<Override PartName="/xl/workbook.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.sheet.main+xml"/>']
    sheet_xml = {}
    sheet_entries = []
    rel_entries = []
    for index, (name, grid) in enumerate(sheets.items(), start=1):
        rows = []
        for r, row in enumerate(grid, start=1):
            cells = []
            for c, value in enumerate(row):
                column = ""
                n = c + 1
                while n:
                    n, rem = divmod(n - 1, 26)
                    column = chr(ord("A") + rem) + column
                cells.append(f'<c r="{column}{r}" t="inlineStr"><is><t>{value}</t></is></c>')
            rows.append(f'<row r="{r}">{"".join(cells)}</row>')
        sheet_xml[f"xl/worksheets/sheet{index}.xml"] = (
            '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
            '<worksheet xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main">'
            f'<sheetData>{"".join(rows)}</sheetData></worksheet>')
        content_types.append(f'<Override PartName="/xl/worksheets/sheet{index}.xml" '
                             'ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.worksheet+xml"/>')
        sheet_entries.append(f'<sheet name="{name}" sheetId="{index}" r:id="rId{index}"/>')
        rel_entries.append(f'<Relationship Id="rId{index}" '
                           'Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/worksheet" '
                           f'Target="worksheets/sheet{index}.xml"/>')
    content_types.append("</Types>")
    workbook_xml = ('<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
                    '<workbook xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main" '
                    'xmlns:r="http://schemas.openxmlformats.org/officeDocument/2006/relationships">'
                    f'<sheets>{"".join(sheet_entries)}</sheets></workbook>')
    rels_xml = ('<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
                '<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">'
                f'{"".join(rel_entries)}</Relationships>')
    root_rels = ('<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
                 '<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">'
                 '<Relationship Id="rId1" '
                 'Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/officeDocument" '
                 'Target="xl/workbook.xml"/></Relationships>')
    with zipfile.ZipFile(path, "w") as archive:
        archive.writestr("[Content_Types].xml", "".join(content_types))
        archive.writestr("_rels/.rels", root_rels)
        archive.writestr("xl/workbook.xml", workbook_xml)
        archive.writestr("xl/_rels/workbook.xml.rels", rels_xml)
        for member, xml in sheet_xml.items():
            archive.writestr(member, xml)


def test_read_xlsx_shared_strings(tmp_path):
    """Cells of type s resolve through the shared-string table."""
    path = tmp_path / "shared.xlsx"
    shared = ('<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
              '<sst xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main" count="3" uniqueCount="3">'
              '<si><t>id</t></si><si><t>name</t></si><si><t>n1</t></si></sst>')
    sheet = ('<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
             '<worksheet xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main"><sheetData>'
             '<row r="1"><c r="A1" t="s"><v>0</v></c><c r="B1" t="s"><v>1</v></c></row>'
             '<row r="2"><c r="A2" t="s"><v>2</v></c><c r="B2" t="inlineStr"><is><t>first</t></is></c></row>'
             '</sheetData></worksheet>')
    workbook_xml = ('<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
                    '<workbook xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main" '
                    'xmlns:r="http://schemas.openxmlformats.org/officeDocument/2006/relationships">'
                    '<sheets><sheet name="nodes" sheetId="1" r:id="rId1"/></sheets></workbook>')
    rels = ('<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
            '<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">'
            '<Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/2006/'
            'relationships/worksheet" Target="worksheets/sheet1.xml"/></Relationships>')
    with zipfile.ZipFile(path, "w") as archive:
        archive.writestr("xl/workbook.xml", workbook_xml)
        archive.writestr("xl/_rels/workbook.xml.rels", rels)
        archive.writestr("xl/sharedStrings.xml", shared)
        archive.writestr("xl/worksheets/sheet1.xml", sheet)
    workbook = read_xlsx(path)
    assert workbook.pages["nodes"].header == ["id", "name"]
    assert workbook.pages["nodes"].rows == [["n1", "first"]]


def test_read_xlsx_workbook(tmp_path):
    path = tmp_path / "model.xlsx"
    _write_xlsx(path, {
        "main": [["key", "value"], ["namespace", "bladder"]],
        "lyphs": [["id", "layers", "topology"], ["K_77", "K_85,K_86", "TUBE"]],
    })
    workbook = read_xlsx(path)
    assert set(workbook.pages) == {"main", "lyphs"}
    model, report = workbook_to_spec(workbook)
    assert report.ok()
    assert model.namespace == "bladder"
    assert model.find("K_77").props["layers"] == ["K_85", "K_86"]


def test_xlsx_to_json_equals_direct_model(tmp_path):
    path = tmp_path / "model.xlsx"
    _write_xlsx(path, {
        "main": [["key", "value"], ["namespace", "m"]],
        "nodes": [["id", "layout"], ["n1", "0 0 0"]],
    })
    model, _ = workbook_to_spec(read_xlsx(path))
    direct = build_model("m", nodes=[{"id": "n1", "layout": [0.0, 0.0, 0.0]}])
    assert serialize_model(model) == serialize_model(direct)
