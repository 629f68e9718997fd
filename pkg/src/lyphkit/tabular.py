"""Workbook round-trip: spreadsheets to model documents and back.

Each page holds one resource class as flat rows; list cells join on
commas, coordinates on spaces.  Nested definitions are not representable
here, so specs are hoisted before export.  XLSX is read with the standard
library; CSV bundles (a directory with one file per page) are the output
format.
"""

from __future__ import annotations

import csv
import re
import zipfile
from dataclasses import dataclass, field
from pathlib import Path
from xml.etree import ElementTree

from .resources import ModelSpec, Resource
from .schema import Kind, PAGES, ValidationReport, props_of

MAIN_PAGE = "main"
RECOGNIZED_PAGES = (MAIN_PAGE,) + tuple(PAGES)


@dataclass
class Page:
    header: list[str] = field(default_factory=list)
    rows: list[list[str]] = field(default_factory=list)


@dataclass
class Workbook:
    pages: dict[str, Page] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Cell conversion
# ---------------------------------------------------------------------------

def parse_cell(text: str, kind: Kind, loc: str, report: ValidationReport):
    text = text.strip()
    if text == "":
        return None
    if kind is Kind.BOOL:
        lowered = text.lower()
        if lowered == "true":
            return True
        if lowered == "false":
            return False
        report.error("cell", f"expected TRUE or FALSE, got {text!r}", None, loc)
        return None
    if kind is Kind.INT:
        try:
            return int(text)
        except ValueError:
            report.error("cell", f"expected an integer, got {text!r}", None, loc)
            return None
    if kind is Kind.FLOAT:
        try:
            return float(text)
        except ValueError:
            report.error("cell", f"expected a number, got {text!r}", None, loc)
            return None
    if kind is Kind.VEC:
        parts = text.split()
        try:
            values = [float(p) for p in parts]
        except ValueError:
            values = []
        if len(values) not in (2, 3):
            report.error("cell", f"expected 2 or 3 coordinates, got {text!r}", None, loc)
            return None
        return values
    if kind in (Kind.STRLIST, Kind.CURIELIST, Kind.REFLIST):
        tokens = [t.strip() for t in text.split(",")]
        if any(t == "" for t in tokens):
            report.warning("cell", f"empty element in list cell {text!r} dropped", None, loc)
        return [t for t in tokens if t]
    return text


def render_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "TRUE" if value else "FALSE"
    if isinstance(value, list):
        if value and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            return " ".join(repr(float(v)) for v in value)
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


# ---------------------------------------------------------------------------
# Workbook -> spec
# ---------------------------------------------------------------------------

def workbook_to_spec(workbook: Workbook) -> tuple[ModelSpec, ValidationReport]:
    report = ValidationReport()
    model = ModelSpec()
    main = workbook.pages.get(MAIN_PAGE)
    if main is not None:
        _read_main(main, model, report)
    for name, page in workbook.pages.items():
        if name == MAIN_PAGE:
            continue
        cls = PAGES.get(name)
        if cls is None:
            report.warning("unknown-page", f"unknown page {name!r} ignored", None, f"/{name}")
            continue
        table = props_of(cls)
        for row_index, row in enumerate(page.rows):
            cells = dict(zip(page.header, row))
            rid = (cells.get("id") or "").strip()
            if not rid:
                report.error("row-id", f"row {row_index + 2} on page {name!r} has no id",
                             None, f"/{name}/{row_index}")
                continue
            props = {}
            for column, raw in cells.items():
                if column == "id" or raw is None:
                    continue
                loc = f"/{name}/{row_index}/{column}"
                spec = table.get(column)
                if spec is None:
                    if raw.strip():
                        props[column] = raw.strip()  # unknown column, preserved
                    continue
                value = parse_cell(raw, spec.kind, loc, report)
                if value is not None:
                    props[column] = value
            model.add(Resource(id=rid, cls=cls, props=props))
    return model, report


def _read_main(page: Page, model: ModelSpec, report: ValidationReport) -> None:
    for row_index, row in enumerate(page.rows):
        if not row or not row[0].strip():
            continue
        key = row[0].strip()
        value = row[1].strip() if len(row) > 1 else ""
        if key == "namespace":
            model.namespace = value or model.namespace
        elif key == "description":
            model.description = value
        elif key == "imports":
            model.imports = [t.strip() for t in value.split(",") if t.strip()]
        elif key == "clades":
            model.clades = [t.strip() for t in value.split(",") if t.strip()]
        elif key == "generated":
            model.generated = value.lower() == "true"
        else:
            report.warning("unknown-key", f"unknown main key {key!r} preserved", None,
                           f"/main/{row_index}")
            model.unknown[key] = value


# ---------------------------------------------------------------------------
# Spec -> workbook
# ---------------------------------------------------------------------------

def spec_to_workbook(model: ModelSpec) -> Workbook:
    """Inverse of workbook_to_spec up to property ordering.

    Models parsed from JSON are already hoisted, so every resource is a
    flat row; pages without resources are omitted.
    """
    workbook = Workbook()
    main = Page(header=["key", "value"])
    main.rows.append(["namespace", model.namespace])
    if model.description:
        main.rows.append(["description", model.description])
    if model.imports:
        main.rows.append(["imports", ",".join(str(i) for i in model.imports)])
    if model.clades:
        main.rows.append(["clades", ",".join(sorted(model.clades))])
    if model.generated:
        main.rows.append(["generated", "TRUE"])
    workbook.pages[MAIN_PAGE] = main

    for page_name, cls in PAGES.items():
        rows = [r for r in model.resources if r.cls == cls and not r.external]
        if not rows:
            continue
        columns: list[str] = ["id"]
        for res in rows:
            for prop in res.props:
                if prop not in columns:
                    columns.append(prop)
        page = Page(header=columns)
        for res in rows:
            record = {"id": res.ref_in(model)}
            for prop, value in res.props.items():
                record[prop] = render_cell(value)
            page.rows.append([record.get(c, "") for c in columns])
        workbook.pages[page_name] = page
    return workbook


# ---------------------------------------------------------------------------
# CSV bundles
# ---------------------------------------------------------------------------

def write_csv_bundle(workbook: Workbook, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, page in workbook.pages.items():
        with open(directory / f"{name}.csv", "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(page.header)
            writer.writerows(page.rows)


def read_csv_bundle(directory: str | Path) -> Workbook:
    directory = Path(directory)
    workbook = Workbook()
    for path in sorted(directory.glob("*.csv")):
        with open(path, encoding="utf-8", newline="") as handle:
            rows = list(csv.reader(handle))
        if not rows:
            continue
        page = Page(header=rows[0], rows=[r + [""] * (len(rows[0]) - len(r)) for r in rows[1:]])
        workbook.pages[path.stem] = page
    return workbook


# ---------------------------------------------------------------------------
# XLSX reading (zip of XML sheets; no third-party dependency)
# ---------------------------------------------------------------------------

_NS = {"m": "http://schemas.openxmlformats.org/spreadsheetml/2006/main",
       "r": "http://schemas.openxmlformats.org/officeDocument/2006/relationships"}
_CELL_REF = re.compile(r"^([A-Z]+)(\d+)$")


def _column_index(letters: str) -> int:
    value = 0
    for ch in letters:
        value = value * 26 + (ord(ch) - ord("A") + 1)
    return value - 1


def read_xlsx(path: str | Path) -> Workbook:
    workbook = Workbook()
    with zipfile.ZipFile(path) as archive:
        shared: list[str] = []
        if "xl/sharedStrings.xml" in archive.namelist():
            root = ElementTree.fromstring(archive.read("xl/sharedStrings.xml"))
            for si in root.findall("m:si", _NS):
                shared.append("".join(t.text or "" for t in si.iter(
                    "{http://schemas.openxmlformats.org/spreadsheetml/2006/main}t")))
        rels = {}
        if "xl/_rels/workbook.xml.rels" in archive.namelist():
            root = ElementTree.fromstring(archive.read("xl/_rels/workbook.xml.rels"))
            for rel in root:
                rels[rel.get("Id")] = rel.get("Target")
        book = ElementTree.fromstring(archive.read("xl/workbook.xml"))
        for sheet in book.find("m:sheets", _NS) or []:
            name = sheet.get("name")
            rid = sheet.get(f"{{{_NS['r']}}}id")
            target = rels.get(rid, f"worksheets/sheet{sheet.get('sheetId')}.xml")
            member = "xl/" + target.lstrip("/") if not target.startswith("xl/") else target
            if member not in archive.namelist():
                continue
            grid = _read_sheet(ElementTree.fromstring(archive.read(member)), shared)
            if grid:
                workbook.pages[name] = Page(header=grid[0],
                                            rows=[r + [""] * (len(grid[0]) - len(r)) for r in grid[1:]])
    return workbook


def _read_sheet(root, shared: list[str]) -> list[list[str]]:
    grid: list[list[str]] = []
    data = root.find("m:sheetData", _NS)
    if data is None:
        return grid
    for row in data.findall("m:row", _NS):
        cells: dict[int, str] = {}
        for position, cell in enumerate(row.findall("m:c", _NS)):
            ref = cell.get("r")
            match = _CELL_REF.match(ref) if ref else None
            col = _column_index(match.group(1)) if match else position
            ctype = cell.get("t", "n")
            if ctype == "inlineStr":
                text = "".join(t.text or "" for t in cell.iter(
                    "{http://schemas.openxmlformats.org/spreadsheetml/2006/main}t"))
            else:
                v = cell.find("m:v", _NS)
                raw = v.text if v is not None and v.text is not None else ""
                if ctype == "s":
                    text = shared[int(raw)] if raw else ""
                elif ctype == "b":
                    text = "TRUE" if raw == "1" else "FALSE"
                else:
                    text = raw
            cells[col] = text
        width = max(cells) + 1 if cells else 0
        grid.append([cells.get(i, "") for i in range(width)])
    while grid and not any(cell.strip() for cell in grid[-1]):
        grid.pop()
    return grid


# ---------------------------------------------------------------------------
# Entry points by path
# ---------------------------------------------------------------------------

def read_workbook(path: str | Path) -> Workbook:
    path = Path(path)
    if path.is_dir():
        return read_csv_bundle(path)
    if path.suffix.lower() == ".xlsx":
        return read_xlsx(path)
    raise ValueError(f"not a workbook: {path}")


def load_tabular_model(path: str | Path) -> tuple[ModelSpec, ValidationReport]:
    return workbook_to_spec(read_workbook(path))
