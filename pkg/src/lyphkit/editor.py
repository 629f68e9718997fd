"""Scriptable edit operations with whole-model reference integrity.

Deleting or renaming a resource revises the entire model so no reference
dangles; every applied operation yields an exact inverse, so undo and
redo restore historical states byte for byte.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .document import serialize_model
from .resources import ModelSpec, Resource
from .schema import CLASS_PROPS, Kind, reference_props


class EditError(Exception):
    pass


class EditKind(Enum):
    CREATE = "CREATE"
    UPDATE = "UPDATE"
    DELETE = "DELETE"
    RENAME = "RENAME"
    CLONE_SUBGRAPH = "CLONE_SUBGRAPH"
    SPLIT_CHAIN = "SPLIT_CHAIN"
    MERGE_CHAINS = "MERGE_CHAINS"
    ANNOTATE = "ANNOTATE"


@dataclass
class EditOp:
    kind: EditKind
    target: str = ""
    payload: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_record(cls, record: dict) -> "EditOp":
        try:
            kind = EditKind(record["op"])
        except (KeyError, ValueError) as exc:
            raise EditError(f"bad edit record: {exc}")
        payload = {k: v for k, v in record.items() if k not in ("op", "target")}
        return cls(kind=kind, target=record.get("target", ""), payload=payload)

    def to_record(self) -> dict:
        record = {"op": self.kind.value, "target": self.target}
        record.update(self.payload)
        return record


@dataclass
class Diff:
    """Touched resources per applied operation."""

    touched: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def touch(self, ref: str) -> None:
        if ref not in self.touched:
            self.touched.append(ref)

    def render(self) -> str:
        lines = [f"~ {ref}" for ref in self.touched]
        lines.extend(f"# {note}" for note in self.notes)
        return "\n".join(lines) if lines else "(no changes)"


# ---------------------------------------------------------------------------
# Reference walking
# ---------------------------------------------------------------------------

def _referrers(model: ModelSpec, ref: str) -> list[tuple[Resource, str, int | None]]:
    """Every (resource, prop, index) whose value references `ref`."""
    found = []
    for res in model.resources:
        for prop, spec in reference_props(res.cls).items():
            value = res.props.get(prop)
            if value is None:
                continue
            if spec.kind is Kind.REF and value == ref:
                found.append((res, prop, None))
            elif spec.kind is Kind.REFLIST and isinstance(value, list):
                for i, item in enumerate(value):
                    if item == ref:
                        found.append((res, prop, i))
    return found


def _clear_reference(res: Resource, prop: str, index: int | None) -> None:
    if index is None:
        del res.props[prop]
    else:
        res.props[prop].pop(index)
        if not res.props[prop]:
            del res.props[prop]


def _rewrite_reference(res: Resource, prop: str, index: int | None, new_ref: str) -> None:
    if index is None:
        res.props[prop] = new_ref
    else:
        res.props[prop][index] = new_ref


# ---------------------------------------------------------------------------
# Operation application
# ---------------------------------------------------------------------------

def apply(op: EditOp, model: ModelSpec) -> tuple[ModelSpec, EditOp, Diff]:
    """Apply one operation, returning the revised model, inverse op, diff."""
    revised = model.clone()
    diff = Diff()
    if op.kind is EditKind.CREATE:
        inverse = _apply_create(op, revised, diff)
    elif op.kind is EditKind.UPDATE:
        inverse = _apply_update(op, revised, diff)
    elif op.kind is EditKind.DELETE:
        inverse = _apply_delete(op, revised, diff)
    elif op.kind is EditKind.RENAME:
        inverse = _apply_rename(op, revised, diff)
    elif op.kind is EditKind.ANNOTATE:
        inverse = _apply_annotate(op, revised, diff)
    elif op.kind is EditKind.CLONE_SUBGRAPH:
        inverse = _apply_clone(op, revised, diff)
    elif op.kind is EditKind.SPLIT_CHAIN:
        inverse = _apply_split(op, revised, diff)
    elif op.kind is EditKind.MERGE_CHAINS:
        inverse = _apply_merge_chains(op, revised, diff)
    else:
        raise EditError(f"unsupported operation {op.kind}")
    return revised, inverse, diff


def _require(model: ModelSpec, ref: str, cls: str | None = None) -> Resource:
    res = model.find(ref, cls)
    if res is None:
        raise EditError(f"target {ref!r} does not resolve" + (f" to a {cls}" if cls else ""))
    return res


def _apply_create(op: EditOp, model: ModelSpec, diff: Diff) -> EditOp:
    creations = [{"target": op.target, "class": op.payload.get("class"),
                  "props": op.payload.get("props", {}), "position": op.payload.get("position")}]
    creations.extend(op.payload.get("also", []))
    created_ids: list[str] = []
    for entry in sorted(creations, key=lambda e: (e.get("position") is None, e.get("position") or 0)):
        cls = entry.get("class")
        if cls not in CLASS_PROPS:
            raise EditError(f"CREATE needs a valid class, got {cls!r}")
        rid = entry.get("target")
        if not rid:
            raise EditError("CREATE needs a target id")
        if model.find(rid) is not None:
            raise EditError(f"id {rid!r} already exists")
        resource = Resource(id=rid, cls=cls, namespace=model.namespace,
                            props=copy.deepcopy(entry.get("props", {})))
        position = entry.get("position")
        if position is None or position >= len(model.resources):
            model.resources.append(resource)
        else:
            model.resources.insert(position, resource)
        created_ids.append(rid)
        diff.touch(rid)
    for rid in created_ids:
        res = model.find(rid)
        for prop, _, refs in res.refs():
            for ref in refs:
                if model.find(ref) is None:
                    raise EditError(f"CREATE {rid!r}: reference {ref!r} does not resolve")
    # replay a DELETE's removal log backwards to restore back-references
    for entry in reversed(op.payload.get("references", [])):
        res = model.find(entry["resource"])
        if res is None:
            continue
        prop, index, value = entry["prop"], entry["index"], entry["value"]
        if index is None:
            res.props[prop] = value
        else:
            res.props.setdefault(prop, []).insert(index, value)
        diff.touch(entry["resource"])
    if len(created_ids) == 1:
        return EditOp(EditKind.DELETE, target=created_ids[0])
    return EditOp(EditKind.DELETE, target=created_ids[0], payload={"ids": created_ids})


def _apply_update(op: EditOp, model: ModelSpec, diff: Diff) -> EditOp:
    res = _require(model, op.target)
    updates = op.payload.get("props", {})
    previous: dict[str, Any] = {}
    for prop, value in updates.items():
        previous[prop] = copy.deepcopy(res.props.get(prop))
        if value is None:
            res.props.pop(prop, None)
        else:
            for ref in _ref_values(res.cls, prop, value):
                if model.find(ref) is None:
                    raise EditError(f"UPDATE {op.target!r}: reference {ref!r} does not resolve")
            res.props[prop] = copy.deepcopy(value)
    diff.touch(op.target)
    return EditOp(EditKind.UPDATE, target=op.target, payload={"props": previous})


def _ref_values(cls: str, prop: str, value: Any) -> list[str]:
    spec = reference_props(cls).get(prop)
    if spec is None:
        return []
    if spec.kind is Kind.REF and isinstance(value, str):
        return [value]
    if spec.kind is Kind.REFLIST and isinstance(value, list):
        return [v for v in value if isinstance(v, str)]
    return []


def _apply_delete(op: EditOp, model: ModelSpec, diff: Diff) -> EditOp:
    ids = op.payload.get("ids") or [op.target]
    targets = [(rid, _require(model, rid)) for rid in ids]
    id_set = set(ids)

    for rid, res in targets:
        ref = res.ref_in(model)
        for chain in model.of_class("Chain"):
            levels = chain.props.get("levels", [])
            if isinstance(levels, list) and ref in levels and chain.ref_in(model) not in id_set:
                diff.notes.append(f"chain {chain.ref_in(model)} invalidated; re-generation required")

    # chronological removal log; undo replays it in reverse
    removal_log: list[dict] = []
    for rid, res in targets:
        ref = res.ref_in(model)
        referrers = [(r, p, i) for r, p, i in _referrers(model, ref)
                     if r.ref_in(model) not in id_set]
        for referrer, prop, index in reversed(referrers):
            removal_log.append({
                "resource": referrer.ref_in(model),
                "prop": prop,
                "index": index,
                "value": ref,
            })
            _clear_reference(referrer, prop, index)
            diff.touch(referrer.ref_in(model))

    creations = [{"target": rid, "class": res.cls, "props": copy.deepcopy(res.props),
                  "position": model.resources.index(res)} for rid, res in targets]
    for rid, res in targets:
        model.remove(res)
        diff.touch(rid)

    head = creations[0]
    payload = {"class": head["class"], "props": head["props"], "position": head["position"],
               "references": removal_log}
    if len(creations) > 1:
        payload["also"] = creations[1:]
    return EditOp(EditKind.CREATE, target=head["target"], payload=payload)


def _apply_rename(op: EditOp, model: ModelSpec, diff: Diff) -> EditOp:
    res = _require(model, op.target)
    new_id = op.payload.get("newId")
    if not isinstance(new_id, str) or not new_id:
        raise EditError("RENAME needs a newId")
    if model.find(new_id) is not None:
        raise EditError(f"RENAME collision: {new_id!r} already exists")
    old_ref = res.ref_in(model)
    for referrer, prop, index in _referrers(model, old_ref):
        _rewrite_reference(referrer, prop, index, new_id)
        diff.touch(referrer.ref_in(model))
    res.id = new_id
    diff.touch(old_ref)
    diff.touch(new_id)
    return EditOp(EditKind.RENAME, target=new_id, payload={"newId": op.target})


def _apply_annotate(op: EditOp, model: ModelSpec, diff: Diff) -> EditOp:
    res = _require(model, op.target)
    add = list(op.payload.get("add", []))
    remove = list(op.payload.get("remove", []))
    terms = list(res.props.get("ontologyTerms", []))
    for term in remove:
        if term in terms:
            terms.remove(term)
    for term in add:
        if term not in terms:
            terms.append(term)
    if terms:
        res.props["ontologyTerms"] = terms
    else:
        res.props.pop("ontologyTerms", None)
    diff.touch(op.target)
    return EditOp(EditKind.ANNOTATE, target=op.target, payload={"add": remove, "remove": add})


def _apply_clone(op: EditOp, model: ModelSpec, diff: Diff) -> EditOp:
    group = _require(model, op.target, "Group")
    suffix = op.payload.get("suffix")
    if not isinstance(suffix, str) or not suffix:
        raise EditError("CLONE_SUBGRAPH needs a suffix")
    member_refs: list[str] = []
    for page in ("nodes", "links", "lyphs", "groups"):
        member_refs.extend(r for r in group.props.get(page, []) if isinstance(r, str))
    mapping = {ref: f"{ref}{suffix}" for ref in member_refs}
    group_ref = group.ref_in(model)
    mapping[group_ref] = f"{group_ref}{suffix}"
    for old, new in mapping.items():
        if model.find(new) is not None:
            raise EditError(f"clone collision: {new!r} already exists")
    created: list[str] = []
    for old, new in mapping.items():
        original = model.find(old)
        if original is None:
            continue
        dup = original.clone()
        dup.id = new
        dup.props["generated"] = True
        for prop, spec in reference_props(dup.cls).items():
            value = dup.props.get(prop)
            if value is None:
                continue
            if spec.kind is Kind.REF and isinstance(value, str):
                dup.props[prop] = mapping.get(value, value)
            elif spec.kind is Kind.REFLIST and isinstance(value, list):
                dup.props[prop] = [mapping.get(v, v) if isinstance(v, str) else v for v in value]
        model.add(dup)
        created.append(new)
        diff.touch(new)
    return EditOp(EditKind.DELETE, target=created[0] if created else "",
                  payload={"ids": created})


def _apply_split(op: EditOp, model: ModelSpec, diff: Diff) -> EditOp:
    chain = _require(model, op.target, "Chain")
    at = op.payload.get("at")
    method = next((m for m in ("lyphs", "housingLyphs") if m in chain.props), None)
    if method is None and "numLevels" in chain.props:
        method = "numLevels"
    if method is None:
        raise EditError(f"SPLIT_CHAIN: chain {op.target!r} has no definition method")
    total = chain.props["numLevels"] if method == "numLevels" else len(chain.props[method])
    if not isinstance(at, int) or not 0 < at < total:
        raise EditError(f"SPLIT_CHAIN: split point must lie strictly inside 1..{total - 1}")
    tail_id = f"{chain.id}_tail"
    if model.find(tail_id) is not None:
        raise EditError(f"split collision: {tail_id!r} already exists")
    tail = Resource(id=tail_id, cls="Chain", props={"generated": True})
    junction_id = f"{chain.id}_junction"
    if model.find(junction_id) is None:
        model.add(Resource(id=junction_id, cls="Node", props={"generated": True}))
        diff.touch(junction_id)
    if method == "numLevels":
        tail.props["numLevels"] = total - at
        tail.props["lyphTemplate"] = chain.props.get("lyphTemplate")
        chain.props["numLevels"] = at
    else:
        tail.props[method] = chain.props[method][at:]
        chain.props[method] = chain.props[method][:at]
        if "lyphTemplate" in chain.props:
            tail.props["lyphTemplate"] = chain.props["lyphTemplate"]
    if "leaf" in chain.props:
        tail.props["leaf"] = chain.props["leaf"]
    chain.props["leaf"] = junction_id
    tail.props["root"] = junction_id
    model.add(tail)
    diff.touch(chain.ref_in(model))
    diff.touch(tail_id)
    return EditOp(EditKind.MERGE_CHAINS, target=op.target, payload={"with": tail_id})


def _apply_merge_chains(op: EditOp, model: ModelSpec, diff: Diff) -> EditOp:
    first = _require(model, op.target, "Chain")
    other_ref = op.payload.get("with")
    if not isinstance(other_ref, str):
        raise EditError("MERGE_CHAINS needs a 'with' chain")
    second = _require(model, other_ref, "Chain")
    method_a = next((m for m in ("numLevels", "lyphs", "housingLyphs") if m in first.props), None)
    method_b = next((m for m in ("numLevels", "lyphs", "housingLyphs") if m in second.props), None)
    if method_a != method_b:
        raise EditError("MERGE_CHAINS: incompatible definition methods")
    if method_a == "numLevels":
        if first.props.get("lyphTemplate") != second.props.get("lyphTemplate"):
            raise EditError("MERGE_CHAINS: different lyph templates")
        split_at = first.props["numLevels"]
        first.props["numLevels"] = first.props["numLevels"] + second.props["numLevels"]
    else:
        split_at = len(first.props[method_a])
        first.props[method_a] = first.props[method_a] + second.props[method_b]
    junction = first.props.get("leaf")
    if "leaf" in second.props:
        first.props["leaf"] = second.props["leaf"]
    else:
        first.props.pop("leaf", None)
    model.remove(second)
    if isinstance(junction, str):
        leftover = model.find(junction, "Node")
        if leftover is not None and leftover.generated and not _referrers(model, junction):
            model.remove(leftover)
            diff.touch(junction)
    diff.touch(first.ref_in(model))
    diff.touch(other_ref)
    return EditOp(EditKind.SPLIT_CHAIN, target=op.target, payload={"at": split_at})


# ---------------------------------------------------------------------------
# Sessions, undo/redo
# ---------------------------------------------------------------------------

@dataclass
class EditLog:
    applied: list[tuple[EditOp, EditOp]] = field(default_factory=list)
    cursor: int = 0

    def to_document(self) -> list[dict]:
        return [{"op": op.to_record(), "inverse": inv.to_record()} for op, inv in self.applied]


class EditSession:
    """Owns a model through a sequence of operations with undo/redo."""

    def __init__(self, model: ModelSpec):
        self.model = model
        self.log = EditLog()

    def apply(self, op: EditOp) -> Diff:
        revised, inverse, diff = apply(op, self.model)
        del self.log.applied[self.log.cursor:]
        self.log.applied.append((op, inverse))
        self.log.cursor = len(self.log.applied)
        self.model = revised
        return diff

    def undo(self) -> bool:
        if self.log.cursor == 0:
            return False
        _, inverse = self.log.applied[self.log.cursor - 1]
        self.model, _, _ = apply(inverse, self.model)
        self.log.cursor -= 1
        return True

    def redo(self) -> bool:
        if self.log.cursor >= len(self.log.applied):
            return False
        op, _ = self.log.applied[self.log.cursor]
        self.model, _, _ = apply(op, self.model)
        self.log.cursor += 1
        return True

    def serialize(self) -> str:
        return serialize_model(self.model)


def run_script(model: ModelSpec, records: list[dict]) -> tuple[ModelSpec, EditLog, list[Diff]]:
    """Apply an edit script transactionally; raises EditError untouched."""
    session = EditSession(model)
    diffs = [session.apply(EditOp.from_record(record)) for record in records]
    return session.model, session.log, diffs
