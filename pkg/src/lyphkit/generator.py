"""Model expansion: stubs, template instantiation, chain expansion.

The pipeline turns a declared spec into a generated model whose relations
are closed and which reloads without re-expansion (every created resource
is flagged generated, and a generated input short-circuits the pipeline).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .relations import Resolution, composition_cycle_check, resolve, sync_relations
from .resources import GeneratedModel, GenerationTrace, ModelSpec, Resource
from .schema import ANY, Kind, STUB_PRECEDENCE, ValidationReport, reference_props


class GenerationError(Exception):
    pass


@dataclass
class GenerationResult:
    model: Optional[GeneratedModel]
    trace: GenerationTrace = field(default_factory=GenerationTrace)
    report: ValidationReport = field(default_factory=ValidationReport)


# ---------------------------------------------------------------------------
# Stub generation
# ---------------------------------------------------------------------------

def autogenerate_stubs(model: ModelSpec, trace: GenerationTrace | None = None,
                       report: ValidationReport | None = None) -> ValidationReport:
    """Create a stub for every dangling local reference, in place.

    The stub's class comes from the referencing properties; a reference
    used in contexts that demand disjoint classes is an error.  Foreign
    references are left untouched.
    """
    report = report if report is not None else ValidationReport()
    trace = trace if trace is not None else GenerationTrace()
    candidates: dict[str, set[str] | None] = {}
    for res in model.resources:
        for prop, spec in reference_props(res.cls).items():
            value = res.props.get(prop)
            if value is None:
                continue
            refs = value if spec.kind is Kind.REFLIST else [value]
            for ref in refs:
                if not isinstance(ref, str):
                    continue
                outcome = resolve(ref, model, expected=spec.targets)
                if outcome.status is not Resolution.UNRESOLVED_LOCAL:
                    continue
                allowed = None if spec.targets == ANY or not spec.targets else set(spec.targets)
                if ref not in candidates:
                    candidates[ref] = allowed
                elif allowed is not None:
                    prev = candidates[ref]
                    candidates[ref] = allowed if prev is None else prev & allowed

    for ref in sorted(candidates):
        allowed = candidates[ref]
        if allowed is None:
            continue  # only unconstrained uses; nothing sensible to create
        if not allowed:
            report.error("stub-conflict",
                         f"reference {ref!r} is used in contexts requiring incompatible classes", ref)
            continue
        cls = next(c for c in STUB_PRECEDENCE if c in allowed)
        model.add(Resource(id=ref, cls=cls, props={"generated": True}))
        trace.record(ref, "stub")
    return report


# ---------------------------------------------------------------------------
# Template instantiation
# ---------------------------------------------------------------------------

#: template properties carried over onto instances
_INHERITED = ("name", "topology", "angle", "ontologyTerms", "materials")


def _fresh_id(base: str, model: ModelSpec, report: ValidationReport) -> str | None:
    if model.has_id(base):
        report.error("id-collision", f"generated id {base!r} collides with a declared resource", base)
        return None
    return base


def _copy_layer(layer: Resource, context: str, index: int, model: ModelSpec,
                trace: GenerationTrace, report: ValidationReport) -> str | None:
    new_id = _fresh_id(f"{layer.id}_{context}_{index}", model, report)
    if new_id is None:
        return None
    props: dict = {"generated": True}
    for prop in _INHERITED:
        if prop in layer.props:
            props[prop] = layer.props[prop]
    copy = Resource(id=new_id, cls=layer.cls, props=props)
    model.add(copy)
    trace.record(new_id, "template-instance")
    trace.source_template[new_id] = layer.ref_in(model)
    nested = layer.props.get("layers")
    if isinstance(nested, list) and nested:
        copied = []
        for j, ref in enumerate(nested):
            inner = model.find(ref) if isinstance(ref, str) else None
            if inner is None:
                report.warning("layer-unresolved", f"layer {ref!r} of {layer.id!r} left shared", layer.id)
                copied.append(ref)
                continue
            inner_id = _copy_layer(inner, new_id, j, model, trace, report)
            if inner_id is not None:
                copied.append(inner_id)
        copy.props["layers"] = copied
    return new_id


def instantiate_lyph_template(template: Resource, context: str, model: ModelSpec,
                              trace: GenerationTrace | None = None,
                              report: ValidationReport | None = None) -> Resource:
    """Instantiate a lyph template for the given context identifier.

    The instance id is "<template>_<context>"; layers are deep-copied with
    index-suffixed ids so the layer/layerIn closure stays single-valued.
    """
    trace = trace if trace is not None else GenerationTrace()
    report = report if report is not None else ValidationReport()
    if template.cls != "Lyph" or not template.props.get("isTemplate"):
        raise GenerationError(f"{template.id!r} is not a lyph template")
    inst_id = _fresh_id(f"{template.id}_{context}", model, report)
    if inst_id is None:
        raise GenerationError(f"cannot instantiate {template.id!r}: id collision")
    props: dict = {"generated": True, "supertype": template.ref_in(model)}
    for prop in _INHERITED:
        if prop in template.props:
            props[prop] = template.props[prop]
    instance = Resource(id=inst_id, cls="Lyph", props=props)
    model.add(instance)
    trace.record(inst_id, "template-instance")
    trace.source_template[inst_id] = template.ref_in(model)
    layers = template.props.get("layers")
    if isinstance(layers, list) and layers:
        copied = []
        for i, ref in enumerate(layers):
            layer = model.find(ref) if isinstance(ref, str) else None
            if layer is None:
                report.warning("layer-unresolved", f"layer {ref!r} of template {template.id!r} left shared",
                               template.id)
                copied.append(ref)
                continue
            layer_id = _copy_layer(layer, context, i, model, trace, report)
            if layer_id is not None:
                copied.append(layer_id)
        instance.props["layers"] = copied
    subtypes = template.props.setdefault("subtypes", [])
    if inst_id not in subtypes:
        subtypes.append(inst_id)
    return instance


# ---------------------------------------------------------------------------
# Chain expansion
# ---------------------------------------------------------------------------

def _chain_node(chain: Resource, suffix: str, model: ModelSpec, trace: GenerationTrace,
                report: ValidationReport) -> str | None:
    new_id = _fresh_id(f"{chain.id}_{suffix}", model, report)
    if new_id is None:
        return None
    model.add(Resource(id=new_id, cls="Node", props={"generated": True}))
    trace.record(new_id, "chain-node")
    return new_id


def expand_chain(chain: Resource, model: ModelSpec, trace: GenerationTrace | None = None,
                 report: ValidationReport | None = None) -> ValidationReport:
    """Expand one chain template into levels, nodes, conveyed lyphs, group.

    Exactly one definition method must be present; levels always come out
    as a connected path with root = first source and leaf = last target.
    """
    trace = trace if trace is not None else GenerationTrace()
    report = report if report is not None else ValidationReport()
    if chain.props.get("levels"):
        return report  # already expanded; reloaded generated chains stay as-is

    methods = [m for m in ("numLevels", "lyphs", "housingLyphs") if m in chain.props]
    if len(methods) != 1:
        report.error("chain-ambiguous", f"chain {chain.id!r} must use exactly one definition method", chain.id)
        return report
    method = methods[0]

    template = None
    if "lyphTemplate" in chain.props:
        outcome = resolve(chain.props["lyphTemplate"], model, expected=("Lyph",))
        if outcome.resource is None:
            report.error("chain-template", f"chain {chain.id!r}: lyphTemplate {chain.props['lyphTemplate']!r} "
                         "is unresolved", chain.id)
            return report
        template = outcome.resource

    conveyed: list[str | None]
    housing: list[Resource] = []
    if method == "numLevels":
        n = chain.props["numLevels"]
        if not isinstance(n, int) or n <= 0:
            report.error("chain-levels", f"chain {chain.id!r}: numLevels must be a positive integer", chain.id)
            return report
        if template is None:
            report.error("chain-template", f"chain {chain.id!r}: numLevels requires lyphTemplate", chain.id)
            return report
        conveyed = [None] * n
    elif method == "lyphs":
        refs = chain.props["lyphs"]
        if not refs:
            report.error("chain-levels", f"chain {chain.id!r}: empty lyph sequence", chain.id)
            return report
        conveyed = []
        for ref in refs:
            found = model.find(ref, "Lyph") if isinstance(ref, str) else None
            if found is None:
                report.error("chain-lyph", f"chain {chain.id!r}: lyph {ref!r} is unresolved", chain.id)
                return report
            if found.props.get("isTemplate"):
                report.error("chain-lyph", f"chain {chain.id!r}: {ref!r} is a template; "
                             "the lyph sequence takes instances", chain.id)
                return report
            conveyed.append(found.ref_in(model))
        n = len(conveyed)
    else:
        refs = chain.props["housingLyphs"]
        if not refs:
            report.error("chain-levels", f"chain {chain.id!r}: empty housing sequence", chain.id)
            return report
        for ref in refs:
            found = model.find(ref, "Lyph") if isinstance(ref, str) else None
            if found is None:
                report.error("chain-housing", f"chain {chain.id!r}: housing lyph {ref!r} is unresolved", chain.id)
                return report
            housing.append(found)
        n = len(housing)
        conveyed = [None] * n

    # path nodes: declared root/leaf are reused, everything else is fresh
    node_refs: list[str | None] = []
    declared_root = chain.props.get("root")
    declared_leaf = chain.props.get("leaf")
    if declared_root and model.find(declared_root, "Node") is not None:
        node_refs.append(declared_root)
    else:
        node_refs.append(_chain_node(chain, "root", model, trace, report))
    for i in range(1, n):
        node_refs.append(_chain_node(chain, f"node{i}", model, trace, report))
    if declared_leaf and model.find(declared_leaf, "Node") is not None:
        node_refs.append(declared_leaf)
    else:
        node_refs.append(_chain_node(chain, "leaf", model, trace, report))
    if any(ref is None for ref in node_refs):
        return report

    level_refs: list[str] = []
    lyph_refs: list[str] = []
    for i in range(1, n + 1):
        link_id = _fresh_id(f"{chain.id}_lnk{i}", model, report)
        if link_id is None:
            return report
        link = Resource(id=link_id, cls="Link", props={
            "generated": True,
            "source": node_refs[i - 1],
            "target": node_refs[i],
            "levelIn": chain.ref_in(model),
        })
        model.add(link)
        trace.record(link_id, "chain-level")
        lyph_ref = conveyed[i - 1]
        if lyph_ref is None and template is not None:
            instance = instantiate_lyph_template(template, link_id, model, trace, report)
            lyph_ref = instance.ref_in(model)
            if housing:
                instance.props["internalIn"] = housing[i - 1].ref_in(model)
        if lyph_ref is not None:
            link.props["conveyingLyph"] = lyph_ref
            lyph_refs.append(lyph_ref)
        level_refs.append(link_id)

    if housing:
        for i, ref in enumerate(node_refs):
            node = model.find(ref, "Node")
            if node is None:
                continue
            if i == 0:
                borders = [housing[0].ref_in(model)]
            elif i == n:
                borders = [housing[-1].ref_in(model)]
            else:
                borders = [housing[i - 1].ref_in(model), housing[i].ref_in(model)]
            node.props.setdefault("onBorderOf", borders)

    chain.props["levels"] = level_refs
    chain.props["root"] = node_refs[0]
    chain.props["leaf"] = node_refs[-1]

    group_id = _fresh_id(f"{chain.id}_group", model, report)
    if group_id is None:
        return report
    group = Resource(id=group_id, cls="Group", props={
        "generated": True,
        "description": "chain",
        "nodes": [r for r in node_refs if r],
        "links": list(level_refs),
        "lyphs": list(lyph_refs),
    })
    model.add(group)
    trace.record(group_id, "chain-group")
    chain.props["group"] = group_id
    return report


# ---------------------------------------------------------------------------
# The pipeline
# ---------------------------------------------------------------------------

def _adopt_imports(model: ModelSpec) -> None:
    """Copy linked resources in as external; they serialize only in output."""
    present = {(r.namespace or model.namespace, r.id) for r in model.resources}
    for other in list(model.all_models())[1:]:
        for res in other.resources:
            ns = res.namespace or other.namespace
            if (ns, res.id) in present:
                continue
            adopted = res.clone()
            adopted.namespace = ns
            adopted.props["external"] = True
            # refs local to the source model become prefixed here
            for prop, spec in reference_props(adopted.cls).items():
                value = adopted.props.get(prop)
                if value is None:
                    continue
                if spec.kind is Kind.REF and isinstance(value, str):
                    adopted.props[prop] = _absolutize(value, other.namespace, model.namespace)
                elif spec.kind is Kind.REFLIST and isinstance(value, list):
                    adopted.props[prop] = [
                        _absolutize(v, other.namespace, model.namespace) if isinstance(v, str) else v
                        for v in value]
            model.resources.append(adopted)
            present.add((ns, res.id))


def _absolutize(ref: str, owner_ns: str, home_ns: str) -> str:
    from .identifiers import parse_identifier
    ident = parse_identifier(ref)
    if ident.prefix:
        return ident.local if ident.prefix == home_ns else ref
    if owner_ns == home_ns:
        return ref
    return f"{owner_ns}:{ident.local}"


def generate(spec: ModelSpec) -> GenerationResult:
    """Run the full expansion pipeline on a validated spec.

    Stages: stubs, chain expansion (declaration order, templates
    instantiated per level), relation closure, composition check, closed
    component search.  Any error aborts with the partial report.  A
    generated input passes through without re-expansion.
    """
    from .analysis import neurulate

    trace = GenerationTrace()
    report = ValidationReport()
    gen = GeneratedModel.from_spec(spec)
    gen.trace = trace

    if spec.generated:
        sync_relations(gen, report)
        composition_cycle_check(gen, report)
        if not report.ok():
            return GenerationResult(None, trace, report)
        return GenerationResult(gen, trace, report)

    _adopt_imports(gen)
    autogenerate_stubs(gen, trace, report)
    if not report.ok():
        return GenerationResult(None, trace, report)

    for chain in gen.of_class("Chain"):
        if chain.external:
            continue
        try:
            expand_chain(chain, gen, trace, report)
        except GenerationError as exc:
            report.error("generation", str(exc), chain.id)
        if not report.ok():
            return GenerationResult(None, trace, report)

    sync_relations(gen, report)
    if not report.ok():
        return GenerationResult(None, trace, report)
    composition_cycle_check(gen, report)
    if not report.ok():
        return GenerationResult(None, trace, report)

    neurulate(gen, report)
    if not report.ok():
        return GenerationResult(None, trace, report)
    return GenerationResult(gen, trace, report)
