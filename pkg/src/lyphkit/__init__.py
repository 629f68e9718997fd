"""lyphkit: a compiler and linker toolchain for multiscale anatomical
connectivity models.

Parse model specs, validate them, expand templates into full resource
graphs, link models across namespaces, analyze connectivity, compute
constraint-driven layouts, and export generated models and JSON-LD.
"""

from .analysis import filter_by_clade, neurulate, soma_processes
from .composer import ImportSource, join, merge, resolve_imports
from .document import from_document, parse_model, serialize_model, to_document
from .editor import EditOp, EditSession, apply as apply_edit, run_script
from .exporter import resource_map, serialize_generated, serialize_jsonld, to_jsonld
from .generator import autogenerate_stubs, expand_chain, generate, instantiate_lyph_template
from .identifiers import Identifier, parse_identifier
from .relations import composition_cycle_check, resolve, sync_relations
from .resources import GeneratedModel, ModelSpec, Resource
from .schema import (
    Issue,
    Severity,
    ValidationReport,
    render_report,
    validate_references,
    validate_syntax,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Identifier",
    "parse_identifier",
    "Resource",
    "ModelSpec",
    "GeneratedModel",
    "Issue",
    "Severity",
    "ValidationReport",
    "render_report",
    "validate_syntax",
    "validate_references",
    "parse_model",
    "from_document",
    "to_document",
    "serialize_model",
    "resolve",
    "sync_relations",
    "composition_cycle_check",
    "autogenerate_stubs",
    "instantiate_lyph_template",
    "expand_chain",
    "generate",
    "merge",
    "join",
    "resolve_imports",
    "ImportSource",
    "neurulate",
    "soma_processes",
    "filter_by_clade",
    "serialize_generated",
    "serialize_jsonld",
    "to_jsonld",
    "resource_map",
    "EditOp",
    "EditSession",
    "apply_edit",
    "run_script",
]
