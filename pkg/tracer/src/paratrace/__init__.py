"""Monkey-patching trace emitter for paramon.

Wraps importable module callables so each call writes a trace-format v1
record, then hands the file to `paramon check`. Runtime patching only:
no AST rewriting, no interpreter hooks, and built-in types whose slots
refuse assignment are skipped with a note in the trace header.
"""

from .identity import IdentityRegistry
from .session import Session, instrument
from .targets import PatchTarget, TargetError, derive_targets, load_spec_docs
from .writer import TraceSink

__all__ = [
    "IdentityRegistry",
    "PatchTarget",
    "Session",
    "instrument",
    "TargetError",
    "TraceSink",
    "derive_targets",
    "load_spec_docs",
]
