"""Formula-to-monitor synthesis for the five supported formalisms."""

from __future__ import annotations

from .template import (
    MATCH,
    SINK,
    UNDETERMINED,
    VIOLATION,
    MonitorTemplate,
    Stepper,
    SynthesisError,
    UnknownEventError,
    restrict_categories,
)
from .cfg import DerivativeTemplate, compile_cfg
from .ere import compile_ere
from .fsm import parse_fsm
from .ltl import compile_ftltl
from .ptltl import compile_ptltl

__all__ = [
    "MATCH",
    "SINK",
    "UNDETERMINED",
    "VIOLATION",
    "MonitorTemplate",
    "DerivativeTemplate",
    "Stepper",
    "SynthesisError",
    "UnknownEventError",
    "compile_formula",
    "compile_cfg",
    "compile_ere",
    "compile_ftltl",
    "compile_ptltl",
    "parse_fsm",
    "restrict_categories",
]

_COMPILERS = {
    "fsm": parse_fsm,
    "ere": compile_ere,
    "ftltl": compile_ftltl,
    "ptltl": compile_ptltl,
    "cfg": compile_cfg,
}


def compile_formula(formalism: str, formula: str, events: frozenset[str]):
    """Compile a formula for the given (case-insensitive) formalism tag."""
    try:
        compiler = _COMPILERS[formalism.lower()]
    except KeyError:
        raise SynthesisError(f"unknown formalism {formalism!r}") from None
    return compiler(formula, events)
