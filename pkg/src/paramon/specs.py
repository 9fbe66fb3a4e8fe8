"""Spec documents: parsing, validation, serialization, event actions.

A spec is a strict-JSON document whose top-level keys are Description,
Formalism, Formula, Parameters, Creation_Events, Events, Event_Actions,
Variables and Handlers. Specs have no name key; the name comes from the
filename stem or an explicit argument.

Events maps a position (Before/After) to event names to instrumentation
selectors. The plain form binds every declared parameter:

    "Events": {"After": {"check": [["os", "access"]]}}

and the object form picks a subset for multi-parameter specs:

    {"selectors": [["dict", "update"]], "params": ["d"]}

Event actions are written in a small closed language (set add/remove and
membership, counter incr/decr and comparison, map put/get, booleans,
`return`); `return false` suppresses the event for this spec only.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .slicing import ObjectId

POSITIONS = ("Before", "After")
VAR_KINDS = ("set", "counter", "map")
FORMALISMS = ("fsm", "ere", "ftltl", "ptltl", "cfg")


class SpecError(Exception):
    """A spec document that cannot be used, with a line number when known."""

    def __init__(self, message: str, *, line: Optional[int] = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.message}"


# ---------------------------------------------------------------------------
# action mini-language


class ActionError(SpecError):
    """Static problem in an event action program."""


class ActionRuntimeError(Exception):
    """An action failed at runtime (e.g. map get on a missing key)."""


@dataclass(frozen=True)
class _Node:
    pass


@dataclass(frozen=True)
class Lit(_Node):
    value: object


@dataclass(frozen=True)
class ParamRef(_Node):
    name: str


@dataclass(frozen=True)
class VarRef(_Node):
    name: str


@dataclass(frozen=True)
class GetCall(_Node):
    var: str
    key: _Node


@dataclass(frozen=True)
class Membership(_Node):
    member: _Node
    var: str
    negated: bool


@dataclass(frozen=True)
class Compare(_Node):
    op: str
    left: _Node
    right: _Node


@dataclass(frozen=True)
class BoolOp(_Node):
    op: str  # "and" | "or"
    parts: tuple[_Node, ...]


@dataclass(frozen=True)
class NotOp(_Node):
    inner: _Node


@dataclass(frozen=True)
class CallStmt(_Node):
    var: str
    method: str
    args: tuple[_Node, ...]


@dataclass(frozen=True)
class ReturnStmt(_Node):
    expr: _Node


@dataclass(frozen=True)
class ActionProgram:
    source: str
    statements: tuple[_Node, ...] = field(compare=False)


_ACT_TOKEN = re.compile(
    r"\s*([A-Za-z_][A-Za-z0-9_]*|==|!=|<=|>=|<|>|\(|\)|\.|,|;|\d+|\"[^\"]*\"|'[^']*')"
)

_METHODS = {
    "set": {"add": 1, "remove": 1},
    "counter": {"incr": (0, 1), "decr": (0, 1)},
    "map": {"put": 2},
}


def parse_action(source: str) -> ActionProgram:
    statements: list[_Node] = []
    for chunk in _split_statements(source):
        tokens = _act_tokens(chunk)
        if not tokens:
            continue
        stmt, rest = _parse_stmt(tokens)
        if rest:
            raise ActionError(f"trailing tokens in action: {' '.join(rest)!r}")
        statements.append(stmt)
    return ActionProgram(source=source, statements=tuple(statements))


def _split_statements(source: str) -> list[str]:
    out: list[str] = []
    for line in source.splitlines() or [source]:
        out.extend(part for part in line.split(";"))
    return [p for p in out if p.strip()]


def _act_tokens(text: str) -> list[str]:
    tokens: list[str] = []
    pos = 0
    while pos < len(text):
        m = _ACT_TOKEN.match(text, pos)
        if not m:
            rest = text[pos:].strip()
            if not rest:
                break
            raise ActionError(f"bad action syntax near {rest[:20]!r}")
        tokens.append(m.group(1))
        pos = m.end()
    return tokens


def _parse_stmt(tokens: list[str]) -> tuple[_Node, list[str]]:
    if tokens[0] == "return":
        expr, rest = _parse_expr(tokens[1:])
        return ReturnStmt(expr), rest
    if tokens[0] == "self":
        # self.var.method(args)
        if len(tokens) < 6 or tokens[1] != "." or tokens[3] != "." or tokens[5] != "(":
            raise ActionError(f"expected self.var.method(...) call: {' '.join(tokens[:8])!r}")
        var, method = tokens[2], tokens[4]
        rest = tokens[6:]
        args: list[_Node] = []
        if rest and rest[0] == ")":
            rest = rest[1:]
        else:
            while True:
                arg, rest = _parse_expr(rest)
                args.append(arg)
                if not rest:
                    raise ActionError("unterminated argument list")
                if rest[0] == ",":
                    rest = rest[1:]
                    continue
                if rest[0] == ")":
                    rest = rest[1:]
                    break
                raise ActionError(f"expected ',' or ')' in arguments, found {rest[0]!r}")
        return CallStmt(var, method, tuple(args)), rest
    raise ActionError(f"statement must be a call or return: {' '.join(tokens[:6])!r}")


def _parse_expr(tokens: list[str]) -> tuple[_Node, list[str]]:
    return _parse_or(tokens)


def _parse_or(tokens: list[str]) -> tuple[_Node, list[str]]:
    node, rest = _parse_and(tokens)
    parts = [node]
    while rest and rest[0] == "or":
        nxt, rest = _parse_and(rest[1:])
        parts.append(nxt)
    return (parts[0] if len(parts) == 1 else BoolOp("or", tuple(parts))), rest


def _parse_and(tokens: list[str]) -> tuple[_Node, list[str]]:
    node, rest = _parse_not(tokens)
    parts = [node]
    while rest and rest[0] == "and":
        nxt, rest = _parse_not(rest[1:])
        parts.append(nxt)
    return (parts[0] if len(parts) == 1 else BoolOp("and", tuple(parts))), rest


def _parse_not(tokens: list[str]) -> tuple[_Node, list[str]]:
    if tokens and tokens[0] == "not" and not (len(tokens) > 1 and tokens[1] == "in"):
        inner, rest = _parse_not(tokens[1:])
        return NotOp(inner), rest
    return _parse_comparison(tokens)


_CMP_OPS = ("==", "!=", "<=", ">=", "<", ">")


def _parse_comparison(tokens: list[str]) -> tuple[_Node, list[str]]:
    left, rest = _parse_atom(tokens)
    if rest and rest[0] in _CMP_OPS:
        op = rest[0]
        right, rest = _parse_atom(rest[1:])
        return Compare(op, left, right), rest
    if rest and rest[0] == "in":
        var, rest2 = _parse_store_ref(rest[1:])
        return Membership(left, var, negated=False), rest2
    if len(rest) >= 2 and rest[0] == "not" and rest[1] == "in":
        var, rest2 = _parse_store_ref(rest[2:])
        return Membership(left, var, negated=True), rest2
    return left, rest


def _parse_store_ref(tokens: list[str]) -> tuple[str, list[str]]:
    if len(tokens) < 3 or tokens[0] != "self" or tokens[1] != ".":
        raise ActionError("membership needs a self.variable on the right")
    return tokens[2], tokens[3:]


def _parse_atom(tokens: list[str]) -> tuple[_Node, list[str]]:
    if not tokens:
        raise ActionError("expected an expression")
    tok = tokens[0]
    if tok == "(":
        node, rest = _parse_expr(tokens[1:])
        if not rest or rest[0] != ")":
            raise ActionError("unbalanced parenthesis in action")
        return node, rest[1:]
    if tok in ("true", "True"):
        return Lit(True), tokens[1:]
    if tok in ("false", "False"):
        return Lit(False), tokens[1:]
    if tok.isdigit():
        return Lit(int(tok)), tokens[1:]
    if tok[0] in ("'", '"'):
        return Lit(tok[1:-1]), tokens[1:]
    if tok == "self":
        if len(tokens) < 3 or tokens[1] != ".":
            raise ActionError("dangling self")
        var = tokens[2]
        rest = tokens[3:]
        if len(rest) >= 3 and rest[0] == "." and rest[1] == "get" and rest[2] == "(":
            key, rest2 = _parse_expr(rest[3:])
            if not rest2 or rest2[0] != ")":
                raise ActionError("unbalanced parenthesis in get()")
            return GetCall(var, key), rest2[1:]
        return VarRef(var), rest
    if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok):
        return ParamRef(tok), tokens[1:]
    raise ActionError(f"unexpected token {tok!r} in action")


def check_action(
    program: ActionProgram,
    variables: Mapping[str, str],
    params: frozenset[str],
) -> list[str]:
    """Static errors: undeclared names, wrong methods, non-bool returns."""
    errors: list[str] = []

    def check_expr(node: _Node) -> str:
        match node:
            case Lit(bool()):
                return "bool"
            case Lit(int()):
                return "int"
            case Lit(_):
                return "scalar"
            case ParamRef(name):
                if name not in params:
                    errors.append(f"{name!r} is not a parameter bound by this event")
                return "object"
            case VarRef(name):
                kind = variables.get(name)
                if kind is None:
                    errors.append(f"variable {name!r} is not declared")
                    return "any"
                if kind != "counter":
                    errors.append(f"variable {name!r} ({kind}) cannot be read as a value")
                return "int"
            case GetCall(var, key):
                kind = variables.get(var)
                if kind is None:
                    errors.append(f"variable {var!r} is not declared")
                elif kind != "map":
                    errors.append(f"get() needs a map, {var!r} is a {kind}")
                check_expr(key)
                return "any"
            case Membership(member, var, _):
                kind = variables.get(var)
                if kind is None:
                    errors.append(f"variable {var!r} is not declared")
                elif kind not in ("set", "map"):
                    errors.append(f"membership needs a set or map, {var!r} is a {kind}")
                check_expr(member)
                return "bool"
            case Compare(op, left, right):
                lt = check_expr(left)
                rt = check_expr(right)
                if op in ("<", "<=", ">", ">="):
                    for t, side in ((lt, "left"), (rt, "right")):
                        if t not in ("int", "any"):
                            errors.append(f"ordered comparison needs numbers ({side} side is {t})")
                return "bool"
            case BoolOp(_, parts):
                for p in parts:
                    if check_expr(p) not in ("bool", "any"):
                        errors.append("and/or needs boolean operands")
                return "bool"
            case NotOp(inner):
                if check_expr(inner) not in ("bool", "any"):
                    errors.append("not needs a boolean operand")
                return "bool"
        raise AssertionError(f"unhandled node {node!r}")

    for stmt in program.statements:
        match stmt:
            case ReturnStmt(expr):
                if check_expr(expr) not in ("bool", "any"):
                    errors.append("return needs a boolean expression")
            case CallStmt(var, method, args):
                kind = variables.get(var)
                if kind is None:
                    errors.append(f"variable {var!r} is not declared")
                    continue
                table = _METHODS[kind]
                if method not in table:
                    errors.append(f"{kind} variable {var!r} has no method {method!r}")
                    continue
                arity = table[method]
                ok = (
                    len(args) in arity if isinstance(arity, tuple) else len(args) == arity
                )
                if not ok:
                    errors.append(f"{var}.{method} called with {len(args)} argument(s)")
                for a in args:
                    check_expr(a)
    return errors


@dataclass(frozen=True)
class ActionOutcome:
    proceed: bool
    store: dict

    def __iter__(self):
        return iter((self.proceed, self.store))


def fresh_store(variables: Mapping[str, str]) -> dict:
    out: dict = {}
    for name, kind in variables.items():
        out[name] = frozenset() if kind == "set" else (0 if kind == "counter" else {})
    return out


def eval_action(
    program: ActionProgram,
    store: Mapping[str, object],
    binding: Mapping[str, object],
) -> ActionOutcome:
    """Run the program; the input store is left untouched."""
    new_store = dict(store)

    def ev(node: _Node) -> object:
        match node:
            case Lit(value):
                return value
            case ParamRef(name):
                try:
                    return binding[name]
                except KeyError as exc:
                    raise ActionRuntimeError(
                        f"parameter {name!r} is not bound at this event"
                    ) from exc
            case VarRef(name):
                return new_store[name]
            case GetCall(var, key):
                k = ev(key)
                mapping = new_store[var]
                try:
                    return mapping[k]
                except (KeyError, TypeError) as exc:
                    raise ActionRuntimeError(
                        f"get({k!r}) failed on map {var!r}: no such key"
                    ) from exc
            case Membership(member, var, negated):
                inside = ev(member) in new_store[var]
                return (not inside) if negated else inside
            case Compare(op, left, right):
                l, r = ev(left), ev(right)
                try:
                    match op:
                        case "==":
                            return l == r
                        case "!=":
                            return l != r
                        case "<":
                            return l < r
                        case "<=":
                            return l <= r
                        case ">":
                            return l > r
                        case ">=":
                            return l >= r
                except TypeError as exc:
                    raise ActionRuntimeError(f"cannot compare {l!r} {op} {r!r}") from exc
            case BoolOp(op, parts):
                if op == "and":
                    return all(bool(ev(p)) for p in parts)
                return any(bool(ev(p)) for p in parts)
            case NotOp(inner):
                return not ev(inner)
        raise AssertionError(f"unhandled node {node!r}")

    for stmt in program.statements:
        match stmt:
            case ReturnStmt(expr):
                return ActionOutcome(bool(ev(expr)), new_store)
            case CallStmt(var, method, args):
                vals = [ev(a) for a in args]
                current = new_store[var]
                if method == "add":
                    new_store[var] = frozenset(current) | {vals[0]}
                elif method == "remove":
                    new_store[var] = frozenset(current) - {vals[0]}
                elif method == "incr":
                    new_store[var] = current + (vals[0] if vals else 1)
                elif method == "decr":
                    new_store[var] = current - (vals[0] if vals else 1)
                elif method == "put":
                    updated = dict(current)
                    updated[vals[0]] = vals[1]
                    new_store[var] = updated
                else:
                    raise AssertionError(f"unhandled method {method}")
    return ActionOutcome(True, new_store)


# ---------------------------------------------------------------------------
# spec model


@dataclass(frozen=True, eq=True)
class EventDecl:
    """One observable event.

    A selector is [module, attr] or [module, attr, argmap]; argmap says
    where each bound parameter's object comes from at the call site: an
    argument index, "self", "ret", or "kw:<name>". Without an argmap,
    parameters bind positionally in declaration order.
    """

    name: str
    position: str
    selectors: tuple  # of raw selector lists, JSON shape preserved
    params: tuple[str, ...]


@dataclass(frozen=True)
class ActionDecl:
    position: str
    event: str
    program: ActionProgram


@dataclass(frozen=True)
class Spec:
    name: str
    description: str
    formalism: str
    formula: str
    parameters: tuple[tuple[str, str], ...]
    creation_events: frozenset[str]
    events: tuple[EventDecl, ...]
    variables: tuple[tuple[str, str], ...]
    actions: tuple[ActionDecl, ...]
    handlers: tuple[tuple[str, str], ...]
    warnings: tuple[str, ...] = field(default=(), compare=False)

    @property
    def alphabet(self) -> frozenset[str]:
        return frozenset(e.name for e in self.events)

    @property
    def parameter_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.parameters)

    def event_params(self) -> dict[str, frozenset[str]]:
        return {e.name: frozenset(e.params) for e in self.events}

    def event_decl(self, name: str) -> Optional[EventDecl]:
        for e in self.events:
            if e.name == name:
                return e
        return None

    def action_for(self, position: str, event: str) -> Optional[ActionProgram]:
        for a in self.actions:
            if a.position == position and a.event == event:
                return a.program
        return None

    def handled_categories(self) -> frozenset[str]:
        return frozenset(c for c, _ in self.handlers)

    def handler_message(self, category: str) -> Optional[str]:
        for c, m in self.handlers:
            if c == category:
                return m
        return None

    def variable_kinds(self) -> dict[str, str]:
        return dict(self.variables)


_KNOWN_KEYS = (
    "Description",
    "Formalism",
    "Formula",
    "Parameters",
    "Creation_Events",
    "Events",
    "Event_Actions",
    "Variables",
    "Handlers",
)


def _check_selector(sel, ev_name: str, ev_params: list[str]) -> None:
    ok = (
        isinstance(sel, list)
        and len(sel) in (2, 3)
        and isinstance(sel[0], str)
        and isinstance(sel[1], str)
    )
    if not ok:
        raise SpecError(
            f"event {ev_name!r}: selector {sel!r} needs [module, attr] or "
            f"[module, attr, argmap]"
        )
    if len(sel) == 3:
        argmap = sel[2]
        if not isinstance(argmap, dict):
            raise SpecError(f"event {ev_name!r}: argmap must be an object")
        for pname, where in argmap.items():
            if pname not in ev_params:
                raise SpecError(
                    f"event {ev_name!r}: argmap names {pname!r}, not a bound parameter"
                )
            good = isinstance(where, int) or (
                isinstance(where, str)
                and (where in ("ret", "self") or where.startswith("kw:"))
            )
            if not good:
                raise SpecError(
                    f"event {ev_name!r}: argmap for {pname!r} must be an argument "
                    f"index, \"self\", \"ret\", or \"kw:<name>\""
                )


def parse_spec(text: str, name: str = "spec") -> Spec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"not valid JSON: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(doc, dict):
        raise SpecError("spec document must be a JSON object")

    warnings = [f"unknown key {k!r} ignored" for k in doc if k not in _KNOWN_KEYS]

    formalism = _require_str(doc, "Formalism").lower()
    if formalism not in FORMALISMS:
        raise SpecError(f"unknown formalism {doc['Formalism']!r}")
    formula = _require_str(doc, "Formula")
    description = doc.get("Description", "")
    if not isinstance(description, str):
        raise SpecError("Description must be a string")

    raw_params = doc.get("Parameters")
    if raw_params is None:
        raise SpecError("Parameters is required (ordered [name, type] pairs)")
    parameters: list[tuple[str, str]] = []
    seen_params: set[str] = set()
    if not isinstance(raw_params, list):
        raise SpecError("Parameters must be a list of [name, type] pairs")
    for entry in raw_params:
        if (
            not isinstance(entry, list)
            or len(entry) != 2
            or not all(isinstance(x, str) for x in entry)
        ):
            raise SpecError(f"bad parameter entry {entry!r}: want [name, type]")
        pname, ptype = entry
        if pname in seen_params:
            raise SpecError(f"duplicate parameter {pname!r}")
        seen_params.add(pname)
        parameters.append((pname, ptype))

    raw_events = doc.get("Events")
    if not isinstance(raw_events, dict) or not raw_events:
        raise SpecError("Events must map positions to event declarations")
    events: list[EventDecl] = []
    names_seen: set[str] = set()
    for position, block in raw_events.items():
        if position not in POSITIONS:
            raise SpecError(f"unknown event position {position!r}")
        if not isinstance(block, dict):
            raise SpecError(f"Events.{position} must be an object")
        for ev_name, decl in block.items():
            if ev_name in names_seen:
                raise SpecError(f"event {ev_name!r} declared twice")
            names_seen.add(ev_name)
            if isinstance(decl, dict):
                selectors = decl.get("selectors", [])
                ev_params = decl.get("params")
                extras = set(decl) - {"selectors", "params"}
                if extras:
                    raise SpecError(f"event {ev_name!r}: unknown keys {sorted(extras)}")
            else:
                selectors = decl
                ev_params = None
            if not isinstance(selectors, list):
                raise SpecError(f"event {ev_name!r}: selectors must be a list")
            if ev_params is None:
                ev_params = [n for n, _ in parameters]
            if not isinstance(ev_params, list) or not all(
                isinstance(p, str) for p in ev_params
            ):
                raise SpecError(f"event {ev_name!r}: params must be a list of names")
            for p in ev_params:
                if p not in seen_params:
                    raise SpecError(f"event {ev_name!r} binds undeclared parameter {p!r}")
            for sel in selectors:
                _check_selector(sel, ev_name, ev_params)
            events.append(
                EventDecl(
                    name=ev_name,
                    position=position,
                    selectors=tuple(json.loads(json.dumps(selectors))),
                    params=tuple(ev_params),
                )
            )

    raw_creation = doc.get("Creation_Events", [])
    if not isinstance(raw_creation, list) or not all(isinstance(c, str) for c in raw_creation):
        raise SpecError("Creation_Events must be a list of event names")
    for c in raw_creation:
        if c not in names_seen:
            raise SpecError(f"creation event {c!r} is not declared in Events")

    raw_vars = doc.get("Variables", {})
    if not isinstance(raw_vars, dict):
        raise SpecError("Variables must map names to kinds")
    variables: list[tuple[str, str]] = []
    for vname, kind in raw_vars.items():
        if not isinstance(kind, str) or kind.lower() not in VAR_KINDS:
            raise SpecError(f"variable {vname!r} has unknown kind {kind!r}")
        variables.append((vname, kind.lower()))
    var_map = dict(variables)

    raw_actions = doc.get("Event_Actions", {})
    if not isinstance(raw_actions, dict):
        raise SpecError("Event_Actions must map positions to event programs")
    actions: list[ActionDecl] = []
    decl_by_name = {e.name: e for e in events}
    for position, block in raw_actions.items():
        if position not in POSITIONS:
            raise SpecError(f"unknown action position {position!r}")
        if not isinstance(block, dict):
            raise SpecError(f"Event_Actions.{position} must be an object")
        for ev_name, source in block.items():
            decl = decl_by_name.get(ev_name)
            if decl is None or decl.position != position:
                raise SpecError(
                    f"action for {position}/{ev_name} has no matching event declaration"
                )
            if not isinstance(source, str):
                raise SpecError(f"action for {ev_name!r} must be a string program")
            program = parse_action(source)
            problems = check_action(program, var_map, frozenset(decl.params))
            if problems:
                raise SpecError(
                    f"action for {ev_name!r}: " + "; ".join(problems)
                )
            actions.append(ActionDecl(position=position, event=ev_name, program=program))

    raw_handlers = doc.get("Handlers", {})
    if not isinstance(raw_handlers, dict):
        raise SpecError("Handlers must map categories to messages")
    handlers: list[tuple[str, str]] = []
    for category, message in raw_handlers.items():
        if not isinstance(message, str):
            raise SpecError(f"handler for {category!r} must be a string message")
        handlers.append((category, message))

    return Spec(
        name=name,
        description=description,
        formalism=formalism,
        formula=formula,
        parameters=tuple(parameters),
        creation_events=frozenset(raw_creation),
        events=tuple(events),
        variables=tuple(variables),
        actions=tuple(actions),
        handlers=tuple(handlers),
        warnings=tuple(warnings),
    )


def _require_str(doc: dict, key: str) -> str:
    value = doc.get(key)
    if not isinstance(value, str) or not value.strip():
        raise SpecError(f"{key} is required and must be a nonempty string")
    return value


def validate_spec(spec: Spec) -> list[Diagnostic]:
    """Model-level checks plus a trial formula compile."""
    from .logics import SynthesisError, compile_formula

    out = [Diagnostic("warning", w) for w in spec.warnings]
    if not spec.parameters and any(e.params for e in spec.events):
        out.append(Diagnostic("error", "events bind parameters but none are declared"))
    for e in spec.events:
        if not e.params and spec.parameters:
            out.append(
                Diagnostic(
                    "warning", f"event {e.name!r} binds no parameters; it will hit every instance"
                )
            )
    if not spec.creation_events:
        out.append(Diagnostic("warning", "no creation events: C+/D will never create monitors"))
    try:
        stepper = compile_formula(spec.formalism, spec.formula, spec.alphabet)
    except SynthesisError as exc:
        out.append(Diagnostic("error", f"formula does not compile: {exc}"))
        return out
    cats = stepper.categories()
    for category, _ in spec.handlers:
        if category not in cats:
            out.append(
                Diagnostic(
                    "warning",
                    f"handler {category!r} matches no state the formula can reach",
                )
            )
    return out


def synthesize(spec: Spec):
    """Compile the spec's formula and erase unhandled categories."""
    from .logics import MonitorTemplate, compile_formula, restrict_categories

    stepper = compile_formula(spec.formalism, spec.formula, spec.alphabet)
    if isinstance(stepper, MonitorTemplate):
        return restrict_categories(stepper, spec.handled_categories())
    return stepper


def serialize_spec(spec: Spec) -> str:
    """Canonical document text; parse_spec(serialize_spec(s)) == s."""
    events: dict[str, dict[str, object]] = {}
    for e in spec.events:
        block = events.setdefault(e.position, {})
        selectors = list(e.selectors)
        if e.params == spec.parameter_names:
            block[e.name] = selectors
        else:
            block[e.name] = {"selectors": selectors, "params": list(e.params)}
    actions: dict[str, dict[str, str]] = {}
    for a in spec.actions:
        actions.setdefault(a.position, {})[a.event] = a.program.source
    doc: dict[str, object] = {
        "Description": spec.description,
        "Formalism": spec.formalism,
        "Formula": spec.formula,
        "Parameters": [[n, t] for n, t in spec.parameters],
        "Creation_Events": sorted(spec.creation_events),
        "Events": events,
        "Event_Actions": actions,
        "Variables": {n: k for n, k in spec.variables},
        "Handlers": {c: m for c, m in spec.handlers},
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def binding_of(instance) -> dict[str, object]:
    """Parameter binding handed to eval_action. Only bound parameters are
    visible to actions; event payload fields are not."""
    return {name: obj for name, obj in instance.items()}


def render_object(obj: ObjectId) -> str:
    return str(obj)
