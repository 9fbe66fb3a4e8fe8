"""From spec files to patchable targets.

Only the Events and Parameters blocks of a spec matter here; formulas,
actions and handlers are the checker's business. A selector names a
callable as [module, attr] or [module, attr, argmap]; attr may be dotted
(class.method). Without an argmap the event's parameters bind to leading
positional arguments in declaration order.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Union

POSITIONS = ("Before", "After")

# where a parameter's object comes from at the call site
Origin = Union[int, str, tuple[str, str]]  # index | "self"/"ret" | ("kw", name)


class TargetError(Exception):
    pass


@dataclass(frozen=True)
class PatchTarget:
    module: str
    attr: str
    event: str
    position: str
    bindings: tuple[tuple[str, str, Origin], ...]  # (param, type-tag, origin)


def _parse_origin(raw: object, event: str, position: str) -> Origin:
    if isinstance(raw, bool):
        raise TargetError(f"{event}: argmap value {raw!r} is not a position")
    if isinstance(raw, int):
        if raw < 0:
            raise TargetError(f"{event}: negative argument index {raw}")
        return raw
    if raw == "self":
        return "self"
    if raw == "ret":
        if position == "Before":
            raise TargetError(f"{event}: 'ret' is not bound yet at Before")
        return "ret"
    if isinstance(raw, str) and raw.startswith("kw:") and len(raw) > 3:
        return ("kw", raw[3:])
    raise TargetError(f"{event}: bad argmap value {raw!r}")


def _selector_parts(selector: object, event: str) -> tuple[str, str, dict]:
    if (
        not isinstance(selector, list)
        or len(selector) not in (2, 3)
        or not all(isinstance(s, str) for s in selector[:2])
    ):
        raise TargetError(f"{event}: selector must be [module, attr] or [module, attr, argmap]")
    argmap = {}
    if len(selector) == 3:
        if not isinstance(selector[2], dict):
            raise TargetError(f"{event}: argmap must be an object")
        argmap = selector[2]
    return selector[0], selector[1], argmap


def derive_targets(doc: dict, spec_name: str) -> list[PatchTarget]:
    try:
        declared = {name: tag for name, tag in doc.get("Parameters", [])}
    except (TypeError, ValueError) as exc:
        raise TargetError(f"{spec_name}: malformed Parameters") from exc
    order = [name for name, _ in doc.get("Parameters", [])]
    events = doc.get("Events")
    if not isinstance(events, dict):
        raise TargetError(f"{spec_name}: no Events block")

    out: list[PatchTarget] = []
    for position, table in events.items():
        if position not in POSITIONS:
            raise TargetError(f"{spec_name}: unknown position {position!r}")
        for event, decl in table.items():
            if isinstance(decl, dict):
                selectors = decl.get("selectors", [])
                bound = decl.get("params", order)
            else:
                selectors = decl
                bound = order
            unknown = [p for p in bound if p not in declared]
            if unknown:
                raise TargetError(f"{spec_name}: {event} binds undeclared {unknown}")
            for selector in selectors:
                module, attr, argmap = _selector_parts(selector, event)
                if argmap:
                    extra = [p for p in argmap if p not in bound]
                    if extra:
                        raise TargetError(f"{spec_name}: {event} argmap names {extra}")
                    bindings = tuple(
                        (p, declared[p], _parse_origin(argmap[p], event, position))
                        for p in bound
                        if p in argmap
                    )
                else:
                    bindings = tuple(
                        (p, declared[p], i) for i, p in enumerate(bound)
                    )
                out.append(
                    PatchTarget(
                        module=module,
                        attr=attr,
                        event=event,
                        position=position,
                        bindings=bindings,
                    )
                )
    return out


def load_spec_docs(path: str) -> list[tuple[str, dict]]:
    """All spec documents under path: a .json file or a directory of them."""
    p = Path(path)
    files = sorted(p.glob("*.json")) if p.is_dir() else [p]
    if not files:
        raise TargetError(f"no spec files under {path}")
    docs = []
    for f in files:
        try:
            docs.append((f.stem, json.loads(f.read_text())))
        except (OSError, json.JSONDecodeError) as exc:
            raise TargetError(f"cannot read spec {f}: {exc}") from exc
    return docs
