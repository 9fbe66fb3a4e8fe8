"""Parametric trace slicing.

A parametric event carries a partial binding of spec parameters to runtime
object identities. Slicing projects a parametric trace onto one binding: the
slice for theta keeps exactly the events whose binding is less informative
than theta, with the bindings themselves forgotten.

Bindings form a lattice under "less informative": bot (nothing bound) is the
minimum, and two bindings combine iff they agree on shared parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional


@dataclass(frozen=True, slots=True)
class ObjectId:
    """Identity of one runtime object: a type tag plus an opaque token.

    Two ObjectIds are the same object iff tag and token are both equal.
    There is deliberately no structural notion of equality (two files with
    equal paths stay distinct objects).
    """

    type_tag: str
    token: str

    def __str__(self) -> str:
        return f"{self.type_tag}#{self.token}"


class ParameterInstance:
    """An immutable partial map from parameter names to ObjectIds.

    Instances are canonical: equal bindings compare and hash equal no matter
    the construction order. The empty instance is exposed as BOT.
    """

    __slots__ = ("_items", "_domain", "_map", "_hash")

    def __init__(self, bindings: Mapping[str, ObjectId] | Iterable[tuple[str, ObjectId]] = ()):
        items = tuple(sorted(dict(bindings).items()))
        object.__setattr__(self, "_items", items)
        object.__setattr__(self, "_map", dict(items))
        object.__setattr__(self, "_domain", frozenset(self._map))
        object.__setattr__(self, "_hash", hash(items))

    @property
    def domain(self) -> frozenset[str]:
        return self._domain

    def items(self) -> tuple[tuple[str, ObjectId], ...]:
        return self._items

    def get(self, name: str) -> Optional[ObjectId]:
        return self._map.get(name)

    def __getitem__(self, name: str) -> ObjectId:
        return self._map[name]

    def __contains__(self, name: str) -> bool:
        return name in self._map

    def __len__(self) -> int:
        return len(self._items)

    def __bool__(self) -> bool:
        return bool(self._items)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ParameterInstance):
            return NotImplemented
        return self._items == other._items

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        if not self._items:
            return "<bot>"
        inside = ", ".join(f"{k}={v}" for k, v in self._items)
        return "{" + inside + "}"

    def sort_key(self) -> tuple:
        """Total order for deterministic iteration; hash order is not stable
        across interpreter runs."""
        return tuple((k, v.type_tag, v.token) for k, v in self._items)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("ParameterInstance is immutable")


BOT = ParameterInstance()


def compatible(a: ParameterInstance, b: ParameterInstance) -> bool:
    """True iff a and b agree on every shared parameter."""
    am, bm = a._map, b._map
    if len(bm) < len(am):
        am, bm = bm, am
    for name, obj in am.items():
        other = bm.get(name)
        if other is not None and other != obj:
            return False
    return True


def combine(a: ParameterInstance, b: ParameterInstance) -> Optional[ParameterInstance]:
    """Union of two bindings, or None when they disagree somewhere."""
    if not compatible(a, b):
        return None
    if a._domain >= b._domain:
        return a
    if b._domain >= a._domain:
        return b
    return _merge(a, b)


def _merge(a: ParameterInstance, b: ParameterInstance) -> ParameterInstance:
    merged = dict(a._items)
    merged.update(b._items)
    return ParameterInstance(merged)


def less_informative(a: ParameterInstance, b: ParameterInstance) -> bool:
    """a ⊑ b: everything a binds, b binds identically."""
    if len(a._items) > len(b._items):
        return False
    bm = b._map
    for name, obj in a._items:
        if bm.get(name) != obj:
            return False
    return True


def strictly_less_informative(a: ParameterInstance, b: ParameterInstance) -> bool:
    return len(a._items) < len(b._items) and less_informative(a, b)


class IncomparableMaximaError(Exception):
    """Raised when a set has no unique most-informative lower bound."""


def max_less_informative(
    instances: Iterable[ParameterInstance], theta: ParameterInstance
) -> ParameterInstance:
    """The unique ⊑-greatest element of {x in instances | x ⊑ theta}.

    BOT is assumed to be a member whether or not it is listed. Raises
    IncomparableMaximaError when two incomparable maximal candidates exist,
    which signals a broken instance set rather than a valid query.
    """
    below = [inst for inst in instances if less_informative(inst, theta)]
    best = BOT
    for inst in below:
        if len(inst._items) > len(best._items):
            best = inst
    for inst in below:
        if not less_informative(inst, best):
            raise IncomparableMaximaError(
                f"no unique maximum below {theta!r}: {best!r} vs {inst!r}"
            )
    return best


@dataclass(frozen=True, slots=True)
class ParametricEvent:
    """One event of a parametric trace: a name plus a parameter binding.

    fields carries scalar payload (shown in reports); source is the
    producing (file, line) when known; seq the record number in the trace.
    """

    name: str
    instance: ParameterInstance = BOT
    fields: Mapping[str, object] = field(default_factory=dict)
    source: Optional[tuple[str, int]] = None
    seq: int = 0


def slice_trace(trace: Iterable[ParametricEvent], theta: ParameterInstance) -> list[str]:
    """The theta-slice: names of events whose binding is ⊑ theta, in order."""
    return [ev.name for ev in trace if less_informative(ev.instance, theta)]


def iter_slice(trace: Iterable[ParametricEvent], theta: ParameterInstance) -> Iterator[ParametricEvent]:
    """Like slice_trace but yields the full events, bindings intact."""
    for ev in trace:
        if less_informative(ev.instance, theta):
            yield ev
