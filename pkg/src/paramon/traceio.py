"""Trace format v1: JSON lines, one record per line.

The first line is a meta record; after it come event and death records
in any interleaving. Sequence numbers are strictly increasing across
both record kinds.

    {"kind":"meta","version":"1.0","producer":"..."}
    {"kind":"event","seq":1,"name":"check","position":"After",
     "selector":["os","access"],"params":{"f":["file","81"]},
     "fields":{},"source":["app.py",12]}
    {"kind":"death","seq":2,"dead":[["file","81"]]}

Writers emit canonical lines (sorted keys, no spaces) so identical
traces are byte-identical. The reader is a generator over an open file
or any line iterable, keeps no history, skips malformed lines and
reports them, and refuses traces whose major version is not 1.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Optional, Union

from .slicing import ObjectId, ParameterInstance, ParametricEvent

FORMAT_VERSION = "1.0"
MAX_REPORTED_ERRORS = 20


class TraceError(Exception):
    pass


@dataclass(frozen=True)
class TraceMeta:
    version: str = FORMAT_VERSION
    producer: str = "paramon"


@dataclass(frozen=True)
class TraceEvent:
    seq: int
    name: str
    params: tuple[tuple[str, ObjectId], ...]
    position: Optional[str] = None
    selector: Optional[tuple[str, ...]] = None
    fields: tuple[tuple[str, object], ...] = ()
    source: Optional[tuple[str, int]] = None

    def instance(self) -> ParameterInstance:
        return ParameterInstance(dict(self.params))

    def to_parametric(self) -> ParametricEvent:
        return ParametricEvent(
            name=self.name,
            instance=self.instance(),
            fields=dict(self.fields),
            source=self.source,
            seq=self.seq,
        )


@dataclass(frozen=True)
class TraceDeath:
    seq: int
    dead: tuple[ObjectId, ...]


TraceRecord = Union[TraceMeta, TraceEvent, TraceDeath]


def canonical_line(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def _encode_object(obj: ObjectId) -> list:
    return [obj.type_tag, obj.token]


def _decode_object(raw) -> ObjectId:
    if (
        not isinstance(raw, list)
        or len(raw) != 2
        or not all(isinstance(x, str) for x in raw)
    ):
        raise TraceError(f"bad object reference {raw!r}")
    return ObjectId(raw[0], raw[1])


class TraceWriter:
    """Serializes records; seq is assigned here and never reused."""

    def __init__(self, sink: IO[str], producer: str = "paramon"):
        self._sink = sink
        self._seq = 0
        sink.write(
            canonical_line(
                {"kind": "meta", "version": FORMAT_VERSION, "producer": producer}
            )
        )

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    def event(
        self,
        name: str,
        params: dict[str, ObjectId],
        *,
        position: str = "After",
        selector: Optional[Iterable[str]] = None,
        fields: Optional[dict] = None,
        source: Optional[tuple[str, int]] = None,
    ) -> int:
        seq = self._next_seq()
        record = {
            "kind": "event",
            "seq": seq,
            "name": name,
            "position": position,
            "params": {p: _encode_object(o) for p, o in params.items()},
            "fields": fields or {},
        }
        if selector is not None:
            record["selector"] = list(selector)
        if source is not None:
            record["source"] = [source[0], source[1]]
        self._sink.write(canonical_line(record))
        return seq

    def death(self, objects: Iterable[ObjectId]) -> int:
        seq = self._next_seq()
        dead = sorted(set(objects), key=lambda o: (o.type_tag, o.token))
        record = {"kind": "death", "seq": seq, "dead": [_encode_object(o) for o in dead]}
        self._sink.write(canonical_line(record))
        return seq


@dataclass
class ReadIssues:
    """Malformed-line accounting for a streaming read."""

    skipped: int = 0
    samples: list[str] = field(default_factory=list)

    def note(self, lineno: int, problem: str) -> None:
        self.skipped += 1
        if len(self.samples) < MAX_REPORTED_ERRORS:
            self.samples.append(f"line {lineno}: {problem}")


def _parse_event(obj: dict) -> TraceEvent:
    name = obj.get("name")
    if not isinstance(name, str) or not name:
        raise TraceError("event without a name")
    raw_params = obj.get("params", {})
    if not isinstance(raw_params, dict):
        raise TraceError("params must be an object")
    params = tuple(sorted((p, _decode_object(v)) for p, v in raw_params.items()))
    position = obj.get("position")
    if position is not None and position not in ("Before", "After"):
        raise TraceError(f"bad position {position!r}")
    selector = obj.get("selector")
    if selector is not None:
        if not isinstance(selector, list) or not all(
            isinstance(x, (str, int)) for x in selector
        ):
            raise TraceError("bad selector")
        selector = tuple(selector)
    fields = obj.get("fields", {})
    if not isinstance(fields, dict):
        raise TraceError("fields must be an object")
    source = obj.get("source")
    if source is not None:
        if (
            not isinstance(source, list)
            or len(source) != 2
            or not isinstance(source[0], str)
            or not isinstance(source[1], int)
        ):
            raise TraceError("bad source location")
        source = (source[0], source[1])
    return TraceEvent(
        seq=obj["seq"],
        name=name,
        params=params,
        position=position,
        selector=selector,
        fields=tuple(sorted(fields.items())),
        source=source,
    )


def _parse_death(obj: dict) -> TraceDeath:
    raw = obj.get("dead")
    if not isinstance(raw, list):
        raise TraceError("death without a dead list")
    return TraceDeath(seq=obj["seq"], dead=tuple(_decode_object(o) for o in raw))


def iter_trace(
    source: Union[str, IO[str], Iterable[str]],
    issues: Optional[ReadIssues] = None,
) -> Iterator[TraceRecord]:
    """Stream records from a path, open file, or line iterable.

    The meta line is validated and yielded first; a wrong major version
    aborts immediately. Any other malformed line is recorded on
    `issues` and skipped, including records whose seq does not
    increase.
    """
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8") as fh:
            yield from iter_trace(fh, issues)
        return

    issues = issues if issues is not None else ReadIssues()
    last_seq = 0
    saw_meta = False
    for lineno, line in enumerate(source, start=1):
        text = line.strip()
        if not text:
            continue
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            if not saw_meta:
                raise TraceError(f"line {lineno}: not a trace (bad JSON header)") from exc
            issues.note(lineno, f"bad JSON: {exc.msg}")
            continue
        if not isinstance(obj, dict):
            if not saw_meta:
                raise TraceError(f"line {lineno}: not a trace (non-object header)")
            issues.note(lineno, "record is not an object")
            continue
        kind = obj.get("kind")
        if not saw_meta:
            if kind != "meta":
                raise TraceError(f"line {lineno}: first record must be meta")
            version = obj.get("version")
            if not isinstance(version, str) or "." not in version:
                raise TraceError(f"line {lineno}: meta without a version")
            major = version.split(".", 1)[0]
            if major != "1":
                raise TraceError(f"unsupported trace version {version}")
            saw_meta = True
            yield TraceMeta(version=version, producer=str(obj.get("producer", "")))
            continue
        if kind == "meta":
            issues.note(lineno, "duplicate meta record")
            continue
        if kind not in ("event", "death"):
            issues.note(lineno, f"unknown record kind {kind!r}")
            continue
        seq = obj.get("seq")
        if not isinstance(seq, int) or seq <= last_seq:
            issues.note(lineno, f"seq {seq!r} does not increase")
            continue
        try:
            record = _parse_event(obj) if kind == "event" else _parse_death(obj)
        except TraceError as exc:
            issues.note(lineno, str(exc))
            continue
        last_seq = seq
        yield record
    if not saw_meta:
        raise TraceError("empty input: no meta record")


def load_trace(source: Union[str, IO[str], Iterable[str]]):
    """Non-streaming convenience: (meta, records, issues)."""
    issues = ReadIssues()
    stream = iter_trace(source, issues)
    meta = next(stream)
    assert isinstance(meta, TraceMeta)
    return meta, list(stream), issues


def write_events(sink: IO[str], events: Iterable[ParametricEvent], producer: str = "paramon") -> None:
    """Dump bare parametric events; used by generators and tests."""
    writer = TraceWriter(sink, producer=producer)
    for ev in events:
        writer.event(ev.name, {p: o for p, o in ev.instance.items()}, fields=dict(ev.fields), source=ev.source)


def trace_to_string(events: Iterable[ParametricEvent], producer: str = "paramon") -> str:
    buf = io.StringIO()
    write_events(buf, events, producer=producer)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# report rendering


def report_to_json(report) -> str:
    obj = {
        "kind": "report",
        "spec": report.spec,
        "category": report.category,
        "message": report.message,
        "instance": {p: _encode_object(o) for p, o in report.instance.items()},
        "state": report.state,
        "seq": report.seq,
        "source": list(report.source) if report.source else None,
        "count": report.count,
    }
    return canonical_line(obj)


def report_to_text(report) -> str:
    binding = ",".join(f"{p}={o}" for p, o in report.instance.items()) or "<bot>"
    where = f" ({report.source[0]}:{report.source[1]})" if report.source else ""
    times = f" (x{report.count})" if report.count != 1 else ""
    return (
        f"[{report.spec}] {report.category} at seq {report.seq} "
        f"for {{{binding}}}{where}: {report.message}{times}"
    )


def summary_to_json(summary: dict) -> str:
    return canonical_line({"kind": "summary", **summary})


def summary_to_text(summary: dict) -> str:
    return (
        f"-- {summary['reports']} report(s), {summary['events']} event(s), "
        f"{summary['monitors_created']} monitor(s) created, "
        f"{summary['wall_s']:.3f}s"
    )
