"""Trace-format v1 emission.

Kept deliberately independent of paramon's own reader/writer: this is
the producing side of a documented file format, and sharing code would
hide format drift instead of failing loudly in tests.
"""

import json
import threading
from typing import Iterable, Mapping, Optional

VERSION = "1.0"


class TraceSink:
    """One output file, one lock, monotonically increasing seq.

    Instrumented code may call from any thread; every record goes
    through the same lock. close() is idempotent and late deaths after
    close are dropped rather than raised, because finalizers outlive
    sessions.
    """

    def __init__(self, path: str, producer: str, extra_meta: Optional[dict] = None):
        self._fh = open(path, "w", encoding="utf-8")
        self._lock = threading.Lock()
        self._seq = 0
        self._closed = False
        meta = {"kind": "meta", "version": VERSION, "producer": producer}
        if extra_meta:
            meta.update(extra_meta)
        self._emit(meta)

    def _emit(self, record: dict) -> None:
        self._fh.write(json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n")

    def event(
        self,
        name: str,
        position: str,
        params: Mapping[str, tuple[str, str]],
        source: Optional[tuple[str, int]] = None,
    ) -> None:
        with self._lock:
            if self._closed:
                return
            self._seq += 1
            record = {
                "kind": "event",
                "seq": self._seq,
                "name": name,
                "position": position,
                "params": {p: [tag, token] for p, (tag, token) in params.items()},
            }
            if source is not None:
                record["source"] = [source[0], source[1]]
            self._emit(record)

    def death(self, identities: Iterable[tuple[str, str]]) -> None:
        dead = sorted(set(identities))
        if not dead:
            return
        with self._lock:
            if self._closed:
                return
            self._seq += 1
            self._emit(
                {"kind": "death", "seq": self._seq, "dead": [[t, k] for t, k in dead]}
            )

    def close(self) -> None:
        with self._lock:
            if self._closed:
                return
            self._closed = True
            self._fh.flush()
            self._fh.close()
