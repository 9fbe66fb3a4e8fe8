"""Stable identity tokens for traced objects.

id() values get recycled, so a bare id cannot name an object for the
lifetime of a trace. Tokens are "<hex id>@<birth counter>"; when an id
comes back after its previous owner died, the counter makes the new
token distinct. That check needs a weak reference, so types that refuse
one (str, int, tuple) keep their first token for the whole run: for
interned path strings that is exactly the useful behavior, and such
objects simply never produce death records.
"""

import threading
import weakref
from typing import Callable, Optional


class _Entry:
    __slots__ = ("token", "ref", "tags")

    def __init__(self, token, ref):
        self.token = token
        self.ref = ref
        self.tags = set()


class IdentityRegistry:
    """Object -> token map with optional death notification.

    on_death receives the full [(type-tag, token), ...] list an object
    was ever traced under; it fires from weakref.finalize, which may run
    on any thread and after the session ended.
    """

    def __init__(self, on_death: Optional[Callable] = None):
        self._lock = threading.Lock()
        self._entries: dict[int, _Entry] = {}
        self._births = 0
        self.on_death = on_death

    def identity(self, obj: object, tag: str) -> tuple[str, str]:
        key = id(obj)
        with self._lock:
            entry = self._entries.get(key)
            if entry is not None and (entry.ref is None or entry.ref() is not None):
                entry.tags.add(tag)
                return tag, entry.token
            self._births += 1
            token = f"{key:x}@{self._births}"
            try:
                ref = weakref.ref(obj)
            except TypeError:
                ref = None
            entry = _Entry(token, ref)
            entry.tags.add(tag)
            self._entries[key] = entry
            if ref is not None:
                weakref.finalize(obj, self._finalized, key, token)
            return tag, token

    def _finalized(self, key: int, token: str) -> None:
        with self._lock:
            entry = self._entries.get(key)
            if entry is None or entry.token != token:
                return
            del self._entries[key]
            tags = sorted(entry.tags)
        callback = self.on_death
        if callback is not None:
            callback([(tag, token) for tag in tags])
