"""Patch, trace, restore.

A Session owns the writer, the identity registry and every patched
callable. Emission never runs reentrantly: anything the shim itself
calls while writing a record (open, os.*) must behave as if unpatched,
or a traced program that we trace with would deadlock into recursion.
"""

import gc
import importlib
import sys
import threading
import warnings
from collections import defaultdict
from functools import wraps

from .identity import IdentityRegistry
from .targets import PatchTarget
from .writer import TraceSink

_MISSING = object()


class _Patch:
    __slots__ = ("owner", "name", "original", "emissions")

    def __init__(self, owner, name, original):
        self.owner = owner
        self.name = name
        self.original = original
        self.emissions = []  # PatchTargets sharing this callable


def _resolve(module: str, attr: str):
    mod = importlib.import_module(module)
    owner = mod
    parts = attr.split(".")
    for part in parts[:-1]:
        owner = getattr(owner, part)
    return owner, parts[-1], getattr(owner, parts[-1])


def _probe_settable(owner, name, value) -> bool:
    # assigning the attribute to itself detects read-only slots without
    # changing behavior
    try:
        setattr(owner, name, value)
        return True
    except (TypeError, AttributeError):
        return False


class Session:
    def __init__(self, targets: list[PatchTarget], out_path: str, producer: str = "paratrace"):
        self._local = threading.local()
        self.registry = IdentityRegistry(on_death=self._on_death)
        self._patches: dict[tuple[str, str], _Patch] = {}
        self.skipped: list[tuple[str, str, str]] = []
        self._active = False

        grouped = defaultdict(list)
        for t in targets:
            grouped[(t.module, t.attr)].append(t)
        for (module, attr), group in sorted(grouped.items()):
            try:
                owner, name, original = _resolve(module, attr)
            except (ImportError, AttributeError) as exc:
                self._skip(module, attr, str(exc))
                continue
            if not callable(original):
                self._skip(module, attr, "not callable")
                continue
            if not _probe_settable(owner, name, original):
                self._skip(module, attr, "read-only attribute slot")
                continue
            patch = _Patch(owner, name, original)
            patch.emissions = sorted(group, key=lambda t: (t.position, t.event))
            self._patches[(module, attr)] = patch

        extra = {"skipped_targets": [list(s) for s in self.skipped]} if self.skipped else None
        self.sink = TraceSink(out_path, producer, extra_meta=extra)

    def _skip(self, module: str, attr: str, reason: str) -> None:
        self.skipped.append((module, attr, reason))
        warnings.warn(f"paratrace: cannot patch {module}.{attr}: {reason}", stacklevel=3)

    def _on_death(self, identities) -> None:
        self.sink.death(identities)

    # -- emission ------------------------------------------------------------

    def _emit(self, target: PatchTarget, args, kwargs, ret) -> None:
        params = {}
        for param, tag, origin in target.bindings:
            obj = _MISSING
            if origin == "self":
                if args:
                    obj = args[0]
            elif origin == "ret":
                obj = ret
            elif isinstance(origin, int):
                if origin < len(args):
                    obj = args[origin]
            else:
                obj = kwargs.get(origin[1], _MISSING)
            if obj is not _MISSING:
                params[param] = self.registry.identity(obj, tag)
        frame = sys._getframe(2)
        self.sink.event(
            target.event,
            target.position,
            params,
            source=(frame.f_code.co_filename, frame.f_lineno),
        )

    def _wrap(self, patch: _Patch):
        original = patch.original
        before = [t for t in patch.emissions if t.position == "Before"]
        after = [t for t in patch.emissions if t.position == "After"]
        local = self._local

        @wraps(original)
        def traced(*args, **kwargs):
            if getattr(local, "busy", False):
                return original(*args, **kwargs)
            local.busy = True
            try:
                for target in before:
                    self._emit(target, args, kwargs, None)
            finally:
                local.busy = False
            ret = original(*args, **kwargs)  # exceptions pass through, After unsent
            local.busy = True
            try:
                for target in after:
                    self._emit(target, args, kwargs, ret)
            finally:
                local.busy = False
            return ret

        return traced

    # -- lifecycle -----------------------------------------------------------

    def start(self) -> "Session":
        if self._active:
            return self
        for patch in self._patches.values():
            setattr(patch.owner, patch.name, self._wrap(patch))
        self._active = True
        return self

    def stop(self) -> None:
        if self._active:
            for patch in self._patches.values():
                setattr(patch.owner, patch.name, patch.original)
            self._active = False
        # run pending finalizers while the sink still accepts deaths
        gc.collect()
        self.sink.close()

    def __enter__(self) -> "Session":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()


def instrument(targets: list[PatchTarget], out_path: str, producer: str = "paratrace") -> Session:
    """Patch everything and hand back the already-running session.

    The caller owns the teardown: call stop() (or use the session as a
    context manager from the start) to restore the originals and close
    the trace file.
    """
    return Session(targets, out_path, producer=producer).start()
