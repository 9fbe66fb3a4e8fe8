"""Seeded synthetic workload generator.

Builds traces with a controllable number of events and instances for
benchmarks, GC pressure tests and CLI demos. Instance lifetimes slide
along the trace: instance k owns a block of events around position
k * events / instances, with one-off jitter so neighboring instances
interleave. With deaths enabled, an instance's objects die two blocks
after its own, which keeps every event's objects alive at emission.

The first event of each instance's block is a creation event of the
spec (when it has any), so creation-gated engines monitor every
instance. Everything is driven by one seeded RNG: same arguments, same
trace, byte for byte.
"""

from __future__ import annotations

import random
from typing import IO, Iterator, Optional, Union

from .slicing import ObjectId
from .specs import Spec
from .traceio import TraceDeath, TraceEvent, TraceWriter


def _instance_objects(spec: Spec, index: int) -> dict[str, ObjectId]:
    return {
        name: ObjectId(type_tag, f"{index}.{pos}")
        for pos, (name, type_tag) in enumerate(spec.parameters)
    }


def synth_records(
    spec: Spec,
    n_events: int,
    n_instances: int,
    seed: int = 0,
    *,
    deaths: bool = False,
    creation_first: bool = True,
) -> Iterator[Union[TraceEvent, TraceDeath]]:
    if n_events < 1 or n_instances < 1:
        raise ValueError("need at least one event and one instance")
    rng = random.Random(seed)
    names = sorted(spec.alphabet)
    creations = sorted(spec.creation_events)
    decls = {e.name: e for e in spec.events}
    block = max(1, n_events // n_instances)

    objects: dict[int, dict[str, ObjectId]] = {}
    started: set[int] = set()
    dead_upto = -1
    seq = 0

    for slot in range(n_events):
        primary = min(slot // block, n_instances - 1)
        idx = primary
        if rng.random() < 0.25:
            idx = max(0, min(n_instances - 1, primary + rng.choice((-1, 1))))
        if deaths and idx <= dead_upto:
            idx = primary  # jitter must not resurrect a dead neighbor
        if idx not in objects:
            objects[idx] = _instance_objects(spec, idx)

        if creation_first and creations and idx not in started:
            name = creations[idx % len(creations)]
        else:
            name = names[rng.randrange(len(names))]
        started.add(idx)

        decl = decls[name]
        params = {p: objects[idx][p] for p in decl.params}
        seq += 1
        yield TraceEvent(
            seq=seq,
            name=name,
            params=tuple(sorted(params.items())),
            position=decl.position,
        )

        if deaths:
            # jitter reaches one block back, so two blocks back is settled
            retire_limit = primary - 2
            while dead_upto < retire_limit:
                dead_upto += 1
                if dead_upto in objects:
                    seq += 1
                    yield TraceDeath(
                        seq=seq,
                        dead=tuple(
                            sorted(
                                objects[dead_upto].values(),
                                key=lambda o: (o.type_tag, o.token),
                            )
                        ),
                    )


def synth_to_file(
    spec: Spec,
    sink: IO[str],
    n_events: int,
    n_instances: int,
    seed: int = 0,
    *,
    deaths: bool = False,
    creation_first: bool = True,
    producer: Optional[str] = None,
) -> int:
    """Write a synthetic trace; returns the number of records written."""
    writer = TraceWriter(sink, producer=producer or f"synth(seed={seed})")
    count = 0
    for record in synth_records(
        spec, n_events, n_instances, seed, deaths=deaths, creation_first=creation_first
    ):
        if isinstance(record, TraceEvent):
            writer.event(
                record.name,
                dict(record.params),
                position=record.position or "After",
            )
        else:
            writer.death(record.dead)
        count += 1
    return count
