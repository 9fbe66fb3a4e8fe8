"""Monitoring engines: five ways to run parametric specs over a trace.

All five compute reports for slices of the parametric trace; they differ
in how eagerly monitor instances come to exist.

  A   offline. Builds every slice first (one pass with a binding table),
      then replays each slice through a fresh monitor. The reference
      point the online algorithms are measured against.
  B   online and creation-blind. Every event is combined against the
      whole binding table, so cost per event grows with the table.
  C   online, index-based. Each event visits only the monitor of its own
      binding plus the strictly-more-informative instances, found
      through a subset index maintained at creation time. Creates an
      instance for every event's binding on first sight.
  C+  like C, but instances are created only at creation events.
  D   like C+, but a creation is skipped unless the domain of the
      inherited parent is in the event's enable set.

Within one event, every new binding inherits from the table as it stood
before the event; the updates land together afterwards. A new instance
inherits its state from its unique most informative existing
sub-instance. If two incomparable candidates genuinely disagree, no
faithful answer exists and the engine raises rather than guessing.

A spec's variable store is one store shared by all of its monitors.
The event's action runs once, when the event arrives, against that
store; a false return hides the event from the whole spec (no slicing,
no creation, no stepping), which is also why algorithm choice never
changes what actions observe.

A report occurrence is every step that lands in a handled-category
state, self-loops included. Occurrences with the same (spec, binding,
state) collapse into one record carrying the first occurrence's seq and
source plus a count.

Garbage collection (gc=True) consults coenable sets: a monitor whose
every path to a future report needs a parameter bound to a dead object
is replaced by a tombstone. Tombstones keep binding and state so later
creations still inherit correctly, which makes collection invisible in
the report stream (counts included) as long as the trace honors the
format contract that dead objects stop producing events. Final verdict
snapshots of collected monitors may be stale; reports never are.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .analysis import compute_coenable_sets, compute_enable_sets, compute_enable_sets_cfg
from .logics import MonitorTemplate, UNDETERMINED
from .logics.cfg import Grammar, render_grammar
from .slicing import (
    BOT,
    ObjectId,
    ParameterInstance,
    ParametricEvent,
    combine,
    less_informative,
    strictly_less_informative,
)
from .specs import (
    ActionRuntimeError,
    Spec,
    binding_of,
    eval_action,
    fresh_store,
    synthesize,
)
from .traceio import TraceDeath, TraceEvent, TraceMeta

ALGORITHMS = ("A", "B", "C", "C+", "D")


class EngineConfigError(Exception):
    pass


class EngineInvariantError(Exception):
    """An internal invariant broke; a bug, not a user error."""


def normalize_algorithm(name: str) -> str:
    canon = {"a": "A", "b": "B", "c": "C", "c+": "C+", "cplus": "C+", "d": "D"}
    key = name.strip().lower()
    if key not in canon:
        raise EngineConfigError(
            f"unknown algorithm {name!r}; pick one of {', '.join(ALGORITHMS)}"
        )
    return canon[key]


@dataclass(frozen=True)
class CompiledSpec:
    """A spec plus everything derived from it that stepping needs."""

    spec: Spec
    stepper: object  # MonitorTemplate | DerivativeTemplate
    handled: frozenset[str]
    event_params: dict[str, frozenset[str]]
    actions: dict[str, object]
    messages: dict[str, str]

    @property
    def name(self) -> str:
        return self.spec.name

    @property
    def alphabet(self) -> frozenset[str]:
        return self.stepper.alphabet

    def enable_sets(self) -> dict[str, frozenset[frozenset[str]]]:
        if isinstance(self.stepper, MonitorTemplate):
            return compute_enable_sets(self.stepper, self.event_params)
        return compute_enable_sets_cfg(self.stepper.root, self.event_params)

    def coenable_sets(self) -> dict[str, frozenset[frozenset[str]]]:
        if not isinstance(self.stepper, MonitorTemplate):
            raise EngineConfigError(
                f"spec {self.name!r}: gc needs a finite-state formula, "
                f"not {self.spec.formalism}"
            )
        return compute_coenable_sets(self.stepper, self.event_params)


def compile_spec(spec: Spec) -> CompiledSpec:
    stepper = synthesize(spec)
    return CompiledSpec(
        spec=spec,
        stepper=stepper,
        handled=spec.handled_categories(),
        event_params=spec.event_params(),
        actions={a.event: a.program for a in spec.actions},
        messages={c: m for c, m in spec.handlers},
    )


@dataclass
class ViolationRecord:
    spec: str
    instance: ParameterInstance
    category: str
    state: str
    message: str
    seq: int
    source: Optional[tuple[str, int]] = None
    count: int = 1


@dataclass(frozen=True)
class SpecFailure:
    spec: str
    seq: int
    message: str


@dataclass
class EngineStats:
    events_seen: int = 0
    events_dispatched: int = 0
    deaths_seen: int = 0
    monitors_created: dict = field(default_factory=dict)
    monitors_collected: int = 0
    bindings_scanned: int = 0
    monitor_visits: int = 0
    peak_live_monitors: int = 0
    visits_per_event: list = field(default_factory=list)
    scanned_per_event: list = field(default_factory=list)

    def created_total(self) -> int:
        return sum(self.monitors_created.values())


@dataclass
class EngineResult:
    reports: list[ViolationRecord]
    verdicts: dict[tuple[str, ParameterInstance], str]
    stats: EngineStats
    failures: list[SpecFailure]

    @property
    def fired(self) -> bool:
        return bool(self.reports)

    def report_multiset(self) -> list[tuple]:
        """Order-free fingerprint for cross-algorithm comparisons."""
        return sorted(
            (r.spec, r.instance.sort_key(), r.state, r.category, r.count)
            for r in self.reports
        )


class _Monitor:
    __slots__ = ("state", "tombstone")

    def __init__(self, state):
        self.state = state
        self.tombstone = False


class _SpecRunner:
    """Per-spec machinery shared by all algorithms."""

    def __init__(self, compiled: CompiledSpec, algorithm: str, gc: bool, stats: EngineStats):
        self.compiled = compiled
        self.spec = compiled.spec
        self.stepper = compiled.stepper
        self.algorithm = algorithm
        self.gc = gc
        self.stats = stats
        self.handled = compiled.handled
        self.actions = compiled.actions
        self.event_params = compiled.event_params
        self.creation = compiled.spec.creation_events
        self.var_kinds = compiled.spec.variable_kinds()
        self.full_domain = frozenset(compiled.spec.parameter_names)
        self.failed: Optional[SpecFailure] = None
        self.dead: set[ObjectId] = set()
        self.live = 0
        self.store = fresh_store(self.var_kinds)

        self.reports: dict[tuple, ViolationRecord] = {}
        self.report_order: list[ViolationRecord] = []
        self._cat_cache: dict = {}

        self.enable = compiled.enable_sets() if algorithm == "D" else None
        self.coenable = compiled.coenable_sets() if gc else None

        self.monitors: dict[ParameterInstance, _Monitor] = {
            BOT: _Monitor(self.stepper.initial())
        }
        self.uses_index = algorithm in ("C", "C+", "D")
        self.superset_index: dict[ParameterInstance, list[ParameterInstance]] = {}

    # -- small helpers ----------------------------------------------------

    @staticmethod
    def label(state) -> str:
        if isinstance(state, Grammar):
            return render_grammar(state)
        return state

    def category(self, state) -> str:
        got = self._cat_cache.get(state)
        if got is None:
            raw = self.stepper.category(state)
            got = raw if raw in self.handled else UNDETERMINED
            self._cat_cache[state] = got
        return got

    def binding_for(self, record: TraceEvent) -> ParameterInstance:
        wanted = self.event_params[record.name]
        pairs = [(p, o) for p, o in record.params if p in wanted]
        if not pairs:
            return BOT
        return ParameterInstance(pairs)

    def _fail(self, seq: int, exc: Exception) -> None:
        self.failed = SpecFailure(self.spec.name, seq, str(exc))

    # -- stepping pipeline -------------------------------------------------

    def preprocess(self, record: TraceEvent) -> Optional[ParameterInstance]:
        """Run the event's action against the spec store, once per event.

        Returns the event's binding restricted to declared parameters, or
        None when the action suppressed the event (or just failed): the
        spec then never sees it at all.
        """
        theta = self.binding_for(record)
        program = self.actions.get(record.name)
        if program is not None:
            try:
                proceed, store = eval_action(program, self.store, binding_of(theta))
            except ActionRuntimeError as exc:
                self._fail(record.seq, exc)
                return None
            self.store = store
            if not proceed:
                return None
        return theta

    def step_monitor(
        self,
        inst: ParameterInstance,
        mon: _Monitor,
        name: str,
        seq: int,
        source: Optional[tuple[str, int]] = None,
    ) -> None:
        self.stats.monitor_visits += 1
        if mon.tombstone or self.failed:
            return
        nxt, raw_cat = self.stepper.step(mon.state, name)
        mon.state = nxt
        # every landing in a handled state is an occurrence, loops included
        if raw_cat in self.handled:
            self._fire(inst, nxt, raw_cat, seq, source)
        if self.gc:
            self._maybe_collect(inst, mon)

    def _fire(
        self,
        inst: ParameterInstance,
        state,
        category: str,
        seq: int,
        source: Optional[tuple[str, int]],
    ) -> None:
        key = (inst, self.label(state))
        rec = self.reports.get(key)
        if rec is not None:
            rec.count += 1
            return
        rec = ViolationRecord(
            spec=self.spec.name,
            instance=inst,
            category=category,
            state=self.label(state),
            message=self.compiled.messages.get(category, ""),
            seq=seq,
            source=source,
        )
        self.reports[key] = rec
        self.report_order.append(rec)

    # -- creation ----------------------------------------------------------

    def _subset_instances(self, theta: ParameterInstance) -> Iterable[ParameterInstance]:
        names = sorted(theta.domain)
        for r in range(len(names)):
            for sub in itertools.combinations(names, r):
                yield ParameterInstance({n: theta[n] for n in sub}) if sub else BOT

    def _find_parent(self, theta: ParameterInstance) -> tuple[ParameterInstance, _Monitor]:
        """Most informative existing instance below theta.

        Candidates come from enumerating subsets of theta's domain, so the
        cost depends on the parameter count, not the table size. The maxima
        can be incomparable with diverged states once a trace leaves the
        well-formed shape (a stray event binding one object before the
        event that joins it to another); inheritance then prefers the
        largest domain, ties broken lexicographically. A deterministic
        pick, not a semantic claim.
        """
        best = BOT
        for cand in self._subset_instances(theta):
            if cand not in self.monitors:
                continue
            if len(cand.domain) > len(best.domain) or (
                len(cand.domain) == len(best.domain)
                and cand.sort_key() < best.sort_key()
            ):
                best = cand
        return best, self.monitors[best]

    def _create(self, theta: ParameterInstance, parent_mon: _Monitor) -> _Monitor:
        mon = _Monitor(parent_mon.state)
        if parent_mon.tombstone:
            # inherits a provably report-free state; stays collectible
            mon.tombstone = True
        self.monitors[theta] = mon
        if not mon.tombstone:
            self.live += 1
        created = self.stats.monitors_created
        created[self.spec.name] = created.get(self.spec.name, 0) + 1
        if self.uses_index:
            self._register_instance(theta)
        if self.gc and not mon.tombstone:
            self._maybe_collect(theta, mon)
        return mon

    def _register_instance(self, theta: ParameterInstance) -> None:
        for key in self._subset_instances(theta):
            bucket = self.superset_index.setdefault(key, [])
            bucket.append(theta)
        # strict supersets of the newcomer; impossible when it binds
        # every parameter, which keeps the common case constant-time
        if theta.domain != self.full_domain:
            bucket = self.superset_index.setdefault(theta, [])
            known = set(bucket)
            for other in self.monitors:
                if other not in known and strictly_less_informative(theta, other):
                    bucket.append(other)

    # -- garbage collection --------------------------------------------------

    def _collectible(self, inst: ParameterInstance, state) -> bool:
        family = self.coenable[self.label(state)]
        dead = self.dead
        for union in family:
            for p in union:
                obj = inst.get(p)
                if obj is not None and obj in dead:
                    break
            else:
                return False
        return True

    def _maybe_collect(self, inst: ParameterInstance, mon: _Monitor) -> None:
        if not mon.tombstone and self._collectible(inst, mon.state):
            mon.tombstone = True
            self.live -= 1
            self.stats.monitors_collected += 1

    def on_death(self, record: TraceDeath) -> None:
        if not self.gc:
            return
        self.dead.update(record.dead)
        for inst, mon in self.monitors.items():
            if not mon.tombstone:
                self._maybe_collect(inst, mon)

    # -- results -------------------------------------------------------------

    def verdicts(self) -> dict[tuple[str, ParameterInstance], str]:
        out = {}
        for inst, mon in self.monitors.items():
            if not inst:
                continue
            out[(self.spec.name, inst)] = self.category(mon.state)
        return out


class _OnlineRunner(_SpecRunner):
    """Algorithms B, C, C+ and D share one event loop."""

    def handle(self, record: TraceEvent) -> None:
        if self.failed:
            return
        theta = self.preprocess(record)
        if theta is None:
            return
        if self.algorithm == "B":
            self._handle_scan(theta, record.name, record.seq, record.source)
        else:
            self._handle_indexed(theta, record.name, record.seq, record.source)

    # algorithm B: combine against the full table
    def _handle_scan(self, theta: ParameterInstance, name: str, seq: int, source) -> None:
        table = self.monitors
        items_e = theta.items()
        dom_e = theta.domain
        to_step: list[ParameterInstance] = []
        fresh: dict[ParameterInstance, None] = {}
        scanned = 0
        for other in table:
            scanned += 1
            if other.domain == dom_e:
                if other.items() == items_e:
                    to_step.append(other)
                continue
            joined = combine(theta, other)
            if joined is None:
                continue
            if joined in table:
                if joined.domain == dom_e and joined.items() == items_e:
                    continue  # theta itself; queued by the same-domain branch
                to_step.append(joined)
            else:
                fresh[joined] = None
        if theta not in table:
            fresh[theta] = None
        self.stats.bindings_scanned += scanned
        self.stats.scanned_per_event.append(scanned)

        # inheritance is resolved against the pre-event table, before any
        # of this event's creations land
        ordered = sorted(fresh, key=lambda i: (len(i.domain), i.sort_key()))
        plans = [(inst, self._find_parent(inst)[1]) for inst in ordered]

        seen: set[ParameterInstance] = set()
        for inst in to_step:
            if inst in seen:
                continue
            seen.add(inst)
            self.step_monitor(inst, table[inst], name, seq, source)
        for inst, parent_mon in plans:
            mon = self._create(inst, parent_mon)
            self.step_monitor(inst, mon, name, seq, source)

    # algorithms C, C+, D: own binding plus superset index
    def _handle_indexed(self, theta: ParameterInstance, name: str, seq: int, source) -> None:
        table = self.monitors
        visits = 0
        mon = table.get(theta)
        if mon is None and theta:
            if self.algorithm == "C" or name in self.creation:
                parent_inst, parent_mon = self._find_parent(theta)
                gate = self.enable
                if gate is None or parent_inst.domain in gate.get(name, frozenset()):
                    mon = self._create(theta, parent_mon)
        if mon is not None:
            self.step_monitor(theta, mon, name, seq, source)
            visits += 1
        for other in self.superset_index.get(theta, ()):
            self.step_monitor(other, table[other], name, seq, source)
            visits += 1
        self.stats.visits_per_event.append(visits)

    def finish(self) -> None:
        pass


class _OfflineRunner(_SpecRunner):
    """Algorithm A: build all slices, then replay each one.

    max_slice keeps only that many newest events per slice; a memory
    valve for long traces, at the price of approximate verdicts.
    """

    def __init__(self, compiled, algorithm, gc, stats, max_slice=None):
        super().__init__(compiled, algorithm, gc, stats)
        if max_slice is not None and max_slice < 1:
            raise EngineConfigError("max_slice must be positive")
        self.max_slice = max_slice
        self.truncated = False
        self.slices: dict[ParameterInstance, list[ParametricEvent]] = {BOT: []}

    def _cap(self, events: list[ParametricEvent]) -> list[ParametricEvent]:
        cap = self.max_slice
        if cap is not None and len(events) > cap:
            self.truncated = True
            del events[: len(events) - cap]
        return events

    def handle(self, record: TraceEvent) -> None:
        if self.failed:
            return
        theta = self.preprocess(record)
        if theta is None:
            return
        event = ParametricEvent(
            name=record.name, instance=theta, source=record.source, seq=record.seq
        )
        slices = self.slices
        items_e = theta.items()
        dom_e = theta.domain
        extend: list[ParameterInstance] = []
        fresh: dict[ParameterInstance, None] = {}
        scanned = 0
        for other in slices:
            scanned += 1
            if other.domain == dom_e:
                if other.items() == items_e:
                    extend.append(other)
                continue
            joined = combine(theta, other)
            if joined is None:
                continue
            if joined in slices:
                if joined.domain == dom_e and joined.items() == items_e:
                    continue
                extend.append(joined)
            else:
                fresh[joined] = None
        if theta not in slices:
            fresh[theta] = None
        self.stats.bindings_scanned += scanned
        self.stats.scanned_per_event.append(scanned)

        # new slices copy their parent as it stood before this event;
        # parents are only ever pre-event bindings (extends land after)
        pre_keys = None
        additions: list[tuple[ParameterInstance, list[ParametricEvent]]] = []
        for inst in sorted(fresh, key=lambda i: (len(i.domain), i.sort_key())):
            if pre_keys is None:
                pre_keys = list(slices)
            best = BOT
            for cand in pre_keys:
                if less_informative(cand, inst) and len(cand.domain) > len(best.domain):
                    best = cand
            additions.append((inst, self._cap(slices[best] + [event])))
        seen: set[ParameterInstance] = set()
        for inst in extend:
            if inst not in seen:
                seen.add(inst)
                slices[inst].append(event)
                self._cap(slices[inst])
        for inst, events in additions:
            slices[inst] = events

    def on_death(self, record: TraceDeath) -> None:
        pass  # everything is replayed at the end; nothing to collect early

    def finish(self) -> None:
        if self.failed:
            return
        initial = self.stepper.initial()
        created = self.stats.monitors_created
        for inst, events in self.slices.items():
            mon = _Monitor(initial)
            self.monitors[inst] = mon
            if inst:
                created[self.spec.name] = created.get(self.spec.name, 0) + 1
                self.live += 1
            for ev in events:
                self.step_monitor(inst, mon, ev.name, ev.seq, ev.source)
                if self.failed:
                    return


class Engine:
    """Feeds trace records to one runner per spec.

    Online algorithms report as records arrive; algorithm A buffers and
    reports at finish(). run() drives either kind end to end.
    """

    def __init__(
        self,
        compiled: Iterable[CompiledSpec],
        algorithm: str = "C+",
        gc: bool = False,
        max_slice: Optional[int] = None,
    ):
        self.algorithm = normalize_algorithm(algorithm)
        self.gc = gc
        self.stats = EngineStats()
        self.runners: list[_SpecRunner] = []
        names = set()
        for comp in compiled:
            if comp.name in names:
                raise EngineConfigError(f"duplicate spec name {comp.name!r}")
            names.add(comp.name)
            if self.algorithm == "A":
                runner = _OfflineRunner(comp, self.algorithm, gc, self.stats, max_slice)
            else:
                runner = _OnlineRunner(comp, self.algorithm, gc, self.stats)
            self.runners.append(runner)
        if not self.runners:
            raise EngineConfigError("no specs to monitor")
        self._finished = False

    def _update_peak(self) -> None:
        total = sum(r.live for r in self.runners)
        if total > self.stats.peak_live_monitors:
            self.stats.peak_live_monitors = total

    def feed(self, record) -> None:
        if isinstance(record, TraceMeta):
            return
        if isinstance(record, TraceDeath):
            self.stats.deaths_seen += 1
            for runner in self.runners:
                runner.on_death(record)
            return
        if isinstance(record, TraceEvent):
            self.stats.events_seen += 1
            hit = False
            for runner in self.runners:
                if record.name in runner.compiled.alphabet:
                    self.stats.events_dispatched += 1
                    runner.handle(record)
                    hit = True
            if hit:
                self._update_peak()
            return
        raise EngineInvariantError(f"unknown record {record!r}")

    def finish(self) -> EngineResult:
        if self._finished:
            raise EngineInvariantError("finish() called twice")
        self._finished = True
        for runner in self.runners:
            runner.finish()
        self._update_peak()
        reports: list[ViolationRecord] = []
        verdicts: dict[tuple[str, ParameterInstance], str] = {}
        failures: list[SpecFailure] = []
        for runner in self.runners:
            reports.extend(runner.report_order)
            verdicts.update(runner.verdicts())
            if runner.failed:
                failures.append(runner.failed)
        reports.sort(key=lambda r: (r.seq, r.spec, r.instance.sort_key()))
        return EngineResult(reports=reports, verdicts=verdicts, stats=self.stats, failures=failures)

    def run(self, records: Iterable) -> EngineResult:
        for record in records:
            self.feed(record)
        return self.finish()


def run_trace(
    compiled: Iterable[CompiledSpec],
    records: Iterable,
    algorithm: str = "C+",
    gc: bool = False,
    max_slice: Optional[int] = None,
) -> EngineResult:
    return Engine(compiled, algorithm=algorithm, gc=gc, max_slice=max_slice).run(records)
