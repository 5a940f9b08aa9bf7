"""Per-monitor state machine: frontier bookkeeping, the branch table of
(configurations; pending events) hypotheses, and the six-valued verdict.

A monitor receives timestamped event groups from every component (its own
included) over FIFO channels.  The oldest last-known timestamp across all
sources, minus the skew bound, is the safe cutoff: no event dated below it
can still arrive.  Whenever the cutoff advances, every branch's pending
events are split into the part that may already have happened (in every
admissible order) and the part that may still be ahead; configurations
advance through the automaton accordingly, and the verdict is refreshed
from the state slice at the cutoff.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import automaton as am
from . import zones as zn
from .errors import (
    AssumptionError,
    DtmonError,
    FifoViolationError,
    ValidationError,
)
from .timebase import (
    DEFAULT_ENUM_CAP,
    T0,
    Action,
    ApproxEvent,
    ApproxTimedWord,
    EMPTY_ATW,
    Event,
    TimeInterval,
    TimedWord,
    Timestamp,
    decompose,
    tensor_all,
)


class Verdict(enum.Enum):
    PENDING = "Pending"
    POSSIBLY_TRUE = "PTrue"
    POSSIBLY_FALSE = "PFalse"
    TRUE = "True"
    FALSE = "False"
    INCONCLUSIVE = "Inconc"

    @property
    def wire(self) -> str:
        return self.value

    @property
    def is_definitive(self) -> bool:
        return self in (Verdict.TRUE, Verdict.FALSE, Verdict.INCONCLUSIVE)


def _closure() -> frozenset[tuple[Verdict, Verdict]]:
    edges = {
        (Verdict.PENDING, Verdict.POSSIBLY_TRUE),
        (Verdict.PENDING, Verdict.POSSIBLY_FALSE),
        (Verdict.POSSIBLY_TRUE, Verdict.TRUE),
        (Verdict.POSSIBLY_TRUE, Verdict.INCONCLUSIVE),
        (Verdict.POSSIBLY_FALSE, Verdict.FALSE),
        (Verdict.POSSIBLY_FALSE, Verdict.INCONCLUSIVE),
    }
    rel = {(v, v) for v in Verdict} | edges
    changed = True
    while changed:
        changed = False
        for a, b in list(rel):
            for c, d in list(rel):
                if b == c and (a, d) not in rel:
                    rel.add((a, d))
                    changed = True
    return frozenset(rel)


_LEQ = _closure()


def verdict_leq(a: Verdict, b: Verdict) -> bool:
    """The verdict preorder: transient verdicts may strengthen, definitive
    verdicts are maximal."""
    return (a, b) in _LEQ


def verdict_from_flags(flag_i: bool, flag_n: bool, flag_c: bool) -> Verdict:
    if flag_i and flag_n:
        return Verdict.INCONCLUSIVE
    if flag_i and not flag_c:
        return Verdict.TRUE
    if flag_n and not flag_c:
        return Verdict.FALSE
    if flag_i:
        return Verdict.POSSIBLY_TRUE
    if flag_n:
        return Verdict.POSSIBLY_FALSE
    return Verdict.PENDING


class SourceFrontier:
    """Last known local timestamp per source, ordered by ascending time.

    The oldest entry bounds how far monitoring may safely advance.
    """

    def __init__(self, sources: Sequence[int]):
        self._last: dict[int, Timestamp] = {j: T0 for j in sources}

    def last(self, source: int) -> Timestamp:
        return self._last[source]

    def update(self, source: int, timestamp: Timestamp) -> None:
        if source not in self._last:
            raise ValidationError(f"unknown source {source}")
        if timestamp < self._last[source]:
            raise FifoViolationError(
                f"timestamp from source {source} regressed: "
                f"{self._last[source]} then {timestamp}"
            )
        self._last[source] = timestamp

    def ordered(self) -> tuple[tuple[int, Timestamp], ...]:
        return tuple(sorted(self._last.items(), key=lambda jt: (jt[1].ticks, jt[0])))

    def oldest(self) -> Timestamp:
        return min(self._last.values())


@dataclass(frozen=True)
class Branch:
    """One hypothesis: configurations reached so far plus the events whose
    place relative to the cutoff is still undecided."""

    configs: am.ConfigSet
    pending: ApproxTimedWord


def add_events(branches: Sequence[Branch], new: ApproxTimedWord) -> list[Branch]:
    """Append newly collected events to every branch's pending word."""
    if new.is_empty:
        return list(branches)
    return [Branch(b.configs, b.pending.tensor(new)) for b in branches]


def _dedup(branches: list[Branch]) -> list[Branch]:
    """Drop duplicates: syntactic pending equality plus semantic config
    equality (mutual federation inclusion)."""
    groups: dict[tuple, list[Branch]] = {}
    out: list[Branch] = []
    for b in branches:
        key = (
            tuple((e.action, e.interval) for e in b.pending.events),
            b.configs.locations(),
        )
        bucket = groups.setdefault(key, [])
        if any(am.config_equal(b.configs, other.configs) for other in bucket):
            continue
        bucket.append(b)
        out.append(b)
    return out


def advance(
    ta: am.TimedAutomaton,
    branches: Sequence[Branch],
    cutoff: Timestamp,
    cap: int = DEFAULT_ENUM_CAP,
) -> list[Branch]:
    """Advance every branch to the new cutoff.

    Each pending word is decomposed at the cutoff; configurations are
    pushed through every admissible ordering of the part that may already
    have occurred, branches whose configurations die out are dropped, and
    the result is deduplicated.
    """
    out: list[Branch] = []
    for b in branches:
        for kept, remainder in decompose(b.pending, cutoff, cap):
            configs = am.after_ordered(ta, b.configs, kept)
            if configs.is_empty:
                continue
            out.append(Branch(configs, remainder))
    return _dedup(out)


def state_at(
    ta: am.TimedAutomaton, branches: Sequence[Branch], cutoff: Timestamp
) -> am.ConfigSet:
    """Union of every branch's configurations pinned to the cutoff date."""
    total = am.config_set(ta.dim_full, {})
    for b in branches:
        total = am.config_union(total, am.config_fix_abs(b.configs, ta.abs_index, cutoff))
    if total.is_empty:
        raise AssumptionError(
            "state-nonempty",
            "no configuration is compatible with the observations at the cutoff; "
            "input is corrupt or the skew bound was violated",
        )
    return total


def branches_from_scratch(
    ta: am.TimedAutomaton,
    collected: ApproxTimedWord,
    cutoff: Timestamp,
    cap: int = DEFAULT_ENUM_CAP,
) -> list[Branch]:
    """One-shot construction of the branch table from a full uncertain word."""
    init = am.config_up(am.initial_configs(ta))
    out = []
    for kept, remainder in decompose(collected, cutoff, cap):
        configs = am.after_ordered(ta, init, kept)
        if configs.is_empty:
            continue
        out.append(Branch(configs, remainder))
    return _dedup(out)


@dataclass(frozen=True)
class UpdateRecord:
    """One verdict timeline entry, emitted whenever the cutoff advances.

    ``snapshot`` records how many events per source had been collected at
    the update, so harnesses can reconstruct the exact knowledge the
    verdict was based on; it is not part of the wire format.
    """

    monitor: int
    local_time: Timestamp
    oldest_known: Timestamp
    cutoff: Timestamp
    verdict: Verdict
    definitive: bool
    snapshot: tuple[tuple[int, int], ...] = ()

    def to_json(self) -> dict:
        return {
            "monitor": self.monitor,
            "localTime": self.local_time.ticks,
            "tmin1": self.oldest_known.ticks,
            "verdict": self.verdict.wire,
            "definitive": self.definitive,
        }


class Monitor:
    """One monitor instance running the incremental algorithm.

    Messages must arrive per-source in send order (FIFO) with strictly
    increasing timestamps for event groups; heartbeats may repeat the last
    timestamp.  After a definitive verdict the monitor keeps validating
    incoming traffic but freezes its verdict state.
    """

    def __init__(
        self,
        monitor_id: int,
        ta: am.TimedAutomaton,
        props: am.PropertySets,
        skew: Timestamp,
        decomp_cap: int = DEFAULT_ENUM_CAP,
    ):
        if skew < T0:
            raise ValidationError("skew must be non-negative")
        if monitor_id < 1 or monitor_id > len(ta.components):
            raise ValidationError(f"monitor id {monitor_id} out of range")
        self.id = monitor_id
        self.ta = ta
        self.props = props
        self.skew = skew
        self.decomp_cap = decomp_cap
        self.frontier = SourceFrontier(range(1, len(ta.components) + 1))
        self._seen_message_from: set[int] = set()
        init = am.config_up(am.initial_configs(ta))
        self.branches: list[Branch] = [Branch(init, EMPTY_ATW)]
        self.oldest_processed = skew
        zeros = [0] * ta.dim_full
        self.flag_i = am.config_contains(props.inevitable, ta.initial, zeros)
        self.flag_n = am.config_contains(props.impossible, ta.initial, zeros)
        self.flag_c = not (self.flag_i or self.flag_n)
        self.verdict = Verdict.PENDING
        self.terminated = False
        self.local_time = T0
        self.collected: dict[int, list[Event]] = {
            j: [] for j in range(1, len(ta.components) + 1)
        }
        self.updates: list[UpdateRecord] = []

    # -- message intake ----------------------------------------------------

    def _validate(self, source: int, timestamp: Timestamp, actions: Sequence[str],
                  local_now: Timestamp) -> None:
        if source < 1 or source > len(self.ta.components):
            raise ValidationError(f"message from unknown source {source}")
        for a in actions:
            if self.ta.component_of(a) != source:
                raise ValidationError(
                    f"action {a!r} does not belong to component {source}"
                )
        if local_now < self.local_time:
            raise AssumptionError(
                "clock-monotonicity",
                f"monitor {self.id} local clock regressed: "
                f"{self.local_time} then {local_now}",
            )
        last = self.frontier.last(source)
        if timestamp < last:
            raise FifoViolationError(
                f"timestamp from source {source} regressed: {last} then {timestamp}"
            )
        # Event groups must carry strictly fresh timestamps once anything was
        # received from the source: same-instant events travel in one message.
        if actions and timestamp == last and source in self._seen_message_from:
            raise AssumptionError(
                "message-grouping",
                f"source {source} sent events at timestamp {timestamp} after "
                f"already claiming knowledge through it",
            )

    def on_receive(
        self,
        source: int,
        timestamp: Timestamp,
        actions: Sequence[str],
        local_now: Optional[Timestamp] = None,
    ) -> Optional[UpdateRecord]:
        """Process one message (an event group, or a heartbeat when the
        action list is empty); returns a timeline record when the cutoff
        advanced."""
        if local_now is None:
            local_now = timestamp if source == self.id else self.local_time
        self._validate(source, timestamp, actions, local_now)
        self.local_time = local_now
        events = ApproxTimedWord(
            tuple(
                ApproxEvent(
                    Action(a, source),
                    self._widened(timestamp),
                )
                for a in actions
            )
        )
        for a in actions:
            self.collected[source].append(Event(Action(a, source), timestamp))
        if not self.terminated and not events.is_empty:
            self.branches = add_events(self.branches, events)
        self.frontier.update(source, timestamp)
        self._seen_message_from.add(source)
        if self.terminated:
            return None
        oldest = self.frontier.oldest()
        if oldest <= self.oldest_processed:
            return None
        return self._advance_to(oldest)

    def _widened(self, timestamp: Timestamp) -> TimeInterval:
        lower = timestamp - self.skew
        if lower < T0:
            lower = T0
        return TimeInterval.closed(lower, timestamp + self.skew)

    def _advance_to(self, oldest: Timestamp) -> UpdateRecord:
        self.oldest_processed = oldest
        cutoff = oldest - self.skew
        self.branches = advance(self.ta, self.branches, cutoff, self.decomp_cap)
        state = state_at(self.ta, self.branches, cutoff)
        if not self.flag_i:
            self.flag_i = am.intersects_inevitable(state, self.props)
        if not self.flag_n:
            self.flag_n = am.intersects_impossible(state, self.props)
        if self.flag_c:
            self.flag_c = am.intersects_undecided(state, self.props)
        new_verdict = verdict_from_flags(self.flag_i, self.flag_n, self.flag_c)
        if not verdict_leq(self.verdict, new_verdict):
            raise DtmonError(
                f"verdict regressed from {self.verdict} to {new_verdict}"
            )
        self.verdict = new_verdict
        record = UpdateRecord(
            self.id, self.local_time, oldest, cutoff, self.verdict,
            self.verdict.is_definitive,
            tuple((j, len(self.collected[j])) for j in sorted(self.collected)),
        )
        self.updates.append(record)
        if self.verdict.is_definitive:
            self.terminated = True
        return record

    # -- inspection ---------------------------------------------------------

    def collected_word(self) -> TimedWord:
        """Everything collected so far, merged across sources by timestamp."""
        return tensor_all([TimedWord(tuple(evs)) for evs in self.collected.values()])

    def collected_word_at(self, record: UpdateRecord) -> TimedWord:
        """The knowledge the monitor held when it emitted ``record``."""
        counts = dict(record.snapshot)
        return tensor_all(
            [
                TimedWord(tuple(evs[: counts.get(j, 0)]))
                for j, evs in self.collected.items()
            ]
        )

    def jtmin(self) -> tuple[tuple[int, Timestamp], ...]:
        return self.frontier.ordered()
