"""Deterministic seeded simulation of skewed components and their monitors.

The engine works in two phases.  Phase one lays out the complete message
schedule from the scenario alone: component events are stamped with their
local clocks, same-instant observations are grouped into single messages,
heartbeats are interleaved, and every channel gets FIFO delivery times
(sampled, fixed or scripted).  Phase two drives each monitor through its
delivery sequence; since monitors never send, the phases are independent
and monitors can be processed sequentially or on separate threads with
identical results.

All times are integer ticks.  Local clocks are global time plus a
piecewise-constant signed offset bounded by the skew; profiles may step
down by at most one tick so that local clocks never regress.
"""
from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Optional, Sequence

from . import automaton as am
from . import jsonio
from .errors import AssumptionError, DtmonError, ValidationError
from .monitor import Monitor, UpdateRecord
from .timebase import (
    T0,
    Action,
    Event,
    TimedWord,
    Timestamp,
    tensor_all,
)


@dataclass(frozen=True)
class SkewStep:
    at: Timestamp          # global time the offset takes effect
    offset: Timestamp      # signed offset in ticks


@dataclass(frozen=True)
class ComponentPlan:
    name: str
    index: int
    events: tuple[Event, ...]          # true global dates, strictly increasing
    profile: tuple[SkewStep, ...]      # first step at global time 0


@dataclass(frozen=True)
class DelayModel:
    kind: str                                   # "fixed" | "uniform" | "scripted"
    value: Timestamp = T0                       # fixed delay
    upper: Optional[Timestamp] = None           # uniform upper bound
    schedule: Mapping[tuple[int, int], tuple[Timestamp, ...]] = field(default_factory=dict)


@dataclass(frozen=True)
class Scenario:
    resolution: int
    skew: Timestamp
    horizon: Timestamp
    seed: int
    components: tuple[ComponentPlan, ...]
    delays: DelayModel
    heartbeat_period: Optional[Timestamp] = None  # None = default, 0 = disabled

    def period(self) -> Optional[Timestamp]:
        if self.heartbeat_period is not None:
            return self.heartbeat_period if self.heartbeat_period > T0 else None
        return Timestamp(max(1, self.skew.ticks // 2))


@dataclass(frozen=True)
class Message:
    source: int
    dest: int
    seq: int
    timestamp: Timestamp       # sender-local
    actions: tuple[str, ...]   # empty = heartbeat
    sent: Timestamp            # global send time


@dataclass(frozen=True)
class Delivery:
    message: Message
    delivered: Timestamp       # global delivery time


@dataclass
class SimTrace:
    scenario_hash: str
    resolution: int
    skew: Timestamp
    seed: int
    global_trace: TimedWord                    # true dates
    observation: TimedWord                     # local timestamps, merged
    deliveries: list[Delivery]
    monitors: dict[int, Monitor]
    updates: list[UpdateRecord]

    def verdicts(self) -> dict[int, str]:
        return {i: m.verdict.wire for i, m in sorted(self.monitors.items())}

    def verdict_records(self) -> list[dict]:
        return [u.to_json() for u in self.updates]

    def write(self, outdir) -> None:
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        head = jsonio.header_record(
            self.resolution, self.scenario_hash, seed=self.seed, skew=self.skew.ticks
        )
        jsonio.write_jsonl(
            out / "global_trace.jsonl",
            [head] + [jsonio.event_to_json(e) for e in self.global_trace.events],
        )
        jsonio.write_jsonl(
            out / "deliveries.jsonl",
            [head]
            + [
                {
                    "src": d.message.source,
                    "dst": d.message.dest,
                    "seq": d.message.seq,
                    "t": d.message.timestamp.ticks,
                    "actions": list(d.message.actions),
                    "sent": d.message.sent.ticks,
                    "delivered": d.delivered.ticks,
                }
                for d in self.deliveries
            ],
        )
        jsonio.write_jsonl(out / "verdicts.jsonl", [head] + self.verdict_records())


# ---------------------------------------------------------------------------
# Scenario loading and validation
# ---------------------------------------------------------------------------


def _ts_units(value, resolution: int) -> Timestamp:
    return Timestamp.from_units(value, resolution)


def load_scenario(doc: Mapping, ta: am.TimedAutomaton) -> Scenario:
    resolution = doc.get("resolution", ta.resolution)
    if resolution != ta.resolution:
        raise ValidationError(
            f"scenario resolution {resolution} differs from the property's {ta.resolution}"
        )
    skew = _ts_units(doc.get("skew", 0), resolution)
    horizon = _ts_units(doc.get("horizon", 0), resolution)
    seed = int(doc.get("seed", 0))
    rng = random.Random(seed)
    comps_doc = doc.get("components", [])
    if len(comps_doc) != len(ta.components):
        raise ValidationError(
            f"scenario must script all {len(ta.components)} components of the property"
        )
    plans: list[ComponentPlan] = []
    for idx, cdoc in enumerate(comps_doc, start=1):
        name = cdoc.get("name", ta.components[idx - 1])
        if name != ta.components[idx - 1]:
            raise ValidationError(
                f"scenario component {idx} is {name!r}, property expects "
                f"{ta.components[idx - 1]!r}"
            )
        events: list[Event] = []
        if "events" in cdoc:
            for action_name, date in cdoc["events"]:
                comp = ta.component_of(action_name)
                if comp != idx:
                    raise ValidationError(
                        f"action {action_name!r} does not belong to component {name!r}"
                    )
                events.append(Event(Action(action_name, idx), _ts_units(date, resolution)))
        elif "generator" in cdoc:
            events = _generate_events(cdoc["generator"], ta, idx, horizon, rng)
        profile_doc = cdoc.get("skew_profile", [[0, 0]])
        profile = tuple(
            SkewStep(_ts_units(at, resolution), _ts_units(off, resolution))
            for at, off in profile_doc
        )
        plans.append(ComponentPlan(name, idx, tuple(events), profile))
    delays = _load_delays(doc.get("delays", {"model": "fixed", "value": 0}), resolution, ta)
    period = None
    if "heartbeat_period" in doc:
        raw = doc["heartbeat_period"]
        period = Timestamp(0) if raw is None else _ts_units(raw, resolution)
    scenario = Scenario(
        resolution, skew, horizon, seed, tuple(plans), delays, period
    )
    validate_scenario(scenario)
    return scenario


def _generate_events(
    gen: Mapping, ta: am.TimedAutomaton, index: int, horizon: Timestamp, rng: random.Random
) -> list[Event]:
    count = int(gen.get("count", 0))
    lo = int(gen.get("min_gap_ticks", 1))
    hi = int(gen.get("max_gap_ticks", max(lo, horizon.ticks // max(count, 1) or 1)))
    actions = [a for a, c in ta.actions.items() if c == index]
    if not actions:
        return []
    events = []
    now = 0
    for _ in range(count):
        now += rng.randint(lo, max(lo, hi))
        if now > horizon.ticks:
            break
        events.append(Event(Action(rng.choice(actions), index), Timestamp(now)))
    return events


def _load_delays(doc: Mapping, resolution: int, ta: am.TimedAutomaton) -> DelayModel:
    kind = doc.get("model", "fixed")
    if kind == "fixed":
        return DelayModel("fixed", value=_ts_units(doc.get("value", 0), resolution))
    if kind == "uniform":
        upper = doc.get("max")
        return DelayModel(
            "uniform", upper=None if upper is None else _ts_units(upper, resolution)
        )
    if kind == "scripted":
        name_to_idx = {n: i + 1 for i, n in enumerate(ta.components)}
        schedule: dict[tuple[int, int], tuple[Timestamp, ...]] = {}
        for entry in doc.get("per_channel", []):
            src = name_to_idx.get(entry["src"], entry["src"])
            dst = name_to_idx.get(entry["dst"], entry["dst"])
            schedule[(src, dst)] = tuple(
                _ts_units(v, resolution) for v in entry["deliveries"]
            )
        return DelayModel("scripted", schedule=schedule)
    raise ValidationError(f"unknown delay model {kind!r}")


def local_clock(plan: ComponentPlan, g: Timestamp) -> Timestamp:
    offset = T0
    for step in plan.profile:
        if step.at <= g:
            offset = step.offset
        else:
            break
    local = g + offset
    # Clocks start at zero: a clock running behind reads 0 until it catches up.
    return local if local > T0 else T0


def validate_scenario(scenario: Scenario) -> None:
    """Check the named system assumptions that are decidable statically."""
    if scenario.skew < T0:
        raise ValidationError("skew must be non-negative")
    if scenario.horizon <= T0:
        raise ValidationError("horizon must be positive")
    for plan in scenario.components:
        if not plan.profile or plan.profile[0].at != T0:
            raise ValidationError(
                f"component {plan.name!r}: skew profile must start at time 0"
            )
        prev_at = None
        prev_off = None
        for step in plan.profile:
            if abs(step.offset.ticks) > scenario.skew.ticks:
                raise AssumptionError(
                    "time-approximation",
                    f"component {plan.name!r} offset {step.offset} exceeds the "
                    f"skew bound {scenario.skew}",
                )
            if prev_at is not None:
                if step.at <= prev_at:
                    raise ValidationError(
                        f"component {plan.name!r}: profile steps must be increasing"
                    )
                if step.offset.ticks < prev_off.ticks - 1:
                    raise AssumptionError(
                        "clock-monotonicity",
                        f"component {plan.name!r} offset drops by more than one "
                        f"tick at {step.at}; its local clock would regress",
                    )
            prev_at, prev_off = step.at, step.offset
        prev_date = None
        for e in plan.events:
            if e.date > scenario.horizon:
                raise ValidationError(
                    f"component {plan.name!r} schedules an event past the horizon"
                )
            if prev_date is not None and e.date <= prev_date:
                raise AssumptionError(
                    "per-component-order",
                    f"component {plan.name!r} events must have strictly "
                    f"increasing global dates",
                )
            prev_date = e.date
    if scenario.delays.kind == "scripted":
        for channel, times in scenario.delays.schedule.items():
            prev = None
            for t in times:
                if prev is not None and t < prev:
                    raise AssumptionError(
                        "fifo-order",
                        f"scripted deliveries on channel {channel} regress",
                    )
                prev = t


# ---------------------------------------------------------------------------
# Schedule construction
# ---------------------------------------------------------------------------


def _event_groups(plan: ComponentPlan) -> list[tuple[Timestamp, tuple[str, ...], Timestamp]]:
    """Group consecutive events sharing a local timestamp.

    Returns (local timestamp, actions, global send time = last member's date).
    """
    groups: list[tuple[Timestamp, list[str], Timestamp]] = []
    for e in plan.events:
        ts_local = local_clock(plan, e.date)
        if groups and groups[-1][0] == ts_local:
            groups[-1][1].append(e.action.name)
            groups[-1] = (ts_local, groups[-1][1], e.date)
        else:
            groups.append((ts_local, [e.action.name], e.date))
    return [(ts, tuple(actions), sent) for ts, actions, sent in groups]


def build_deliveries(scenario: Scenario, rng: random.Random) -> list[Delivery]:
    """Lay out every channel's FIFO delivery sequence for the whole run."""
    n = len(scenario.components)
    period = scenario.period()
    outgoing: dict[int, list[tuple[Timestamp, Timestamp, tuple[str, ...]]]] = {}
    for plan in scenario.components:
        groups = _event_groups(plan)
        event_ts = {ts for ts, _actions, _sent in groups}
        sends: list[tuple[Timestamp, Timestamp, tuple[str, ...]]] = [
            (sent, ts, actions) for ts, actions, sent in groups
        ]
        if period is not None:
            g = period
            while g <= scenario.horizon:
                ts_local = local_clock(plan, g)
                collides = ts_local in event_ts or any(sent == g for sent, _, _ in sends)
                if not collides:
                    sends.append((g, ts_local, ()))
                g = g + period
        sends.sort(key=lambda s: (s[0].ticks, 0 if s[2] else 1))
        outgoing[plan.index] = sends
    deliveries: list[Delivery] = []
    for src in range(1, n + 1):
        for dst in range(1, n + 1):
            sends = outgoing[src]
            scripted = scenario.delays.schedule.get((src, dst)) if (
                scenario.delays.kind == "scripted"
            ) else None
            if scripted is not None and len(scripted) < len(
                [s for s in sends if s[2]]
            ):
                raise ValidationError(
                    f"scripted schedule on channel {src}->{dst} is shorter than "
                    f"the message sequence"
                )
            prev = T0
            seq = 0
            event_i = 0
            for sent, ts_local, actions in sends:
                seq += 1
                if src == dst:
                    delivered = sent
                elif scripted is not None:
                    if actions:
                        delivered = scripted[event_i]
                        event_i += 1
                        if delivered < sent:
                            raise AssumptionError(
                                "fifo-order",
                                f"channel {src}->{dst}: delivery before send",
                            )
                    else:
                        delivered = sent  # heartbeats default to instant
                elif scenario.delays.kind == "fixed":
                    delivered = sent + scenario.delays.value
                else:
                    upper = scenario.delays.upper
                    bound = (
                        upper.ticks if upper is not None else 5 * scenario.skew.ticks
                    )
                    delivered = sent + Timestamp(rng.randint(0, max(0, bound)))
                if delivered < prev:
                    delivered = prev  # FIFO: later sends never overtake
                prev = delivered
                deliveries.append(
                    Delivery(Message(src, dst, seq, ts_local, actions, sent), delivered)
                )
    deliveries.sort(
        key=lambda d: (
            d.delivered.ticks,
            d.message.dest,
            d.message.source,
            d.message.seq,
        )
    )
    return deliveries


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------


def _check_fifo(deliveries: Sequence[Delivery]) -> None:
    last: dict[tuple[int, int], tuple[int, Timestamp]] = {}
    for d in deliveries:
        key = (d.message.source, d.message.dest)
        if key in last:
            seq, when = last[key]
            if d.message.seq <= seq or d.delivered < when:
                raise AssumptionError(
                    "fifo-order", f"channel {key}: delivery order differs from send order"
                )
        last[key] = (d.message.seq, d.delivered)


def run(
    scenario: Scenario,
    ta: am.TimedAutomaton,
    props: am.PropertySets,
    threads: int = 1,
    decomp_cap: Optional[int] = None,
) -> SimTrace:
    """Simulate the scenario and drive one monitor per component."""
    rng = random.Random(scenario.seed)
    deliveries = [
        d for d in build_deliveries(scenario, rng) if d.delivered <= scenario.horizon
    ]
    _check_fifo(deliveries)
    plans = {plan.index: plan for plan in scenario.components}
    kwargs = {} if decomp_cap is None else {"decomp_cap": decomp_cap}
    monitors = {
        i: Monitor(i, ta, props, scenario.skew, **kwargs)
        for i in range(1, len(scenario.components) + 1)
    }
    per_dest: dict[int, list[Delivery]] = {i: [] for i in monitors}
    for d in deliveries:
        per_dest[d.message.dest].append(d)

    def drive(dest: int) -> None:
        m = monitors[dest]
        plan = plans[dest]
        for d in per_dest[dest]:
            local_now = local_clock(plan, d.delivered)
            m.on_receive(
                d.message.source, d.message.timestamp, d.message.actions, local_now
            )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(drive, sorted(per_dest)))
    else:
        for dest in sorted(per_dest):
            drive(dest)

    global_events = sorted(
        (e for plan in scenario.components for e in plan.events),
        key=lambda e: (e.date.ticks, e.action.component),
    )
    observed = tensor_all(
        [
            TimedWord(
                tuple(
                    Event(e.action, local_clock(plan, e.date)) for e in plan.events
                )
            )
            for plan in scenario.components
        ]
    )
    updates = sorted(
        (u for m in monitors.values() for u in m.updates),
        key=lambda u: (u.local_time.ticks, u.monitor, u.oldest_known.ticks),
    )
    scenario_hash = jsonio.content_hash(scenario_fingerprint(scenario))
    return SimTrace(
        scenario_hash,
        scenario.resolution,
        scenario.skew,
        scenario.seed,
        TimedWord(tuple(global_events)),
        observed,
        deliveries,
        monitors,
        updates,
    )


def run_until(
    scenario: Scenario,
    ta: am.TimedAutomaton,
    props: am.PropertySets,
    monitor_id: int,
    local_until: Timestamp,
    decomp_cap: Optional[int] = None,
) -> SimTrace:
    """Drive a single monitor only through deliveries it would have
    processed by the given local time (used for state inspection)."""
    rng = random.Random(scenario.seed)
    deliveries = [
        d for d in build_deliveries(scenario, rng) if d.delivered <= scenario.horizon
    ]
    _check_fifo(deliveries)
    plans = {plan.index: plan for plan in scenario.components}
    if monitor_id not in plans:
        raise ValidationError(f"no monitor with index {monitor_id}")
    kwargs = {} if decomp_cap is None else {"decomp_cap": decomp_cap}
    monitor = Monitor(monitor_id, ta, props, scenario.skew, **kwargs)
    plan = plans[monitor_id]
    used: list[Delivery] = []
    for d in deliveries:
        if d.message.dest != monitor_id:
            continue
        local_now = local_clock(plan, d.delivered)
        if local_now > local_until:
            break
        monitor.on_receive(
            d.message.source, d.message.timestamp, d.message.actions, local_now
        )
        used.append(d)
    global_events = sorted(
        (e for plan2 in scenario.components for e in plan2.events),
        key=lambda e: (e.date.ticks, e.action.component),
    )
    return SimTrace(
        jsonio.content_hash(scenario_fingerprint(scenario)),
        scenario.resolution,
        scenario.skew,
        scenario.seed,
        TimedWord(tuple(global_events)),
        TimedWord(()),
        used,
        {monitor_id: monitor},
        list(monitor.updates),
    )


def scenario_fingerprint(scenario: Scenario) -> dict:
    return {
        "resolution": scenario.resolution,
        "skew": scenario.skew.ticks,
        "horizon": scenario.horizon.ticks,
        "seed": scenario.seed,
        "heartbeat": None if scenario.period() is None else scenario.period().ticks,
        "delays": {
            "kind": scenario.delays.kind,
            "value": scenario.delays.value.ticks,
            "upper": None if scenario.delays.upper is None else scenario.delays.upper.ticks,
            "schedule": {
                f"{s}->{d}": [t.ticks for t in times]
                for (s, d), times in sorted(scenario.delays.schedule.items())
            },
        },
        "components": [
            {
                "name": plan.name,
                "events": [[e.action.name, e.date.ticks] for e in plan.events],
                "profile": [[s.at.ticks, s.offset.ticks] for s in plan.profile],
            }
            for plan in scenario.components
        ],
    }


def replay(doc: Mapping, ta: am.TimedAutomaton, props: am.PropertySets,
           threads: int = 1) -> SimTrace:
    """Offline reconstruction: a recorded global trace plus explicit skew
    profiles and per-channel delivery schedules."""
    resolution = doc.get("resolution", ta.resolution)
    trace = doc.get("trace", [])
    per_comp: dict[int, list] = {i: [] for i in range(1, len(ta.components) + 1)}
    for action_name, date in trace:
        comp = ta.component_of(action_name)
        per_comp[comp].append([action_name, date])
    components = []
    profiles = doc.get("skew_profiles", {})
    for i, name in enumerate(ta.components, start=1):
        components.append(
            {
                "name": name,
                "events": per_comp[i],
                "skew_profile": profiles.get(name, [[0, 0]]),
            }
        )
    scenario_doc = {
        "resolution": resolution,
        "skew": doc.get("skew", 0),
        "horizon": doc.get("horizon", 0),
        "seed": int(doc.get("seed", 0)),
        "components": components,
        # fully scripted by default: no heartbeats unless the document asks
        "heartbeat_period": doc.get("heartbeat_period"),
        "delays": {
            "model": "scripted",
            "per_channel": doc.get("delivery_schedule", []),
        },
    }
    scenario = load_scenario(scenario_doc, ta)
    return run(scenario, ta, props, threads=threads)
