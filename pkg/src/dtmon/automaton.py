"""Deterministic complete timed automata and their symbolic semantics.

A loaded automaton works over clock indices ``1..k`` (index 0 is the
constant zero).  Monitor-side configuration sets append one extra
absolute-date clock at index ``k+1``; it participates in delay closure but
is never reset, so a configuration is a (location, clock values, date)
triple encoded symbolically.

Outcome sets are precomputed per property: the configurations from which
acceptance is inevitable (every infinite continuation eventually stays in
the accepting locations) and those for which acceptance is impossible
(never visited and can never visit them).  Both are computed exactly with
zone fixpoints: a backward reachability least fixpoint for the impossible
set, and a greatest fixpoint of controllable-avoidance for the inevitable
one.  Widening keeps the iterates finitely representable; applied to
region-closed sets it does not change them, so the fixpoints are exact for
automata whose guards only compare single clocks against constants.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from . import zones as zn
from .errors import (
    AssumptionError,
    DtmonError,
    ResourceCapError,
    UnsupportedModeError,
    ValidationError,
)
from .timebase import (
    T0,
    ApproxEvent,
    ApproxTimedWord,
    TimeInterval,
    TimedWord,
    Timestamp,
)

DEFAULT_FIXPOINT_CAP = 100_000

_OPS = {"<", "<=", "=", "==", ">=", ">"}

#: internal guard atom: (i, j, bound) meaning x_i - x_j bounded
GuardAtom = tuple[int, int, zn.Bound]


@dataclass(frozen=True)
class Transition:
    source: str
    target: str
    action: str
    guard: tuple[GuardAtom, ...]
    resets: tuple[int, ...]  # clock indices, sorted


class TimedAutomaton:
    """A validated deterministic and complete timed automaton."""

    def __init__(
        self,
        locations: Sequence[str],
        initial: str,
        clocks: Sequence[str],
        components: Sequence[str],
        actions: Mapping[str, int],
        transitions: Sequence[Transition],
        final: Iterable[str],
        resolution: int,
    ):
        self.locations = tuple(locations)
        self.initial = initial
        self.clocks = tuple(clocks)
        self.components = tuple(components)
        self.actions = dict(actions)
        self.transitions = tuple(transitions)
        self.final = frozenset(final)
        self.resolution = resolution
        self.clock_index = {c: i + 1 for i, c in enumerate(self.clocks)}
        self.dim_clocks = 1 + len(self.clocks)
        self.abs_index = self.dim_clocks
        self.dim_full = self.dim_clocks + 1
        self._by_source_action: dict[tuple[str, str], list[Transition]] = {}
        for t in self.transitions:
            self._by_source_action.setdefault((t.source, t.action), []).append(t)
        self._guard_cache: dict[tuple[Transition, int], zn.Dbm] = {}

    def outgoing(self, location: str, action: str) -> list[Transition]:
        return self._by_source_action.get((location, action), [])

    def component_of(self, action: str) -> int:
        try:
            return self.actions[action]
        except KeyError:
            raise ValidationError(f"unknown action {action!r}") from None

    def guard_zone(self, t: Transition, dim: int) -> zn.Dbm:
        key = (t, dim)
        zone = self._guard_cache.get(key)
        if zone is None:
            zone = zn.from_constraints(dim, t.guard)
            self._guard_cache[key] = zone
        return zone

    def max_consts(self) -> list[Optional[int]]:
        """Per-index widening ceilings (index 0 unused)."""
        out: list[Optional[int]] = [0] * self.dim_clocks
        for t in self.transitions:
            for i, j, b in t.guard:
                if b.is_infinite:
                    continue
                mag = abs(b.value)
                for idx in (i, j):
                    if idx != 0 and out[idx] < mag:
                        out[idx] = mag
        return out

    def has_difference_guards(self) -> bool:
        return any(i != 0 and j != 0 for t in self.transitions for i, j, _ in t.guard)


@dataclass(frozen=True)
class ConfigSet:
    """Map from location to a federation over clocks plus the date clock."""

    dim: int
    parts: tuple[tuple[str, zn.Federation], ...]

    @property
    def is_empty(self) -> bool:
        return not self.parts

    def get(self, location: str) -> Optional[zn.Federation]:
        for loc, fed in self.parts:
            if loc == location:
                return fed
        return None

    def locations(self) -> tuple[str, ...]:
        return tuple(loc for loc, _ in self.parts)

    def __iter__(self):
        return iter(self.parts)


def config_set(dim: int, mapping: Mapping[str, zn.Federation]) -> ConfigSet:
    parts = tuple(
        (loc, mapping[loc]) for loc in sorted(mapping) if not mapping[loc].is_empty
    )
    return ConfigSet(dim, parts)


def config_union(a: ConfigSet, b: ConfigSet) -> ConfigSet:
    if a.dim != b.dim:
        raise ValidationError("dimension mismatch")
    merged: dict[str, zn.Federation] = {loc: fed for loc, fed in a.parts}
    for loc, fed in b.parts:
        merged[loc] = zn.fed_union(merged[loc], fed) if loc in merged else fed
    return config_set(a.dim, merged)


def config_equal(a: ConfigSet, b: ConfigSet) -> bool:
    if a.dim != b.dim or a.locations() != b.locations():
        return False
    return all(
        zn.fed_equal(fed, b.get(loc))  # type: ignore[arg-type]
        for loc, fed in a.parts
    )


def config_up(s: ConfigSet) -> ConfigSet:
    return config_set(s.dim, {loc: zn.fed_up(fed) for loc, fed in s.parts})


def config_fix_abs(s: ConfigSet, abs_index: int, value: Timestamp) -> ConfigSet:
    return config_set(
        s.dim, {loc: zn.fed_fix_clock(fed, abs_index, value.ticks) for loc, fed in s.parts}
    )


def config_contains(s: ConfigSet, location: str, values: Sequence[Fraction]) -> bool:
    fed = s.get(location)
    return fed is not None and zn.fed_contains_point(fed, values)


# ---------------------------------------------------------------------------
# Document loading and validation
# ---------------------------------------------------------------------------


def _guard_atoms(
    entries: Sequence[Mapping], clock_index: Mapping[str, int], resolution: int
) -> tuple[GuardAtom, ...]:
    atoms: list[GuardAtom] = []
    for raw in entries:
        lhs = raw.get("lhs")
        rhs = raw.get("rhs")
        op = raw.get("op")
        const = raw.get("const")
        if lhs not in clock_index:
            raise ValidationError(f"guard references unknown clock {lhs!r}")
        if rhs is not None and rhs not in clock_index:
            raise ValidationError(f"guard references unknown clock {rhs!r}")
        if op not in _OPS:
            raise ValidationError(f"unknown guard operator {op!r}")
        scaled = Fraction(str(const)) * resolution
        if scaled.denominator != 1:
            raise ValidationError(
                f"guard constant {const!r} not representable at resolution {resolution}"
            )
        n = int(scaled)
        i = clock_index[lhs]
        j = clock_index[rhs] if rhs is not None else 0
        if op in ("=", "=="):
            atoms.append((i, j, zn.le_bound(n)))
            atoms.append((j, i, zn.le_bound(-n)))
        elif op == "<":
            atoms.append((i, j, zn.lt_bound(n)))
        elif op == "<=":
            atoms.append((i, j, zn.le_bound(n)))
        elif op == ">":
            atoms.append((j, i, zn.lt_bound(-n)))
        else:  # >=
            atoms.append((j, i, zn.le_bound(-n)))
    return tuple(atoms)


def load_automaton(doc: Mapping) -> TimedAutomaton:
    """Parse a property document; structural validation only."""
    for field in ("clocks", "components", "locations", "initial", "final", "transitions"):
        if field not in doc:
            raise ValidationError(f"property document is missing field {field!r}")
    resolution = doc.get("resolution", 1000)
    if not isinstance(resolution, int) or resolution <= 0:
        raise ValidationError("resolution must be a positive integer")
    clocks = list(doc["clocks"])
    if len(set(clocks)) != len(clocks):
        raise ValidationError("duplicate clock names")
    components = list(doc["components"])
    actions: dict[str, int] = {}
    for idx, name in enumerate(components, start=1):
        for a in doc["components"][name]:
            if a in actions:
                raise ValidationError(f"action {a!r} appears in more than one component")
            actions[a] = idx
    locations = list(doc["locations"])
    if len(set(locations)) != len(locations):
        raise ValidationError("duplicate location names")
    initial = doc["initial"]
    if initial not in locations:
        raise ValidationError(f"initial location {initial!r} is not declared")
    final = list(doc["final"])
    for f in final:
        if f not in locations:
            raise ValidationError(f"final location {f!r} is not declared")
    clock_index = {c: i + 1 for i, c in enumerate(clocks)}
    transitions: list[Transition] = []
    for raw in doc["transitions"]:
        src, dst, act = raw.get("from"), raw.get("to"), raw.get("action")
        if src not in locations or dst not in locations:
            raise ValidationError(f"transition references unknown location: {raw!r}")
        if act not in actions:
            raise ValidationError(f"transition references unknown action {act!r}")
        guard = _guard_atoms(raw.get("guard", []), clock_index, resolution)
        resets = []
        for c in raw.get("reset", []):
            if c not in clock_index:
                raise ValidationError(f"reset references unknown clock {c!r}")
            resets.append(clock_index[c])
        t = Transition(src, dst, act, guard, tuple(sorted(set(resets))))
        if t not in transitions:
            transitions.append(t)
    return TimedAutomaton(
        locations, initial, clocks, components, actions, transitions, final, resolution
    )


def check_determinism(ta: TimedAutomaton) -> None:
    dim = ta.dim_clocks
    for (src, act), group in ta._by_source_action.items():
        for t1, t2 in itertools.combinations(group, 2):
            g1 = ta.guard_zone(t1, dim)
            g2 = ta.guard_zone(t2, dim)
            if zn.intersect(g1, g2).is_empty:
                continue
            if not (g1.same_zone(g2) and t1.resets == t2.resets and t1.target == t2.target):
                raise ValidationError(
                    f"nondeterministic: location {src!r}, action {act!r} has "
                    f"overlapping transitions to {t1.target!r} and {t2.target!r}"
                )


def reachable_zones(
    ta: TimedAutomaton, cap: int = DEFAULT_FIXPOINT_CAP
) -> dict[str, zn.Federation]:
    """Delay-closed reachable zones per location, widened (over-approximate)."""
    dim = ta.dim_clocks
    maxc = ta.max_consts()
    start = zn.extrapolate(zn.up(zn.zero_dbm(dim)), maxc)
    reach: dict[str, zn.Federation] = {loc: zn.federation(dim) for loc in ta.locations}
    reach[ta.initial] = zn.federation(dim, [start])
    work: list[tuple[str, zn.Dbm]] = [(ta.initial, start)]
    seen = 0
    while work:
        loc, zone = work.pop()
        seen += 1
        if seen > cap:
            raise ResourceCapError("reachability exploration exceeded its state cap")
        for t in ta.transitions:
            if t.source != loc:
                continue
            nxt = zn.intersect(zone, ta.guard_zone(t, dim))
            if nxt.is_empty:
                continue
            nxt = zn.extrapolate(zn.up(zn.reset(nxt, t.resets)), maxc)
            fed = reach[t.target]
            if any(m.includes(nxt) for m in fed):
                continue
            reach[t.target] = zn.fed_union(fed, zn.federation(dim, [nxt]))
            work.append((t.target, nxt))
    return reach


def check_completeness(
    ta: TimedAutomaton, auto_complete: bool = False, cap: int = DEFAULT_FIXPOINT_CAP
) -> TimedAutomaton:
    """Verify guard coverage over the reachable zones.

    With ``auto_complete`` the gaps are routed to a fresh non-accepting sink;
    otherwise the first gap raises with a witness.
    """
    dim = ta.dim_clocks
    reach = reachable_zones(ta, cap)
    gaps: list[tuple[str, str, zn.Federation]] = []
    for loc in ta.locations:
        fed = reach[loc]
        if fed.is_empty:
            continue
        for action in ta.actions:
            guards = zn.federation(
                dim, [ta.guard_zone(t, dim) for t in ta.outgoing(loc, action)]
            )
            gap = zn.fed_subtract(fed, guards)
            if not gap.is_empty:
                gaps.append((loc, action, gap))
    if not gaps:
        return ta
    if not auto_complete:
        loc, action, gap = gaps[0]
        raise ValidationError(
            f"incomplete: location {loc!r} has no transition for action {action!r} "
            f"over {gap.members[0]}"
        )
    sink = "__sink__"
    if sink in ta.locations:
        raise ValidationError("location name __sink__ is reserved for auto-completion")
    transitions = list(ta.transitions)
    for action in ta.actions:
        transitions.append(Transition(sink, sink, action, (), ()))
    for loc, action, gap in gaps:
        for piece in gap:
            transitions.append(Transition(loc, sink, action, tuple(piece.constraints()), ()))
    return TimedAutomaton(
        list(ta.locations) + [sink],
        ta.initial,
        ta.clocks,
        ta.components,
        ta.actions,
        transitions,
        ta.final,
        ta.resolution,
    )


def is_absorbing(ta: TimedAutomaton) -> bool:
    return all(t.target in ta.final for t in ta.transitions if t.source in ta.final)


def seen_bit_product(ta: TimedAutomaton) -> TimedAutomaton:
    """Track "ever visited an accepting location" in the location space."""

    def name(loc: str, seen: bool) -> str:
        return f"{loc}::seen" if seen else f"{loc}::new"

    locations: list[str] = []
    for loc in ta.locations:
        locations.append(name(loc, True))
        if loc not in ta.final:
            locations.append(name(loc, False))
    transitions: list[Transition] = []
    for t in ta.transitions:
        for seen in (True, False):
            if not seen and t.source in ta.final:
                continue
            tgt_seen = seen or t.target in ta.final
            transitions.append(
                Transition(name(t.source, seen), name(t.target, tgt_seen), t.action, t.guard, t.resets)
            )
    initial = name(ta.initial, ta.initial in ta.final)
    final = [name(loc, True) for loc in ta.final]
    return TimedAutomaton(
        locations, initial, ta.clocks, ta.components, ta.actions, transitions, final, ta.resolution
    )


def load_validate(
    doc: Mapping,
    auto_complete: bool = False,
    allow_non_absorbing: bool = False,
    cap: int = DEFAULT_FIXPOINT_CAP,
) -> TimedAutomaton:
    """Full load pipeline: parse, determinism, completeness, absorbing check."""
    ta = load_automaton(doc)
    check_determinism(ta)
    ta = check_completeness(ta, auto_complete=auto_complete, cap=cap)
    if not is_absorbing(ta):
        if not allow_non_absorbing:
            raise UnsupportedModeError(
                "accepting locations must be absorbing (every transition from an "
                "accepting location stays accepting); pass allow_non_absorbing "
                "for bad-prefix-only monitoring"
            )
        ta = seen_bit_product(ta)
    return ta


# ---------------------------------------------------------------------------
# After operators
# ---------------------------------------------------------------------------


def initial_configs(ta: TimedAutomaton) -> ConfigSet:
    """The single initial configuration: all clocks and the date at 0."""
    return config_set(
        ta.dim_full, {ta.initial: zn.federation(ta.dim_full, [zn.zero_dbm(ta.dim_full)])}
    )


def _interval_atoms(ta: TimedAutomaton, interval: TimeInterval) -> list[GuardAtom]:
    atoms: list[GuardAtom] = []
    k = ta.abs_index
    atoms.append((0, k, zn.Bound(-interval.lower.ticks, interval.lower_strict)))
    if interval.upper is not None:
        atoms.append((k, 0, zn.Bound(interval.upper.ticks, interval.upper_strict)))
    return atoms


def after_event(
    ta: TimedAutomaton, s: ConfigSet, action: str, interval: TimeInterval
) -> ConfigSet:
    """One event step: delay, date in interval, guard, reset.

    The result is not delay-closed; :func:`after_ordered` closes once at the
    end of a word.
    """
    ta.component_of(action)
    if interval.is_empty:
        return config_set(ta.dim_full, {})
    out: dict[str, list[zn.Dbm]] = {}
    date_atoms = _interval_atoms(ta, interval)
    for loc, fed in s:
        for t in ta.outgoing(loc, action):
            for zone in fed:
                w = zn.up(zone)
                for i, j, b in date_atoms:
                    w = zn.and_constraint(w, i, j, b)
                for i, j, b in t.guard:
                    w = zn.and_constraint(w, i, j, b)
                if w.is_empty:
                    continue
                w = zn.reset(w, t.resets, protected=ta.abs_index)
                out.setdefault(t.target, []).append(w)
    return config_set(
        ta.dim_full, {loc: zn.federation(ta.dim_full, zs) for loc, zs in out.items()}
    )


def after_ordered_noclose(ta: TimedAutomaton, s: ConfigSet, word: ApproxTimedWord) -> ConfigSet:
    cur = s
    for e in word.events:
        cur = after_event(ta, cur, e.action.name, e.interval)
        if cur.is_empty:
            break
    return cur


def after_ordered(ta: TimedAutomaton, s: ConfigSet, word: ApproxTimedWord) -> ConfigSet:
    """Fold the word's events in order, then close under trailing delay."""
    return config_up(after_ordered_noclose(ta, s, word))


def after_word(
    ta: TimedAutomaton,
    s: ConfigSet,
    word: TimedWord,
    start: Timestamp,
    end: Timestamp,
) -> ConfigSet:
    """Exact-date run: every event at its own date, then delay to ``end``."""
    if not word.is_empty:
        if word.first_date() < start:
            raise ValidationError("word starts before the given start date")
        if word.last_date() > end:
            raise ValidationError("word ends after the given end date")
    elif end < start:
        raise ValidationError("end date precedes start date")
    exact = ApproxTimedWord(
        tuple(ApproxEvent(e.action, TimeInterval.point(e.date)) for e in word.events)
    )
    closed = after_ordered(ta, s, exact)
    return config_fix_abs(closed, ta.abs_index, end)


# ---------------------------------------------------------------------------
# Outcome sets (inevitable / impossible acceptance)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PropertySets:
    """Precomputed classification sets, lifted to include the date clock.

    ``mode`` is "absorbing" (both sets computed) or "never-only" (the
    inevitable set is empty; only bad prefixes can be detected).
    """

    mode: str
    inevitable: ConfigSet
    impossible: ConfigSet


def _pre_transition(
    ta: TimedAutomaton, t: Transition, target_fed: zn.Federation, maxc: Sequence[Optional[int]]
) -> list[zn.Dbm]:
    """Configurations that can delay and fire ``t`` into ``target_fed``."""
    out = []
    for zone in target_fed:
        w = zone
        for x in t.resets:
            w = zn.fix_clock(w, x, 0)
        if w.is_empty:
            continue
        for x in t.resets:
            w = zn.free(w, x)
        for i, j, b in t.guard:
            w = zn.and_constraint(w, i, j, b)
        if w.is_empty:
            continue
        w = zn.extrapolate(zn.down(w), maxc)
        if not w.is_empty:
            out.append(w)
    return out


def _coreachable(
    ta: TimedAutomaton, targets: frozenset[str], cap: int
) -> dict[str, zn.Federation]:
    """Least fixpoint: configurations with a path into any target location."""
    dim = ta.dim_clocks
    maxc = ta.max_consts()
    top = zn.federation(dim, [zn.top_dbm(dim)])
    co: dict[str, zn.Federation] = {
        loc: (top if loc in targets else zn.federation(dim)) for loc in ta.locations
    }
    steps = 0
    changed = True
    while changed:
        changed = False
        for t in ta.transitions:
            steps += 1
            if steps > cap:
                raise ResourceCapError("co-reachability fixpoint exceeded its cap")
            tgt = co[t.target]
            if tgt.is_empty:
                continue
            pre = _pre_transition(ta, t, tgt, maxc)
            if not pre:
                continue
            fed = zn.federation(dim, pre)
            if zn.fed_includes(co[t.source], fed):
                continue
            co[t.source] = zn.fed_union(co[t.source], fed)
            changed = True
    return co


def _inf_avoid(ta: TimedAutomaton, cap: int) -> dict[str, zn.Federation]:
    """Greatest fixpoint: configurations that can fire transitions while
    avoiding the accepting locations forever."""
    dim = ta.dim_clocks
    maxc = ta.max_consts()
    top = zn.federation(dim, [zn.top_dbm(dim)])
    avoid: dict[str, zn.Federation] = {
        loc: (zn.federation(dim) if loc in ta.final else top) for loc in ta.locations
    }
    steps = 0
    while True:
        nxt: dict[str, zn.Federation] = {}
        changed = False
        for loc in ta.locations:
            steps += 1
            if steps > cap:
                raise ResourceCapError("avoidance fixpoint exceeded its cap")
            if loc in ta.final:
                nxt[loc] = zn.federation(dim)
                continue
            pres: list[zn.Dbm] = []
            for t in ta.transitions:
                if t.source != loc or t.target in ta.final:
                    continue
                pres.extend(_pre_transition(ta, t, avoid[t.target], maxc))
            stepped = zn.fed_intersect(avoid[loc], zn.federation(dim, pres))
            nxt[loc] = stepped
            if not zn.fed_equal(stepped, avoid[loc]):
                changed = True
        avoid = nxt
        if not changed:
            return avoid


def precompute_property_sets(
    ta: TimedAutomaton, cap: int = DEFAULT_FIXPOINT_CAP
) -> PropertySets:
    """Compute the inevitable and impossible sets for the accepting locations."""
    dim = ta.dim_clocks
    top = zn.federation(dim, [zn.top_dbm(dim)])
    absorbing = is_absorbing(ta)
    co = _coreachable(ta, frozenset(ta.final), cap)
    impossible: dict[str, zn.Federation] = {}
    for loc in ta.locations:
        if loc in ta.final:
            continue
        rem = zn.fed_subtract(top, co[loc])
        if not rem.is_empty:
            impossible[loc] = rem
    inevitable: dict[str, zn.Federation] = {}
    mode = "absorbing"
    if absorbing:
        avoid = _inf_avoid(ta, cap)
        for loc in ta.locations:
            rem = zn.fed_subtract(top, avoid[loc])
            if not rem.is_empty:
                inevitable[loc] = rem
    else:
        mode = "never-only"
    lifted_inev = config_set(
        ta.dim_full, {loc: zn.fed_lift(fed, 1) for loc, fed in inevitable.items()}
    )
    lifted_imposs = config_set(
        ta.dim_full, {loc: zn.fed_lift(fed, 1) for loc, fed in impossible.items()}
    )
    for loc, fed in lifted_inev:
        other = lifted_imposs.get(loc)
        if other is not None and not zn.fed_intersect(fed, other).is_empty:
            raise ValidationError(
                f"inconsistent outcome sets: overlap at location {loc!r}"
            )
    return PropertySets(mode, lifted_inev, lifted_imposs)


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


def _intersects(s: ConfigSet, other: ConfigSet) -> bool:
    for loc, fed in s:
        o = other.get(loc)
        if o is not None and not zn.fed_intersect(fed, o).is_empty:
            return True
    return False


def intersects_inevitable(s: ConfigSet, props: PropertySets) -> bool:
    return _intersects(s, props.inevitable)


def intersects_impossible(s: ConfigSet, props: PropertySets) -> bool:
    return _intersects(s, props.impossible)


def intersects_undecided(s: ConfigSet, props: PropertySets) -> bool:
    """True when part of ``s`` lies outside both outcome sets."""
    for loc, fed in s:
        rem = fed
        inev = props.inevitable.get(loc)
        if inev is not None:
            rem = zn.fed_subtract(rem, inev)
            if rem.is_empty:
                continue
        imposs = props.impossible.get(loc)
        if imposs is not None:
            rem = zn.fed_subtract(rem, imposs)
        if not rem.is_empty:
            return True
    return False


def classify(s: ConfigSet, props: PropertySets) -> tuple[bool, bool, bool]:
    """Flags (I, N, C): intersects inevitable / impossible / neither."""
    if s.is_empty:
        raise AssumptionError(
            "state-nonempty",
            "configuration set is empty; input is corrupt or the skew bound was violated",
        )
    return (
        intersects_inevitable(s, props),
        intersects_impossible(s, props),
        intersects_undecided(s, props),
    )


# ---------------------------------------------------------------------------
# Serialization (outcome-set cache and debug rendering)
# ---------------------------------------------------------------------------


def _dbm_to_json(d: zn.Dbm) -> list:
    return [[[b.value, b.strict] for b in row] for row in d.rows]


def _dbm_from_json(rows: list) -> zn.Dbm:
    return zn.Dbm(tuple(tuple(zn.Bound(v, s) for v, s in row) for row in rows))


def config_set_to_json(cs: ConfigSet) -> dict:
    return {
        "dim": cs.dim,
        "parts": {loc: [_dbm_to_json(m) for m in fed] for loc, fed in cs.parts},
    }


def config_set_from_json(obj: Mapping) -> ConfigSet:
    dim = obj["dim"]
    mapping = {
        loc: zn.Federation(dim, tuple(_dbm_from_json(rows) for rows in members))
        for loc, members in obj["parts"].items()
    }
    return config_set(dim, mapping)


def property_sets_to_json(props: PropertySets) -> dict:
    return {
        "mode": props.mode,
        "inevitable": config_set_to_json(props.inevitable),
        "impossible": config_set_to_json(props.impossible),
    }


def property_sets_from_json(obj: Mapping) -> PropertySets:
    return PropertySets(
        obj["mode"],
        config_set_from_json(obj["inevitable"]),
        config_set_from_json(obj["impossible"]),
    )


def _index_name(ta: TimedAutomaton, i: int) -> str:
    if i == 0:
        return "0"
    if i == ta.abs_index:
        return "abs"
    return ta.clocks[i - 1]


def render_dbm(ta: TimedAutomaton, d: zn.Dbm) -> list[str]:
    """Human-readable constraint list (debug format, not a stable wire)."""
    out = []
    for i, j, b in d.constraints():
        op = "<" if b.strict else "<="
        if j == 0:
            out.append(f"{_index_name(ta, i)} {op} {b.value}")
        elif i == 0:
            flipped = ">" if b.strict else ">="
            out.append(f"{_index_name(ta, j)} {flipped} {-b.value}")
        else:
            out.append(f"{_index_name(ta, i)} - {_index_name(ta, j)} {op} {b.value}")
    return out


def render_config_set(ta: TimedAutomaton, cs: ConfigSet) -> dict:
    return {loc: [render_dbm(ta, m) for m in fed] for loc, fed in cs.parts}
