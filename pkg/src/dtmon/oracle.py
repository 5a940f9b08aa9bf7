"""Brute-force reference implementations for cross-checking the monitor.

Everything here recomputes results from first principles: orderings are
filtered out of all permutations, reachability is enumerated over concrete
date vectors on a finite grid, constraint matrices are evaluated pointwise.
None of the incremental or symbolic algorithms are reused; precomputed
outcome sets are consumed as plain data.

Grid granularity.  All constraint constants in a run (guards, interval
endpoints, skew, cutoffs) are integers in ticks.  A single constraint
``e # c`` with integer ``c`` is satisfied by some point of the half-tick
grid whenever it is satisfiable, which makes half-tick sampling exact for
one-dimensional questions.  Joint systems with chains of *strict*
constraints can require finer witnesses (``0 < x < y < 1`` has none on the
half grid), so the subdivision count is a parameter: callers verifying
multi-clock strict systems should pass at least ``n + 1`` subdivisions for
``n`` free quantities.  For systems whose constraints are all non-strict,
the tightest-bound solution lands on the half grid, so the default of two
subdivisions is exact.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

from .automaton import ConfigSet, PropertySets, TimedAutomaton
from .errors import ResourceCapError, ValidationError
from .monitor import Verdict
from .timebase import (
    T0,
    Action,
    ApproxEvent,
    ApproxTimedWord,
    TimeInterval,
    TimedWord,
    Timestamp,
)

#: an oracle word: actions paired with exact (possibly fractional) tick dates
FWord = tuple[tuple[Action, Fraction], ...]

#: an oracle configuration: location plus clock values, date last
FConfig = tuple[str, tuple[Fraction, ...]]

DEFAULT_ORACLE_CAP = 200_000


@dataclass(frozen=True)
class DateGrid:
    """A finite ascending carrier of candidate dates, in ticks."""

    points: tuple[Fraction, ...]

    @classmethod
    def build(
        cls,
        lo_ticks: int,
        hi_ticks: int,
        subdivisions: int = 2,
        cap: int = 100_000,
    ) -> "DateGrid":
        if subdivisions < 1:
            raise ValidationError("subdivisions must be at least 1")
        if hi_ticks < lo_ticks:
            raise ValidationError("empty grid range")
        n = (hi_ticks - lo_ticks) * subdivisions
        if n + 1 > cap:
            raise ResourceCapError(f"grid of {n + 1} points exceeds the cap of {cap}")
        step = Fraction(1, subdivisions)
        return cls(tuple(Fraction(lo_ticks) + k * step for k in range(n + 1)))

    @classmethod
    def for_word(
        cls, word: ApproxTimedWord, extra_ticks: int = 2, subdivisions: int = 2
    ) -> "DateGrid":
        hi = 0
        for e in word.events:
            if e.interval.upper is not None:
                hi = max(hi, e.interval.upper.ticks)
        return cls.build(0, hi + extra_ticks, subdivisions)

    def points_in(self, interval: TimeInterval) -> list[Fraction]:
        return [p for p in self.points if interval.contains_value(p)]


# ---------------------------------------------------------------------------
# Orderings and decomposition from the definitions
# ---------------------------------------------------------------------------


def naive_orderings(word: ApproxTimedWord, max_events: int = 8) -> list[tuple[int, ...]]:
    """All permutations, filtered by the per-component order condition."""
    m = len(word.events)
    if m > max_events:
        raise ResourceCapError(f"{m} events exceed the naive ordering cap of {max_events}")
    comps = [e.action.component for e in word.events]
    out = []
    for perm in itertools.permutations(range(m)):
        position = {orig: pos for pos, orig in enumerate(perm)}
        ok = True
        for i in range(m):
            for j in range(i + 1, m):
                if comps[i] == comps[j] and position[i] > position[j]:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(perm)
    return out


def naive_decompose(
    word: ApproxTimedWord, cutoff: Timestamp, max_events: int = 8
) -> tuple[tuple[ApproxTimedWord, ApproxTimedWord], ...]:
    """Enumerate kept/dropped splits at ``cutoff`` directly from the definition."""
    m = len(word.events)
    if m > max_events:
        raise ResourceCapError(f"{m} events exceed the naive decomposition cap")
    window_hi = cutoff.ticks
    pairs = []
    seen = set()
    for mask in range(1 << m):
        kept = [i for i in range(m) if mask & (1 << i)]
        dropped = [i for i in range(m) if not (mask & (1 << i))]
        ok = True
        for i in kept:
            iv = word.events[i].interval
            lo = Fraction(iv.lower.ticks)
            if lo > window_hi or (lo == window_hi and iv.lower_strict):
                ok = False  # cannot occur at or before the cutoff
                break
        if ok:
            for i in dropped:
                iv = word.events[i].interval
                # A dropped event must be able to lie at or beyond the cutoff;
                # a closed upper bound touching the cutoff still qualifies.
                if iv.upper is not None and (
                    iv.upper.ticks < window_hi
                    or (iv.upper.ticks == window_hi and iv.upper_strict)
                ):
                    ok = False
                    break
        if ok:
            # kept events must form, per component, a prefix of that
            # component's subsequence
            for c in {word.events[i].action.component for i in range(m)}:
                comp_idx = [i for i in range(m) if word.events[i].action.component == c]
                kept_in_comp = [i for i in comp_idx if i in kept]
                if kept_in_comp != comp_idx[: len(kept_in_comp)]:
                    ok = False
                    break
        if not ok:
            continue
        kept_word = ApproxTimedWord(tuple(word.events[i] for i in kept))
        rem_word = ApproxTimedWord(tuple(word.events[i] for i in dropped))
        for perm in naive_orderings(kept_word, max_events):
            ordered = ApproxTimedWord(tuple(kept_word.events[i] for i in perm))
            key = (
                tuple((e.action, e.interval) for e in ordered.events),
                tuple((e.action, e.interval) for e in rem_word.events),
            )
            if key not in seen:
                seen.add(key)
                pairs.append((ordered, rem_word))
    return tuple(pairs)


# ---------------------------------------------------------------------------
# Concrete runs and grid reachability
# ---------------------------------------------------------------------------


def _guard_holds(guard, vals: Sequence[Fraction]) -> bool:
    for i, j, b in guard:
        if b.value is None:
            continue
        diff = vals[i] - vals[j]
        if not (diff < b.value or (diff == b.value and not b.strict)):
            return False
    return True


def step_run(
    ta: TimedAutomaton,
    word: Iterable[tuple[Action, Fraction]],
    end: Optional[Fraction] = None,
) -> Optional[FConfig]:
    """Run a concrete word from the initial configuration.

    Returns the final (location, clock values + date) or None when some
    event has no enabled transition (cannot happen on a complete automaton)
    or dates regress.
    """
    loc = ta.initial
    vals = [Fraction(0)] * ta.dim_clocks  # index 0 stays 0
    now = Fraction(0)
    for action, date in word:
        if date < now:
            return None
        delta = date - now
        vals = [v + delta if i else Fraction(0) for i, v in enumerate(vals)]
        now = date
        fired = None
        for t in ta.outgoing(loc, action.name):
            if _guard_holds(t.guard, vals):
                fired = t
                break
        if fired is None:
            return None
        for x in fired.resets:
            vals[x] = Fraction(0)
        loc = fired.target
    if end is not None:
        if end < now:
            return None
        delta = end - now
        vals = [v + delta if i else Fraction(0) for i, v in enumerate(vals)]
        now = end
    return (loc, tuple(vals[1:]) + (now,))


def date_vectors(
    intervals: Sequence[TimeInterval],
    grid: DateGrid,
    start: Fraction = Fraction(0),
    cap: int = DEFAULT_ORACLE_CAP,
) -> Iterator[tuple[Fraction, ...]]:
    """Non-decreasing grid date assignments, one per interval."""
    counter = [0]

    def rec(k: int, prev: Fraction, acc: list[Fraction]) -> Iterator[tuple[Fraction, ...]]:
        if k == len(intervals):
            counter[0] += 1
            if counter[0] > cap:
                raise ResourceCapError("date enumeration exceeded its cap")
            yield tuple(acc)
            return
        for p in grid.points_in(intervals[k]):
            if p < prev:
                continue
            acc.append(p)
            yield from rec(k + 1, p, acc)
            acc.pop()

    return rec(0, start, [])


#: a frontier item: (location, clock values without the date, current date)
_Frontier = set[tuple[str, tuple[Fraction, ...], Fraction]]


def _fire(ta: TimedAutomaton, loc: str, vals: tuple[Fraction, ...], now: Fraction,
          action: Action, date: Fraction):
    """Advance one concrete configuration by one dated event, or None."""
    if date < now:
        return None
    delta = date - now
    stepped = [Fraction(0)] + [v + delta for v in vals]
    for t in ta.outgoing(loc, action.name):
        if _guard_holds(t.guard, stepped):
            after = list(stepped)
            for x in t.resets:
                after[x] = Fraction(0)
            return (t.target, tuple(after[1:]), date)
    return None


def propagate(
    ta: TimedAutomaton,
    word: ApproxTimedWord,
    grid: DateGrid,
    window: Optional[TimeInterval] = None,
    cap: int = DEFAULT_ORACLE_CAP,
) -> _Frontier:
    """Explicit configurations after the word, one event at a time.

    Each event takes every admissible grid date in its interval (clipped to
    ``window`` when given); identical intermediate configurations merge, which
    keeps the enumeration tractable without any symbolic reasoning.
    """
    zeros = tuple(Fraction(0) for _ in range(ta.dim_clocks - 1))
    frontier: _Frontier = {(ta.initial, zeros, Fraction(0))}
    for e in word.events:
        interval = e.interval if window is None else e.interval.intersect(window)
        points = grid.points_in(interval)
        nxt: _Frontier = set()
        for loc, vals, now in frontier:
            for p in points:
                cfg = _fire(ta, loc, vals, now, e.action, p)
                if cfg is not None:
                    nxt.add(cfg)
            if len(nxt) > cap:
                raise ResourceCapError("frontier enumeration exceeded its cap")
        frontier = nxt
        if not frontier:
            break
    return frontier


def _delay_to(frontier: _Frontier, end: Fraction) -> set[FConfig]:
    out: set[FConfig] = set()
    for loc, vals, now in frontier:
        if end < now:
            continue
        delta = end - now
        out.add((loc, tuple(v + delta for v in vals) + (end,)))
    return out


def grid_reach(
    ta: TimedAutomaton,
    word: ApproxTimedWord,
    grid: DateGrid,
    end: Optional[Timestamp] = None,
    cap: int = DEFAULT_ORACLE_CAP,
) -> set[FConfig]:
    """Configurations reachable by running ``word`` in its given order with
    grid dates, then delaying to ``end`` (or to every later grid date)."""
    frontier = propagate(ta, word, grid, cap=cap)
    out: set[FConfig] = set()
    if end is not None:
        out |= _delay_to(frontier, Fraction(end.ticks))
    else:
        for p in grid.points:
            out |= _delay_to(frontier, p)
    return out


# ---------------------------------------------------------------------------
# Language enumeration and membership
# ---------------------------------------------------------------------------


def enumerate_members(
    word: ApproxTimedWord,
    grid: DateGrid,
    cap: int = DEFAULT_ORACLE_CAP,
    max_events: int = 8,
) -> Iterator[FWord]:
    """Grid members of the unordered language of ``word``."""
    emitted = 0
    for perm in naive_orderings(word, max_events):
        ordered = [word.events[i] for i in perm]
        for dates in date_vectors([e.interval for e in ordered], grid, cap=cap):
            emitted += 1
            if emitted > cap:
                raise ResourceCapError("language enumeration exceeded its cap")
            yield tuple((e.action, d) for e, d in zip(ordered, dates))


def word_in_ordered(word: ApproxTimedWord, candidate: FWord) -> bool:
    if len(word.events) != len(candidate):
        return False
    prev = Fraction(0) - 1
    for e, (action, date) in zip(word.events, candidate):
        if e.action != action or not e.interval.contains_value(date):
            return False
        if date < prev:
            return False
        prev = date
    return True


def word_in_unordered(word: ApproxTimedWord, candidate: FWord, max_events: int = 8) -> bool:
    return any(
        word_in_ordered(ApproxTimedWord(tuple(word.events[i] for i in perm)), candidate)
        for perm in naive_orderings(word, max_events)
    )


def restrict_fword(candidate: FWord, cutoff: Timestamp) -> FWord:
    return tuple((a, d) for a, d in candidate if d <= cutoff.ticks)


def extend_to_member(
    word: ApproxTimedWord,
    partial: FWord,
    cutoff: Timestamp,
    grid: DateGrid,
    max_events: int = 8,
) -> Optional[FWord]:
    """Find a member of the unordered language of ``word`` that truncates at
    the cutoff to ``partial``: the partial word appears as a dated prefix and
    every remaining event takes a grid date at or past the cutoff (events
    whose interval only touches the cutoff are legitimately undecided there,
    so the boundary date itself is admitted)."""
    limit = Fraction(cutoff.ticks)
    k = len(partial)
    for perm in naive_orderings(word, max_events):
        ordered = [word.events[i] for i in perm]
        prefix_ok = len(ordered) >= k and all(
            e.action == a and e.interval.contains_value(d)
            for e, (a, d) in zip(ordered[:k], partial)
        )
        if not prefix_ok:
            continue
        tail = ordered[k:]
        prev = partial[-1][1] if partial else Fraction(0)

        def complete(idx: int, prev_date: Fraction, acc: list[Fraction]):
            if idx == len(tail):
                return list(acc)
            for p in grid.points_in(tail[idx].interval):
                if p < limit or p < prev_date:
                    continue
                acc.append(p)
                got = complete(idx + 1, p, acc)
                if got is not None:
                    return got
                acc.pop()
            return None

        dates = complete(0, prev, [])
        if dates is not None:
            return tuple(partial) + tuple(
                (e.action, d) for e, d in zip(tail, dates)
            )
    return None


def sample_members(
    word: ApproxTimedWord,
    grid: DateGrid,
    rng: random.Random,
    count: int,
    max_events: int = 8,
    attempts_per_sample: int = 50,
) -> list[FWord]:
    """Randomly sample members of the unordered language (may return fewer)."""
    orderings = naive_orderings(word, max_events)
    out: list[FWord] = []
    for _ in range(count):
        for _attempt in range(attempts_per_sample):
            perm = rng.choice(orderings)
            ordered = [word.events[i] for i in perm]
            dates: list[Fraction] = []
            prev = Fraction(0)
            ok = True
            for e in ordered:
                options = [p for p in grid.points_in(e.interval) if p >= prev]
                if not options:
                    ok = False
                    break
                choice = rng.choice(options)
                dates.append(choice)
                prev = choice
            if ok:
                out.append(tuple((e.action, d) for e, d in zip(ordered, dates)))
                break
    return out


# ---------------------------------------------------------------------------
# Pointwise classification and the definition-level verdict
# ---------------------------------------------------------------------------


def _point_in_dbm_rows(rows, values: Sequence[Fraction]) -> bool:
    n = len(rows)
    for i in range(n):
        for j in range(n):
            b = rows[i][j]
            if b.value is None:
                continue
            diff = values[i] - values[j]
            if not (diff < b.value or (diff == b.value and not b.strict)):
                return False
    return True


def config_in_set(cs: ConfigSet, cfg: FConfig) -> bool:
    """Membership of a concrete configuration, evaluated entrywise."""
    loc, vals = cfg
    fed = cs.get(loc)
    if fed is None:
        return False
    full = (Fraction(0),) + tuple(vals)
    return any(_point_in_dbm_rows(m.rows, full) for m in fed)


def _verdict_of_flags(i: bool, n: bool, c: bool) -> Verdict:
    if i and n:
        return Verdict.INCONCLUSIVE
    if i and not n and not c:
        return Verdict.TRUE
    if n and not i and not c:
        return Verdict.FALSE
    if i and not n and c:
        return Verdict.POSSIBLY_TRUE
    if n and not i and c:
        return Verdict.POSSIBLY_FALSE
    return Verdict.PENDING


def widen(word: TimedWord, skew: Timestamp) -> ApproxTimedWord:
    """Independent reimplementation of date widening by the skew bound."""
    events = []
    for e in word.events:
        lo = max(0, e.date.ticks - skew.ticks)
        events.append(
            ApproxEvent(
                e.action,
                TimeInterval(Timestamp(lo), Timestamp(e.date.ticks + skew.ticks), False, False),
            )
        )
    return ApproxTimedWord(tuple(events))


def classify_words(
    ta: TimedAutomaton,
    props: PropertySets,
    words: Iterable[FWord],
    end: Fraction,
) -> tuple[bool, bool, bool]:
    """Fold (I, N, C) flags over the end configurations of concrete words."""
    flag_i = flag_n = flag_c = False
    for fword in words:
        cfg = step_run(ta, fword, end)
        if cfg is None:
            continue
        in_i = config_in_set(props.inevitable, cfg)
        in_n = config_in_set(props.impossible, cfg)
        flag_i = flag_i or in_i
        flag_n = flag_n or in_n
        flag_c = flag_c or (not in_i and not in_n)
    return flag_i, flag_n, flag_c


def naive_verdict(
    observed: TimedWord,
    skew: Timestamp,
    cutoff: Timestamp,
    ta: TimedAutomaton,
    props: PropertySets,
    subdivisions: Optional[int] = None,
    cap: int = DEFAULT_ORACLE_CAP,
) -> Verdict:
    """Definition-level verdict at the cutoff, by exhaustive enumeration.

    Enumerates the restriction of the widened observation at the cutoff as
    kept/dropped splits, pushes explicit grid-dated configurations through
    every kept ordering, and classifies the results at date ``cutoff``.
    Defaults to the exact subdivision count (events + 1) for the instance.
    """
    word = widen(observed, skew)
    if subdivisions is None:
        subdivisions = len(word.events) + 1
    window = TimeInterval.closed(T0, cutoff)
    grid = DateGrid.build(0, max(cutoff.ticks, 0), subdivisions)
    end = Fraction(cutoff.ticks)
    flag_i = flag_n = flag_c = False
    for kept, _rem in naive_decompose(word, cutoff):
        frontier = propagate(ta, kept, grid, window=window, cap=cap)
        for cfg in _delay_to(frontier, end):
            in_i = config_in_set(props.inevitable, cfg)
            in_n = config_in_set(props.impossible, cfg)
            flag_i = flag_i or in_i
            flag_n = flag_n or in_n
            flag_c = flag_c or (not in_i and not in_n)
            if flag_i and flag_n:
                return Verdict.INCONCLUSIVE
    return _verdict_of_flags(flag_i, flag_n, flag_c)


def is_good_prefix(
    ta: TimedAutomaton, props: PropertySets, trace: TimedWord, at: Timestamp
) -> bool:
    """The concrete trace, delayed to ``at``, sits in the inevitable set."""
    fword = tuple((e.action, Fraction(e.date.ticks)) for e in trace.events)
    cfg = step_run(ta, fword, Fraction(at.ticks))
    return cfg is not None and config_in_set(props.inevitable, cfg)


def is_bad_prefix(
    ta: TimedAutomaton, props: PropertySets, trace: TimedWord, at: Timestamp
) -> bool:
    fword = tuple((e.action, Fraction(e.date.ticks)) for e in trace.events)
    cfg = step_run(ta, fword, Fraction(at.ticks))
    return cfg is not None and config_in_set(props.impossible, cfg)


def conclusiveness(
    trace: TimedWord,
    widen_by: Timestamp,
    ta: TimedAutomaton,
    props: PropertySets,
    subdivisions: Optional[int] = None,
    cap: int = DEFAULT_ORACLE_CAP,
    max_events: int = 8,
) -> str:
    """Classify the widened language of the whole trace on the grid.

    Each member's end configuration (at its own final date) is tested
    against the outcome sets.  Returns "good" or "bad" when every member
    lands in the corresponding set, "mixed" when witnesses against both
    exist, and "open" for an empty language.  Defaults to the exact
    subdivision count (events + 1).
    """
    word = widen(trace, widen_by)
    if subdivisions is None:
        subdivisions = len(word.events) + 1
    grid = DateGrid.for_word(word, subdivisions=subdivisions)
    saw_not_good = saw_not_bad = False
    any_word = False
    for perm in naive_orderings(word, max_events):
        ordered = ApproxTimedWord(tuple(word.events[i] for i in perm))
        for loc, vals, now in propagate(ta, ordered, grid, cap=cap):
            any_word = True
            cfg = (loc, vals + (now,))
            if not config_in_set(props.inevitable, cfg):
                saw_not_good = True
            if not config_in_set(props.impossible, cfg):
                saw_not_bad = True
            if saw_not_good and saw_not_bad:
                return "mixed"
    if not any_word:
        return "open"
    if not saw_not_good:
        return "good"
    if not saw_not_bad:
        return "bad"
    return "mixed"
