"""Exact time arithmetic, timed words and uncertain timed words.

Every date in a run is an integer number of ticks at a run-wide resolution
(ticks per time unit, default 1000).  Skew bounds, interval endpoints and
guard constants live on the same integer grid, so all operations here are
exact; no floating point is involved anywhere in the pipeline.

An uncertain word (:class:`ApproxTimedWord`) records, for each observed
action, the interval of reference-clock dates at which it may really have
occurred.  The operations at the bottom of this module (interleavings,
conditioned subwords, restriction, decomposition, language membership)
implement the re-ordering semantics induced by that uncertainty: events of
one component keep their observation order, events of distinct components
may commute whenever their date intervals allow it.
"""
from __future__ import annotations

import itertools
import math
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .errors import OrderingError, ResourceCapError, ValidationError

DEFAULT_RESOLUTION = 1000

#: Refuse enumerations with more candidates than this (resolution-independent).
DEFAULT_ENUM_CAP = 1_000_000

_active_resolution = DEFAULT_RESOLUTION


def set_resolution(ticks_per_unit: int) -> None:
    """Set the run-wide resolution used to convert between units and ticks."""
    global _active_resolution
    if not isinstance(ticks_per_unit, int) or ticks_per_unit <= 0:
        raise ValidationError(f"resolution must be a positive integer, got {ticks_per_unit!r}")
    _active_resolution = ticks_per_unit


def get_resolution() -> int:
    return _active_resolution


@contextmanager
def using_resolution(ticks_per_unit: int):
    """Temporarily switch the active resolution (used by loaders and tests)."""
    previous = get_resolution()
    set_resolution(ticks_per_unit)
    try:
        yield
    finally:
        set_resolution(previous)


def _as_fraction(value) -> Fraction:
    if isinstance(value, float):
        # Honour the decimal literal the user wrote (0.7 means 7/10).
        return Fraction(str(value))
    return Fraction(value)


@dataclass(frozen=True, order=True)
class Timestamp:
    """A date as a signed integer tick count at the active resolution."""

    ticks: int

    def __post_init__(self):
        if not isinstance(self.ticks, int) or isinstance(self.ticks, bool):
            raise ValidationError(f"ticks must be an integer, got {self.ticks!r}")

    @classmethod
    def from_units(cls, value, resolution: Optional[int] = None) -> "Timestamp":
        """Convert a value in time units to ticks; must be exactly representable."""
        res = resolution if resolution is not None else get_resolution()
        scaled = _as_fraction(value) * res
        if scaled.denominator != 1:
            raise ValidationError(
                f"{value!r} is not representable at resolution {res} ticks per unit"
            )
        return cls(int(scaled))

    def to_units(self, resolution: Optional[int] = None) -> Fraction:
        res = resolution if resolution is not None else get_resolution()
        return Fraction(self.ticks, res)

    def __add__(self, other: "Timestamp") -> "Timestamp":
        if not isinstance(other, Timestamp):
            return NotImplemented
        return Timestamp(self.ticks + other.ticks)

    def __sub__(self, other: "Timestamp") -> "Timestamp":
        if not isinstance(other, Timestamp):
            return NotImplemented
        return Timestamp(self.ticks - other.ticks)

    def __str__(self) -> str:
        units = self.to_units()
        if units.denominator == 1:
            return str(units.numerator)
        return str(float(units))


T0 = Timestamp(0)


def ts(value) -> Timestamp:
    """Shorthand: build a Timestamp from a value in time units."""
    return Timestamp.from_units(value)


_EMPTY_FIELDS = (T0, T0, True, True)


@dataclass(frozen=True)
class TimeInterval:
    """An interval of dates; ``upper is None`` means unbounded above.

    Empty intervals are normalised to one canonical representation so that
    structural equality coincides with set equality.
    """

    lower: Timestamp
    upper: Optional[Timestamp]
    lower_strict: bool = False
    upper_strict: bool = False

    def __post_init__(self):
        if self._computes_empty() and (
            (self.lower, self.upper, self.lower_strict, self.upper_strict) != _EMPTY_FIELDS
        ):
            object.__setattr__(self, "lower", _EMPTY_FIELDS[0])
            object.__setattr__(self, "upper", _EMPTY_FIELDS[1])
            object.__setattr__(self, "lower_strict", _EMPTY_FIELDS[2])
            object.__setattr__(self, "upper_strict", _EMPTY_FIELDS[3])

    def _computes_empty(self) -> bool:
        if self.upper is None:
            return False
        if self.lower < self.upper:
            return False
        if self.lower == self.upper:
            return self.lower_strict or self.upper_strict
        return True

    @property
    def is_empty(self) -> bool:
        return self.upper is not None and (
            self.lower > self.upper
            or (self.lower == self.upper and (self.lower_strict or self.upper_strict))
        )

    @classmethod
    def closed(cls, lower: Timestamp, upper: Timestamp) -> "TimeInterval":
        return cls(lower, upper, False, False)

    @classmethod
    def point(cls, value: Timestamp) -> "TimeInterval":
        return cls(value, value, False, False)

    @classmethod
    def at_least(cls, lower: Timestamp) -> "TimeInterval":
        return cls(lower, None, False, False)

    def lb(self) -> Timestamp:
        return self.lower

    def ub(self) -> Optional[Timestamp]:
        return self.upper

    def is_singleton(self) -> bool:
        return not self.is_empty and self.upper == self.lower

    def contains(self, date: Timestamp) -> bool:
        if self.is_empty:
            return False
        if date < self.lower or (date == self.lower and self.lower_strict):
            return False
        if self.upper is None:
            return True
        return date < self.upper or (date == self.upper and not self.upper_strict)

    def contains_value(self, value: Fraction) -> bool:
        """Exact membership test for a (possibly non-integer) tick value."""
        if self.is_empty:
            return False
        lo = Fraction(self.lower.ticks)
        if value < lo or (value == lo and self.lower_strict):
            return False
        if self.upper is None:
            return True
        hi = Fraction(self.upper.ticks)
        return value < hi or (value == hi and not self.upper_strict)

    def intersect(self, other: "TimeInterval") -> "TimeInterval":
        if self.is_empty or other.is_empty:
            return EMPTY_INTERVAL
        if self.lower > other.lower:
            lower, lower_strict = self.lower, self.lower_strict
        elif other.lower > self.lower:
            lower, lower_strict = other.lower, other.lower_strict
        else:
            lower, lower_strict = self.lower, self.lower_strict or other.lower_strict
        if self.upper is None:
            upper, upper_strict = other.upper, other.upper_strict
        elif other.upper is None:
            upper, upper_strict = self.upper, self.upper_strict
        elif self.upper < other.upper:
            upper, upper_strict = self.upper, self.upper_strict
        elif other.upper < self.upper:
            upper, upper_strict = other.upper, other.upper_strict
        else:
            upper, upper_strict = self.upper, self.upper_strict or other.upper_strict
        return TimeInterval(lower, upper, lower_strict, upper_strict)

    def precedes(self, other: "TimeInterval") -> bool:
        """True when every date of self is at or before every date of other."""
        if self.is_empty or other.is_empty:
            raise ValidationError("precedes is undefined for empty intervals")
        if self.upper is None:
            return False
        return self.upper <= other.lower

    def is_subset(self, other: "TimeInterval") -> bool:
        if self.is_empty:
            return True
        if other.is_empty:
            return False
        if self.lower < other.lower:
            return False
        if self.lower == other.lower and other.lower_strict and not self.lower_strict:
            return False
        if other.upper is None:
            return True
        if self.upper is None:
            return False
        if self.upper > other.upper:
            return False
        if self.upper == other.upper and other.upper_strict and not self.upper_strict:
            return False
        return True

    def __str__(self) -> str:
        if self.is_empty:
            return "{}"
        left = "(" if self.lower_strict else "["
        if self.upper is None:
            return f"{left}{self.lower},inf)"
        right = ")" if self.upper_strict else "]"
        return f"{left}{self.lower},{self.upper}{right}"


EMPTY_INTERVAL = TimeInterval(T0, T0, True, True)
NONNEGATIVE = TimeInterval.at_least(T0)


@dataclass(frozen=True)
class Action:
    """A named action owned by exactly one component (1-based index)."""

    name: str
    component: int

    def __post_init__(self):
        if not isinstance(self.component, int) or self.component < 1:
            raise ValidationError(f"component must be a positive index, got {self.component!r}")


@dataclass(frozen=True)
class Event:
    action: Action
    date: Timestamp

    def __post_init__(self):
        if self.date < T0:
            raise ValidationError(f"event dates must be non-negative, got {self.date}")


@dataclass(frozen=True)
class ApproxEvent:
    action: Action
    interval: TimeInterval

    def __post_init__(self):
        if not self.interval.is_empty and self.interval.lower < T0:
            raise ValidationError("uncertain event intervals must lie within [0, inf)")


@dataclass(frozen=True)
class TimedWord:
    """A finite sequence of dated events with non-decreasing dates.

    Events of one component may share a date only when their sequence
    position makes the intra-instant order explicit (grouped observations).
    """

    events: tuple[Event, ...] = ()

    def __post_init__(self):
        evs = tuple(self.events)
        object.__setattr__(self, "events", evs)
        for prev, cur in zip(evs, evs[1:]):
            if cur.date < prev.date:
                raise OrderingError(
                    f"dates must be non-decreasing: {prev.date} then {cur.date}"
                )

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)

    @property
    def is_empty(self) -> bool:
        return not self.events

    def first_date(self) -> Timestamp:
        return self.events[0].date if self.events else T0

    def last_date(self) -> Timestamp:
        return self.events[-1].date if self.events else T0

    def project(self, component: int, known: Optional[Iterable[int]] = None) -> "TimedWord":
        if known is not None and component not in set(known):
            raise ValidationError(f"unknown component index {component}")
        return TimedWord(tuple(e for e in self.events if e.action.component == component))

    def restrict(self, interval: TimeInterval) -> "TimedWord":
        return TimedWord(tuple(e for e in self.events if interval.contains(e.date)))

    def restrict_until(self, cutoff: Timestamp) -> "TimedWord":
        return self.restrict(TimeInterval.closed(T0, cutoff))

    def concat(self, other: "TimedWord") -> "TimedWord":
        if self.events and other.events and self.last_date() > other.first_date():
            raise OrderingError(
                f"cannot concatenate: {self.last_date()} > {other.first_date()}"
            )
        return TimedWord(self.events + other.events)

    def tensor(self, other: "TimedWord") -> "TimedWord":
        """Merge by ascending date; ties ordered by component then source."""
        merged = sorted(
            self.events + other.events,
            key=lambda e: (e.date.ticks, e.action.component),
        )
        return TimedWord(tuple(merged))

    def approximate(self, skew: Timestamp) -> "ApproxTimedWord":
        """Widen each date to the closed interval of possible reference dates."""
        if skew < T0:
            raise ValidationError(f"skew must be non-negative, got {skew}")
        out = []
        for e in self.events:
            lower = e.date - skew
            if lower < T0:
                lower = T0
            out.append(ApproxEvent(e.action, TimeInterval.closed(lower, e.date + skew)))
        return ApproxTimedWord(tuple(out))


EMPTY_WORD = TimedWord(())


def tensor_all(words: Sequence[TimedWord]) -> TimedWord:
    result = EMPTY_WORD
    for w in words:
        result = result.tensor(w)
    return result


@dataclass(frozen=True)
class ApproxTimedWord:
    """A sequence of uncertain events; intervals may overlap arbitrarily.

    Per-component subsequences retain the order in which the events were
    observed; cross-component order is presentational only.
    """

    events: tuple[ApproxEvent, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[ApproxEvent]:
        return iter(self.events)

    @property
    def is_empty(self) -> bool:
        return not self.events

    @property
    def has_empty_interval(self) -> bool:
        return any(e.interval.is_empty for e in self.events)

    def intersect(self, interval: TimeInterval) -> "ApproxTimedWord":
        return ApproxTimedWord(
            tuple(ApproxEvent(e.action, e.interval.intersect(interval)) for e in self.events)
        )

    def component_indices(self, component: int) -> list[int]:
        return [k for k, e in enumerate(self.events) if e.action.component == component]

    def components(self) -> list[int]:
        seen: dict[int, None] = {}
        for e in self.events:
            seen.setdefault(e.action.component, None)
        return sorted(seen)

    def tensor(self, other: "ApproxTimedWord") -> "ApproxTimedWord":
        """Merge by ascending interval bounds; per-component order preserved."""

        def key(e: ApproxEvent):
            hi = math.inf if e.interval.upper is None else e.interval.upper.ticks
            return (e.interval.lower.ticks, hi, e.action.component)

        return ApproxTimedWord(tuple(sorted(self.events + other.events, key=key)))


EMPTY_ATW = ApproxTimedWord(())


def approx_word(word: TimedWord, skew: Timestamp) -> ApproxTimedWord:
    return word.approximate(skew)


def interleaving_count(word: ApproxTimedWord) -> int:
    """Number of orderings that keep every component's events in sequence."""
    counts: dict[int, int] = {}
    for e in word.events:
        counts[e.action.component] = counts.get(e.action.component, 0) + 1
    total = math.factorial(len(word.events))
    for c in counts.values():
        total //= math.factorial(c)
    return total


def valid_permutations(
    word: ApproxTimedWord, cap: int = DEFAULT_ENUM_CAP
) -> Iterator[tuple[int, ...]]:
    """Yield every ordering of ``word`` preserving per-component order.

    A permutation is a tuple ``perm`` where ``perm[k]`` is the original
    index of the event placed at position ``k``.  Enumeration order is
    deterministic: ascending lexicographic in the original-index sequence.
    """
    if interleaving_count(word) > cap:
        raise ResourceCapError(
            f"{interleaving_count(word)} orderings exceed the cap of {cap}"
        )
    queues: dict[int, list[int]] = {}
    for k, e in enumerate(word.events):
        queues.setdefault(e.action.component, []).append(k)
    heads = {c: 0 for c in queues}
    m = len(word.events)

    def emit(prefix: list[int]) -> Iterator[tuple[int, ...]]:
        if len(prefix) == m:
            yield tuple(prefix)
            return
        candidates = sorted(
            queues[c][heads[c]] for c in queues if heads[c] < len(queues[c])
        )
        for idx in candidates:
            c = word.events[idx].action.component
            heads[c] += 1
            prefix.append(idx)
            yield from emit(prefix)
            prefix.pop()
            heads[c] -= 1

    return emit([])


def apply_permutation(word: ApproxTimedWord, perm: Sequence[int]) -> ApproxTimedWord:
    return ApproxTimedWord(tuple(word.events[i] for i in perm))


def can_escape_window(interval: TimeInterval, window: TimeInterval) -> bool:
    """Whether an event with this date interval may still lie at or beyond
    the window's end.

    Inclusion is decided on bounds: an interval whose closed upper bound
    touches the window's closed end counts as escaping, because the event
    may occur exactly at the cutoff and such events may still be uncollected
    there.  Only intervals ending strictly earlier (or ending open at the
    cutoff) are confined.
    """
    if interval.upper is None:
        return True
    if window.upper is None:
        return False
    if interval.upper > window.upper:
        return True
    return interval.upper == window.upper and not interval.upper_strict


def is_subword_conditioned(
    sub: ApproxTimedWord, word: ApproxTimedWord, within: TimeInterval
) -> bool:
    """Check that ``sub`` keeps, per component, a prefix of ``word``'s events,
    that every kept event may occur in ``within`` and every dropped event may
    still occur at or beyond its end.
    """
    components = set(word.components()) | set(sub.components())
    for c in components:
        w_c = [word.events[i] for i in word.component_indices(c)]
        s_c = [sub.events[i] for i in sub.component_indices(c)]
        if len(s_c) > len(w_c) or s_c != w_c[: len(s_c)]:
            return False
        for kept in s_c:
            if kept.interval.intersect(within).is_empty:
                return False
        for dropped in w_c[len(s_c):]:
            if not can_escape_window(dropped.interval, within):
                return False
    return True


def _kept_index_sets(
    word: ApproxTimedWord, within: TimeInterval, cap: int
) -> Iterator[tuple[int, ...]]:
    """Enumerate index sets that keep a valid per-component prefix.

    Yields sorted index tuples; deterministic order (lexicographic in the
    per-component prefix lengths, components ascending).
    """
    comps = word.components()
    per_comp = {c: word.component_indices(c) for c in comps}
    n_candidates = 1
    for c in comps:
        n_candidates *= len(per_comp[c]) + 1
    if n_candidates > cap:
        raise ResourceCapError(
            f"{n_candidates} candidate subwords exceed the cap of {cap}"
        )
    for lengths in itertools.product(*(range(len(per_comp[c]) + 1) for c in comps)):
        kept: list[int] = []
        ok = True
        for c, take in zip(comps, lengths):
            idxs = per_comp[c]
            for i in idxs[:take]:
                if word.events[i].interval.intersect(within).is_empty:
                    ok = False
                    break
            if not ok:
                break
            for i in idxs[take:]:
                if not can_escape_window(word.events[i].interval, within):
                    ok = False
                    break
            if not ok:
                break
            kept.extend(idxs[:take])
        if ok:
            yield tuple(sorted(kept))


def restrict_atw(
    word: ApproxTimedWord, cutoff: Timestamp, cap: int = DEFAULT_ENUM_CAP
) -> tuple[ApproxTimedWord, ...]:
    """All ways the knowledge in ``word`` truncates at ``cutoff``.

    Each element keeps a valid per-component prefix of events (in original
    order) and clips its intervals to ``[0, cutoff]``.  Duplicates removed;
    deterministic order.
    """
    window = TimeInterval.closed(T0, cutoff)
    out: list[ApproxTimedWord] = []
    seen: set[tuple] = set()
    for kept in _kept_index_sets(word, window, cap):
        clipped = ApproxTimedWord(
            tuple(
                ApproxEvent(word.events[i].action, word.events[i].interval.intersect(window))
                for i in kept
            )
        )
        key = tuple((e.action, e.interval) for e in clipped.events)
        if key not in seen:
            seen.add(key)
            out.append(clipped)
    return tuple(out)


def decompose(
    word: ApproxTimedWord, cutoff: Timestamp, cap: int = DEFAULT_ENUM_CAP
) -> tuple[tuple[ApproxTimedWord, ApproxTimedWord], ...]:
    """Split ``word`` at ``cutoff`` into (ordered kept prefix; remainder) pairs.

    The kept part ranges over every ordering (respecting per-component
    order) of every valid kept set; intervals are left unclipped.  The
    remainder lists the dropped events in their original relative order.
    """
    window = TimeInterval.closed(T0, cutoff)
    subsets = list(_kept_index_sets(word, window, cap))
    total = 0
    for kept in subsets:
        kept_word = ApproxTimedWord(tuple(word.events[i] for i in kept))
        total += interleaving_count(kept_word)
        if total > cap:
            raise ResourceCapError(
                f"decomposition would enumerate more than {cap} candidates"
            )
    out: list[tuple[ApproxTimedWord, ApproxTimedWord]] = []
    seen: set[tuple] = set()
    for kept in subsets:
        kept_set = set(kept)
        kept_word = ApproxTimedWord(tuple(word.events[i] for i in kept))
        remainder = ApproxTimedWord(
            tuple(word.events[i] for i in range(len(word.events)) if i not in kept_set)
        )
        for perm in valid_permutations(kept_word, cap):
            ordered = apply_permutation(kept_word, perm)
            key = (
                tuple((e.action, e.interval) for e in ordered.events),
                tuple((e.action, e.interval) for e in remainder.events),
            )
            if key not in seen:
                seen.add(key)
                out.append((ordered, remainder))
    return tuple(out)


def ordered_member(word: ApproxTimedWord, candidate: TimedWord) -> bool:
    """Membership in the ordered language: same actions, dates in intervals."""
    if len(word.events) != len(candidate.events):
        return False
    for approx, concrete in zip(word.events, candidate.events):
        if approx.action != concrete.action:
            return False
        if not approx.interval.contains(concrete.date):
            return False
    return True


def unordered_member(
    word: ApproxTimedWord, candidate: TimedWord, cap: int = DEFAULT_ENUM_CAP
) -> bool:
    """Membership in the unordered language: some valid ordering matches."""
    if len(word.events) != len(candidate.events):
        return False
    for perm in valid_permutations(word, cap):
        if ordered_member(apply_permutation(word, perm), candidate):
            return True
    return False
