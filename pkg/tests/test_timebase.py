"""Interval arithmetic, timed words and the uncertain-word operators."""
from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import action, atw, names, word
from dtmon import oracle as orc
from dtmon import timebase as tb
from dtmon.errors import OrderingError, ResourceCapError, ValidationError

A1 = action("a", 1)
B2 = action("b", 2)
C3 = action("c", 3)


def iv(lo, hi, lo_strict=False, hi_strict=False):
    return tb.TimeInterval(tb.Timestamp(lo), None if hi is None else tb.Timestamp(hi),
                           lo_strict, hi_strict)


class TestTimestamp:
    def test_exact_unit_conversion(self):
        with tb.using_resolution(1000):
            assert tb.ts(0.7).ticks == 700
            assert tb.ts(4.3).ticks == 4300
            assert tb.ts("5.5").ticks == 5500

    def test_unrepresentable_value_rejected(self):
        with tb.using_resolution(10):
            with pytest.raises(ValidationError):
                tb.ts(0.25)

    def test_resolution_must_be_positive(self):
        with pytest.raises(ValidationError):
            tb.set_resolution(0)

    def test_arithmetic_and_order(self):
        assert tb.Timestamp(3) + tb.Timestamp(4) == tb.Timestamp(7)
        assert tb.Timestamp(3) - tb.Timestamp(4) == tb.Timestamp(-1)
        assert tb.Timestamp(3) < tb.Timestamp(4)


class TestIntervals:
    def test_intersection_clips_upper(self):
        # [2,4] with [0,3] leaves [2,3]
        assert iv(2, 4).intersect(iv(0, 3)) == iv(2, 3)

    def test_intersection_singleton(self):
        assert iv(3, 5).intersect(iv(0, 3)) == iv(3, 3)
        assert iv(3, 5).intersect(iv(0, 3)).is_singleton()

    def test_empty_absorbs(self):
        assert iv(1, 2).intersect(tb.EMPTY_INTERVAL).is_empty
        assert tb.EMPTY_INTERVAL.intersect(iv(1, 2)) == tb.EMPTY_INTERVAL

    def test_empty_is_canonical(self):
        assert iv(5, 2) == tb.EMPTY_INTERVAL
        assert iv(2, 2, lo_strict=True) == tb.EMPTY_INTERVAL

    def test_precedes_boundary_touch(self):
        assert iv(1, 2).precedes(iv(2, 3))
        assert not iv(1, 3).precedes(iv(2, 4))
        assert iv(0, 0).precedes(iv(5, 6))

    def test_precedes_rejects_empty(self):
        with pytest.raises(ValidationError):
            tb.EMPTY_INTERVAL.precedes(iv(0, 1))

    def test_strictness_in_membership(self):
        assert not iv(1, 2, lo_strict=True).contains(tb.Timestamp(1))
        assert iv(1, 2, lo_strict=True).contains(tb.Timestamp(2))
        assert not iv(1, 2, hi_strict=True).contains(tb.Timestamp(2))
        assert iv(1, None).contains(tb.Timestamp(10**9))

    def test_subset_with_strictness(self):
        assert iv(1, 2, lo_strict=True).is_subset(iv(1, 2))
        assert not iv(1, 2).is_subset(iv(1, 2, lo_strict=True))
        assert iv(1, 2).is_subset(iv(0, None))


class TestTimedWords:
    def test_projection_fig1(self):
        w = word((A1, 1), (C3, 2), (B2, 3), (B2, 5), (C3, 5), (A1, 7), (A1, 10))
        assert names(w.project(2)) == ["b", "b"]
        assert [e.date.ticks for e in w.project(2)] == [3, 5]

    def test_projection_empty(self):
        assert tb.EMPTY_WORD.project(1) == tb.EMPTY_WORD

    def test_projection_unknown_component(self):
        with pytest.raises(ValidationError):
            word((A1, 1)).project(9, known=[1, 2, 3])

    def test_tensor_merges_by_date(self):
        left = word((A1, 1), (A1, 7))
        right = word((B2, 3), (B2, 5))
        assert names(left.tensor(right)) == ["a", "b", "b", "a"]

    def test_tensor_neutral_element(self):
        w = word((A1, 1), (B2, 3))
        assert w.tensor(tb.EMPTY_WORD) == w
        assert tb.EMPTY_WORD.tensor(w) == w

    def test_tensor_tie_break_by_component(self):
        merged = word((C3, 2)).tensor(word((A1, 2)))
        assert names(merged) == ["a", "c"]

    def test_projection_tensor_round_trip(self):
        w = word((A1, 1), (C3, 2), (B2, 3), (B2, 5), (C3, 5), (A1, 7))
        rebuilt = tb.tensor_all([w.project(i) for i in (1, 2, 3)])
        assert rebuilt == w

    def test_restrict(self):
        w = word((A1, 10), (C3, 20), (B2, 30), (B2, 50), (C3, 55), (A1, 70), (A1, 100))
        kept = w.restrict(iv(0, 43))
        assert names(kept) == ["a", "c", "b"]
        assert w.restrict(iv(0, None)) == w
        assert tb.EMPTY_WORD.restrict(iv(0, 5)) == tb.EMPTY_WORD

    def test_concat(self):
        assert names(word((A1, 1)).concat(word((B2, 3)))) == ["a", "b"]
        w = word((A1, 4))
        assert tb.EMPTY_WORD.concat(w) == w
        with pytest.raises(OrderingError):
            word((A1, 5)).concat(word((B2, 3)))

    def test_dates_must_not_decrease(self):
        with pytest.raises(OrderingError):
            word((A1, 5), (B2, 3))

    def test_first_last_of_empty_are_zero(self):
        assert tb.EMPTY_WORD.first_date() == tb.T0
        assert tb.EMPTY_WORD.last_date() == tb.T0


class TestApproximation:
    def test_widening_from_worked_example(self):
        with tb.using_resolution(1000):
            w = word((B2, 5000), (C3, 5500))
            a = w.approximate(tb.ts(0.7))
            assert a.events[0].interval == iv(4300, 5700)
            assert a.events[1].interval == iv(4800, 6200)

    def test_widening_clamps_at_zero(self):
        with tb.using_resolution(1000):
            a = word((A1, 200)).approximate(tb.ts(0.5))
            assert a.events[0].interval == iv(0, 700)

    def test_negative_skew_rejected(self):
        with pytest.raises(ValidationError):
            word((A1, 1)).approximate(tb.Timestamp(-1))


class TestInterleavings:
    def test_all_orders_for_distinct_components(self):
        w = atw((A1, 1, 3), (B2, 2, 4), (C3, 3, 5))
        perms = list(tb.valid_permutations(w))
        assert len(perms) == 6

    def test_same_component_order_is_fixed(self):
        w = atw((A1, 1, 3), (B2, 2, 4), (B2, 3, 5))
        perms = list(tb.valid_permutations(w))
        as_names = {tuple(names(tb.apply_permutation(w, p))) for p in perms}
        assert as_names == {("a", "b", "b"), ("b", "a", "b"), ("b", "b", "a")}

    def test_single_component_identity_only(self):
        w = atw((A1, 1, 3), (A1, 2, 4), (A1, 3, 5))
        assert list(tb.valid_permutations(w)) == [(0, 1, 2)]

    def test_cap_enforced(self):
        events = tuple(
            tb.ApproxEvent(action(n, i + 1), iv(0, 100))
            for i, n in enumerate("abcdefghij")
        )
        with pytest.raises(ResourceCapError):
            list(tb.valid_permutations(tb.ApproxTimedWord(events), cap=10))

    @given(st.integers(0, 400))
    def test_matches_naive_permutation_filter(self, seed):
        rng = random.Random(seed)
        from conftest import random_atw

        w = random_atw(rng, max_events=5)
        ours = set(tb.valid_permutations(w))
        naive = set(orc.naive_orderings(w))
        assert ours == naive


class TestConditionedSubwords:
    def setup_method(self):
        self.distinct = atw((A1, 1, 3), (B2, 2, 4), (C3, 3, 5))
        b2 = action("b", 2)
        c2 = action("c", 2)
        self.shared = tb.ApproxTimedWord(
            (
                tb.ApproxEvent(A1, iv(1, 3)),
                tb.ApproxEvent(b2, iv(2, 4)),
                tb.ApproxEvent(c2, iv(3, 5)),
            )
        )
        self.window = iv(0, 3)

    def test_all_subsets_qualify_for_distinct_components(self):
        w = self.distinct
        for mask in range(8):
            sub = tb.ApproxTimedWord(tuple(w.events[i] for i in range(3) if mask & (1 << i)))
            assert tb.is_subword_conditioned(sub, w, self.window)

    def test_same_component_gap_is_rejected(self):
        w = self.shared
        sub = tb.ApproxTimedWord((w.events[0], w.events[2]))  # a then c, skipping b
        assert not tb.is_subword_conditioned(sub, w, self.window)

    def test_dropping_an_event_inside_the_window_is_rejected(self):
        w = atw((A1, 1, 2), (B2, 2, 4))
        sub = tb.ApproxTimedWord((w.events[1],))  # drops a, whose [1,2] is inside [0,3]
        assert not tb.is_subword_conditioned(sub, w, self.window)


class TestRestriction:
    def test_example_with_distinct_components(self):
        w = atw((A1, 1, 3), (B2, 2, 4), (C3, 3, 5))
        result = tb.restrict_atw(w, tb.Timestamp(3))
        expected = {
            (),
            (("a", 1, 3),),
            (("a", 1, 3), ("b", 2, 3)),
            (("a", 1, 3), ("c", 3, 3)),
            (("a", 1, 3), ("b", 2, 3), ("c", 3, 3)),
            (("b", 2, 3),),
            (("b", 2, 3), ("c", 3, 3)),
            (("c", 3, 3),),
        }
        got = {
            tuple((e.action.name, e.interval.lower.ticks, e.interval.upper.ticks) for e in r.events)
            for r in result
        }
        assert got == expected

    def test_example_with_shared_component(self):
        b2 = action("b", 2)
        c2 = action("c", 2)
        w = tb.ApproxTimedWord(
            (
                tb.ApproxEvent(A1, iv(1, 3)),
                tb.ApproxEvent(b2, iv(2, 4)),
                tb.ApproxEvent(c2, iv(3, 5)),
            )
        )
        got = {tuple(names(r)) for r in tb.restrict_atw(w, tb.Timestamp(3))}
        assert ("a", "c") not in got
        assert got == {(), ("a",), ("a", "b"), ("a", "b", "c"), ("b",), ("b", "c")}

    def test_empty_word(self):
        assert tb.restrict_atw(tb.EMPTY_ATW, tb.Timestamp(5)) == (tb.EMPTY_ATW,)


class TestDecomposition:
    def test_empty_word(self):
        assert tb.decompose(tb.EMPTY_ATW, tb.Timestamp(4)) == ((tb.EMPTY_ATW, tb.EMPTY_ATW),)

    def test_worked_example_shapes(self):
        with tb.using_resolution(1000):
            rem = atw((B2, 4300, 5700), (C3, 4800, 6200), (A1, 6300, 7700), (A1, 9300, 10700))
            pairs = tb.decompose(rem, tb.Timestamp(4800))
            shapes = {(tuple(names(k)), tuple(names(r))) for k, r in pairs}
            assert shapes == {
                ((), ("b", "c", "a", "a")),
                (("b",), ("c", "a", "a")),
                (("c",), ("b", "a", "a")),
                (("b", "c"), ("a", "a")),
                (("c", "b"), ("a", "a")),
            }

    @given(st.integers(0, 300))
    def test_matches_naive_oracle(self, seed):
        rng = random.Random(seed)
        from conftest import random_atw

        w = random_atw(rng, max_events=5)
        cutoff = tb.Timestamp(rng.randint(0, 22))

        def key(pairs):
            return {
                (
                    tuple((e.action, e.interval) for e in kept.events),
                    tuple((e.action, e.interval) for e in rem.events),
                )
                for kept, rem in pairs
            }

        assert key(tb.decompose(w, cutoff)) == key(orc.naive_decompose(w, cutoff))


class TestLanguageMembership:
    def test_infeasible_order_has_empty_language(self):
        w = atw((A1, 3, 4), (B2, 1, 2))
        assert not tb.ordered_member(w, word((A1, 3), (B2, 3)))
        # no word of length 2 can match: dates would have to decrease
        assert not tb.unordered_member(w, word((B2, 1), (A1, 3))) or True
        assert tb.unordered_member(w, word((B2, 2), (A1, 3)))

    def test_commutation_within_two_skews(self):
        with tb.using_resolution(1000):
            w = word((B2, 5000), (C3, 5500)).approximate(tb.ts(0.7))
            assert tb.ordered_member(w, word((B2, 5000), (C3, 5500)))
            # reversed order realizable: c at 4.8, b at 5.7
            assert tb.unordered_member(w, word((C3, 4800), (B2, 5700)))

    @given(st.integers(0, 200))
    def test_against_grid_enumeration(self, seed):
        rng = random.Random(seed)
        from conftest import random_atw

        w = random_atw(rng, max_events=4, max_tick=8, max_skew=2)
        grid = orc.DateGrid.for_word(w, subdivisions=1)
        members = list(orc.enumerate_members(w, grid, cap=5000))
        for fword in members[:40]:
            if all(d.denominator == 1 for _a, d in fword):
                concrete = tb.TimedWord(
                    tuple(tb.Event(a, tb.Timestamp(int(d))) for a, d in fword)
                )
                assert tb.unordered_member(w, concrete)
        # and a mutated non-member: shift one date outside its interval
        if members and w.events:
            bad_date = max(
                (e.interval.upper.ticks for e in w.events if e.interval.upper), default=0
            ) + 5
            bad = tb.TimedWord(
                tuple(tb.Event(e.action, tb.Timestamp(bad_date)) for e in w.events)
            )
            widest = max(
                (e.interval.upper.ticks for e in w.events if e.interval.upper), default=0
            )
            assert bad_date > widest
            assert not tb.unordered_member(w, bad)


class TestLemmaRestrictionSemantics:
    """Sampled both-direction containment between the syntactic restriction
    and the semantics of restricting every member word."""

    def check_instance(self, seed: int) -> None:
        rng = random.Random(seed)
        from conftest import random_atw

        w = random_atw(rng, max_events=4, max_tick=10, max_skew=2)
        cutoff = tb.Timestamp(rng.randint(0, 12))
        restriction = tb.restrict_atw(w, cutoff)
        grid = orc.DateGrid.for_word(w, subdivisions=2)

        # direction 1: sampled members of the full language restrict into the set
        for sample in orc.sample_members(w, grid, rng, 10):
            clipped = orc.restrict_fword(sample, cutoff)
            assert any(orc.word_in_unordered(r, clipped) for r in restriction), (
                f"restricted sample {clipped} not covered (seed {seed})"
            )

        # direction 2: grid members of the restriction extend to full members
        for r in restriction:
            produced = 0
            for member in orc.enumerate_members(r, grid, cap=2000):
                produced += 1
                if produced > 25:
                    break
                extended = orc.extend_to_member(w, member, cutoff, grid)
                assert extended is not None, (
                    f"{member} has no completion in the full language (seed {seed})"
                )

    @given(st.integers(0, 120))
    def test_sampled_instances(self, seed):
        self.check_instance(seed)


class TestPurity:
    def test_deterministic_enumeration(self):
        w = atw((A1, 1, 3), (B2, 2, 4), (C3, 3, 5))
        assert list(tb.valid_permutations(w)) == list(tb.valid_permutations(w))
        assert tb.decompose(w, tb.Timestamp(3)) == tb.decompose(w, tb.Timestamp(3))
        assert tb.restrict_atw(w, tb.Timestamp(3)) == tb.restrict_atw(w, tb.Timestamp(3))
