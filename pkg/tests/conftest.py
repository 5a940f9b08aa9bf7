"""Shared builders for properties, scenarios and random instances."""
from __future__ import annotations

import random

import pytest
from hypothesis import HealthCheck, settings

from dtmon import automaton as am
from dtmon import timebase as tb

settings.register_profile(
    "suite",
    max_examples=60,
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


def action(name: str, comp: int) -> tb.Action:
    return tb.Action(name, comp)


def word(*pairs) -> tb.TimedWord:
    """pairs of (Action, ticks)"""
    return tb.TimedWord(tuple(tb.Event(a, tb.Timestamp(t)) for a, t in pairs))


def atw(*triples) -> tb.ApproxTimedWord:
    """triples of (Action, lo ticks, hi ticks) with closed bounds"""
    return tb.ApproxTimedWord(
        tuple(
            tb.ApproxEvent(a, tb.TimeInterval.closed(tb.Timestamp(lo), tb.Timestamp(hi)))
            for a, lo, hi in triples
        )
    )


def names(w) -> list[str]:
    return [e.action.name for e in w.events]


# ---------------------------------------------------------------------------
# Reference properties
# ---------------------------------------------------------------------------


def window_property_doc(resolution: int = 1) -> dict:
    """Reach 'good' iff the first 'a' fires with x >= 2; 'b'/'c' are noise."""
    comps = {"m1": ["a"], "m2": ["b"], "m3": ["c"]}
    noise = ["b", "c"]
    transitions = [
        {"from": "idle", "to": "good", "action": "a",
         "guard": [{"lhs": "x", "op": ">=", "const": 2}], "reset": []},
        {"from": "idle", "to": "dead", "action": "a",
         "guard": [{"lhs": "x", "op": "<", "const": 2}], "reset": []},
    ]
    for n in noise:
        transitions.append({"from": "idle", "to": "idle", "action": n, "guard": [], "reset": []})
    for loc in ("good", "dead"):
        for a in ("a", "b", "c"):
            transitions.append({"from": loc, "to": loc, "action": a, "guard": [], "reset": []})
    return {
        "resolution": resolution,
        "clocks": ["x"],
        "components": comps,
        "locations": ["idle", "good", "dead"],
        "initial": "idle",
        "final": ["good"],
        "transitions": transitions,
    }


def tracker_property_doc(resolution: int = 1000) -> dict:
    """One location, one clock per action, reset on that action; accepts always."""
    return {
        "resolution": resolution,
        "clocks": ["xa", "xb", "xc"],
        "components": {"m1": ["a"], "m2": ["b"], "m3": ["c"]},
        "locations": ["l0"],
        "initial": "l0",
        "final": ["l0"],
        "transitions": [
            {"from": "l0", "to": "l0", "action": a, "guard": [], "reset": [f"x{a}"]}
            for a in ("a", "b", "c")
        ],
    }


@pytest.fixture(scope="session")
def window_property():
    with tb.using_resolution(1):
        ta = am.load_validate(window_property_doc(1))
        props = am.precompute_property_sets(ta)
    return ta, props


@pytest.fixture(scope="session")
def tracker_property():
    with tb.using_resolution(1000):
        ta = am.load_validate(tracker_property_doc())
        props = am.precompute_property_sets(ta)
    return ta, props


# ---------------------------------------------------------------------------
# Random instance generators (deterministic per seed)
# ---------------------------------------------------------------------------

ACTIONS_BY_COMPONENT = {1: "a", 2: "b", 3: "c"}


def random_atw(rng: random.Random, max_events: int = 5, max_tick: int = 20,
               max_skew: int = 3, n_comps: int = 3) -> tb.ApproxTimedWord:
    """A widened word as a monitor would hold it: closed +/- skew intervals."""
    m = rng.randint(0, max_events)
    skew = rng.randint(0, max_skew)
    dates: dict[int, list[int]] = {c: [] for c in range(1, n_comps + 1)}
    events = []
    for _ in range(m):
        c = rng.randint(1, n_comps)
        prev = dates[c][-1] if dates[c] else -1
        t = rng.randint(prev + 1, prev + 1 + max_tick // max(1, m))
        dates[c].append(t)
        events.append((tb.Action(ACTIONS_BY_COMPONENT[c], c), t))
    events.sort(key=lambda et: (et[1], et[0].component))
    return tb.ApproxTimedWord(
        tuple(
            tb.ApproxEvent(
                a,
                tb.TimeInterval.closed(tb.Timestamp(max(0, t - skew)), tb.Timestamp(t + skew)),
            )
            for a, t in events
        )
    )


def random_automaton_doc(
    rng: random.Random,
    n_comps: int = 3,
    max_locations: int = 4,
    n_clocks: int = 1,
    max_const: int = 3,
) -> dict:
    """A random deterministic complete automaton with an absorbing accepting set.

    Guards split a single clock at a constant with a <= / > pair, so every
    (location, action) is total by construction.
    """
    n_locs = rng.randint(2, max_locations)
    locations = [f"l{i}" for i in range(n_locs)]
    clocks = [f"x{i}" for i in range(n_clocks)]
    comps = {f"m{c}": [ACTIONS_BY_COMPONENT[c]] for c in range(1, n_comps + 1)}
    final = {rng.choice(locations)}
    transitions = []
    for loc in locations:
        for c in range(1, n_comps + 1):
            a = ACTIONS_BY_COMPONENT[c]

            def pick_target():
                tgt = rng.choice(locations)
                if loc in final:
                    return loc  # keep the accepting set absorbing
                return tgt

            if rng.random() < 0.5:
                transitions.append(
                    {"from": loc, "to": pick_target(), "action": a, "guard": [],
                     "reset": rng.sample(clocks, k=rng.randint(0, n_clocks))}
                )
            else:
                x = rng.choice(clocks)
                k = rng.randint(1, max_const)
                for op, side in (("<=", 0), (">", 1)):
                    transitions.append(
                        {
                            "from": loc,
                            "to": pick_target(),
                            "action": a,
                            "guard": [{"lhs": x, "op": op, "const": k}],
                            "reset": rng.sample(clocks, k=rng.randint(0, n_clocks)),
                        }
                    )
    doc = {
        "resolution": 1,
        "clocks": clocks,
        "components": comps,
        "locations": locations,
        "initial": locations[0],
        "final": sorted(final),
        "transitions": transitions,
    }
    return doc


def load_random_property(seed: int, **kw):
    rng = random.Random(seed)
    doc = random_automaton_doc(rng, **kw)
    with tb.using_resolution(1):
        ta = am.load_validate(doc)
        props = am.precompute_property_sets(ta)
    return ta, props


def random_scenario_doc(
    rng: random.Random,
    n_comps: int = 3,
    max_events: int = 4,
    skew_ticks: int = 1,
    span: int = 10,
) -> dict:
    """A scripted scenario with random dates, offsets and delays."""
    total = rng.randint(1, max_events)
    per_comp: dict[int, list[int]] = {c: [] for c in range(1, n_comps + 1)}
    for _ in range(total):
        c = rng.randint(1, n_comps)
        prev = per_comp[c][-1] if per_comp[c] else 0
        nxt = prev + rng.randint(1, max(1, span // total))
        per_comp[c].append(nxt)
    components = []
    horizon = span + 8 * max(skew_ticks, 1)
    for c in range(1, n_comps + 1):
        # piecewise-constant offsets within the bound, drops of at most 1 tick
        steps = [[0, rng.randint(-skew_ticks, skew_ticks)]]
        at = 0
        for _ in range(rng.randint(0, 2)):
            at += rng.randint(1, span // 2 + 1)
            lo = max(-skew_ticks, steps[-1][1] - 1)
            steps.append([at, rng.randint(lo, skew_ticks)])
        components.append(
            {
                "name": f"m{c}",
                "events": [[ACTIONS_BY_COMPONENT[c], t] for t in per_comp[c]],
                "skew_profile": steps,
            }
        )
    return {
        "resolution": 1,
        "skew": skew_ticks,
        "horizon": horizon,
        "seed": rng.randint(0, 10**6),
        "components": components,
        "delays": {"model": "uniform", "max": rng.randint(0, 4 * skew_ticks)},
    }
