"""HTTP service wrapping the monitoring toolkit.

Every endpoint is stateless: requests carry the property and scenario
documents inline, responses carry the produced artifacts (verdict
timelines, traces, reports) so clients never need shared storage.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Any, Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from . import automaton as am
from . import jsonio
from . import oracle as orc
from . import simulator as sim
from .errors import (
    AssumptionError,
    DtmonError,
    ResourceCapError,
    ValidationError,
)
from .timebase import DEFAULT_ENUM_CAP, Timestamp, using_resolution

app = FastAPI(title="dtmon", version=__version__)


@app.exception_handler(DtmonError)
async def _dtmon_error(request: Request, exc: DtmonError) -> JSONResponse:
    if isinstance(exc, ValidationError):
        status, kind = 422, "validation"
    elif isinstance(exc, AssumptionError):
        status, kind = 409, "assumption"
    elif isinstance(exc, ResourceCapError):
        status, kind = 413, "resource"
    else:
        status, kind = 500, "internal"
    body: dict[str, Any] = {"kind": kind, "message": str(exc)}
    if isinstance(exc, AssumptionError):
        body["assumption"] = exc.assumption
    return JSONResponse(status_code=status, content={"error": body})


class PropertyRequest(BaseModel):
    property: dict
    auto_complete: bool = False
    allow_non_absorbing: bool = False


class ValidateResponse(BaseModel):
    valid: bool
    hash: str
    locations: list[str]
    clocks: list[str]
    components: list[str]
    absorbing: bool


class PrecomputeResponse(BaseModel):
    hash: str
    mode: str
    sets: dict


class SimulateRequest(BaseModel):
    property: dict
    scenario: dict
    auto_complete: bool = False
    allow_non_absorbing: bool = False
    seed: Optional[int] = None
    skew: Optional[float] = None
    resolution: Optional[int] = None
    threads: int = 1
    cap_decomp: Optional[int] = None
    property_sets: Optional[dict] = Field(
        default=None, description="previously precomputed outcome sets"
    )


class SimulateResponse(BaseModel):
    header: dict
    verdicts: list[dict]
    global_trace: list[dict]
    deliveries: list[dict]
    summary: dict


class ReplayRequest(BaseModel):
    property: dict
    replay: dict
    auto_complete: bool = False
    allow_non_absorbing: bool = False
    resolution: Optional[int] = None
    threads: int = 1


class OracleCheckRequest(BaseModel):
    property: dict
    scenario: dict
    seed: Optional[int] = None
    cap_decomp: Optional[int] = None
    max_events: int = 8
    subdivisions: int = 2


class OracleCheckResponse(BaseModel):
    passed: bool
    checks: list[dict]


class ExplainRequest(BaseModel):
    property: dict
    scenario: dict
    monitor: int
    time: float
    seed: Optional[int] = None


class ExplainResponse(BaseModel):
    monitor: int
    local_time: int
    oldest_known: int
    cutoff: int
    verdict: str
    entries: list[dict]


def _load_property(doc: dict, auto_complete: bool, allow_non_absorbing: bool):
    resolution = doc.get("resolution", 1000)
    with using_resolution(resolution):
        ta = am.load_validate(
            doc, auto_complete=auto_complete, allow_non_absorbing=allow_non_absorbing
        )
    return ta


def _apply_overrides(req: SimulateRequest) -> tuple[dict, dict]:
    prop = dict(req.property)
    scen = dict(req.scenario)
    if req.resolution is not None:
        prop["resolution"] = req.resolution
        scen["resolution"] = req.resolution
    if req.seed is not None:
        scen["seed"] = req.seed
    if req.skew is not None:
        scen["skew"] = req.skew
    scen.setdefault("resolution", prop.get("resolution", 1000))
    return prop, scen


def _summary(trace: sim.SimTrace) -> dict:
    first_definitive = {}
    for u in trace.updates:
        if u.definitive and u.monitor not in first_definitive:
            first_definitive[u.monitor] = u.local_time.ticks
    return {
        "verdicts": {str(i): v for i, v in trace.verdicts().items()},
        "firstDefinitiveLocalTime": {
            str(i): t for i, t in sorted(first_definitive.items())
        },
        "updates": len(trace.updates),
        "deliveries": len(trace.deliveries),
    }


def _simulate_response(trace: sim.SimTrace) -> SimulateResponse:
    head = jsonio.header_record(
        trace.resolution, trace.scenario_hash, seed=trace.seed, skew=trace.skew.ticks
    )
    return SimulateResponse(
        header=head,
        verdicts=trace.verdict_records(),
        global_trace=[jsonio.event_to_json(e) for e in trace.global_trace.events],
        deliveries=[
            {
                "src": d.message.source,
                "dst": d.message.dest,
                "seq": d.message.seq,
                "t": d.message.timestamp.ticks,
                "actions": list(d.message.actions),
                "sent": d.message.sent.ticks,
                "delivered": d.delivered.ticks,
            }
            for d in trace.deliveries
        ],
        summary=_summary(trace),
    )


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/validate", response_model=ValidateResponse)
def validate(req: PropertyRequest) -> ValidateResponse:
    ta = _load_property(req.property, req.auto_complete, req.allow_non_absorbing)
    return ValidateResponse(
        valid=True,
        hash=jsonio.content_hash(req.property),
        locations=list(ta.locations),
        clocks=list(ta.clocks),
        components=list(ta.components),
        absorbing=am.is_absorbing(ta),
    )


@app.post("/precompute", response_model=PrecomputeResponse)
def precompute(req: PropertyRequest) -> PrecomputeResponse:
    ta = _load_property(req.property, req.auto_complete, req.allow_non_absorbing)
    props = am.precompute_property_sets(ta)
    return PrecomputeResponse(
        hash=jsonio.content_hash(req.property),
        mode=props.mode,
        sets=am.property_sets_to_json(props),
    )


def _prepare(req: SimulateRequest):
    prop_doc, scen_doc = _apply_overrides(req)
    ta = _load_property(prop_doc, req.auto_complete, req.allow_non_absorbing)
    if req.property_sets is not None:
        props = am.property_sets_from_json(req.property_sets)
    else:
        props = am.precompute_property_sets(ta)
    with using_resolution(ta.resolution):
        scenario = sim.load_scenario(scen_doc, ta)
    return ta, props, scenario


@app.post("/simulate", response_model=SimulateResponse)
def simulate(req: SimulateRequest) -> SimulateResponse:
    ta, props, scenario = _prepare(req)
    with using_resolution(ta.resolution):
        trace = sim.run(
            scenario, ta, props, threads=req.threads, decomp_cap=req.cap_decomp
        )
    return _simulate_response(trace)


@app.post("/replay", response_model=SimulateResponse)
def replay(req: ReplayRequest) -> SimulateResponse:
    prop_doc = dict(req.property)
    replay_doc = dict(req.replay)
    if req.resolution is not None:
        prop_doc["resolution"] = req.resolution
        replay_doc["resolution"] = req.resolution
    ta = _load_property(prop_doc, req.auto_complete, req.allow_non_absorbing)
    props = am.precompute_property_sets(ta)
    with using_resolution(ta.resolution):
        trace = sim.replay(replay_doc, ta, props, threads=req.threads)
    return _simulate_response(trace)


@app.post("/oracle-check", response_model=OracleCheckResponse)
def oracle_check(req: OracleCheckRequest) -> OracleCheckResponse:
    sim_req = SimulateRequest(
        property=req.property, scenario=req.scenario, seed=req.seed,
        cap_decomp=req.cap_decomp,
    )
    ta, props, scenario = _prepare(sim_req)
    checks: list[dict] = []
    with using_resolution(ta.resolution):
        trace = sim.run(scenario, ta, props, decomp_cap=req.cap_decomp)
        for mid, mon in sorted(trace.monitors.items()):
            for idx, upd in enumerate(mon.updates):
                collected = mon.collected_word_at(upd)
                widened = orc.widen(collected, scenario.skew)
                true_prefix = trace.global_trace.restrict_until(upd.cutoff)
                fword = tuple(
                    (e.action, Fraction(e.date.ticks)) for e in true_prefix.events
                )
                ok = any(
                    orc.word_in_unordered(part, fword, req.max_events)
                    for part in _restrict_naive(widened, upd.cutoff, req.max_events)
                )
                checks.append(
                    {
                        "name": "true-prefix-membership",
                        "monitor": mid,
                        "update": idx,
                        "passed": bool(ok),
                    }
                )
            if mon.updates:
                last = mon.updates[-1]
                expected = orc.naive_verdict(
                    mon.collected_word_at(last),
                    scenario.skew,
                    last.cutoff,
                    ta,
                    props,
                    subdivisions=req.subdivisions,
                )
                checks.append(
                    {
                        "name": "verdict-agreement",
                        "monitor": mid,
                        "passed": mon.verdict == expected,
                        "monitorVerdict": mon.verdict.wire,
                        "oracleVerdict": expected.wire,
                    }
                )
    return OracleCheckResponse(passed=all(c["passed"] for c in checks), checks=checks)


def _restrict_naive(widened, cutoff, max_events):
    from .timebase import T0, TimeInterval

    window = TimeInterval.closed(T0, cutoff)
    parts = []
    for kept, _rem in orc.naive_decompose(widened, cutoff, max_events):
        clipped = kept.intersect(window)
        if not clipped.has_empty_interval:
            parts.append(clipped)
    return parts


@app.post("/explain", response_model=ExplainResponse)
def explain(req: ExplainRequest) -> ExplainResponse:
    sim_req = SimulateRequest(
        property=req.property, scenario=req.scenario, seed=req.seed
    )
    ta, props, scenario = _prepare(sim_req)
    with using_resolution(ta.resolution):
        until = Timestamp.from_units(req.time, ta.resolution)
        trace = sim.run_until(scenario, ta, props, req.monitor, until)
        mon = trace.monitors[req.monitor]
        entries = [
            {
                "configs": am.render_config_set(ta, b.configs),
                "remainder": jsonio.atw_to_json(b.pending),
            }
            for b in mon.branches
        ]
    return ExplainResponse(
        monitor=req.monitor,
        local_time=mon.local_time.ticks,
        oldest_known=mon.frontier.oldest().ticks,
        cutoff=mon.oldest_processed.ticks - scenario.skew.ticks,
        verdict=mon.verdict.wire,
        entries=entries,
    )
