"""Canonical JSON helpers: stable serialization, hashing, JSONL wire formats."""
from __future__ import annotations

import hashlib
import json
from typing import Iterable, Mapping

from .errors import ValidationError
from .timebase import (
    Action,
    ApproxEvent,
    ApproxTimedWord,
    Event,
    TimeInterval,
    TimedWord,
    Timestamp,
)


def canonical_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def content_hash(obj) -> str:
    return hashlib.sha256(canonical_dumps(obj).encode("utf-8")).hexdigest()


def header_record(resolution: int, config_hash: str, **extra) -> dict:
    rec = {"header": {"resolution": resolution, "configHash": config_hash}}
    rec["header"].update(extra)
    return rec


def event_to_json(event: Event) -> dict:
    return {"action": event.action.name, "comp": event.action.component, "t": event.date.ticks}


def event_from_json(obj: Mapping) -> Event:
    return Event(Action(obj["action"], obj["comp"]), Timestamp(obj["t"]))


def approx_event_to_json(event: ApproxEvent) -> dict:
    iv = event.interval
    if iv.upper is None:
        raise ValidationError("cannot serialize an unbounded interval")
    return {
        "action": event.action.name,
        "comp": event.action.component,
        "lo": iv.lower.ticks,
        "hi": iv.upper.ticks,
        "loStrict": iv.lower_strict,
        "hiStrict": iv.upper_strict,
    }


def approx_event_from_json(obj: Mapping) -> ApproxEvent:
    return ApproxEvent(
        Action(obj["action"], obj["comp"]),
        TimeInterval(
            Timestamp(obj["lo"]),
            Timestamp(obj["hi"]),
            bool(obj.get("loStrict", False)),
            bool(obj.get("hiStrict", False)),
        ),
    )


def word_to_jsonl(word: TimedWord, resolution: int, config_hash: str = "") -> list[dict]:
    return [header_record(resolution, config_hash)] + [event_to_json(e) for e in word.events]


def atw_to_json(word: ApproxTimedWord) -> list[dict]:
    return [approx_event_to_json(e) for e in word.events]


def write_jsonl(path, records: Iterable[Mapping]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(canonical_dumps(rec))
            fh.write("\n")


def read_jsonl(path) -> list[dict]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out
