"""Command-line client for the monitoring service.

The CLI is a thin HTTP client: it reads local documents, posts them to the
service, and writes the returned artifacts.  By default requests run
against an in-process instance of the application; ``--server`` points the
same commands at a remote deployment.

Exit codes: 0 success (verdicts, including Inconc, are data); 2 validation
error; 3 assumption violation; 4 resource cap exceeded; 1 anything else.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional

import httpx

from . import jsonio

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_VALIDATION = 2
EXIT_ASSUMPTION = 3
EXIT_RESOURCE = 4

_KIND_CODES = {"validation": EXIT_VALIDATION, "assumption": EXIT_ASSUMPTION,
               "resource": EXIT_RESOURCE}


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class _InProcessTransport(httpx.BaseTransport):
    """Synchronous bridge to the ASGI application for serverless use."""

    def __init__(self, app):
        self._asgi = httpx.ASGITransport(app=app)

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        import asyncio

        async def roundtrip() -> httpx.Response:
            response = await self._asgi.handle_async_request(request)
            chunks = [chunk async for chunk in response.stream]
            return httpx.Response(
                status_code=response.status_code,
                headers=response.headers,
                content=b"".join(chunks),
            )

        return asyncio.run(roundtrip())


def _client(server: Optional[str]) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    from .service import app

    return httpx.Client(
        transport=_InProcessTransport(app),
        base_url="http://dtmon.local",
        timeout=600.0,
    )


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    response = client.post(path, json=payload)
    if response.status_code >= 400:
        try:
            error = response.json().get("error", {})
        except Exception:
            raise CliError(EXIT_FAILED, f"server error {response.status_code}")
        kind = error.get("kind", "internal")
        message = error.get("message", "unknown error")
        raise CliError(_KIND_CODES.get(kind, EXIT_FAILED), message)
    return response.json()


def _read_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise CliError(EXIT_VALIDATION, f"no such file: {path}")
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_VALIDATION, f"{path}: invalid JSON ({exc})")


def _seed(args) -> Optional[int]:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("DTMON_SEED")
    return int(env) if env else None


def _write_outputs(outdir: str, data: dict) -> None:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    head = data["header"]
    jsonio.write_jsonl(out / "global_trace.jsonl", [head] + data["global_trace"])
    jsonio.write_jsonl(out / "deliveries.jsonl", [head] + data["deliveries"])
    jsonio.write_jsonl(out / "verdicts.jsonl", [head] + data["verdicts"])


def _print_summary(summary: dict) -> None:
    print("monitor  verdict  first-definitive(local ticks)")
    firsts = summary.get("firstDefinitiveLocalTime", {})
    for monitor, verdict in sorted(summary["verdicts"].items(), key=lambda kv: int(kv[0])):
        first = firsts.get(monitor, "-")
        print(f"{monitor:>7}  {verdict:<7}  {first}")


def cmd_validate(args, client) -> int:
    data = _post(
        client,
        "/validate",
        {
            "property": _prop_doc(args),
            "auto_complete": args.auto_complete,
            "allow_non_absorbing": args.allow_non_absorbing,
        },
    )
    print(
        f"valid: {len(data['locations'])} locations, {len(data['clocks'])} clocks, "
        f"{len(data['components'])} components, "
        f"{'absorbing' if data['absorbing'] else 'non-absorbing'} accepting set"
    )
    print(f"hash: {data['hash']}")
    return EXIT_OK


def cmd_precompute(args, client) -> int:
    data = _post(
        client,
        "/precompute",
        {
            "property": _prop_doc(args),
            "auto_complete": args.auto_complete,
            "allow_non_absorbing": args.allow_non_absorbing,
        },
    )
    cache_path = args.out or (args.property + ".props.json")
    with open(cache_path, "w", encoding="utf-8") as fh:
        fh.write(jsonio.canonical_dumps({"hash": data["hash"], "mode": data["mode"],
                                         "sets": data["sets"]}))
    print(f"outcome sets ({data['mode']}) cached to {cache_path}")
    return EXIT_OK


def _prop_doc(args) -> dict:
    doc = _read_json(args.property)
    if getattr(args, "resolution", None) is not None:
        doc["resolution"] = args.resolution
    return doc


def _cached_sets(args) -> Optional[dict]:
    path = args.property + ".props.json"
    if not os.path.exists(path):
        return None
    cached = _read_json(path)
    if cached.get("hash") != jsonio.content_hash(_prop_doc(args)):
        return None
    return cached.get("sets")


def cmd_simulate(args, client) -> int:
    payload = {
        "property": _prop_doc(args),
        "scenario": _read_json(args.scenario),
        "auto_complete": args.auto_complete,
        "allow_non_absorbing": args.allow_non_absorbing,
        "seed": _seed(args),
        "skew": args.skew,
        "resolution": args.resolution,
        "threads": args.threads,
        "cap_decomp": args.cap_decomp,
    }
    cached = _cached_sets(args)
    if cached is not None:
        payload["property_sets"] = cached
    data = _post(client, "/simulate", payload)
    if args.out:
        _write_outputs(args.out, data)
        print(f"wrote {args.out}/global_trace.jsonl, deliveries.jsonl, verdicts.jsonl")
    if args.summary or not args.out:
        _print_summary(data["summary"])
    return EXIT_OK


def cmd_replay(args, client) -> int:
    data = _post(
        client,
        "/replay",
        {
            "property": _prop_doc(args),
            "replay": _read_json(args.scenario),
            "auto_complete": args.auto_complete,
            "allow_non_absorbing": args.allow_non_absorbing,
            "resolution": args.resolution,
            "threads": args.threads,
        },
    )
    if args.out:
        _write_outputs(args.out, data)
        print(f"wrote {args.out}/global_trace.jsonl, deliveries.jsonl, verdicts.jsonl")
    if args.summary or not args.out:
        _print_summary(data["summary"])
    return EXIT_OK


def cmd_oracle_check(args, client) -> int:
    data = _post(
        client,
        "/oracle-check",
        {
            "property": _prop_doc(args),
            "scenario": _read_json(args.scenario),
            "seed": _seed(args),
            "cap_decomp": args.cap_decomp,
        },
    )
    for check in data["checks"]:
        status = "pass" if check["passed"] else "FAIL"
        extras = {
            k: v
            for k, v in check.items()
            if k not in ("name", "passed")
        }
        print(f"[{status}] {check['name']} {extras}")
    if not data["passed"]:
        print("oracle cross-check FAILED", file=sys.stderr)
        return EXIT_FAILED
    print(f"oracle cross-check passed ({len(data['checks'])} checks)")
    return EXIT_OK


def cmd_explain(args, client) -> int:
    data = _post(
        client,
        "/explain",
        {
            "property": _prop_doc(args),
            "scenario": _read_json(args.scenario),
            "monitor": args.monitor,
            "time": args.time,
            "seed": _seed(args),
        },
    )
    print(
        f"monitor {data['monitor']} at local {data['local_time']}: "
        f"oldest known {data['oldest_known']}, cutoff {data['cutoff']}, "
        f"verdict {data['verdict']}"
    )
    for k, entry in enumerate(data["entries"]):
        print(f"entry {k}:")
        remainder = ", ".join(
            f"({e['action']},[{e['lo']},{e['hi']}])" for e in entry["remainder"]
        )
        print(f"  remainder: {remainder or '(empty)'}")
        for loc, dbms in entry["configs"].items():
            for constraints in dbms:
                printable = " & ".join(constraints) or "true"
                print(f"  {loc}: {printable}")
    return EXIT_OK


def cmd_serve(args, client) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dtmon",
        description="Distributed monitoring of timed reachability properties",
    )
    parser.add_argument("--server", help="remote service URL (default: in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario=True):
        p.add_argument("--property", required=True, help="property document (JSON)")
        if scenario:
            p.add_argument("--scenario", required=True, help="scenario document (JSON)")
        p.add_argument("--resolution", type=int, help="override ticks per time unit")
        p.add_argument("--auto-complete", action="store_true",
                       help="route guard gaps to a synthesized sink")
        p.add_argument("--allow-non-absorbing", action="store_true",
                       help="accept non-absorbing accepting sets (bad-prefix only)")

    p = sub.add_parser("validate", help="validate a property document")
    common(p, scenario=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("precompute", help="precompute and cache outcome sets")
    common(p, scenario=False)
    p.add_argument("--out", help="cache file (default: <property>.props.json)")
    p.set_defaults(func=cmd_precompute)

    p = sub.add_parser("simulate", help="run a scenario")
    common(p)
    p.add_argument("--out", help="output directory for JSONL artifacts")
    p.add_argument("--seed", type=int, help="simulation seed (or DTMON_SEED)")
    p.add_argument("--skew", type=float, help="override the skew bound (time units)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--cap-decomp", type=int, help="decomposition candidate cap")
    p.add_argument("--summary", action="store_true", help="print a verdict table")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("replay", help="replay a recorded trace with explicit schedules")
    common(p)
    p.add_argument("--out", help="output directory for JSONL artifacts")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--summary", action="store_true")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("oracle-check", help="cross-check a run against the oracle")
    common(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--cap-decomp", type=int)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("explain", help="dump a monitor's hypothesis table")
    common(p)
    p.add_argument("--monitor", type=int, required=True)
    p.add_argument("--time", type=float, required=True,
                   help="monitor-local time (units)")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "serve":
            return cmd_serve(args, None)
        with _client(args.server) as client:
            return args.func(args, client)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
