"""Command-line driver: a thin client over the HTTP service.

By default the client talks to an in-process instance of the app over an
ASGI transport, so no server is needed; --server (or GWQ_SERVER) points it
at a running one instead.  GWQ_SEED overrides the sampling seed.  Exit
codes: 0 success, 1 a verification suite failed, 2 bad configuration.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import httpx


def _config_flags(p: argparse.ArgumentParser):
    p.add_argument("--dt", type=int, default=None,
                   help="total coupling degree cap (default 5)")
    p.add_argument("--ndesc", type=int, default=None,
                   help="maximum descendant level (default 4)")
    p.add_argument("--dq", type=int, default=None,
                   help="degree-marker cap (default 5)")
    p.add_argument("--kz", type=int, default=None,
                   help="z window half-width (default 8)")
    p.add_argument("--genus-max", type=int, default=None, dest="gmax",
                   help="maximum genus (default 2)")
    p.add_argument("--seed", type=int, default=None,
                   help="sampling seed (default 20240801)")
    p.add_argument("--pad", type=int, default=None,
                   help="internal working-degree margin (default 3)")
    p.add_argument("--nu", type=str, default=None,
                   help="comma-separated rational deformation samples")
    p.add_argument("--config", type=str, default=None,
                   help="JSON file with configuration fields")
    p.add_argument("--server", type=str, default=None,
                   help="base URL of a running service (default: in-process)")
    p.add_argument("--out", type=str, default=None,
                   help="write the artifact to this path instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gwq",
        description="Exact-arithmetic engine for the quintic: curve counts, "
                    "order parameters, free energies, and identity suites.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("instantons", help="degree-d curve counts")
    p.add_argument("--dq", type=int, default=5)
    for flag in ("--server", "--out"):
        p.add_argument(flag, type=str, default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("order-params", help="dump the four order parameters")
    _config_flags(p)

    p = sub.add_parser("free-energy", help="one genus's free energy")
    p.add_argument("--genus", type=int, default=0)
    _config_flags(p)

    p = sub.add_parser("correlator", help="one exact correlator coefficient")
    p.add_argument("--insertions", type=str, required=True,
                   help='e.g. "tau_0(P),tau_0(P),tau_0(S)"')
    p.add_argument("--genus", type=int, default=0)
    p.add_argument("--degree", type=int, default=None,
                   help="q degree of the reported value (default 0)")
    _config_flags(p)

    p = sub.add_parser("verify", help="run identity suites")
    p.add_argument("--suite", type=str, default="all",
                   help="comma-separated suite names or 'all'")
    _config_flags(p)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", type=str, default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return ap


def gather_config(args) -> dict:
    cfg: dict = {}
    path = getattr(args, "config", None)
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            cfg.update(json.load(fh))
    for field, attr in (("dt", "dt"), ("ndesc", "ndesc"), ("dq", "dq"),
                        ("kz", "kz"), ("gmax", "gmax"), ("seed", "seed"),
                        ("pad", "pad")):
        val = getattr(args, attr, None)
        if val is not None:
            cfg[field] = val
    nu = getattr(args, "nu", None)
    if nu:
        cfg["nus"] = [s.strip() for s in nu.split(",") if s.strip()]
    env_seed = os.environ.get("GWQ_SEED")
    if env_seed is not None:
        cfg["seed"] = int(env_seed)
    return cfg


def post(args, path: str, body: dict) -> httpx.Response:
    """One request: to a remote server if configured, else to the app
    in-process over the ASGI transport."""
    server = getattr(args, "server", None) or os.environ.get("GWQ_SERVER")
    if server:
        with httpx.Client(base_url=server, timeout=3600.0) as client:
            return client.post(path, json=body)

    import asyncio

    from .service import app

    async def _call() -> httpx.Response:
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport,
                                     base_url="http://engine",
                                     timeout=None) as client:
            return await client.post(path, json=body)

    return asyncio.run(_call())


def to_csv(command: str, payload: dict) -> str:
    lines = []
    if command == "verify":
        lines.append("id,status,verified_depth")
        for row in payload["checks"]:
            lines.append(f"{row['id']},{row['status']},"
                         f"{row.get('verified_depth', '')}")
    elif command == "instantons":
        lines.append("degree,count,reduced_count")
        for d in sorted(payload["N"], key=int):
            lines.append(f"{d},{payload['N'][d]},{payload['n'][d]}")
    elif command == "correlator":
        lines.append("degree,value")
        for d in sorted(payload["by_degree"], key=int):
            lines.append(f"{d},{payload['by_degree'][d]}")
    else:
        lines.append("series,monomial,coefficient")
        for key, val in payload.items():
            if isinstance(val, list):
                for term in val:
                    mono = " ".join(f"{k}^{v}" for k, v in
                                    sorted(term["m"].items()))
                    lines.append(f"{key},{mono or '1'},{term['c']}")
    return "\n".join(lines) + "\n"


def emit(args, command: str, payload: dict) -> None:
    if getattr(args, "format", "json") == "csv":
        text = to_csv(command, payload)
    else:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        import uvicorn

        from .service import app

        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    t0 = time.monotonic()
    if args.command == "instantons":
        resp = post(args, "/instantons", {"dq": args.dq})
    elif args.command == "order-params":
        resp = post(args, "/order-params", {"config": gather_config(args)})
    elif args.command == "free-energy":
        resp = post(args, "/free-energy",
                    {"genus": args.genus, "config": gather_config(args)})
    elif args.command == "correlator":
        body = {"insertions": args.insertions, "genus": args.genus,
                "config": gather_config(args)}
        if args.degree is not None:
            body["degree"] = args.degree
        resp = post(args, "/correlator", body)
    elif args.command == "verify":
        suites = [s.strip() for s in args.suite.split(",") if s.strip()]
        resp = post(args, "/verify",
                    {"suites": suites, "config": gather_config(args)})
    else:  # pragma: no cover
        print(f"unknown command {args.command}", file=sys.stderr)
        return 2

    if resp.status_code == 400 or resp.status_code == 422:
        print(f"configuration error: {resp.json().get('detail')}",
              file=sys.stderr)
        return 2
    resp.raise_for_status()
    payload = resp.json()
    emit(args, args.command, payload)
    print(f"elapsed: {time.monotonic() - t0:.1f}s", file=sys.stderr)
    if args.command == "verify" and payload.get("status") != "pass":
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
