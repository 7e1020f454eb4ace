"""Command-line client for the subpois service.

The CLI is a thin HTTP client: every command builds a JSON request and posts
it to the service, which wraps the core package.  By default the service
runs in-process over an ASGI transport; --server points at a remote
instance instead.

Configuration precedence: command-line flags, then SUBPOIS_* environment
variables, then the --config key=value file, then built-in defaults.
Exit codes: 0 success / all validations passed, 1 validation failure,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import os
import sys

import httpx

from . import tableio

ENV_PREFIX = "SUBPOIS_"

# Conversion table for values arriving as strings from env vars or config files.
_COERCE = {
    "family": str,
    "alpha": float,
    "theta": float,
    "rate2": float,
    "lam": float,
    "t": float,
    "s": float,
    "kmax": int,
    "k": int,
    "samples": int,
    "seed": int,
    "workers": int,
    "out": str,
    "format": str,
    "server": str,
    "method": str,
    "suite": str,
    "ctrw_n": int,
    "points": int,
    "s_min": float,
    "s_max": float,
    "r_max": int,
    "u": str,
    "sizes": str,
    "paths": lambda v: v.lower() in ("1", "true", "yes"),
    "tv_threshold": float,
    "z_threshold": float,
    "pvalue_threshold": float,
}

_DEFAULTS = {
    "family": "gamma",
    "lam": 1.0,
    "t": 1.0,
    "kmax": 20,
    "samples": 10**6,
    "seed": 0,
    "workers": 1,
    "format": "csv",
    "method": "path",
    "suite": "all",
    "ctrw_n": 1,
    "points": 50,
    "s_min": 0.05,
    "s_max": 5.0,
    "r_max": 4,
    "k": 1,
    "paths": False,
}


def _family_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--family", choices=["stable", "tempered", "gamma", "dirac", "linear"])
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--theta", type=float)
    parser.add_argument("--rate2", type=float)
    parser.add_argument("--lambda", dest="lam", type=float)
    parser.add_argument("--t", type=float)
    parser.add_argument("--kmax", type=int)
    parser.add_argument("--samples", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--out", help="output file (default: stdout)")
    parser.add_argument("--format", choices=["csv", "json"])
    parser.add_argument("--server", help="base URL of a running service")
    parser.add_argument("--config", help="key=value configuration file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subpois",
        description="Counting processes with random integer jumps: tables, densities, simulation, validation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pmf", help="state probabilities by every available route")
    _family_flags(p)

    p = sub.add_parser("pgf", help="probability generating function and its partial sums")
    _family_flags(p)
    p.add_argument("--u", help="comma-separated evaluation points in [0, 1]")

    p = sub.add_parser("hitting", help="first-passage density and survival over an s-grid")
    _family_flags(p)
    p.add_argument("--k", type=int, help="target level (>= 1)")
    p.add_argument("--s-min", dest="s_min", type=float)
    p.add_argument("--s-max", dest="s_max", type=float)
    p.add_argument("--points", type=int)

    p = sub.add_parser("simulate", help="sample paths or counts")
    _family_flags(p)
    p.add_argument("--method", choices=["path", "timechange", "ctrw"])
    p.add_argument("--n", dest="ctrw_n", type=int, help="CTRW cutoff (method=ctrw)")
    p.add_argument("--paths", action="store_true", default=None, help="emit JSON-lines trajectories")

    p = sub.add_parser("validate", help="run a validation suite; exit 1 on failure")
    _family_flags(p)
    p.add_argument("--suite", choices=["all", "pmf", "hitting", "moments", "conditional", "ctrw", "skellam"])
    p.add_argument("--tv-threshold", dest="tv_threshold", type=float)
    p.add_argument("--z-threshold", dest="z_threshold", type=float)
    p.add_argument("--pvalue-threshold", dest="pvalue_threshold", type=float)

    p = sub.add_parser("moments", help="closed-form moments and factorial moments")
    _family_flags(p)
    p.add_argument("--s", type=float, help="second time point for covariances")
    p.add_argument("--r-max", dest="r_max", type=int)

    p = sub.add_parser("conditional", help="conditional law of N(s) given N(t)=k")
    _family_flags(p)
    p.add_argument("--s", type=float)
    p.add_argument("--k", type=int)

    p = sub.add_parser("jumptimes", help="jump-instant density for a size composition")
    _family_flags(p)
    p.add_argument("--sizes", help="comma-separated jump sizes, e.g. 1,2,1")

    return parser


def _load_config_file(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise SystemExit(f"config {path}:{line_no}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if key == "lambda":
                key = "lam"
            if key not in _COERCE:
                raise SystemExit(f"config {path}:{line_no}: unknown key {key!r}")
            values[key] = _COERCE[key](value.strip())
    return values


def _merge_settings(args: argparse.Namespace) -> dict:
    settings = dict(vars(args))
    config = _load_config_file(args.config) if args.config else {}
    for key, value in settings.items():
        if value is not None:
            continue
        env_key = "LAMBDA" if key == "lam" else key.upper()
        env = os.environ.get(ENV_PREFIX + env_key)
        if env is not None and key in _COERCE:
            settings[key] = _COERCE[key](env)
        elif key in config:
            settings[key] = config[key]
        elif key in _DEFAULTS:
            settings[key] = _DEFAULTS[key]
    return settings


def _family_payload(s: dict) -> dict:
    payload = {"family": s["family"], "lambda": s["lam"]}
    for key in ("alpha", "theta", "rate2"):
        if s.get(key) is not None:
            payload[key] = s[key]
    return payload


def _build_request(s: dict) -> tuple[str, dict]:
    cmd = s["command"]
    payload = _family_payload(s)
    if cmd == "pmf":
        payload.update(t=s["t"], kmax=s["kmax"])
        return "/pmf", payload
    if cmd == "pgf":
        payload.update(t=s["t"])
        if s.get("u"):
            payload["u"] = [float(x) for x in str(s["u"]).split(",")]
        return "/pgf", payload
    if cmd == "hitting":
        if s["k"] < 1:
            raise SystemExit("hitting: --k must be >= 1")
        payload.update(k=s["k"], s_min=s["s_min"], s_max=s["s_max"], points=s["points"])
        return "/hitting", payload
    if cmd == "simulate":
        payload.update(
            t=s["t"],
            samples=s["samples"],
            seed=s["seed"],
            method=s["method"],
            ctrw_n=s["ctrw_n"],
            workers=s["workers"],
            paths=bool(s["paths"]),
        )
        return "/simulate", payload
    if cmd == "validate":
        thresholds = {}
        if s.get("tv_threshold") is not None:
            thresholds["tv"] = s["tv_threshold"]
        if s.get("z_threshold") is not None:
            thresholds["z"] = s["z_threshold"]
        if s.get("pvalue_threshold") is not None:
            thresholds["pvalue"] = s["pvalue_threshold"]
        payload.update(
            suite=s["suite"],
            t=s["t"],
            samples=s["samples"],
            seed=s["seed"],
            workers=s["workers"],
            thresholds=thresholds,
        )
        return "/validate", payload
    if cmd == "moments":
        payload.update(t=s["t"], r_max=s["r_max"])
        if s.get("s") is not None:
            payload["s"] = s["s"]
        return "/moments", payload
    if cmd == "conditional":
        if s.get("s") is None:
            raise SystemExit("conditional: --s is required")
        payload.update(s=s["s"], t=s["t"], k=s["k"])
        return "/conditional", payload
    if cmd == "jumptimes":
        if not s.get("sizes"):
            raise SystemExit("jumptimes: --sizes is required")
        payload.update(t=s["t"], sizes=[int(x) for x in str(s["sizes"]).split(",")])
        return "/jumptimes", payload
    raise SystemExit(f"unknown command {cmd!r}")


def _post(server: str | None, path: str, payload: dict) -> httpx.Response:
    if server:
        return httpx.post(server.rstrip("/") + path, json=payload, timeout=3600.0)

    async def _go():
        from .service import create_app

        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
            transport=transport, base_url="http://subpois.internal", timeout=3600.0
        ) as client:
            return await client.post(path, json=payload)

    return asyncio.run(_go())


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = _merge_settings(args)
    path, payload = _build_request(settings)
    response = _post(settings.get("server"), path, payload)
    if response.status_code != 200:
        try:
            detail = response.json()
        except ValueError:
            detail = response.text
        print(f"error ({response.status_code}): {detail}", file=sys.stderr)
        return 2
    body = response.json()

    if path == "/validate":
        for report in body["reports"]:
            marker = "PASS" if report["passed"] else "FAIL"
            print(
                f"{marker} {report['name']}: {report['statistic_kind']}="
                f"{report['statistic']:.6g} threshold={report['threshold']:.6g}",
                file=sys.stderr,
            )
        if settings["format"] == "json":
            text = json.dumps(body, indent=2) + "\n"
        else:
            text = tableio.render_table(
                ["name", "statistic_kind", "statistic", "threshold", "passes_when", "sample_size", "passed"],
                body["reports"],
                "csv",
            )
        _emit(text, settings.get("out"))
        return 0 if body["all_pass"] else 1

    if "paths" in body:
        _emit(tableio.render_paths_jsonl(body["paths"]), settings.get("out"))
        return 0

    _emit(
        tableio.render_table(body["columns"], body["rows"], settings["format"]),
        settings.get("out"),
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
