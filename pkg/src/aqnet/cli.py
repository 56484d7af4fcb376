"""Command line front end: a thin client of the HTTP service.

All computation happens behind the service endpoints; the CLI only
loads scenario/schedule documents, posts them, and formats responses.
By default the service runs in-process; ``--server`` points the same
commands at a remote instance.

Exit codes: 0 success, 1 validation failure, 2 usage or scenario error.
"""

from __future__ import annotations

import argparse
import json
import sys

import httpx
import yaml

__all__ = ["main"]

CSV_FLOAT = "{:.12g}"


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return CSV_FLOAT.format(value)
    return str(value)


def _load_yaml(path: str, what: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return yaml.safe_load(fh)
    except OSError as exc:
        raise SystemExit(_usage_error(f"cannot read {what} {path}: {exc}"))
    except yaml.YAMLError as exc:
        raise SystemExit(_usage_error(f"cannot parse {what} {path}: {exc}"))


def _usage_error(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


class _Client:
    """Uniform POST interface over a remote server or the in-process app."""

    def __init__(self, server: str | None):
        if server:
            self._client = httpx.Client(base_url=server, timeout=600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service import app

            self._client = TestClient(app)

    def post(self, endpoint: str, payload: dict) -> dict:
        try:
            resp = self._client.post(endpoint, json=payload)
        except httpx.HTTPError as exc:
            raise SystemExit(_usage_error(f"service unreachable: {exc}"))
        if resp.status_code != 200:
            try:
                detail = resp.json().get("detail", resp.text)
            except ValueError:
                detail = resp.text
            raise SystemExit(_usage_error(f"{endpoint}: {detail}"))
        return resp.json()

    def close(self) -> None:
        self._client.close()


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(columns, rows) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def cmd_tables(args) -> int:
    scenario = _load_yaml(args.scenario, "scenario")
    client = _Client(args.server)
    data = client.post("/tables", {"scenario": scenario})
    rows = []
    for row_idx, row in enumerate(data["rows"]):
        for slot_idx, slot in enumerate(row["slots"]):
            rows.append(
                (
                    row_idx,
                    slot_idx,
                    slot["configuration"],
                    slot["degeneracy"],
                    slot["needs_memory"],
                    row["served_users"],
                )
            )
    _emit(
        _csv(
            ("row", "slot", "configuration", "degeneracy", "needs_memory", "row_users"),
            rows,
        ),
        args.out,
    )
    return 0


def cmd_sweep(args) -> int:
    scenario = _load_yaml(args.scenario, "scenario")
    client = _Client(args.server)
    data = client.post("/sweep", {"scenario": scenario, "figure": args.figure})
    _emit(_csv(data["columns"], data["rows"]), args.out)
    return 0


def cmd_route(args) -> int:
    scenario = _load_yaml(args.scenario, "scenario")
    schedule = _load_yaml(args.schedule, "schedule")
    if not isinstance(schedule, list):
        return _usage_error("schedule must be a list of request entries")
    client = _Client(args.server)
    data = client.post("/route", {"scenario": scenario, "schedule": schedule})
    lines = [json.dumps(event, sort_keys=True) for event in data["events"]]
    _emit("\n".join(lines) + ("\n" if lines else ""), args.out)
    return 0


def cmd_validate(args) -> int:
    scenario = _load_yaml(args.scenario, "scenario")
    client = _Client(args.server)
    data = client.post(
        "/validate",
        {"scenario": scenario, "trials": args.trials, "seed": args.seed},
    )
    lines = [
        "configuration,analytic,mc_mean,std_error,z_score,trials,seed",
    ]
    for line in data["lines"]:
        lines.append(
            ",".join(
                _fmt(line[k])
                for k in (
                    "configuration",
                    "analytic",
                    "mc_mean",
                    "std_error",
                    "z_score",
                    "trials",
                    "seed",
                )
            )
        )
    verdict = "PASS" if data["passed"] else "FAIL"
    lines.append(
        f"# generator={data['generator']} max_z={_fmt(data['max_z'])} "
        f"threshold={_fmt(data['threshold'])} verdict={verdict}"
    )
    _emit("\n".join(lines) + "\n", args.out)
    return 0 if data["passed"] else 1


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("aqnet.service:app", host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aqnet",
        description="QoS-aware channel assignment for aggregated quantum networks",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--server",
        default=None,
        help="base URL of a running service (default: run in-process)",
    )
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tables", parents=[common],
                       help="emit the assignment table of a scenario")
    p.add_argument("--scenario", required=True)
    p.set_defaults(fn=cmd_tables)

    p = sub.add_parser("sweep", parents=[common], help="emit figure data as CSV")
    p.add_argument("--figure", required=True,
                   choices=["unencoded-fid", "encoded-fid", "gap", "greedy", "t2-inset"])
    p.add_argument("--scenario", required=True)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("route", parents=[common],
                       help="replay a request schedule on the router")
    p.add_argument("--scenario", required=True)
    p.add_argument("--schedule", required=True)
    p.set_defaults(fn=cmd_route)

    p = sub.add_parser("validate", parents=[common],
                       help="Monte Carlo check of the analytic engine")
    p.add_argument("--scenario", required=True)
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 2


if __name__ == "__main__":
    sys.exit(main())
