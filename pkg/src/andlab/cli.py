"""Command-line client for the experiment service.

The CLI is a thin client: it resolves the configuration, posts it to the
experiment service (an in-process instance by default, or a remote one
via ``--server``), and writes the returned rows and summary as
deterministic artifacts.  Exit codes: 0 success, 2 configuration or
domain error, 3 numeric error, 4 resource limit.  The single environment
variable ANDLAB_LOG selects log verbosity.
"""

from __future__ import annotations

import argparse
import asyncio
import logging
import os
import sys

import httpx

from . import __version__
from .artifacts import write_result
from .config import ExperimentConfig, load_config
from .errors import AndlabError
from .runner import EXPERIMENTS
from .service.app import ERROR_STATUS, create_app, error_kind

SUBCOMMAND_HELP = {
    "sample-field": "write one realization of the random potential",
    "mixing": "dependence-decay and continuity diagnostics of the field",
    "spectrum": "bottom eigenvalues of one cube Hamiltonian",
    "ns-test": "nonsingularity verdict at one energy",
    "combes-thomas": "off-diagonal resolvent envelope check",
    "ldp": "large-deviation probability of a small volume average",
    "mc-edge": "Monte Carlo estimate of the low-edge event",
    "mc-singular": "Monte Carlo estimate of the exists-singular event",
    "decay-fit": "exponential-envelope fits of low eigenfunctions",
    "dynamics": "time decay of the position moment through a window",
    "scaling-run": "mc-singular repeated along the scale sequence",
}


def _add_shared_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", default=None, help="YAML config file")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="dotted-path config override, repeatable",
    )
    parser.add_argument("--seed", type=int, default=None, help="master seed (mc.master_seed)")
    parser.add_argument("--out", default=None, metavar="DIR", help="artifact directory")
    parser.add_argument("--workers", type=int, default=None, help="worker pool size")
    parser.add_argument(
        "--export-matrix",
        action="store_true",
        help="also write the assembled Hamiltonian in MatrixMarket form",
    )
    parser.add_argument(
        "--server",
        default=None,
        metavar="URL",
        help="post to a running service instead of running in-process",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="andlab",
        description="numerical laboratory for multi-particle random operators",
    )
    parser.add_argument("--version", action="version", version=f"andlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=SUBCOMMAND_HELP.get(name))
        _add_shared_flags(p)
    serve = sub.add_parser("serve", help="run the experiment service over HTTP")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _configure_logging() -> None:
    name = os.environ.get("ANDLAB_LOG", "WARNING").upper()
    level = getattr(logging, name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(args.config, tuple(args.overrides))
    if args.seed is not None:
        cfg.mc.master_seed = args.seed
    if args.out is not None:
        cfg.output.directory = args.out
    if args.workers is not None:
        cfg.workers = args.workers
    if args.export_matrix:
        cfg.output.export_matrix = True
    return cfg


async def _post_in_process(name: str, payload: dict) -> httpx.Response:
    transport = httpx.ASGITransport(app=create_app())
    async with httpx.AsyncClient(
        transport=transport, base_url="http://andlab.internal", timeout=None
    ) as client:
        return await client.post(f"/experiments/{name}", json=payload)


def _post(name: str, payload: dict, server: str | None) -> httpx.Response:
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            return client.post(f"/experiments/{name}", json=payload)
    return asyncio.run(_post_in_process(name, payload))


def _fail(kind: str, message: str) -> int:
    print(f"error ({kind}): {message}", file=sys.stderr)
    return ERROR_STATUS.get(kind, (500, 3))[1]


def _run_subcommand(args: argparse.Namespace) -> int:
    try:
        cfg = _resolve_config(args)
    except AndlabError as exc:
        return _fail(error_kind(exc), str(exc))

    payload = cfg.model_dump(mode="json")
    try:
        response = _post(args.command, payload, args.server)
    except httpx.HTTPError as exc:
        return _fail("configuration", f"cannot reach server {args.server!r}: {exc}")

    if response.status_code != 200:
        try:
            body = response.json()
        except ValueError:
            body = {}
        kind = body.get("error")
        if kind not in ERROR_STATUS:
            kind = "configuration" if response.status_code in (404, 422) else "numeric"
        message = body.get("message") or response.text
        return _fail(kind, message)

    data = response.json()
    paths = write_result(
        cfg.output.directory,
        data["name"],
        data["columns"],
        data["rows"],
        data["summary"],
        data.get("extras") or {},
        tuple(cfg.output.formats),
    )
    for path in paths:
        print(path)
    return 0


def _serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        return _serve(args)
    return _run_subcommand(args)


if __name__ == "__main__":
    raise SystemExit(main())
