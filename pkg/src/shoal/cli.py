"""Headless command line: dispatch folders, run simulations, serve sessions.

Exit codes: 0 success, 1 validation error, 2 runtime error. Diagnostics go
to standard error prefixed ``error:``; the ``SHOAL_LOG`` environment
variable (debug|info|warn) controls log verbosity.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import socket
import sys
from pathlib import Path

from . import afsa, dispatcher, gridsim, scheduling
from .config import ConfigError, load_config, generate_jobs
from .gridsim import GridConfigError, SubmitError
from .session import Session

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2

log = logging.getLogger(__name__)

_LOG_LEVELS = {"debug": logging.DEBUG, "info": logging.INFO, "warn": logging.WARNING}


def _setup_logging() -> None:
    level = _LOG_LEVELS.get(os.environ.get("SHOAL_LOG", "warn").lower(), logging.WARNING)
    logging.basicConfig(stream=sys.stderr, level=level,
                        format="%(levelname)s %(name)s: %(message)s", force=True)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def cmd_dispatch(args) -> int:
    fields = dispatcher.load_fields(args.fields_root)
    items = dispatcher.load_items(args.items_root, fields, strict=args.strict)
    by_name = {field.name: field for field in fields}
    lines = ["item,field,x,y"]
    for item in sorted(items, key=lambda it: it.name):
        coords = dispatcher.coordinates(by_name[item.field_name], item)
        lines.append(f"{item.name},{item.field_name},{coords.x},{coords.y}")
    out = Path(args.out) / "coordinates.csv"
    _write(out, "\n".join(lines) + "\n")
    print(f"wrote {len(items)} task coordinates to {out}")
    return EXIT_OK


def _write_stats(out_dir: Path, stats) -> None:
    jobs_csv, resources_csv = gridsim.stats_report(stats)
    _write(out_dir / "job_stats.csv", jobs_csv)
    _write(out_dir / "resource_stats.csv", resources_csv)


def _simulate_assignment(config, jobs, mapping) -> list:
    state = gridsim.build_grid(config.grid.resources)
    for job, index in zip(jobs, mapping):
        gridsim.submit(state, job, config.grid.resources[index].id)
    _, stats = gridsim.run_until_idle(state)
    return stats


def cmd_simulate(args) -> int:
    config = load_config(args.config, seed_override=args.seed)
    if args.mode == "optimizer":
        return cmd_optimize(args)
    if args.mode == "canvas":
        return _run_canvas(args, config)
    jobs = generate_jobs(config.grid, config.seed)
    mapping = [i % len(config.grid.resources) for i in range(len(jobs))]
    stats = _simulate_assignment(config, jobs, mapping)
    _write_stats(Path(args.out), stats)
    makespan = max((row.finish_time for row in stats), default=0.0)
    print(f"simulated {len(stats)} jobs on {len(config.grid.resources)} resources (round-robin)")
    print(f"makespan: {makespan:.6f}")
    return EXIT_OK


def _run_canvas(args, config) -> int:
    config = dataclasses.replace(config, mode="canvas")
    session = Session("cli", config)
    limit = args.iterations if args.iterations else config.swarm.iterations
    while not session.finished and session.swarm.iteration < limit:
        session.step(1)
    _write_stats(Path(args.out), session.grid.completed)
    print(f"canvas run: {session.swarm.iteration} iterations, "
          f"{len(session.grid.completed)} of {len(session.tasks)} tasks completed")
    return EXIT_OK


def _swarm_params_from_config(config, job_count: int, iterations: int) -> afsa.SwarmParams:
    s = config.swarm
    resource_count = len(config.grid.resources)
    return afsa.SwarmParams(
        visual=s.visual,
        step=min(s.step, s.visual),
        try_number=s.try_number,
        delta=s.delta,
        population_size=s.population,
        max_iterations=iterations,
        bounds=((0.0, float(resource_count)),) * job_count,
        vision_draw=s.vision_draw,
    )


def cmd_optimize(args) -> int:
    config = load_config(args.config, seed_override=args.seed)
    jobs = generate_jobs(config.grid, config.seed)
    if not jobs:
        raise ConfigError(["grid.users: optimizer run needs at least one configured job"])
    problem = scheduling.ScheduleProblem(jobs=tuple(jobs), resources=config.grid.resources)
    iterations = args.iterations if args.iterations else config.swarm.iterations
    params = _swarm_params_from_config(config, len(jobs), iterations)
    result = scheduling.optimize(problem, params, seed=config.seed)
    stats = _simulate_assignment(config, jobs, result.assignment.mapping)
    out_dir = Path(args.out)
    assignment_lines = ["job_id,resource_id"]
    for job, index in zip(jobs, result.assignment.mapping):
        assignment_lines.append(f"{job.id},{config.grid.resources[index].id}")
    _write(out_dir / "assignment.csv", "\n".join(assignment_lines) + "\n")
    _write(out_dir / "history.csv", afsa.history_csv(list(result.history)))
    _write_stats(out_dir, stats)
    simulated = max((row.finish_time for row in stats), default=0.0)
    print(f"estimated makespan: {result.makespan:.6f}")
    print(f"simulated makespan: {simulated:.6f}")
    if args.oracle:
        _, optimum = scheduling.brute_force_optimum(problem)
        print(f"oracle optimum: {optimum:.6f}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((args.host, args.port))
    except OSError:
        raise RuntimeError(f"port {args.port} is busy")
    finally:
        probe.close()
    app = create_app(config_root=args.config_root,
                     log_dir=str(Path(args.out) / "command-logs"))
    log.info("serving on %s:%d", args.host, args.port)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shoal",
                                     description="fish-swarm grid scheduling toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dispatch", help="compute task coordinates from keyword folders")
    p.add_argument("fields_root", help="directory of field subdirectories")
    p.add_argument("items_root", help="directory of task item files")
    p.add_argument("--out", default="out", help="output directory")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--strict", dest="strict", action="store_true", default=True,
                      help="reject unknown keywords (default)")
    mode.add_argument("--lenient", dest="strict", action="store_false",
                      help="drop unknown keywords")
    p.set_defaults(func=cmd_dispatch)

    p = sub.add_parser("simulate", help="run the grid simulator to completion")
    p.add_argument("--config", required=True, help="session config document (JSON)")
    p.add_argument("--seed", type=int, default=None, help="seed override")
    p.add_argument("--iterations", type=int, default=None, help="iteration override")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--mode", choices=["optimizer", "canvas"], default=None,
                   help="run a full optimizer or canvas session instead of the round-robin baseline")
    p.set_defaults(func=cmd_simulate, oracle=False)

    p = sub.add_parser("optimize", help="swarm-optimize the schedule, then simulate it")
    p.add_argument("--config", required=True, help="session config document (JSON)")
    p.add_argument("--seed", type=int, default=None, help="seed override")
    p.add_argument("--iterations", type=int, default=None, help="iteration override")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--oracle", action="store_true",
                   help="also print the exhaustive optimum (small instances only)")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("serve", help="run the live control service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--config-root", default=".", help="base directory for relative config paths")
    p.add_argument("--out", default="out", help="directory for command-log flushes")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, dispatcher.DispatcherError, afsa.ParameterError,
            GridConfigError, SubmitError, scheduling.SchedulingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except KeyboardInterrupt:
        return EXIT_OK
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        log.debug("unhandled failure", exc_info=True)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
