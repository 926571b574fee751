"""
Command-line entry point.

    python -m mdcplanner run configs/smoke.json --out results/smoke
    python -m mdcplanner validate configs/nominal.json
    python -m mdcplanner oracle tsp --points 0,0 3,0 3,4
    python -m mdcplanner oracle fixed-point --travel-time 400 --rates 2000 --upload-rates 250000
    python -m mdcplanner serve
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence, Tuple

from loguru import logger

from .config import settings
from .utils.exceptions import (
    EXIT_CONFIG_ERROR,
    EXIT_IO_ERROR,
    EXIT_OK,
    InvalidArgumentError,
    PlannerError,
    exit_code_for,
)
from .utils.helpers import setup_logging

log = logger.bind(component="cli")


def _point(text: str) -> Tuple[float, float]:
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'x,y', got '{text}'")
    return x, y


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mdcplanner", description="Mobile data collector planning campaigns")
    parser.add_argument("--log-level", default=None, help="Override MDC_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run a campaign and write its CSVs")
    run.add_argument("config", type=Path, help="Campaign JSON document")
    run.add_argument("--out", type=Path, default=None, help="Output directory")
    run.add_argument("--seeds", type=int, default=None, help="Override the number of seeds per sweep point")
    run.add_argument("--dump-geometry", action="store_true", help="Write per-run geometry CSVs")
    run.add_argument("--snapshot-every", type=int, default=None,
                     help="Keep a diffusion snapshot every K reverse steps")
    run.add_argument("--workers", type=int, default=None, help="Parallel (N, seed) cells")

    validate = sub.add_parser("validate", help="Check a campaign document without running it")
    validate.add_argument("config", type=Path)

    oracle = sub.add_parser("oracle", help="Reference solvers for small instances")
    oracle_sub = oracle.add_subparsers(dest="oracle", required=True)
    tsp = oracle_sub.add_parser("tsp", help="Exhaustive shortest tour")
    tsp.add_argument("--points", type=_point, nargs="+", required=True, help="RP coordinates as x,y")
    tsp.add_argument("--open", action="store_true", help="Open path instead of a closed tour")
    fixed = oracle_sub.add_parser("fixed-point", help="Closed-form tour time and dwell times")
    fixed.add_argument("--travel-time", type=float, required=True, help="Travel-only time in seconds")
    fixed.add_argument("--rates", type=float, nargs="+", required=True, help="Aggregate RP rates in bit/s")
    fixed.add_argument("--upload-rates", type=float, nargs="+", required=True, help="Upload rates in bit/s")

    serve = sub.add_parser("serve", help="Start the HTTP service")
    serve.add_argument("--host", default=settings.host)
    serve.add_argument("--port", type=int, default=settings.port)

    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    from .core.campaign_service import load_campaign_config, run_campaign

    config = load_campaign_config(args.config)
    output = {}
    if args.dump_geometry:
        output["dump_geometry"] = True
    if args.snapshot_every is not None:
        if args.snapshot_every < 1:
            raise InvalidArgumentError("--snapshot-every must be >= 1")
        output["snapshot_every"] = args.snapshot_every
    update = {}
    if output:
        update["output"] = config.output.model_copy(update=output)
    if args.seeds is not None:
        if args.seeds < 1:
            raise InvalidArgumentError("--seeds must be >= 1")
        update["seeds"] = args.seeds
    if update:
        config = config.model_copy(update=update)

    result = run_campaign(config, out_dir=args.out, workers=args.workers)
    print(json.dumps({
        "runs_csv": result.runs_csv,
        "summary_csv": result.summary_csv,
        "rows": result.n_rows,
        "infeasible_rows": result.infeasible_rows,
    }, indent=2))
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    from .core.campaign_service import check_campaign

    try:
        data = json.loads(args.config.read_text(encoding="utf-8"))
    except OSError as e:
        log.error(f"Cannot read {args.config}: {e}")
        return EXIT_IO_ERROR
    except json.JSONDecodeError as e:
        log.error(f"{args.config} is not valid JSON: {e}")
        return EXIT_CONFIG_ERROR

    report = check_campaign(data)
    print(report.model_dump_json(indent=2))
    return EXIT_OK if report.valid else EXIT_CONFIG_ERROR


def _cmd_oracle(args: argparse.Namespace) -> int:
    from .utils.oracles import brute_force_tour, fixed_point_dwell, fixed_point_tour_time

    if args.oracle == "tsp":
        order, length = brute_force_tour(args.points, closed=not args.open)
        print(json.dumps({"order": order, "length_m": length}))
        return EXIT_OK

    if len(args.rates) != len(args.upload_rates):
        raise InvalidArgumentError("--rates and --upload-rates must have the same length")
    tour_time = fixed_point_tour_time(args.travel_time, args.rates, args.upload_rates)
    dwell = fixed_point_dwell(args.travel_time, args.rates, args.upload_rates)
    print(json.dumps({"tour_time_s": tour_time, "dwell_s": dwell}))
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("mdcplanner.main:app", host=args.host, port=args.port,
                log_level=settings.log_level.lower())
    return EXIT_OK


COMMANDS = {
    "run": _cmd_run,
    "validate": _cmd_validate,
    "oracle": _cmd_oracle,
    "serve": _cmd_serve,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level or settings.log_level, settings.log_file)

    try:
        return COMMANDS[args.command](args)
    except PlannerError as e:
        log.error(f"{e.error_code}: {e.message}")
        for err in e.details.get("errors", []):
            log.error(f"  {err}")
        return exit_code_for(e)
    except OSError as e:
        log.error(f"I/O error: {e}")
        return EXIT_IO_ERROR


if __name__ == "__main__":
    sys.exit(main())
