"""
Command-line entry point (`hswarm`).

    hswarm run --config FILE [--out DIR] [--seeds 1,2,3] [--workers K]
    hswarm validate --config FILE
    hswarm oracle --planner-bruteforce --config FILE [--instances N] [--seed S]
    hswarm ui

Exit codes: 0 success, 1 run failures, 2 configuration errors. Errors are
printed on stderr as {"errors": [...]}.
"""
import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from src.logic.config_loader import Experiment, load_experiment
from src.logic.errors import ConfigError
from src.logic.logger import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUN_FAILED = 1
EXIT_CONFIG = 2


def _report_errors(errors: List[str]) -> None:
    print(json.dumps({"errors": errors}), file=sys.stderr)


def _config_errors(e: ConfigError) -> List[str]:
    if e.line is not None:
        return [f"line {e.line}: {p}" for p in e.problems]
    return list(e.problems)


def _parse_seeds(text: str) -> List[int]:
    try:
        seeds = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be comma-separated integers, got {text!r}")
    if not seeds:
        raise argparse.ArgumentTypeError("at least one seed is required")
    return seeds


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hswarm", description="Heterogeneous MAV swarm localization simulator")
    parser.add_argument("--log-level", default="INFO", help="console log level (default: INFO)")
    parser.add_argument("--log-file", default="logs/hswarm.log", help="log file path")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment and write CSV/JSON artifacts")
    run.add_argument("--config", required=True, help="experiment YAML document")
    run.add_argument("--out", help="output directory (overrides config and HSWARM_OUTPUT_DIR)")
    run.add_argument("--seeds", type=_parse_seeds, help="comma-separated seeds, e.g. 1,2,3")
    run.add_argument("--workers", type=_positive_int, help="parallel worker processes")

    validate = sub.add_parser("validate", help="check an experiment document and exit")
    validate.add_argument("--config", required=True, help="experiment YAML document")

    oracle = sub.add_parser("oracle", help="run correctness oracles")
    oracle.add_argument("--planner-bruteforce", action="store_true", required=True,
                        help="compare the pruned planner with exhaustive enumeration")
    oracle.add_argument("--config", required=True, help="experiment YAML document (sensor and noise models)")
    oracle.add_argument("--instances", type=_positive_int, default=50, help="random instances (default: 50)")
    oracle.add_argument("--seed", type=int, default=0, help="instance generator seed (default: 0)")

    sub.add_parser("ui", help="launch the Streamlit workbench")
    return parser


def _cmd_run(args: argparse.Namespace, experiment: Experiment) -> int:
    from src.logic.experiment import run_experiment

    if args.out:
        experiment = replace(experiment, output_dir=args.out)
    if args.seeds:
        if len(set(args.seeds)) != len(args.seeds) or min(args.seeds) < 0:
            _report_errors(["--seeds must be distinct non-negative integers"])
            return EXIT_CONFIG
        experiment = replace(experiment, seeds=tuple(args.seeds))
    if args.workers:
        experiment = replace(experiment, workers=args.workers)

    result = run_experiment(experiment)
    errors = [f"{o.spec.run_id}: {o.error}" for o in result.failed] + result.io_errors
    print(json.dumps({"output_dir": str(result.output_dir), "runs": len(result.outcomes), "failed": len(result.failed)}))
    if errors:
        _report_errors(errors)
        return EXIT_RUN_FAILED
    return EXIT_OK


def _cmd_validate(experiment: Experiment) -> int:
    from src.logic.experiment import expand_runs

    print(json.dumps({"valid": True, "runs": len(expand_runs(experiment))}))
    return EXIT_OK


def _cmd_oracle(args: argparse.Namespace, experiment: Experiment) -> int:
    from src.logic.oracle import run_planner_oracle

    report = run_planner_oracle(args.instances, args.seed, experiment.base)
    print(json.dumps({
        "instances": report.instances,
        "mismatches": len(report.mismatches),
        "max_abs_diff": report.max_abs_diff,
    }))
    if not report.passed:
        _report_errors([
            f"instance {m.instance}: pruned {m.pruned_score!r} != exhaustive {m.exhaustive_score!r}"
            for m in report.mismatches
        ])
        return EXIT_RUN_FAILED
    return EXIT_OK


def _cmd_ui() -> int:
    from streamlit.web import cli as stcli

    main_app_path = Path(__file__).parent / "ui" / "main_app.py"
    # Configure Streamlit via sys.argv (simulates command-line execution)
    sys.argv = [
        "streamlit",
        "run",
        str(main_app_path.absolute()),
        "--browser.gatherUsageStats=false",
    ]
    logger.info(f"Starting Streamlit CLI with args: {sys.argv}")
    return stcli.main()


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level, args.log_file)

    if args.command == "ui":
        return _cmd_ui()

    try:
        experiment = load_experiment(args.config)
    except ConfigError as e:
        logger.debug(f"Configuration rejected: {e}")
        _report_errors(_config_errors(e))
        return EXIT_CONFIG

    if args.command == "validate":
        return _cmd_validate(experiment)
    if args.command == "oracle":
        return _cmd_oracle(args, experiment)
    return _cmd_run(args, experiment)


if __name__ == "__main__":
    sys.exit(main())
