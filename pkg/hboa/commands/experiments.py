import argparse
import logging
from pathlib import Path

import pandas as pd

from hboa.exceptions import ConfigError, PlanError
from hboa.experiments.crossvalidation import audit_output, crossvalidate
from hboa.experiments.plan import load_plan
from hboa.experiments.plot_data import PROFILE_FILE, emit_plot_data, read_plot_series
from hboa.experiments.results import read_stats_frame
from hboa.experiments.speedups import SpeedupReport, compute_speedups, read_report, write_report
from hboa.settings import get_settings

logger = logging.getLogger(__name__)


def run_crossvalidation(args: argparse.Namespace) -> int:
    """Кросс-валидация по плану (файл или имя встроенного плана)"""
    plan = load_plan(args.plan)
    if args.output:
        plan.output.directory = Path(args.output)
    workers = args.workers or get_settings().workers
    result = crossvalidate(plan, workers=workers, prepare=not args.no_prepare)

    for measure in ("evaluations", "population", "cpu"):
        for kappa in plan.crossvalidation.kappas:
            print(f"kappa={kappa:g} median {measure} speedup={result.report.median(measure, kappa):.4g}")

    violations = {fold: ids for fold, ids in audit_output(plan.output.directory).items() if ids}
    if violations:
        raise PlanError(f"fold hygiene violated: {violations}")
    return 0


def _collect(directories: list[str]) -> tuple[list[SpeedupReport], dict[str, pd.DataFrame]]:
    """Готовые отчеты и профили разбиений из каталогов прошлых прогонов"""
    reports = []
    profiles = {}
    for directory in directories:
        reports.append(read_report(directory))
        profile_path = Path(directory) / "plots" / PROFILE_FILE
        if profile_path.exists():
            for series, frame in read_plot_series(profile_path).groupby("series"):
                profiles[series] = frame.drop(columns="series")
    return reports, profiles


def report(args: argparse.Namespace) -> int:
    """Статистика base/biased и/или готовые отчеты -> CSV ускорений и ряды для графиков"""
    if bool(args.base) != bool(args.biased):
        raise ConfigError("--base and --biased must be given together")
    reports, profiles = _collect(args.reports or [])
    if args.base:
        result = compute_speedups(
            read_stats_frame(args.base),
            read_stats_frame(args.biased),
            cpu_paired=not args.unpaired,
            n=args.n,
        )
        write_report(args.output, result)
        reports.append(result)
    if not reports:
        raise ConfigError("nothing to report: give --base/--biased or --reports")
    if len(reports) > 1 and any(item.summary["n"].isna().any() for item in reports):
        raise ConfigError("combined reports need a problem size each (write them with --n)")

    sizes = sorted({int(n) for item in reports for n in item.summary["n"].dropna()})
    emit_plot_data(Path(args.output) / "plots", profiles=profiles or None, reports=reports)
    logger.info(f"Plot data for problem sizes {sizes} written to {args.output}")
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("crossvalidate", help="run a crossvalidation plan")
    parser.add_argument("--plan", required=True, help="TOML plan file or bundled plan name")
    parser.add_argument("--output", help="override the plan's output directory")
    parser.add_argument("--workers", type=int, help="process pool size (default: HBOA_WORKERS)")
    parser.add_argument(
        "--no-prepare", action="store_true", help="use existing instances and optima.csv"
    )
    parser.set_defaults(handler=run_crossvalidation)

    parser = subparsers.add_parser("report", help="speedup report from run statistics")
    parser.add_argument("--base", help="run statistics without bias")
    parser.add_argument("--biased", help="run statistics with bias, one or more kappa")
    parser.add_argument(
        "--reports", nargs="+", help="directories with earlier reports to combine (one per size)"
    )
    parser.add_argument("--output", required=True)
    parser.add_argument("--n", type=int, help="problem size recorded in the report")
    parser.add_argument(
        "--unpaired", action="store_true", help="base and biased runs did not share a worker"
    )
    parser.set_defaults(handler=report)
