import argparse
import logging
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from hboa.bias.archive import ArchiveWriter, ModelRecord
from hboa.bias.miner import read_bias_table
from hboa.engine.bisection import bisection
from hboa.engine.runner import run
from hboa.exceptions import ConfigError
from hboa.experiments.instances import solve_exact
from hboa.experiments.results import write_stats
from hboa.model.network import DtBayesNet
from hboa.models import EngineConfig, PriorMode
from hboa.problems.instance_io import read_instance

logger = logging.getLogger(__name__)


def _engine_config(args: argparse.Namespace, population_size: int) -> EngineConfig:
    bias = None
    if args.mode == PriorMode.BIAS.value:
        if not args.bias_table:
            raise ConfigError("--mode bias requires --bias-table")
        bias = read_bias_table(args.bias_table)
    try:
        return EngineConfig(
            population_size=population_size,
            max_iterations=args.max_iterations,
            prior_mode=PriorMode(args.mode),
            kappa=args.kappa,
            bias=bias,
            rts_window=args.rts_window,
            hc_enabled=not args.no_hc,
            seed=args.seed,
        )
    except ValidationError as e:
        raise ConfigError(e.errors()[0]["msg"])


def write_population(path: str | Path, bits: np.ndarray, fitness: np.ndarray) -> Path:
    """Строка на решение: биты и значение в hex-float"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        f"{''.join(str(b) for b in row)} {float(value).hex()}" for row, value in zip(bits, fitness)
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def run_instance(args: argparse.Namespace) -> int:
    """Один запуск (--pop) или бисекция (--bisection) на одном экземпляре"""
    problem, spec = read_instance(args.instance)
    instance_id = args.instance_id or Path(args.instance).stem
    optimum = args.optimum if args.optimum is not None else solve_exact(problem, spec).value

    writer = None
    if args.archive:
        writer = ArchiveWriter(args.archive, problem.n, {"instance": instance_id})
    fingerprint = problem.distances.fingerprint() if writer else ""

    if args.bisection:
        template = _engine_config(args, args.start)
        result = bisection(
            problem,
            template,
            optimum,
            start=args.start,
            cap=args.cap,
            runs=args.runs,
            archive_stride=args.archive_stride if writer else None,
            instance_id=instance_id,
        )
        stats = result.stats
        if writer:
            writer.append(
                ModelRecord(instance_id, item.run, item.iteration, item.model, fingerprint)
                for item in result.models
            )
        print(f"population_size={result.population_size} lower={result.lower}")
    else:
        config = _engine_config(args, args.pop)
        records = []

        def sink(iteration: int, model: DtBayesNet) -> None:
            if (iteration - 1) % args.archive_stride == 0:
                records.append(ModelRecord(instance_id, 0, iteration, model, fingerprint))

        outcome = run(
            problem, config, optimum, model_sink=sink if writer else None, instance_id=instance_id
        )
        stats = [outcome.stats]
        if writer:
            writer.append(records)
        if args.population_out:
            write_population(args.population_out, outcome.population.bits, outcome.population.fitness)
        print(
            f"success={outcome.stats.success} iterations={outcome.stats.iterations} "
            f"evaluations={outcome.stats.evaluations} hc_steps={outcome.stats.hc_steps}"
        )

    if args.output:
        write_stats(args.output, stats, append=True)
        logger.info(f"{len(stats)} run rows appended to {args.output}")
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("run", help="run hBOA on one instance")
    parser.add_argument("--instance", required=True)
    parser.add_argument("--instance-id", help="id written to outputs (default: file stem)")
    parser.add_argument("--mode", choices=[mode.value for mode in PriorMode], default="penalty")
    parser.add_argument("--bias-table")
    parser.add_argument("--kappa", type=float, default=1.0)
    parser.add_argument("--seed", type=int, default=0)
    size = parser.add_mutually_exclusive_group(required=True)
    size.add_argument("--pop", type=int, help="fixed population size")
    size.add_argument("--bisection", action="store_true", help="find the minimal population size")
    parser.add_argument("--start", type=int, default=32, help="first size of the doubling phase")
    parser.add_argument("--cap", type=int, default=2**20)
    parser.add_argument("--runs", type=int, default=10, help="runs per population size")
    parser.add_argument("--optimum", type=float, help="known optimum (default: exact oracle)")
    parser.add_argument("--max-iterations", type=int)
    parser.add_argument("--rts-window", type=int)
    parser.add_argument("--no-hc", action="store_true", help="disable local search")
    parser.add_argument("--archive", help="append this run's models to an archive file")
    parser.add_argument("--archive-stride", type=int, default=1)
    parser.add_argument("--output", help="CSV file to append run statistics to")
    parser.add_argument("--population-out", help="dump the final population (single runs)")
    parser.set_defaults(handler=run_instance)
