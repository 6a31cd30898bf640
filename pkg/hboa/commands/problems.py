import argparse
import logging
from pathlib import Path

from pydantic import ValidationError

from hboa.exceptions import ConfigError
from hboa.experiments.instances import solve_exact
from hboa.models import NkSpec, SpinGlassSpec
from hboa.problems.instance_io import read_instance, write_instance
from hboa.problems.nk import generate_nk
from hboa.problems.spin_glass import generate_spin_glass

logger = logging.getLogger(__name__)


def gen_nk(args: argparse.Namespace) -> int:
    """Генерация экземпляра NK"""
    try:
        spec = NkSpec(n=args.n, k=args.k, seed=args.seed, shuffle=args.shuffle)
    except ValidationError as e:
        raise ConfigError(e.errors()[0]["msg"])
    path = write_instance(args.output, generate_nk(spec), spec)
    logger.info(f"NK instance n={spec.n} k={spec.k} seed={spec.seed} written to {path}")
    return 0


def gen_sg(args: argparse.Namespace) -> int:
    """Генерация экземпляра спинового стекла"""
    try:
        spec = SpinGlassSpec(L=args.L, seed=args.seed)
    except ValidationError as e:
        raise ConfigError(e.errors()[0]["msg"])
    path = write_instance(args.output, generate_spin_glass(spec), spec)
    logger.info(f"Spin glass instance L={spec.L} seed={spec.seed} written to {path}")
    return 0


def solve(args: argparse.Namespace) -> int:
    """Точный оптимум экземпляра: значение и строка-свидетель"""
    problem, spec = read_instance(args.instance)
    solution = solve_exact(problem, spec)
    witness = "".join(str(bit) for bit in solution.witness)
    print(f"optimum={solution.value.hex()} ({solution.value:.10g})")
    print(f"witness={witness}")
    if args.output:
        path = Path(args.output)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(solution.model_dump_json(), encoding="utf-8")
        logger.info(f"Exact solution written to {path}")
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("gen-nk", help="generate a nearest-neighbour NK instance")
    parser.add_argument("--n", type=int, required=True)
    parser.add_argument("--k", type=int, required=True)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--shuffle", action="store_true", help="relabel variables randomly")
    parser.add_argument("--output", required=True)
    parser.set_defaults(handler=gen_nk)

    parser = subparsers.add_parser("gen-sg", help="generate a 2D ±J spin glass instance")
    parser.add_argument("--L", type=int, required=True)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--output", required=True)
    parser.set_defaults(handler=gen_sg)

    parser = subparsers.add_parser("solve", help="exact optimum by DP or transfer matrix")
    parser.add_argument("--instance", required=True)
    parser.add_argument("--output", help="JSON file for the solution")
    parser.set_defaults(handler=solve)
