import argparse
import logging
from pathlib import Path

from hboa.bias.archive import read_archive
from hboa.bias.miner import build_bias_table, distance_profile, extract_counts, write_bias_table
from hboa.exceptions import InputError
from hboa.problems.instance_io import read_instance

logger = logging.getLogger(__name__)


def _distances(args: argparse.Namespace, instance_ids: set[str]):
    """Одна общая матрица (--instance) или по файлу <id>.txt на экземпляр (--instances)"""
    if args.instance:
        problem, _ = read_instance(args.instance)
        return problem.distances
    directory = Path(args.instances)
    matrices = {}
    for instance_id in sorted(instance_ids):
        path = directory / f"{instance_id}.txt"
        if not path.exists():
            raise InputError(f"no instance file {path} for archived records")
        problem, _ = read_instance(path)
        matrices[instance_id] = problem.distances
    return matrices


def mine(args: argparse.Namespace) -> int:
    """Архив(ы) моделей -> таблица P_k(d, j) и/или доли разбиений по расстояниям"""
    excluded = set(args.exclude or [])
    if args.exclude_file:
        try:
            lines = Path(args.exclude_file).read_text(encoding="utf-8").splitlines()
        except OSError as e:
            raise InputError(f"cannot read exclude file {args.exclude_file}: {e}")
        excluded |= {line.strip() for line in lines if line.strip()}
    archive = read_archive(args.archive, exclude=excluded)
    distances = _distances(args, archive.instance_ids)

    if args.output:
        table = build_bias_table(archive, distances, pooled=args.pooled)
        write_bias_table(args.output, table)
    if args.proportions:
        counts = [
            extract_counts(
                record.model,
                distances if not isinstance(distances, dict) else distances[record.instance_id],
            )
            for record in archive.records
        ]
        path = Path(args.proportions)
        path.parent.mkdir(parents=True, exist_ok=True)
        distance_profile(counts).to_csv(path, index=False)
        logger.info(f"Split proportions written to {path}")
    return 0


def register(subparsers) -> None:
    parser = subparsers.add_parser("mine", help="build a distance-bias table from archives")
    parser.add_argument("--archive", nargs="+", required=True)
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--instance", help="instance sharing one interaction graph")
    source.add_argument("--instances", help="directory with <instance_id>.txt files")
    parser.add_argument("--exclude", nargs="*", help="instance ids to leave out")
    parser.add_argument("--exclude-file", help="file with one excluded instance id per line")
    parser.add_argument("--pooled", action="store_true", help="pool statistics over variables")
    parser.add_argument("--output", help="bias table CSV")
    parser.add_argument("--proportions", help="CSV of split proportions by distance")
    parser.set_defaults(handler=mine)
