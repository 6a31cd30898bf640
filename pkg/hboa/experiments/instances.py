"""
Набор экземпляров плана: генерация, точные оптимумы и таблица optima.csv
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import pandas as pd

from hboa.exceptions import ParseError, PlanError
from hboa.models import ExactSolution, ExperimentPlan, NkSpec, SpinGlassSpec
from hboa.problems.adf import AdditiveProblem
from hboa.problems.instance_io import InstanceSpec, read_instance, write_instance
from hboa.problems.nk import generate_nk, solve_nk_dp
from hboa.problems.spin_glass import generate_spin_glass, solve_spin_glass_oracle
from hboa.seeding import derive_seed

logger = logging.getLogger(__name__)

OPTIMA_FILE = "optima.csv"
OPTIMA_COLUMNS = ["instance_id", "file", "optimum", "witness"]


@dataclass
class InstanceEntry:
    """Экземпляр плана с известным оптимумом"""

    instance_id: str
    path: Path
    optimum: float

    def load(self) -> AdditiveProblem:
        problem, _ = read_instance(self.path)
        return problem


def instance_id(kind: str, index: int) -> str:
    return f"{kind}-{index:04d}"


def plan_spec(plan: ExperimentPlan, index: int) -> InstanceSpec:
    """Спецификация index-го экземпляра; зерно выводится из зерна набора"""
    seed = derive_seed(plan.instances.seed, index)
    if plan.problem.kind == "nk":
        return NkSpec(n=plan.problem.n, k=plan.problem.k, seed=seed, shuffle=plan.problem.shuffle)
    return SpinGlassSpec(L=plan.problem.L, seed=seed)


def generate_problem(spec: InstanceSpec) -> AdditiveProblem:
    if isinstance(spec, NkSpec):
        return generate_nk(spec)
    return generate_spin_glass(spec)


def solve_exact(problem: AdditiveProblem, spec: InstanceSpec) -> ExactSolution:
    """Точный оптимум подходящим оракулом"""
    if isinstance(spec, NkSpec):
        return solve_nk_dp(problem)
    return solve_spin_glass_oracle(problem)


def write_optima(path: str | Path, rows: list[dict]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(rows, columns=OPTIMA_COLUMNS)
    frame["optimum"] = frame["optimum"].map(float.hex)
    frame.to_csv(path, index=False)
    return path


def read_optima(path: str | Path) -> pd.DataFrame:
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype={"instance_id": str, "file": str, "witness": str})
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ParseError(path, 1, "optima", str(e))
    if list(frame.columns) != OPTIMA_COLUMNS:
        raise ParseError(path, 1, "columns", f"expected columns {','.join(OPTIMA_COLUMNS)}")
    try:
        frame["optimum"] = frame["optimum"].map(
            lambda value: float.fromhex(value) if "0x" in str(value) else float(value)
        )
    except ValueError as e:
        raise ParseError(path, 2, "optimum", str(e))
    return frame


def prepare_instances(plan: ExperimentPlan) -> list[InstanceEntry]:
    """Создает недостающие файлы экземпляров, решает их и пишет optima.csv"""
    directory = plan.instances_dir
    directory.mkdir(parents=True, exist_ok=True)
    rows = []
    for index in range(plan.instances.count):
        name = instance_id(plan.problem.kind, index)
        path = directory / f"{name}.txt"
        spec = plan_spec(plan, index)
        if path.exists():
            problem, spec = read_instance(path)
        else:
            problem = generate_problem(spec)
            write_instance(path, problem, spec)
        solution = solve_exact(problem, spec)
        rows.append(
            {
                "instance_id": name,
                "file": path.name,
                "optimum": solution.value,
                "witness": "".join(str(bit) for bit in solution.witness),
            }
        )
    write_optima(directory / OPTIMA_FILE, rows)
    logger.info(f"Prepared {len(rows)} instances with exact optima in {directory}")
    return load_instances(plan)


def load_instances(plan: ExperimentPlan) -> list[InstanceEntry]:
    """Экземпляры плана с оптимумами из optima.csv; без оптимума план невыполним"""
    directory = plan.instances_dir
    optima_path = directory / OPTIMA_FILE
    if not optima_path.exists():
        raise PlanError(f"known optima are missing: {optima_path} does not exist")
    frame = read_optima(optima_path).set_index("instance_id")

    entries = []
    for index in range(plan.instances.count):
        name = instance_id(plan.problem.kind, index)
        if name not in frame.index or pd.isna(frame.at[name, "optimum"]):
            raise PlanError(f"instance {name} has no known optimum in {optima_path}")
        path = directory / frame.at[name, "file"]
        if not path.exists():
            raise PlanError(f"instance file {path} is missing")
        entries.append(InstanceEntry(name, path, float(frame.at[name, "optimum"])))
    return entries
