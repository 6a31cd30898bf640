"""
Бисекция размера популяции: удвоение от стартового размера до 10/10 успешных
запусков, затем деление отрезка до отношения границ не больше 1.05.
Размеры только четные, поэтому при малых N отрезок может остаться шире (32/34): поиск
останавливается, когда между границами нет четного размера
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

from hboa.engine.runner import run
from hboa.exceptions import ConfigError, UnsolvableAtCapError
from hboa.model.network import DtBayesNet
from hboa.models import EngineConfig, RunStats
from hboa.problems.adf import AdditiveProblem
from hboa.seeding import derive_seed

logger = logging.getLogger(__name__)

BRACKET_RATIO = 1.05


@dataclass
class ArchivedModel:
    """Модель одной итерации одного запуска"""

    run: int
    iteration: int
    model: DtBayesNet


@dataclass
class SizeTrial:
    """Запуски на одном размере популяции"""

    population_size: int
    stats: list[RunStats]
    models: list[ArchivedModel] = field(default_factory=list)

    @property
    def solved(self) -> bool:
        return all(stats.success for stats in self.stats)


@dataclass
class BisectionResult:
    population_size: int
    lower: Optional[int]  # наибольший неуспешный размер; None, если успешен стартовый
    stats: list[RunStats]
    models: list[ArchivedModel]
    history: list[tuple[int, int, int]]  # (N, успешных, выполнено)


def trial(
    problem: AdditiveProblem,
    template: EngineConfig,
    population_size: int,
    known_optimum: float,
    runs: int = 10,
    archive_stride: Optional[int] = None,
    instance_id: str = "",
    stop_on_failure: bool = True,
) -> SizeTrial:
    """До runs независимых запусков на размере N; зерно запуска r = derive_seed(seed, N, r)"""
    result = SizeTrial(population_size, [])
    for r in range(runs):
        seed = derive_seed(template.seed, population_size, r)
        config = template.model_copy(update={"population_size": population_size, "seed": seed})

        collected: list[ArchivedModel] = []
        sink = None
        if archive_stride is not None:

            def sink(iteration: int, model: DtBayesNet, r=r, collected=collected) -> None:
                if (iteration - 1) % archive_stride == 0:
                    collected.append(ArchivedModel(r, iteration, model))

        outcome = run(
            problem, config, known_optimum, model_sink=sink, instance_id=instance_id, run_index=r
        )
        result.stats.append(outcome.stats)
        result.models.extend(collected)
        if stop_on_failure and not outcome.stats.success:
            break
    logger.info(
        f"Population {population_size}: {sum(s.success for s in result.stats)}"
        f"/{len(result.stats)} runs reached the optimum"
    )
    return result


def bisection(
    problem: AdditiveProblem,
    template: EngineConfig,
    known_optimum: float,
    start: int = 32,
    cap: int = 2**20,
    runs: int = 10,
    archive_stride: Optional[int] = None,
    instance_id: str = "",
) -> BisectionResult:
    """
    Минимальный (с точностью 5%) размер популяции с успехом во всех runs запусках.
    Если верхняя и нижняя границы отличаются на 2, отношение может превышать 1.05
    """
    if start < 2 or start % 2:
        raise ConfigError(f"start population must be even and at least 2, got {start}")

    history = []

    def attempt(size: int) -> SizeTrial:
        outcome = trial(
            problem,
            template,
            size,
            known_optimum,
            runs=runs,
            archive_stride=archive_stride,
            instance_id=instance_id,
        )
        history.append((size, sum(s.success for s in outcome.stats), len(outcome.stats)))
        return outcome

    lower = None
    size = start
    while True:
        if size > cap:
            raise UnsolvableAtCapError(cap)
        upper = attempt(size)
        if upper.solved:
            break
        lower = size
        size *= 2

    if lower is not None:
        while upper.population_size / lower > BRACKET_RATIO:
            middle = (lower + upper.population_size) // 4 * 2
            if middle <= lower or middle >= upper.population_size:
                break
            outcome = attempt(middle)
            if outcome.solved:
                upper = outcome
            else:
                lower = middle

    logger.info(
        f"Bisection finished{f' for {instance_id}' if instance_id else ''}: "
        f"N={upper.population_size}, lower={lower}"
    )
    return BisectionResult(upper.population_size, lower, upper.stats, upper.models, history)
