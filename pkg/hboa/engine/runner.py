"""
Основной цикл hBOA: отбор -> модель -> выборка -> локальный поиск -> RTS
"""

import logging
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from hboa.engine.local_search import BitFlipHillClimber
from hboa.engine.operators import Population, rts_replace, tournament_select
from hboa.model.learning import build_model
from hboa.model.network import DtBayesNet, sample
from hboa.models import EngineConfig, PriorMode, RunStats
from hboa.problems.adf import AdditiveProblem, evaluate_many
from hboa.seeding import make_rng

logger = logging.getLogger(__name__)

SUCCESS_TOLERANCE = 1e-9

ModelSink = Callable[[int, DtBayesNet], None]


@dataclass
class RunResult:
    """Статистика запуска и итоговая популяция"""

    stats: RunStats
    population: Population


def reached_optimum(value: float, known_optimum: Optional[float]) -> bool:
    return known_optimum is not None and value >= known_optimum - SUCCESS_TOLERANCE


def run(
    problem: AdditiveProblem,
    config: EngineConfig,
    known_optimum: Optional[float] = None,
    model_sink: Optional[ModelSink] = None,
    instance_id: str = "",
    run_index: int = 0,
) -> RunResult:
    """
    Один запуск hBOA. Остановка: найден оптимум, популяция сошлась к одной строке
    или исчерпан лимит итераций. model_sink получает (итерация, модель)
    """
    started = time.perf_counter()
    rng = make_rng(config.seed)
    N, n = config.population_size, problem.n
    window = min(config.window_for(n), N)
    max_iterations = config.iterations_for(n)
    score_config = config.score_config()
    distances = problem.distances if config.prior_mode is PriorMode.BIAS else None
    climber = BitFlipHillClimber(problem) if config.hc_enabled else None

    def improve(bits: np.ndarray) -> tuple[Population, int]:
        flips = 0
        if climber is not None:
            bits, per_row = climber.climb(bits)
            flips = int(per_row.sum())
        return Population(bits, evaluate_many(problem, bits)), flips

    population, hc_steps = improve(rng.integers(0, 2, size=(N, n), dtype=np.uint8))
    evaluations = N
    iterations = 0

    while True:
        _, best = population.best()
        if reached_optimum(best, known_optimum):
            break
        if population.is_converged() or iterations >= max_iterations:
            break

        parents = tournament_select(population, rng)
        model = build_model(parents.bits, score_config, distances)
        iterations += 1
        if model_sink is not None:
            model_sink(iterations, model)

        offspring, flips = improve(sample(model, N, rng))
        hc_steps += flips
        evaluations += N
        rts_replace(population, offspring, window, rng)
        logger.debug(
            f"Iteration {iterations}: best={population.best()[1]:.6f}, "
            f"splits={model.split_count()}, evaluations={evaluations}"
        )

    _, best = population.best()
    stats = RunStats(
        instance_id=instance_id,
        mode=config.prior_mode,
        kappa=config.kappa if config.prior_mode is PriorMode.BIAS else 0.0,
        population_size=N,
        iterations=iterations,
        evaluations=evaluations,
        hc_steps=hc_steps,
        wall_time=time.perf_counter() - started,
        success=reached_optimum(best, known_optimum),
        run=run_index,
        seed=config.seed,
    )
    logger.debug(
        f"Run finished: N={N}, iterations={iterations}, best={best:.6f}, success={stats.success}"
    )
    return RunResult(stats, population)
