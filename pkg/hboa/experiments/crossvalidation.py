"""
10-кратная кросс-валидация смещения по расстояниям: базовые запуски с архивом
моделей, таблица P_k(d, j) по обучающим фолдам, запуски со смещением на тестовом
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import ValidationError

from hboa.bias.archive import ArchiveWriter, ModelRecord, read_archive
from hboa.bias.miner import (
    BiasTable,
    build_bias_table,
    distance_profile,
    extract_counts,
    write_bias_table,
)
from hboa.engine.bisection import bisection
from hboa.exceptions import ConfigError, EmptyArchiveError, PlanError, UnsolvableAtCapError
from hboa.experiments.instances import InstanceEntry, load_instances, prepare_instances
from hboa.experiments.plot_data import emit_plot_data
from hboa.experiments.results import stats_to_frame, write_stats
from hboa.experiments.speedups import SpeedupReport, compute_speedups, write_report
from hboa.models import EngineConfig, ExperimentPlan, PriorMode, RunStats
from hboa.seeding import derive_seed, make_rng

logger = logging.getLogger(__name__)


@dataclass
class FoldOutcome:
    fold: int
    test_ids: list[str]
    provenance: list[str]
    table_path: Path


@dataclass
class CrossvalidationResult:
    report: SpeedupReport
    folds: list[FoldOutcome] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)


# ================================
# ФОЛДЫ И ПРОВЕРКА ИЗОЛЯЦИИ
# ================================


def split_folds(instance_ids: Sequence[str], folds: int, seed: int) -> list[list[str]]:
    """Случайное разбиение на folds равных частей"""
    if folds < 2 or len(instance_ids) % folds:
        raise ConfigError(f"{len(instance_ids)} instances cannot form {folds} equal folds")
    order = make_rng(seed).permutation(len(instance_ids))
    return [
        sorted(instance_ids[i] for i in part) for part in np.array_split(order, folds)
    ]


def audit_fold_hygiene(provenance: Iterable[str], test_ids: Iterable[str]) -> list[str]:
    """Экземпляры тестового фолда, чьи модели попали в его таблицу (должно быть пусто)"""
    return sorted(set(provenance) & set(test_ids))


def audit_output(directory: str | Path) -> dict[int, list[str]]:
    """Проверка изоляции по сохраненным folds.csv и provenance/fold-*.csv"""
    directory = Path(directory)
    folds = pd.read_csv(directory / "folds.csv", dtype={"instance_id": str})
    violations = {}
    for fold, group in folds.groupby("fold"):
        provenance = pd.read_csv(
            directory / "provenance" / f"fold-{fold:02d}.csv", dtype={"instance_id": str}
        )
        violations[int(fold)] = audit_fold_hygiene(provenance["instance_id"], group["instance_id"])
    return violations


# ================================
# ЗАДАЧИ ДЛЯ ПРОЦЕССОВ
# ================================


@dataclass
class BaseTask:
    entry: InstanceEntry
    template: EngineConfig
    start: int
    cap: int
    runs: int
    archive_stride: int


@dataclass
class HeldOutTask:
    entry: InstanceEntry
    template: EngineConfig
    start: int
    cap: int
    runs: int
    table: BiasTable
    kappas: list[float]
    pair_base_runs: bool


@dataclass
class TaskOutcome:
    instance_id: str
    base: list[RunStats] = field(default_factory=list)
    biased: list[RunStats] = field(default_factory=list)
    records: list[ModelRecord] = field(default_factory=list)
    failed: Optional[str] = None


def _run_base(task: BaseTask) -> TaskOutcome:
    problem = task.entry.load()
    outcome = TaskOutcome(task.entry.instance_id)
    try:
        result = bisection(
            problem,
            task.template,
            task.entry.optimum,
            start=task.start,
            cap=task.cap,
            runs=task.runs,
            archive_stride=task.archive_stride,
            instance_id=task.entry.instance_id,
        )
    except UnsolvableAtCapError as e:
        outcome.failed = e.message
        return outcome
    fingerprint = problem.distances.fingerprint()
    outcome.base = result.stats
    outcome.records = [
        ModelRecord(task.entry.instance_id, item.run, item.iteration, item.model, fingerprint)
        for item in result.models
    ]
    return outcome


def _run_held_out(task: HeldOutTask) -> TaskOutcome:
    """Базовые и смещенные запуски одного экземпляра в одном процессе"""
    problem = task.entry.load()
    outcome = TaskOutcome(task.entry.instance_id)
    settings = dict(start=task.start, cap=task.cap, runs=task.runs, instance_id=task.entry.instance_id)
    try:
        if task.pair_base_runs:
            outcome.base = bisection(problem, task.template, task.entry.optimum, **settings).stats
        for kappa in task.kappas:
            template = task.template.model_copy(
                update={"prior_mode": PriorMode.BIAS, "kappa": kappa, "bias": task.table}
            )
            outcome.biased += bisection(problem, template, task.entry.optimum, **settings).stats
    except UnsolvableAtCapError as e:
        outcome.failed = e.message
    return outcome


def _map(function: Callable, tasks: list, workers: int) -> list:
    """Результаты в порядке задач; сбор и запись файлов - в родительском процессе"""
    if workers <= 1 or len(tasks) <= 1:
        return [function(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(function, tasks))


# ================================
# ОРКЕСТРАЦИЯ
# ================================


def engine_template(plan: ExperimentPlan, index: int) -> EngineConfig:
    try:
        return EngineConfig(
            population_size=plan.engine.start_population,
            max_iterations=plan.engine.max_iterations,
            rts_window=plan.engine.rts_window,
            hc_enabled=plan.engine.hc_enabled,
            seed=derive_seed(plan.engine.seed, index),
        )
    except ValidationError as e:
        raise ConfigError(f"engine section: {e.errors()[0]['msg']}")


def crossvalidate(
    plan: ExperimentPlan,
    workers: int = 1,
    prepare: bool = True,
) -> CrossvalidationResult:
    """Полный цикл кросс-валидации; все файлы пишутся в plan.output.directory"""
    output = plan.output.directory
    output.mkdir(parents=True, exist_ok=True)
    entries = prepare_instances(plan) if prepare else load_instances(plan)
    by_id = {entry.instance_id: entry for entry in entries}
    templates = {entry.instance_id: engine_template(plan, i) for i, entry in enumerate(entries)}
    common = dict(
        start=plan.engine.start_population,
        cap=plan.engine.population_cap,
        runs=plan.engine.runs_per_size,
    )

    folds = split_folds(
        [entry.instance_id for entry in entries],
        plan.crossvalidation.folds,
        plan.crossvalidation.fold_seed,
    )
    pd.DataFrame(
        [{"instance_id": i, "fold": f} for f, ids in enumerate(folds) for i in ids]
    ).to_csv(output / "folds.csv", index=False)

    logger.info(f"Base runs on {len(entries)} instances with {workers} workers")
    base_tasks = [
        BaseTask(entry, templates[entry.instance_id], archive_stride=plan.engine.archive_stride, **common)
        for entry in entries
    ]
    skipped = []
    archives = {}
    training_base = []
    for outcome in _map(_run_base, base_tasks, workers):
        if outcome.failed:
            logger.warning(f"Instance {outcome.instance_id} skipped: {outcome.failed}")
            skipped.append(outcome.instance_id)
            continue
        path = output / "archives" / f"{outcome.instance_id}.arc"
        path.unlink(missing_ok=True)
        ArchiveWriter(
            path, plan.problem.size, {"problem": plan.problem.kind, "instance": outcome.instance_id}
        ).append(outcome.records)
        archives[outcome.instance_id] = path
        training_base += outcome.base
    write_stats(output / "base_training.csv", training_base)

    result_folds = []
    paired_base, biased = [], []
    for f, test_ids in enumerate(folds):
        training = [i for i in archives if i not in set(test_ids)]
        if not training:
            raise PlanError(f"fold {f} has no training archives")
        try:
            archive = read_archive([archives[i] for i in training])
        except EmptyArchiveError:
            raise PlanError(
                f"fold {f}: training instances left no models (solved in the initial population?)"
            )
        distances = {i: by_id[i].load().distances for i in training}
        table = build_bias_table(archive, distances, pooled=plan.crossvalidation.pooled)

        violations = audit_fold_hygiene(table.provenance, test_ids)
        if violations:
            raise PlanError(f"fold {f} bias table uses test instances {violations}")
        table_path = write_bias_table(output / "tables" / f"fold-{f:02d}.csv", table)
        provenance_path = output / "provenance" / f"fold-{f:02d}.csv"
        provenance_path.parent.mkdir(parents=True, exist_ok=True)
        pd.DataFrame({"instance_id": list(table.provenance)}).to_csv(provenance_path, index=False)

        tasks = [
            HeldOutTask(
                by_id[i],
                templates[i],
                table=table,
                kappas=plan.crossvalidation.kappas,
                pair_base_runs=plan.crossvalidation.pair_base_runs,
                **common,
            )
            for i in test_ids
            if i not in skipped
        ]
        logger.info(f"Fold {f}: {len(training)} training instances, {len(tasks)} test instances")
        for outcome in _map(_run_held_out, tasks, workers):
            if outcome.failed:
                logger.warning(f"Instance {outcome.instance_id} skipped in fold {f}: {outcome.failed}")
                skipped.append(outcome.instance_id)
                continue
            paired_base += outcome.base
            biased += outcome.biased
        result_folds.append(FoldOutcome(f, list(test_ids), list(table.provenance), table_path))

    if not plan.crossvalidation.pair_base_runs:
        tested = {stats.instance_id for stats in biased}
        paired_base = [stats for stats in training_base if stats.instance_id in tested]
    write_stats(output / "base.csv", paired_base)
    write_stats(output / "biased.csv", biased)
    if not biased:
        raise PlanError("no instance was solved in the biased runs")

    report = compute_speedups(
        stats_to_frame(paired_base),
        stats_to_frame(biased),
        cpu_paired=plan.crossvalidation.pair_base_runs,
        n=plan.problem.size,
    )
    write_report(output, report)

    all_archives = read_archive(list(archives.values()))
    all_distances = {i: by_id[i].load().distances for i in archives}
    profile = distance_profile(
        extract_counts(record.model, all_distances[record.instance_id])
        for record in all_archives.records
    )
    emit_plot_data(
        output / "plots",
        profiles={f"{plan.problem.kind}-n{plan.problem.size}": profile},
        reports=[report],
    )
    logger.info(f"Crossvalidation finished: {len(result_folds)} folds, {len(skipped)} skipped")
    return CrossvalidationResult(report, result_folds, sorted(set(skipped)))
