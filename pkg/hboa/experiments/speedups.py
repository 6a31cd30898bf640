"""
Мультипликативные ускорения: значение без смещения / значение со смещением
для времени, числа вычислений, шагов локального поиска и размера популяции
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
import pandas as pd

from hboa.exceptions import InputError, ParseError
from hboa.experiments.results import stats_to_frame
from hboa.models import RunStats

logger = logging.getLogger(__name__)

MEASURES = {
    "cpu": "wall_time_s",
    "evaluations": "evaluations",
    "hc_steps": "hc_steps",
    "population": "N",
}
SUMMARY_COLUMNS = ["n", "kappa", "measure", "median", "q1", "q3", "mean", "instances"]


@dataclass
class SpeedupReport:
    per_instance: pd.DataFrame  # instance_id, n, kappa, cpu, evaluations, hc_steps, population
    summary: pd.DataFrame  # SUMMARY_COLUMNS
    cpu_paired: bool = True

    def median(self, measure: str, kappa: float) -> float:
        rows = self.summary[(self.summary["measure"] == measure) & (self.summary["kappa"] == kappa)]
        if rows.empty:
            raise InputError(f"no {measure} speedups for kappa={kappa}")
        return float(rows["median"].iloc[0])


def _as_frame(stats: pd.DataFrame | Iterable[RunStats]) -> pd.DataFrame:
    if isinstance(stats, pd.DataFrame):
        return stats
    return stats_to_frame(stats)


def _instance_means(frame: pd.DataFrame) -> pd.DataFrame:
    """Средние по запускам каждого экземпляра (и κ)"""
    columns = list(MEASURES.values())
    return frame.groupby(["instance_id", "kappa"])[columns].mean().reset_index()


def summarize(per_instance: pd.DataFrame) -> pd.DataFrame:
    """Медиана, квартили и среднее по экземплярам для каждой пары (n, κ)"""
    rows = []
    for (n, kappa), group in per_instance.groupby(["n", "kappa"], dropna=False):
        for measure in MEASURES:
            values = group[measure].dropna()
            if values.empty:
                q1 = median = q3 = mean = np.nan
            else:
                q1, median, q3 = np.quantile(values, [0.25, 0.5, 0.75])
                mean = values.mean()
            rows.append(
                {
                    "n": n,
                    "kappa": kappa,
                    "measure": measure,
                    "median": median,
                    "q1": q1,
                    "q3": q3,
                    "mean": mean,
                    "instances": int(values.size),
                }
            )
    return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)


def compute_speedups(
    base: pd.DataFrame | Iterable[RunStats],
    biased: pd.DataFrame | Iterable[RunStats],
    cpu_paired: bool = True,
    n: Optional[int] = None,
) -> SpeedupReport:
    """Ускорения по экземплярам для каждого κ из biased и их сводка"""
    base_means = _instance_means(_as_frame(base)).set_index("instance_id")
    biased_means = _instance_means(_as_frame(biased))
    if base_means.index.duplicated().any():
        raise InputError("base statistics must hold one setting per instance")

    rows = []
    for kappa, group in biased_means.groupby("kappa"):
        unmatched = set(group["instance_id"]) ^ set(base_means.index)
        if unmatched:
            raise InputError(
                f"instances without a base/biased pair at kappa={kappa}: {sorted(unmatched)[:5]}"
            )
        for item in group.itertuples(index=False):
            row = {"instance_id": item.instance_id, "n": n, "kappa": kappa}
            for measure, column in MEASURES.items():
                row[measure] = base_means.at[item.instance_id, column] / getattr(item, column)
            rows.append(row)

    per_instance = pd.DataFrame(
        rows, columns=["instance_id", "n", "kappa"] + list(MEASURES)
    ).sort_values(["kappa", "instance_id"], ignore_index=True)
    if not cpu_paired:
        logger.warning("Base and biased runs were not paired on one worker: CPU speedup unavailable")
        per_instance["cpu"] = np.nan
    return SpeedupReport(per_instance, summarize(per_instance), cpu_paired)


# ================================
# CSV ОТЧЕТА
# ================================


def write_report(directory: str | Path, report: SpeedupReport) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    per_instance = directory / "speedups.csv"
    summary = directory / "speedups_summary.csv"
    report.per_instance.to_csv(per_instance, index=False)
    report.summary.assign(cpu_paired=report.cpu_paired).to_csv(summary, index=False)
    logger.info(f"Speedup report written to {directory}")
    return [per_instance, summary]


def read_report(directory: str | Path) -> SpeedupReport:
    directory = Path(directory)
    try:
        per_instance = pd.read_csv(
            directory / "speedups.csv", dtype={"instance_id": str}, float_precision="round_trip"
        )
        summary = pd.read_csv(directory / "speedups_summary.csv", float_precision="round_trip")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ParseError(directory, 1, "report", str(e))
    cpu_paired = bool(summary["cpu_paired"].all()) if "cpu_paired" in summary else True
    return SpeedupReport(per_instance, summary[SUMMARY_COLUMNS], cpu_paired)
