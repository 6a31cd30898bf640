"""
Хранение статистики запусков (RunStats) в CSV
"""

import logging
from pathlib import Path
from typing import Iterable

import pandas as pd
from pydantic import ValidationError

from hboa.exceptions import ParseError
from hboa.models import RunStats

logger = logging.getLogger(__name__)

STATS_COLUMNS = [
    "instance_id",
    "mode",
    "kappa",
    "N",
    "iterations",
    "evaluations",
    "hc_steps",
    "wall_time_s",
    "success",
    "run",
    "seed",
]

RENAMED = {"population_size": "N", "wall_time": "wall_time_s"}


def stats_to_frame(stats: Iterable[RunStats]) -> pd.DataFrame:
    rows = [item.model_dump(mode="json") for item in stats]
    frame = pd.DataFrame(rows).rename(columns=RENAMED)
    if frame.empty:
        return pd.DataFrame(columns=STATS_COLUMNS)
    return frame[STATS_COLUMNS]


def write_stats(path: str | Path, stats: Iterable[RunStats], append: bool = False) -> Path:
    """Одна строка CSV на запуск; append дописывает без повторного заголовка"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = stats_to_frame(stats)
    exists = append and path.exists() and path.stat().st_size > 0
    frame.to_csv(path, mode="a" if exists else "w", header=not exists, index=False)
    logger.debug(f"{len(frame)} run rows written to {path}")
    return path


def read_stats_frame(path: str | Path) -> pd.DataFrame:
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype={"instance_id": str}, float_precision="round_trip")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ParseError(path, 1, "stats", str(e))
    missing = [column for column in STATS_COLUMNS if column not in frame.columns]
    if missing:
        raise ParseError(path, 1, "columns", f"missing columns: {', '.join(missing)}")
    return frame[STATS_COLUMNS]


def read_stats(path: str | Path) -> list[RunStats]:
    frame = read_stats_frame(path).rename(columns={v: k for k, v in RENAMED.items()})
    stats = []
    for offset, row in enumerate(frame.to_dict(orient="records")):
        try:
            stats.append(RunStats.model_validate(row))
        except ValidationError as e:
            raise ParseError(path, offset + 2, str(e.errors()[0]["loc"][0]), e.errors()[0]["msg"])
    return stats
