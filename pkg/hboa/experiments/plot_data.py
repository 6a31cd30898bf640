"""
CSV-ряды для графиков: доля разбиений по расстояниям и ускорения от κ и от размера
"""

import logging
from pathlib import Path
from typing import Iterable, Mapping

import pandas as pd

from hboa.exceptions import ParseError
from hboa.experiments.speedups import SUMMARY_COLUMNS, SpeedupReport

logger = logging.getLogger(__name__)

PROFILE_FILE = "split_proportions.csv"
BY_KAPPA_FILE = "speedups_by_kappa.csv"
BY_SIZE_FILE = "speedups_by_size.csv"


def emit_plot_data(
    directory: str | Path,
    profiles: Mapping[str, pd.DataFrame] | None = None,
    reports: Iterable[SpeedupReport] = (),
) -> list[Path]:
    """profiles: серия -> distance_profile; reports: отчеты по одному или нескольким размерам"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []

    if profiles:
        frame = pd.concat(
            [profile.assign(series=name) for name, profile in profiles.items()],
            ignore_index=True,
        )[["series", "d", "splits", "proportion"]]
        frame.to_csv(directory / PROFILE_FILE, index=False)
        written.append(directory / PROFILE_FILE)

    summaries = [report.summary for report in reports]
    if summaries:
        summary = pd.concat(summaries, ignore_index=True)
        summary.sort_values(["n", "measure", "kappa"]).to_csv(
            directory / BY_KAPPA_FILE, index=False
        )
        summary.sort_values(["kappa", "measure", "n"]).to_csv(
            directory / BY_SIZE_FILE, index=False
        )
        written += [directory / BY_KAPPA_FILE, directory / BY_SIZE_FILE]

    for path in written:
        logger.info(f"Plot data written to {path}")
    return written


def read_plot_series(path: str | Path) -> pd.DataFrame:
    """Читает любой из рядов, проверяя заголовок"""
    path = Path(path)
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ParseError(path, 1, "series", str(e))
    expected = (
        ["series", "d", "splits", "proportion"] if path.name == PROFILE_FILE else SUMMARY_COLUMNS
    )
    if list(frame.columns) != expected:
        raise ParseError(path, 1, "columns", f"expected columns {','.join(expected)}")
    return frame
