"""
Статистика разбиений по расстояниям из архива моделей и таблица вероятностей
P_k(d, j) k-го разбиения на расстоянии d в дереве T_j
"""

import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
import pandas as pd

from hboa.exceptions import EmptyArchiveError, InputError, ParseError
from hboa.model.network import DtBayesNet
from hboa.problems.adf import DistanceMatrix

logger = logging.getLogger(__name__)

POOLED = -1  # j для таблиц, объединенных по целевым переменным


@dataclass
class SplitCounts:
    """s(m, d, j) одной модели: (d, j) -> число разбиений"""

    counts: dict[tuple[int, int], int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def by_distance(self) -> Counter:
        """Число разбиений по расстояниям, суммарно по деревьям"""
        totals = Counter()
        for (d, _), s in self.counts.items():
            totals[d] += s
        return totals


@dataclass(frozen=True)
class BiasTable:
    """Неизменяемая таблица P_k(d, j), общая для параллельных запусков"""

    n: int
    models: int
    p_floor: float
    sequences: Mapping[tuple[int, int], tuple[float, ...]]
    pooled: bool = False
    provenance: tuple[str, ...] = ()  # id экземпляров, чьи модели вошли в таблицу

    def _key(self, d: int, j: int, n_target: int | None) -> tuple[int, int]:
        n_target = self.n if n_target is None else n_target
        if not 1 <= d <= n_target:
            raise InputError(f"distance {d} outside 1..{n_target}")
        if not self.pooled:
            if n_target != self.n:
                raise InputError(
                    f"per-variable table for n={self.n} cannot serve n={n_target}"
                )
            if not 0 <= j < self.n:
                raise InputError(f"variable {j} outside 0..{self.n - 1}")
            return d, j
        # несвязанные пары целевой задачи -> несвязанные пары источника
        if d == n_target:
            d = self.n
        elif d >= self.n:
            d = 0
        return d, POOLED

    def probability(self, d: int, j: int, k: int, n_target: int | None = None) -> float:
        """P_k(d, j); за пределами наблюдаемой последовательности - p_floor"""
        if k < 1:
            raise InputError(f"split ordinal k must be at least 1, got {k}")
        sequence = self.sequences.get(self._key(d, j, n_target))
        if sequence is None or k > len(sequence):
            return self.p_floor
        return sequence[k - 1]

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {"d": d, "j": j, "k": k, "p": p}
            for (d, j), sequence in sorted(self.sequences.items())
            for k, p in enumerate(sequence, start=1)
        ]
        return pd.DataFrame(rows, columns=["d", "j", "k", "p"])


def log_prior_increment(
    table: BiasTable, d: int, j: int, k: int, kappa: float, n_target: int | None = None
) -> float:
    """κ·ln P_k(d, j) - изменение логарифма априорной вероятности за k-е разбиение"""
    return kappa * math.log(table.probability(d, j, k, n_target))


def extract_counts(model: DtBayesNet, distances: DistanceMatrix) -> SplitCounts:
    """Каждый внутренний узел T_j по X_i добавляет 1 к s(d(i, j), j)"""
    if model.n != distances.n:
        raise InputError(
            f"model has {model.n} variables but distance matrix has {distances.n}"
        )
    counts: dict[tuple[int, int], int] = defaultdict(int)
    for j, tree in enumerate(model.trees):
        for i in tree.split_variables():
            counts[(distances[i, j], j)] += 1
    return SplitCounts(dict(counts))


def _survival_ratios(values: list[int], observations: int, p_floor: float) -> tuple[float, ...]:
    """P_k = c_k / c_{k-1}, c_k = #(s ≥ k), c_0 = observations; хранится до k = max(s) + 1"""
    if not values:
        return (p_floor,)
    values = np.asarray(values)
    k_max = int(values.max())
    survivors = [observations] + [int((values >= k).sum()) for k in range(1, k_max + 2)]
    return tuple(
        max(p_floor, survivors[k] / survivors[k - 1]) for k in range(1, k_max + 2)
    )


def bias_table_from_counts(
    counts: Iterable[SplitCounts],
    n: int,
    pooled: bool = False,
    provenance: Iterable[str] = (),
) -> BiasTable:
    """Таблица из s(m, d, j) набора моделей M"""
    counts = list(counts)
    if not counts:
        raise EmptyArchiveError("bias table needs at least one model")
    models = len(counts)
    p_floor = 1.0 / (models + 2)

    observed: dict[tuple[int, int], list[int]] = defaultdict(list)
    for entry in counts:
        for (d, j), s in entry.counts.items():
            if s > 0:
                observed[(d, POOLED if pooled else j)].append(s)

    observations = models * n if pooled else models
    sequences = {
        key: _survival_ratios(values, observations, p_floor)
        for key, values in observed.items()
    }
    logger.info(
        f"Bias table built from {models} models: {len(sequences)} (d, j) keys, "
        f"p_floor={p_floor:.4g}, pooled={pooled}"
    )
    return BiasTable(
        n=n,
        models=models,
        p_floor=p_floor,
        sequences=sequences,
        pooled=pooled,
        provenance=tuple(sorted(set(provenance))),
    )


def build_bias_table(
    archive,
    distances: DistanceMatrix | Mapping[str, DistanceMatrix],
    pooled: bool = False,
) -> BiasTable:
    """Таблица по архиву; расстояния общие или по id экземпляра"""
    if not archive.records:
        raise EmptyArchiveError("bias table needs at least one model")

    counts = []
    for index, record in enumerate(archive.records):
        if isinstance(distances, DistanceMatrix):
            matrix = distances
        else:
            if record.instance_id not in distances:
                raise InputError(f"no distance matrix for instance '{record.instance_id}'")
            matrix = distances[record.instance_id]
        if record.fingerprint and record.fingerprint != matrix.fingerprint():
            raise InputError(
                f"record {index} ({record.instance_id}) was built on another interaction graph"
            )
        counts.append(extract_counts(record.model, matrix))

    return bias_table_from_counts(
        counts,
        archive.n,
        pooled=pooled,
        provenance=(record.instance_id for record in archive.records),
    )


def distance_profile(counts: Iterable[SplitCounts]) -> pd.DataFrame:
    """Доля разбиений на каждом расстоянии d (сумма долей = 1)"""
    totals = Counter()
    for entry in counts:
        totals.update(entry.by_distance())
    frame = pd.DataFrame(
        sorted(totals.items()), columns=["d", "splits"]
    ).astype({"d": int, "splits": int})
    overall = frame["splits"].sum()
    frame["proportion"] = frame["splits"] / overall if overall else 0.0
    return frame


# ================================
# ЭКСПОРТ / ИМПОРТ CSV
# ================================


def write_bias_table(path: str | Path, table: BiasTable) -> Path:
    """CSV (d, j, k, p) с заголовком-комментарием с параметрами таблицы"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(
            f"# n={table.n} models={table.models} p_floor={table.p_floor.hex()} "
            f"pooled={int(table.pooled)}\n"
        )
        table.to_frame().to_csv(f, index=False)
    logger.info(f"Bias table written to {path}")
    return path


def read_bias_table(path: str | Path) -> BiasTable:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            header = f.readline()
            frame = pd.read_csv(f, float_precision="round_trip")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ParseError(path, 1, "table", str(e))

    if not header.startswith("#"):
        raise ParseError(path, 1, "header", "missing '# n=... models=...' header")
    try:
        meta = dict(item.split("=", 1) for item in header[1:].split())
        n, models = int(meta["n"]), int(meta["models"])
        p_floor = float.fromhex(meta["p_floor"])
        pooled = bool(int(meta["pooled"]))
    except (KeyError, ValueError) as e:
        raise ParseError(path, 1, "header", f"bad table header: {e}")
    if list(frame.columns) != ["d", "j", "k", "p"]:
        raise ParseError(path, 2, "columns", "expected columns d,j,k,p")

    sequences: dict[tuple[int, int], list[float]] = defaultdict(list)
    for offset, row in enumerate(frame.sort_values(["d", "j", "k"]).itertuples(index=False)):
        key = (int(row.d), int(row.j))
        if int(row.k) != len(sequences[key]) + 1:
            raise ParseError(path, offset + 3, "k", f"non-contiguous k for key {key}")
        sequences[key].append(float(row.p))

    return BiasTable(
        n=n,
        models=models,
        p_floor=p_floor,
        sequences={key: tuple(values) for key, values in sequences.items()},
        pooled=pooled,
    )
