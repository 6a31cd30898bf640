"""
Аддитивно разложимые функции (ADF): вычисление и метрика расстояний
между переменными по графу взаимодействий
"""

import hashlib
import logging
from functools import cached_property
from itertools import combinations
from typing import Sequence

import networkx as nx
import numpy as np

from hboa.exceptions import InputError

logger = logging.getLogger(__name__)


class DistanceMatrix:
    """Симметричная матрица расстояний в графе взаимодействий"""

    def __init__(self, d: np.ndarray):
        self.d = d
        self.d.setflags(write=False)

    @property
    def n(self) -> int:
        return self.d.shape[0]

    def __getitem__(self, key: tuple[int, int]) -> int:
        return int(self.d[key])

    def fingerprint(self) -> str:
        """Короткий отпечаток матрицы для проверки архивов"""
        digest = hashlib.sha1(self.d.astype(np.int32).tobytes()).hexdigest()
        return f"{self.n}:{digest[:16]}"


class AdditiveProblem:
    """ADF: сумма подфункций-таблиц над подмножествами переменных (максимизация)"""

    def __init__(
        self,
        n: int,
        subsets: Sequence[Sequence[int]],
        tables: Sequence[Sequence[float]],
    ):
        if n < 1:
            raise InputError(f"variable count must be positive, got {n}")
        if len(subsets) != len(tables):
            raise InputError(
                f"{len(subsets)} subsets but {len(tables)} tables were given"
            )

        checked_subsets = []
        checked_tables = []
        for i, (subset, table) in enumerate(zip(subsets, tables)):
            subset = tuple(int(v) for v in subset)
            if not subset:
                raise InputError(f"subset {i} is empty")
            if len(set(subset)) != len(subset):
                raise InputError(f"subset {i} repeats a variable: {subset}")
            if any(v < 0 or v >= n for v in subset):
                raise InputError(f"subset {i} has an index outside 0..{n - 1}")

            table = np.asarray(table, dtype=np.float64).copy()
            if table.shape != (2 ** len(subset),):
                raise InputError(
                    f"table {i} needs {2 ** len(subset)} entries, got {table.size}"
                )
            table.setflags(write=False)
            checked_subsets.append(subset)
            checked_tables.append(table)

        self.n = n
        self.subsets: tuple[tuple[int, ...], ...] = tuple(checked_subsets)
        self.tables: tuple[np.ndarray, ...] = tuple(checked_tables)

    @property
    def m(self) -> int:
        return len(self.subsets)

    # ================================
    # ВСПОМОГАТЕЛЬНЫЕ СТРУКТУРЫ
    # ================================

    @cached_property
    def index_weights(self) -> tuple[np.ndarray, ...]:
        """Веса битов для индекса таблицы: первая переменная - старший бит"""
        return tuple(
            (1 << np.arange(len(subset) - 1, -1, -1)).astype(np.int64)
            for subset in self.subsets
        )

    @cached_property
    def subset_arrays(self) -> tuple[np.ndarray, ...]:
        return tuple(np.array(subset, dtype=np.int64) for subset in self.subsets)

    @cached_property
    def membership(self) -> np.ndarray:
        """membership[s, v] - входит ли переменная v в подмножество s"""
        member = np.zeros((self.m, self.n), dtype=bool)
        for s, subset in enumerate(self.subsets):
            member[s, list(subset)] = True
        return member

    @cached_property
    def distances(self) -> DistanceMatrix:
        return distance_matrix(self)

    def same_structure(self, other: "AdditiveProblem") -> bool:
        """Совпадают ли подмножества и таблицы побитово"""
        return (
            self.n == other.n
            and self.subsets == other.subsets
            and all(np.array_equal(a, b) for a, b in zip(self.tables, other.tables))
        )

    def __repr__(self) -> str:
        return f"AdditiveProblem(n={self.n}, m={self.m})"


def _as_bits(problem: AdditiveProblem, x) -> np.ndarray:
    bits = np.asarray(x)
    if bits.ndim != 1 or bits.size != problem.n:
        raise InputError(f"expected a bit-string of length {problem.n}, got shape {bits.shape}")
    if not np.isin(bits, (0, 1)).all():
        raise InputError("solution must contain only 0 and 1")
    return bits.astype(np.int64)


def evaluate(problem: AdditiveProblem, x) -> float:
    """Значение ADF на одной строке"""
    bits = _as_bits(problem, x)
    total = 0.0
    for subset, weights, table in zip(
        problem.subset_arrays, problem.index_weights, problem.tables
    ):
        total += table[int(bits[subset] @ weights)]
    return float(total)


def evaluate_many(problem: AdditiveProblem, population: np.ndarray) -> np.ndarray:
    """Векторизованное вычисление ADF для матрицы решений (строка = решение)"""
    population = np.asarray(population)
    if population.ndim != 2 or population.shape[1] != problem.n:
        raise InputError(
            f"expected a population with {problem.n} columns, got shape {population.shape}"
        )
    bits = population.astype(np.int64)
    fitness = np.zeros(population.shape[0], dtype=np.float64)
    for subset, weights, table in zip(
        problem.subset_arrays, problem.index_weights, problem.tables
    ):
        fitness += table[bits[:, subset] @ weights]
    return fitness


def distance_matrix(problem: AdditiveProblem) -> DistanceMatrix:
    """Кратчайшие пути (в ребрах) в графе взаимодействий; n для несвязанных пар"""
    graph = nx.Graph()
    graph.add_nodes_from(range(problem.n))
    for subset in problem.subsets:
        graph.add_edges_from(combinations(subset, 2))

    d = np.full((problem.n, problem.n), problem.n, dtype=np.int64)
    for source, lengths in nx.all_pairs_shortest_path_length(graph):
        for target, length in lengths.items():
            d[source, target] = length

    logger.debug(
        f"Distance matrix built: n={problem.n}, edges={graph.number_of_edges()}"
    )
    return DistanceMatrix(d)
