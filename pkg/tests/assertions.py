import logging
from typing import Any, Dict, Iterable, Sequence

import allure
import networkx as nx
import numpy as np
import pandas as pd

from hboa.exceptions import RejectedSplitError
from hboa.model.learning import ModelBuilder
from hboa.model.network import DtBayesNet
from hboa.problems.adf import AdditiveProblem, evaluate, evaluate_many

logger = logging.getLogger(__name__)


class ResultAssertions:
    """Проверки результатов с шагами и вложениями Allure"""

    # ========================================
    # ЧИСЛА И ТАБЛИЦЫ
    # ========================================

    @staticmethod
    def check_close(actual: float, expected: float, tolerance: float, what: str) -> None:
        """Сравнение с абсолютной точностью"""
        with allure.step(f"Verify {what} within {tolerance:g}"):
            assert abs(actual - expected) <= tolerance, (
                f"{what}: expected {expected!r}, got {actual!r} "
                f"(diff {abs(actual - expected):.3g})"
            )

    @staticmethod
    def check_rows(frame: pd.DataFrame, schema, title: str) -> None:
        """Каждая строка таблицы проходит схему voluptuous"""
        with allure.step(f"Validate {len(frame)} rows of {title}"):
            allure.attach(frame.head(20).to_csv(index=False), title, allure.attachment_type.CSV)
            for row in frame.to_dict(orient="records"):
                assert schema == row, f"Schema validation failed for {title}: {row}"

    @staticmethod
    def check_partition(parts: Sequence[Sequence[str]], universe: Iterable[str]) -> None:
        """Части попарно не пересекаются и покрывают все множество"""
        with allure.step("Verify partition property"):
            seen: Dict[str, int] = {}
            for index, part in enumerate(parts):
                for item in part:
                    assert item not in seen, f"{item} is in parts {seen[item]} and {index}"
                    seen[item] = index
            assert set(seen) == set(universe), "Parts do not cover every item"

    # ========================================
    # РЕШЕНИЯ И МОДЕЛИ
    # ========================================

    @staticmethod
    def check_local_optimum(problem: AdditiveProblem, x: np.ndarray, tolerance: float = 1e-9) -> None:
        """Ни одна инверсия бита не улучшает значение (полный пересчет)"""
        with allure.step("Verify 1-flip local optimality"):
            base = evaluate(problem, x)
            for v in range(problem.n):
                flipped = np.array(x, dtype=np.int64)
                flipped[v] ^= 1
                gain = evaluate(problem, flipped) - base
                assert gain <= tolerance, f"Flipping bit {v} improves fitness by {gain}"

    @staticmethod
    def check_acyclic(model: DtBayesNet) -> None:
        """Граф родителей ацикличен, инварианты деревьев соблюдены"""
        with allure.step("Verify model structure"):
            model.validate()
            assert nx.is_directed_acyclic_graph(model.parent_graph()), "Parent graph is cyclic"
            allure.attach("\n".join(model.to_lines()), "Model", allure.attachment_type.TEXT)

    @staticmethod
    def check_population(bits: np.ndarray, rows: int, columns: int) -> None:
        with allure.step(f"Verify population shape {rows}x{columns}"):
            assert bits.shape == (rows, columns), f"Unexpected shape {bits.shape}"
            assert np.isin(bits, (0, 1)).all(), "Population holds non-binary values"

    @staticmethod
    def attach_info(data: Dict[str, Any], title: str) -> None:
        allure.attach(
            "\n".join(f"{key}: {value}" for key, value in data.items()),
            title,
            allure.attachment_type.TEXT,
        )
        logger.info(f"{title}: {data}")


def exhaustive_optimum(problem: AdditiveProblem, chunk: int = 1 << 16) -> float:
    """Максимум полным перебором 2^n строк (n ≤ 22)"""
    shifts = np.arange(problem.n - 1, -1, -1)
    best = -np.inf
    for start in range(0, 1 << problem.n, chunk):
        codes = np.arange(start, min(start + chunk, 1 << problem.n))
        bits = ((codes[:, None] >> shifts) & 1).astype(np.uint8)
        best = max(best, float(evaluate_many(problem, bits).max()))
    return best


def random_trajectory(builder: ModelBuilder, rng: np.random.Generator, steps: int) -> int:
    """Случайные допустимые разбиения; возвращает число выполненных"""
    executed = 0
    for _ in range(steps):
        j = int(rng.integers(builder.n))
        leaf = builder.leaves[j][int(rng.integers(len(builder.leaves[j])))]
        for i in rng.permutation(builder.n):
            try:
                builder.split_delta(j, leaf.order, int(i))
            except RejectedSplitError:
                continue
            builder.execute(j, leaf.order, int(i))
            executed += 1
            break
    return executed
