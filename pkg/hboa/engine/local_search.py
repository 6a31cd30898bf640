"""
Локальный поиск: наискорейший подъем по однобитовым изменениям
с инкрементным пересчетом выигрышей по затронутым подмножествам
"""

import numpy as np

from hboa.exceptions import InputError
from hboa.problems.adf import AdditiveProblem

GAIN_TOLERANCE = 1e-9


class BitFlipHillClimber:
    """Подъем для всей популяции сразу; ничья между битами - наименьший индекс"""

    def __init__(self, problem: AdditiveProblem, tolerance: float = GAIN_TOLERANCE):
        self.problem = problem
        self.tolerance = tolerance

    def _contributions(self, bits: np.ndarray, s: int) -> np.ndarray:
        """Вклад подмножества s в выигрыш от инверсии каждой его переменной"""
        subset = self.problem.subset_arrays[s]
        weights = self.problem.index_weights[s]
        table = self.problem.tables[s]
        index = bits[:, subset] @ weights
        flipped = index[:, None] ^ weights[None, :]
        return table[flipped] - table[index][:, None]

    def gains(self, bits: np.ndarray) -> np.ndarray:
        """gains[r, v] - изменение значения строки r при инверсии бита v"""
        bits = np.asarray(bits, dtype=np.int64)
        gains = np.zeros(bits.shape, dtype=np.float64)
        for s, subset in enumerate(self.problem.subset_arrays):
            gains[:, subset] += self._contributions(bits, s)
        return gains

    def climb(self, population: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Возвращает локальные оптимумы и число инверсий по строкам"""
        population = np.asarray(population)
        if population.ndim != 2 or population.shape[1] != self.problem.n:
            raise InputError(
                f"expected solutions of length {self.problem.n}, got shape {population.shape}"
            )
        bits = population.astype(np.int64)
        gains = self.gains(bits)
        flips = np.zeros(bits.shape[0], dtype=np.int64)
        membership = self.problem.membership
        active = np.arange(bits.shape[0])

        while active.size:
            best = gains[active].argmax(axis=1)
            improving = gains[active, best] > self.tolerance
            if not improving.any():
                break
            rows, variables = active[improving], best[improving]

            touched = membership[:, variables]
            affected = [(s, rows[touched[s]]) for s in np.flatnonzero(touched.any(axis=1))]
            for s, hit in affected:
                gains[hit[:, None], self.problem.subset_arrays[s]] -= self._contributions(bits[hit], s)
            bits[rows, variables] ^= 1
            for s, hit in affected:
                gains[hit[:, None], self.problem.subset_arrays[s]] += self._contributions(bits[hit], s)

            flips[rows] += 1
            active = rows

        return bits.astype(np.uint8), flips


def hill_climb(problem: AdditiveProblem, x) -> tuple[np.ndarray, int]:
    """Одна строка: (локальный оптимум, число инверсий)"""
    x = np.asarray(x)
    if x.ndim != 1:
        raise InputError(f"expected a single bit-string, got shape {x.shape}")
    bits, flips = BitFlipHillClimber(problem).climb(x[None, :])
    return bits[0], int(flips[0])
