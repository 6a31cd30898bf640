"""
Операторы популяции: бинарный турнир без возвращения и ограниченная
турнирная замена (RTS)
"""

from dataclasses import dataclass

import numpy as np

from hboa.exceptions import ConfigError, InputError


@dataclass
class Population:
    """Решения (строки uint8) и их значения"""

    bits: np.ndarray
    fitness: np.ndarray

    def __post_init__(self):
        if self.bits.ndim != 2 or self.fitness.shape != (self.bits.shape[0],):
            raise InputError(
                f"population of shape {self.bits.shape} does not match "
                f"fitness of shape {self.fitness.shape}"
            )

    @property
    def size(self) -> int:
        return self.bits.shape[0]

    def copy(self) -> "Population":
        return Population(self.bits.copy(), self.fitness.copy())

    def best(self) -> tuple[np.ndarray, float]:
        index = int(np.argmax(self.fitness))
        return self.bits[index], float(self.fitness[index])

    def is_converged(self) -> bool:
        """Все решения - копии одной строки"""
        return bool((self.bits == self.bits[0]).all())


def tournament_select(population: Population, rng: np.random.Generator) -> Population:
    """Две случайные перестановки, в каждой соседние пары соревнуются; ничья - первому"""
    N = population.size
    if N % 2:
        raise ConfigError(f"tournament selection needs an even population, got {N}")

    winners = []
    for _ in range(2):
        order = rng.permutation(N)
        first, second = order[0::2], order[1::2]
        keep_first = population.fitness[first] >= population.fitness[second]
        winners.append(np.where(keep_first, first, second))
    chosen = np.concatenate(winners)
    return Population(population.bits[chosen], population.fitness[chosen])


def rts_replace(
    population: Population,
    offspring: Population,
    window: int,
    rng: np.random.Generator,
) -> int:
    """
    Каждый потомок сравнивается с ближайшим (по Хэммингу) членом случайного окна
    и заменяет его только при строго большем значении. Изменяет population на месте,
    возвращает число замен
    """
    N = population.size
    if not 1 <= window <= N:
        raise ConfigError(f"RTS window must lie in 1..{N}, got {window}")

    replaced = 0
    for child, value in zip(offspring.bits, offspring.fitness):
        members = rng.choice(N, size=window, replace=False)
        distances = (population.bits[members] != child).sum(axis=1)
        nearest = members[int(np.argmin(distances))]
        if value > population.fitness[nearest]:
            population.bits[nearest] = child
            population.fitness[nearest] = value
            replaced += 1
    return replaced
