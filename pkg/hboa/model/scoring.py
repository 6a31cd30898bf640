"""
BDe-метрика для деревьев решений: логарифм вклада листа, априорные штрафы
(сложность или смещение по расстояниям) и пересчет полной оценки модели
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from hboa.bias.miner import log_prior_increment
from hboa.exceptions import ConfigError, InputError
from hboa.model.network import DtBayesNet
from hboa.models import PriorMode, ScoreConfig
from hboa.problems.adf import DistanceMatrix


def bde_leaf_logscore(m0: int, m1: int, prior: int = 1) -> float:
    """ln[Γ(m'(l))/Γ(m(l)+m'(l)) · Π Γ(m(x,l)+m'(x,l))/Γ(m'(x,l))] при m'(x,l) = prior, m'(l) = 2·prior"""
    if m0 < 0 or m1 < 0:
        raise InputError(f"leaf counts must be non-negative, got ({m0}, {m1})")
    if prior <= 0:
        raise InputError(f"prior count must be positive, got {prior}")
    return float(
        gammaln(2 * prior)
        - gammaln(m0 + m1 + 2 * prior)
        + gammaln(m0 + prior)
        + gammaln(m1 + prior)
        - 2 * gammaln(prior)
    )


def leaf_logscores(m0: np.ndarray, m1: np.ndarray) -> np.ndarray:
    """Векторный вариант bde_leaf_logscore для неинформативного априорного счетчика 1"""
    return gammaln(m0 + 1.0) + gammaln(m1 + 1.0) - gammaln(m0 + m1 + 2.0)


def complexity_penalty(population_size: int) -> float:
    """Штраф за один добавленный лист: 0.5·ln N (натуральный логарифм)"""
    return 0.5 * math.log(population_size)


def tree_prior_vector(
    config: ScoreConfig,
    j: int,
    distances: DistanceMatrix | None,
    split_counts: np.ndarray,
) -> np.ndarray:
    """Изменение априорного слагаемого при разбиении T_j по каждой переменной i"""
    if config.prior_mode is PriorMode.PENALTY:
        n = split_counts.shape[0] - 1
        return np.full(n, -complexity_penalty(config.population_size))
    if distances is None:
        raise ConfigError("distance-bias prior needs the problem's distance matrix")

    column = distances.d[:, j]
    prior = np.zeros(column.size)
    for d in np.unique(column):
        if d == 0:
            continue  # только i = j, кандидат всегда отвергается
        k = int(split_counts[d]) + 1
        prior[column == d] = log_prior_increment(
            config.bias, int(d), j, k, config.kappa, n_target=distances.n
        )
    return prior


@dataclass
class ScoreParts:
    """Логарифм оценки: правдоподобие и априорная часть"""

    likelihood: float
    prior: float

    @property
    def total(self) -> float:
        return self.likelihood + self.prior


def model_log_score(
    model: DtBayesNet,
    selected: np.ndarray,
    config: ScoreConfig,
    distances: DistanceMatrix | None = None,
) -> ScoreParts:
    """Полная оценка модели с нуля: листы пересчитываются по данным"""
    bits = np.asarray(selected, dtype=np.int64)
    likelihood = 0.0
    for tree in model.trees:
        for m0, m1 in tree.leaf_counts(bits):
            likelihood += bde_leaf_logscore(m0, m1)

    if config.prior_mode is PriorMode.PENALTY:
        leaves = sum(len(tree.leaves()) for tree in model.trees)
        return ScoreParts(likelihood, -complexity_penalty(config.population_size) * leaves)

    if distances is None:
        raise ConfigError("distance-bias prior needs the problem's distance matrix")
    prior = 0.0
    for j, tree in enumerate(model.trees):
        per_distance: dict[int, int] = {}
        for i in tree.split_variables():
            d = distances[i, j]
            per_distance[d] = per_distance.get(d, 0) + 1
        for d, splits in per_distance.items():
            prior += sum(
                log_prior_increment(config.bias, d, j, k, config.kappa, n_target=distances.n)
                for k in range(1, splits + 1)
            )
    return ScoreParts(likelihood, prior)
