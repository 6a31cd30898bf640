"""
Жадное построение сети с деревьями решений: на каждом шаге выполняется
разбиение листа с наибольшим приростом оценки, пока прирост положителен
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from hboa.exceptions import ConfigError, InputError, RejectedSplitError
from hboa.model.network import DtBayesNet, univariate_model
from hboa.model.scoring import (
    ScoreParts,
    leaf_logscores,
    model_log_score,
    tree_prior_vector,
)
from hboa.model.tree import DecisionTree, TreeNode
from hboa.models import PriorMode, ScoreConfig
from hboa.problems.adf import DistanceMatrix

logger = logging.getLogger(__name__)


@dataclass
class OpenLeaf:
    """Лист строящегося дерева и кеш приростов правдоподобия по кандидатам"""

    node: TreeNode
    rows: np.ndarray
    path: frozenset[int]
    order: int
    likelihood: np.ndarray = field(repr=False, default=None)


@dataclass(frozen=True)
class SplitStep:
    """Выполненное разбиение"""

    tree: int
    leaf: int
    variable: int
    distance: Optional[int]
    delta: float
    likelihood: float
    prior: float


@dataclass
class Candidate:
    delta: float
    tree: int
    leaf: int
    variable: int


class ModelBuilder:
    """Состояние жадного поиска структуры для одной выбранной популяции"""

    def __init__(
        self,
        selected: np.ndarray,
        config: ScoreConfig,
        distances: DistanceMatrix | None = None,
    ):
        bits = np.asarray(selected)
        if bits.ndim != 2 or bits.shape[0] == 0:
            raise InputError("model building needs a non-empty population")
        if config.prior_mode is PriorMode.BIAS and distances is None:
            raise ConfigError("distance-bias prior needs the problem's distance matrix")
        if distances is not None and distances.n != bits.shape[1]:
            raise InputError(
                f"population has {bits.shape[1]} columns but distance matrix has {distances.n}"
            )

        self.X = bits.astype(np.int64)
        self.N, self.n = self.X.shape
        self.config = config
        self.distances = distances

        start = univariate_model(bits)
        self.roots = [tree.root for tree in start.trees]
        self.initial_score = model_log_score(start, self.X, config, distances)

        self.reach = np.eye(self.n, dtype=bool)
        self.parents: list[set[int]] = [set() for _ in range(self.n)]
        self.split_counts = np.zeros((self.n, self.n + 1), dtype=np.int64)
        self.next_order = [1] * self.n
        self.leaves: list[list[OpenLeaf]] = []
        for j, root in enumerate(self.roots):
            leaf = OpenLeaf(root, np.arange(self.N), frozenset(), 0)
            leaf.likelihood = self._likelihood_deltas(j, leaf)
            self.leaves.append([leaf])

        self.priors = [self._prior_vector(j) for j in range(self.n)]
        self.best: list[Optional[Candidate]] = [self._tree_best(j) for j in range(self.n)]
        self.trace: list[SplitStep] = []

    # ================================
    # ОЦЕНКА КАНДИДАТОВ
    # ================================

    def _likelihood_deltas(self, j: int, leaf: OpenLeaf) -> np.ndarray:
        """Прирост BDe-правдоподобия при разбиении листа по каждой переменной"""
        sub = self.X[leaf.rows]
        xj = sub[:, j]
        m1 = int(xj.sum())
        m0 = leaf.rows.size - m1
        a11 = xj @ sub
        n1 = sub.sum(axis=0)
        a10 = n1 - a11
        a01 = m1 - a11
        a00 = leaf.rows.size - n1 - a01
        parent = leaf_logscores(np.float64(m0), np.float64(m1))
        return leaf_logscores(a00, a01) + leaf_logscores(a10, a11) - parent

    def _prior_vector(self, j: int) -> np.ndarray:
        return tree_prior_vector(self.config, j, self.distances, self.split_counts[j])

    def _valid_mask(self, j: int, leaf: OpenLeaf) -> np.ndarray:
        """Допустимые переменные: не владелец, не на пути, ребро i -> j без цикла"""
        valid = ~self.reach[j, :]
        if self.parents[j]:
            valid[list(self.parents[j])] = True
        valid[j] = False
        if leaf.path:
            valid[list(leaf.path)] = False
        return valid

    def _rejection(self, j: int, leaf: OpenLeaf, i: int) -> Optional[str]:
        if not 0 <= i < self.n:
            return f"variable outside 0..{self.n - 1}"
        if i == j:
            return "owner variable"
        if i in leaf.path:
            return "variable already on the path to the leaf"
        if self.reach[j, i] and i not in self.parents[j]:
            return "edge would create a cycle"
        return None

    def _tree_best(self, j: int) -> Optional[Candidate]:
        best = None
        for leaf in self.leaves[j]:
            total = leaf.likelihood + self.priors[j]
            total = np.where(self._valid_mask(j, leaf), total, -np.inf)
            i = int(np.argmax(total))
            if np.isfinite(total[i]) and (best is None or total[i] > best.delta):
                best = Candidate(float(total[i]), j, leaf.order, i)
        return best

    def _leaf(self, j: int, order: int) -> OpenLeaf:
        for leaf in self.leaves[j]:
            if leaf.order == order:
                return leaf
        raise InputError(f"tree {j} has no open leaf {order}")

    def split_delta(self, j: int, leaf_order: int, i: int) -> float:
        """Изменение логарифма оценки при разбиении листа leaf_order дерева T_j по X_i"""
        leaf = self._leaf(j, leaf_order)
        reason = self._rejection(j, leaf, i)
        if reason is not None:
            raise RejectedSplitError(j, i, reason)
        return float(leaf.likelihood[i] + self.priors[j][i])

    # ================================
    # ЖАДНЫЙ ПОИСК
    # ================================

    def _select(self) -> Optional[Candidate]:
        """Лучший допустимый кандидат; устаревшие из-за новых ребер пересчитываются"""
        while True:
            chosen = None
            for candidate in self.best:
                if candidate is not None and (chosen is None or candidate.delta > chosen.delta):
                    chosen = candidate
            if chosen is None:
                return None
            leaf = self._leaf(chosen.tree, chosen.leaf)
            if self._rejection(chosen.tree, leaf, chosen.variable) is None:
                return chosen
            self.best[chosen.tree] = self._tree_best(chosen.tree)

    def execute(self, j: int, leaf_order: int, i: int) -> SplitStep:
        """Выполняет разбиение и обновляет достижимость, счетчики и кеш дерева j"""
        leaf = self._leaf(j, leaf_order)
        reason = self._rejection(j, leaf, i)
        if reason is not None:
            raise RejectedSplitError(j, i, reason)

        likelihood = float(leaf.likelihood[i])
        prior = float(self.priors[j][i])
        ones = self.X[leaf.rows, i] == 1
        zero_rows, one_rows = leaf.rows[~ones], leaf.rows[ones]
        z1 = int(self.X[zero_rows, j].sum())
        o1 = int(self.X[one_rows, j].sum())

        node = leaf.node
        node.split = i
        node.zero = TreeNode(m0=zero_rows.size - z1, m1=z1)
        node.one = TreeNode(m0=one_rows.size - o1, m1=o1)

        path = leaf.path | {i}
        children = []
        for child, rows in ((node.zero, zero_rows), (node.one, one_rows)):
            opened = OpenLeaf(child, rows, path, self.next_order[j])
            self.next_order[j] += 1
            opened.likelihood = self._likelihood_deltas(j, opened)
            children.append(opened)
        self.leaves[j] = [other for other in self.leaves[j] if other is not leaf] + children

        if i not in self.parents[j]:
            self.parents[j].add(i)
            self.reach |= np.outer(self.reach[:, i], self.reach[j, :])
        distance = None
        if self.distances is not None:
            distance = self.distances[i, j]
            self.split_counts[j, distance] += 1

        self.priors[j] = self._prior_vector(j)
        self.best[j] = self._tree_best(j)

        step = SplitStep(j, leaf_order, i, distance, likelihood + prior, likelihood, prior)
        self.trace.append(step)
        logger.debug(
            f"Split T{j} leaf {leaf_order} on X{i} (d={distance}): "
            f"delta={step.delta:.6f} (likelihood {likelihood:.6f}, prior {prior:.6f})"
        )
        return step

    def build(self) -> DtBayesNet:
        """Разбиения выполняются, пока лучший прирост строго положителен"""
        while True:
            candidate = self._select()
            if candidate is None or candidate.delta <= 0:
                break
            self.execute(candidate.tree, candidate.leaf, candidate.variable)
        return self.model()

    def model(self) -> DtBayesNet:
        return DtBayesNet(self.n, [DecisionTree(j, root) for j, root in enumerate(self.roots)])

    def accumulated_score(self) -> ScoreParts:
        """Начальная оценка плюс сумма приростов выполненных разбиений"""
        return ScoreParts(
            self.initial_score.likelihood + sum(step.likelihood for step in self.trace),
            self.initial_score.prior + sum(step.prior for step in self.trace),
        )


def build_model(
    selected: np.ndarray,
    config: ScoreConfig,
    distances: DistanceMatrix | None = None,
) -> DtBayesNet:
    """Модель выбранной популяции: жадный поиск от маргинальной сети"""
    builder = ModelBuilder(selected, config, distances)
    model = builder.build()
    logger.debug(f"Model built: {len(builder.trace)} splits, N={builder.N}")
    return model
