"""
Байесовская сеть с деревьями решений: маргинальная модель, выборка предков,
построчная сериализация (по строке на дерево)
"""

import logging
from typing import Sequence

import networkx as nx
import numpy as np

from hboa.exceptions import CycleError, InputError, StructureError
from hboa.model.tree import DecisionTree, TreeNode

logger = logging.getLogger(__name__)


class DtBayesNet:
    """Сеть: по одному дереву решений на переменную"""

    def __init__(self, n: int, trees: Sequence[DecisionTree]):
        if len(trees) != n:
            raise StructureError(f"network over {n} variables needs {n} trees, got {len(trees)}")
        if any(tree.owner != j for j, tree in enumerate(trees)):
            raise StructureError("tree j must be owned by variable j")
        self.n = n
        self.trees = tuple(trees)

    @property
    def parent_sets(self) -> list[frozenset[int]]:
        return [tree.parents() for tree in self.trees]

    def split_count(self) -> int:
        return sum(len(tree.split_variables()) for tree in self.trees)

    def parent_graph(self) -> nx.DiGraph:
        """Граф зависимостей: ребро i -> j, если X_i делит дерево T_j"""
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.n))
        for j, parents in enumerate(self.parent_sets):
            graph.add_edges_from((i, j) for i in parents)
        return graph

    def topological_order(self) -> list[int]:
        try:
            return list(nx.topological_sort(self.parent_graph()))
        except nx.NetworkXUnfeasible:
            raise CycleError()

    def validate(self) -> None:
        for tree in self.trees:
            tree.validate()
            if any(not 0 <= i < self.n for i in tree.split_variables()):
                raise StructureError(f"tree {tree.owner} splits on a variable outside 0..{self.n - 1}")
        if not nx.is_directed_acyclic_graph(self.parent_graph()):
            raise CycleError()

    # ================================
    # СЕРИАЛИЗАЦИЯ
    # ================================

    def to_lines(self) -> list[str]:
        return [" ".join(["T", str(tree.owner)] + tree.to_tokens()) for tree in self.trees]

    @classmethod
    def from_lines(cls, lines: Sequence[str]) -> "DtBayesNet":
        """Разбор строк `T owner ...`; ValueError с описанием при битой записи"""
        trees = []
        for j, line in enumerate(lines):
            tokens = line.split()
            if len(tokens) < 2 or tokens[0] != "T":
                raise ValueError(f"tree line {j} does not start with 'T owner'")
            owner = int(tokens[1])
            if owner != j:
                raise ValueError(f"tree line {j} belongs to variable {owner}")
            try:
                trees.append(DecisionTree.from_tokens(owner, tokens[2:]))
            except IndexError:
                raise ValueError(f"tree line {j} is truncated")
        return cls(len(trees), trees)

    def __repr__(self) -> str:
        return f"DtBayesNet(n={self.n}, splits={self.split_count()})"


def univariate_model(selected: np.ndarray) -> DtBayesNet:
    """Сеть без ребер: каждое дерево - один лист с маргинальными счетчиками"""
    selected = np.asarray(selected)
    if selected.ndim != 2 or selected.shape[0] == 0:
        raise InputError("model building needs a non-empty population")
    ones = selected.sum(axis=0, dtype=np.int64)
    N = selected.shape[0]
    trees = [
        DecisionTree(j, TreeNode(m0=int(N - ones[j]), m1=int(ones[j])))
        for j in range(selected.shape[1])
    ]
    return DtBayesNet(selected.shape[1], trees)


def sample(model: DtBayesNet, count: int, rng: np.random.Generator) -> np.ndarray:
    """Выборка предков в топологическом порядке графа родителей"""
    if count < 1:
        raise InputError(f"sample count must be positive, got {count}")
    order = model.topological_order()
    bits = np.zeros((count, model.n), dtype=np.uint8)
    for j in order:
        probabilities = model.trees[j].leaf_probabilities(bits)
        bits[:, j] = rng.random(count) < probabilities
    return bits
