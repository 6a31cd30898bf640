"""
Деревья решений - локальные структуры условных распределений hBOA
"""

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from hboa.exceptions import StructureError


@dataclass
class TreeNode:
    """Узел дерева: разбиение по переменной split либо лист со счетчиками"""

    split: Optional[int] = None
    zero: Optional["TreeNode"] = None
    one: Optional["TreeNode"] = None
    m0: int = 0
    m1: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.split is None

    @property
    def probability_one(self) -> float:
        """P(X_owner = 1) в листе со сглаживанием априорным счетчиком 1"""
        return (self.m1 + 1) / (self.m0 + self.m1 + 2)


class DecisionTree:
    """Дерево условного распределения переменной owner"""

    def __init__(self, owner: int, root: TreeNode):
        self.owner = owner
        self.root = root

    def preorder(self) -> Iterator[TreeNode]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if not node.is_leaf:
                stack.append(node.one)
                stack.append(node.zero)

    def leaves(self) -> list[TreeNode]:
        return [node for node in self.preorder() if node.is_leaf]

    def split_variables(self) -> list[int]:
        """Переменные всех внутренних узлов (с повторами)"""
        return [node.split for node in self.preorder() if not node.is_leaf]

    def parents(self) -> frozenset[int]:
        return frozenset(self.split_variables())

    def validate(self) -> None:
        """Проверяет инварианты: владелец не делит себя, без повторов на пути, суммы счетчиков"""

        def walk(node: TreeNode, path: frozenset[int]) -> tuple[int, int]:
            if node.is_leaf:
                if node.m0 < 0 or node.m1 < 0:
                    raise StructureError(f"tree {self.owner} has a negative leaf count")
                return node.m0, node.m1
            if node.split == self.owner:
                raise StructureError(f"tree {self.owner} splits on its own variable")
            if node.split in path:
                raise StructureError(
                    f"tree {self.owner} reuses variable {node.split} on one path"
                )
            z0, z1 = walk(node.zero, path | {node.split})
            o0, o1 = walk(node.one, path | {node.split})
            if (node.m0, node.m1) != (z0 + o0, z1 + o1):
                raise StructureError(f"tree {self.owner} has inconsistent node counts")
            return node.m0, node.m1

        walk(self.root, frozenset())

    def leaf_probabilities(self, bits: np.ndarray) -> np.ndarray:
        """P(X_owner = 1) для каждой строки по листу, в который она попадает"""
        probabilities = np.empty(bits.shape[0], dtype=np.float64)
        stack = [(self.root, np.arange(bits.shape[0]))]
        while stack:
            node, rows = stack.pop()
            if node.is_leaf:
                probabilities[rows] = node.probability_one
                continue
            ones = bits[rows, node.split] == 1
            stack.append((node.zero, rows[~ones]))
            stack.append((node.one, rows[ones]))
        return probabilities

    def leaf_counts(self, bits: np.ndarray) -> list[tuple[int, int]]:
        """Пересчет (m0, m1) по листам в прямом порядке обхода для данных bits"""
        counts = []

        def walk(node: TreeNode, rows: np.ndarray) -> None:
            if node.is_leaf:
                m1 = int(bits[rows, self.owner].sum())
                counts.append((rows.size - m1, m1))
                return
            ones = bits[rows, node.split] == 1
            walk(node.zero, rows[~ones])
            walk(node.one, rows[ones])

        walk(self.root, np.arange(bits.shape[0]))
        return counts

    # ================================
    # СЕРИАЛИЗАЦИЯ
    # ================================

    def to_tokens(self) -> list[str]:
        """Прямой обход: `S var` для разбиения, `L m0 m1` для листа"""
        tokens = []
        for node in self.preorder():
            if node.is_leaf:
                tokens += ["L", str(node.m0), str(node.m1)]
            else:
                tokens += ["S", str(node.split)]
        return tokens

    @classmethod
    def from_tokens(cls, owner: int, tokens: list[str]) -> "DecisionTree":
        """Обратная операция к to_tokens; ValueError при битых токенах"""
        position = 0

        def read() -> TreeNode:
            nonlocal position
            if position >= len(tokens):
                raise ValueError("tree token list ends early")
            tag = tokens[position]
            if tag == "L":
                m0, m1 = int(tokens[position + 1]), int(tokens[position + 2])
                position += 3
                return TreeNode(m0=m0, m1=m1)
            if tag == "S":
                split = int(tokens[position + 1])
                position += 2
                zero = read()
                one = read()
                return TreeNode(
                    split=split, zero=zero, one=one, m0=zero.m0 + one.m0, m1=zero.m1 + one.m1
                )
            raise ValueError(f"unknown node tag '{tag}'")

        root = read()
        if position != len(tokens):
            raise ValueError("trailing tokens after tree")
        return cls(owner, root)
