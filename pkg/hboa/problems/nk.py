"""
NK-ландшафты с ближайшими соседями и точный оптимум динамическим программированием
"""

import logging

import numpy as np

from hboa.exceptions import InputError, StructureError
from hboa.models import ExactSolution, NkSpec
from hboa.problems.adf import AdditiveProblem, evaluate
from hboa.seeding import make_rng

logger = logging.getLogger(__name__)


def generate_nk(spec: NkSpec) -> AdditiveProblem:
    """Экземпляр NK: подмножество i = бит i и k следующих за ним (с заворотом)"""
    if spec.k >= spec.n:
        raise InputError(f"k={spec.k} must be below n={spec.n}")

    rng = make_rng(spec.seed)
    tables = rng.random((spec.n, 2 ** (spec.k + 1)))
    labels = rng.permutation(spec.n) if spec.shuffle else np.arange(spec.n)

    subsets = [
        [int(labels[(i + q) % spec.n]) for q in range(spec.k + 1)]
        for i in range(spec.n)
    ]
    return AdditiveProblem(spec.n, subsets, tables)


def chain_order(problem: AdditiveProblem) -> tuple[list[int], list[int], int]:
    """Восстанавливает кольцо NK: порядок переменных, подмножество каждой позиции и k"""
    n = problem.n
    if problem.m != n:
        raise StructureError(f"NK chain needs {n} subsets, got {problem.m}")

    sizes = {len(subset) for subset in problem.subsets}
    if len(sizes) != 1 or sizes.pop() < 2:
        raise StructureError("NK chain needs equally sized subsets of at least 2 bits")
    k = len(problem.subsets[0]) - 1

    owner_to_subset = {subset[0]: s for s, subset in enumerate(problem.subsets)}
    if len(owner_to_subset) != n:
        raise StructureError("every variable must own exactly one subset")

    order = [problem.subsets[0][0]]
    while len(order) < n:
        successor = problem.subsets[owner_to_subset[order[-1]]][1]
        if successor in order:
            raise StructureError("subsets do not form a single ring")
        order.append(successor)

    position_subsets = []
    for t, owner in enumerate(order):
        s = owner_to_subset[owner]
        expected = tuple(order[(t + q) % n] for q in range(k + 1))
        if problem.subsets[s] != expected:
            raise StructureError(
                f"subset {s} is {problem.subsets[s]}, expected chain window {expected}"
            )
        position_subsets.append(s)

    return order, position_subsets, k


def solve_nk_dp(problem: AdditiveProblem) -> ExactSolution:
    """Точный максимум кольцевого NK: перебор префикса из k бит + ДП по последним k битам"""
    order, position_subsets, k = chain_order(problem)
    n = problem.n
    tables = [problem.tables[s] for s in position_subsets]

    states = 1 << k
    ns = np.arange(states)
    s0 = ns >> 1
    s1 = s0 | (1 << (k - 1))

    # dp[p, s]: лучшая сумма замкнутых подфункций при префиксе p и последних k битах s
    dp = np.full((states, states), -np.inf)
    dp[ns, ns] = 0.0
    choices = np.zeros((n, states, states), dtype=bool)

    for t in range(k, n):
        table = tables[t - k]
        v0 = dp[:, s0] + table[ns]
        v1 = dp[:, s1] + table[(1 << k) | ns]
        choices[t] = v1 > v0
        dp = np.where(choices[t], v1, v0)

    # Замыкание кольца: последние k подфункций используют биты префикса
    prefixes = ns[:, None]
    window = (ns[None, :] << k) | prefixes
    closing = np.zeros((states, states))
    for q in range(k):
        index = (window >> (k - 1 - q)) & ((1 << (k + 1)) - 1)
        closing += tables[n - k + q][index]
    total = dp + closing

    best_prefix, best_state = np.unravel_index(int(np.argmax(total)), total.shape)

    bits = np.zeros(n, dtype=np.int64)
    for t in range(k):
        bits[t] = (best_prefix >> (k - 1 - t)) & 1
    state = int(best_state)
    for t in range(n - 1, k - 1, -1):
        bits[t] = state & 1
        top = int(choices[t, best_prefix, state])
        state = (state >> 1) | (top << (k - 1))

    witness = np.zeros(n, dtype=np.int64)
    witness[order] = bits
    value = evaluate(problem, witness)
    logger.debug(f"NK DP solved: n={n}, k={k}, optimum={value:.6f}")
    return ExactSolution(value=value, witness=witness.tolist())
