"""
Двумерное ±J спиновое стекло на решетке L×L с периодическими границами.
Бит 0 - спин +1, бит 1 - спин -1; приспособленность = -E
"""

import logging
import math

import numpy as np

from hboa.exceptions import CapabilityError, InputError, StructureError
from hboa.models import ExactSolution, SpinGlassSpec
from hboa.problems.adf import AdditiveProblem, evaluate
from hboa.seeding import make_rng

logger = logging.getLogger(__name__)

ORACLE_MAX_SIDE = 8

RIGHT, DOWN = 0, 1


def lattice_neighbor(L: int, node: int, direction: int) -> int:
    """Сосед узла справа или снизу с учетом периодичности"""
    row, col = divmod(node, L)
    if direction == RIGHT:
        return row * L + (col + 1) % L
    return ((row + 1) % L) * L + col


def draw_couplings(spec: SpinGlassSpec) -> list[int]:
    """Связи из спецификации или случайные ±1 по зерну"""
    if spec.couplings is not None:
        return list(spec.couplings)
    rng = make_rng(spec.seed)
    return rng.choice(np.array([-1, 1]), size=2 * spec.L * spec.L).tolist()


def generate_spin_glass(spec: SpinGlassSpec) -> AdditiveProblem:
    """ADF с одним двухбитовым подмножеством на каждую связь"""
    if spec.L < 2:
        raise InputError(f"lattice side must be at least 2, got {spec.L}")

    couplings = draw_couplings(spec)
    subsets = []
    tables = []
    for node in range(spec.L * spec.L):
        for direction in (RIGHT, DOWN):
            J = couplings[2 * node + direction]
            subsets.append([node, lattice_neighbor(spec.L, node, direction)])
            # совпадающие спины дают +J, разные -J
            tables.append([J, -J, -J, J])
    return AdditiveProblem(spec.L * spec.L, subsets, tables)


def spin_glass_energy(L: int, couplings: list[int], x) -> float:
    """Энергия E(C) = -Σ s_i J_ij s_j прямым суммированием"""
    spins = 1 - 2 * np.asarray(x, dtype=np.int64)
    energy = 0
    for node in range(L * L):
        for direction in (RIGHT, DOWN):
            J = couplings[2 * node + direction]
            energy -= spins[node] * J * spins[lattice_neighbor(L, node, direction)]
    return float(energy)


def lattice_couplings(problem: AdditiveProblem) -> tuple[int, np.ndarray, np.ndarray]:
    """Восстанавливает L и матрицы связей right/down из ADF спинового стекла"""
    L = math.isqrt(problem.n)
    if L * L != problem.n or L < 2 or problem.m != 2 * problem.n:
        raise StructureError(f"problem with n={problem.n}, m={problem.m} is not an L×L lattice")

    j_right = np.zeros((L, L), dtype=np.int64)
    j_down = np.zeros((L, L), dtype=np.int64)
    for node in range(problem.n):
        for direction, target in ((RIGHT, j_right), (DOWN, j_down)):
            s = 2 * node + direction
            expected = (node, lattice_neighbor(L, node, direction))
            table = problem.tables[s]
            J = table[0]
            if problem.subsets[s] != expected or not np.array_equal(
                table, np.array([J, -J, -J, J])
            ) or abs(J) != 1:
                raise StructureError(f"subset {s} is not a ±J lattice coupling {expected}")
            target[divmod(node, L)] = int(J)
    return L, j_right, j_down


def solve_spin_glass_oracle(problem: AdditiveProblem) -> ExactSolution:
    """Основное состояние трансфер-матричным ДП по строкам (L ≤ 8)"""
    L = math.isqrt(problem.n)
    if L * L == problem.n and L > ORACLE_MAX_SIDE:
        raise CapabilityError("Transfer-matrix ground-state oracle", f"L={ORACLE_MAX_SIDE}")
    L, j_right, j_down = lattice_couplings(problem)

    states = np.arange(1 << L)
    shifts = np.arange(L - 1, -1, -1)
    spins = 1 - 2 * ((states[:, None] >> shifts) & 1)  # (2^L, L)
    rolled = np.roll(spins, -1, axis=1)

    # вклад горизонтальных связей строки r и вертикальных связей из строки r-1 в r
    row_fitness = [(spins * rolled * j_right[r]).sum(axis=1) for r in range(L)]
    vertical = [(spins * j_down[r]) @ spins.T for r in range(L)]

    def sweep(first_row: int, keep_back: bool):
        dp = row_fitness[0][first_row] + vertical[0][first_row] + row_fitness[1]
        back = []
        for r in range(2, L):
            scores = dp[:, None] + vertical[r - 1]
            if keep_back:
                back.append(np.argmax(scores, axis=0))
            dp = scores.max(axis=0) + row_fitness[r]
        # замыкание: связи вниз из последней строки в строку 0
        final = dp + vertical[L - 1][:, first_row]
        return final, back

    best_value = -np.inf
    best_first = 0
    # глобальный переворот спинов сохраняет энергию: старший бит строки 0 фиксирован
    for first_row in range(1 << (L - 1)):
        final, _ = sweep(first_row, keep_back=False)
        value = final.max()
        if value > best_value:
            best_value, best_first = value, first_row

    final, back = sweep(best_first, keep_back=True)
    rows = [int(np.argmax(final))]
    for pointers in reversed(back):
        rows.append(int(pointers[rows[-1]]))
    rows.append(best_first)
    rows.reverse()

    witness = ((np.array(rows)[:, None] >> shifts) & 1).reshape(-1)
    value = evaluate(problem, witness)
    logger.debug(f"Spin glass oracle solved: L={L}, ground energy={-value:.0f}")
    return ExactSolution(value=value, witness=witness.tolist())
