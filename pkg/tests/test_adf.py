import logging

import allure
import numpy as np
import pytest

from hboa.exceptions import InputError
from hboa.models import NkSpec, SpinGlassSpec
from hboa.problems.adf import AdditiveProblem, evaluate, evaluate_many
from hboa.problems.nk import generate_nk
from hboa.problems.spin_glass import generate_spin_glass
from tests.assertions import ResultAssertions

logger = logging.getLogger(__name__)


@allure.feature("Additive Functions")
class TestEvaluate:
    @allure.title("Zero tables give zero fitness")
    @pytest.mark.smoke
    def test_zero_tables(self, rng):
        """Нулевые подфункции дают 0 на любой строке"""
        problem = AdditiveProblem(5, [[0, 1], [2, 3, 4]], [[0.0] * 4, [0.0] * 8])
        for _ in range(5):
            assert evaluate(problem, rng.integers(0, 2, 5)) == 0.0

        logger.info("Zero tables evaluated to 0")

    @allure.title("Aligned 2x2 ferromagnet has fitness 8")
    @pytest.mark.smoke
    def test_aligned_ferromagnet(self):
        """Решетка 2×2, все J=+1, все спины +1: 8 связей по +1"""
        problem = generate_spin_glass(SpinGlassSpec(L=2, seed=0, couplings=[1] * 8))
        assert evaluate(problem, [0, 0, 0, 0]) == 8.0

        logger.info("Ferromagnet fitness verified")

    @allure.title("Small NK matches hand summation of table lookups")
    def test_hand_summation(self):
        """n=3, k=1: три подфункции, первая переменная - старший бит индекса"""
        tables = [[0.1, 0.2, 0.3, 0.4], [0.5, 0.6, 0.7, 0.8], [0.9, 0.0, 0.25, 0.75]]
        problem = AdditiveProblem(3, [[0, 1], [1, 2], [2, 0]], tables)
        x = [1, 0, 1]
        # (x0,x1)=10 -> 2; (x1,x2)=01 -> 1; (x2,x0)=11 -> 3
        expected = 0.3 + 0.6 + 0.75
        ResultAssertions.check_close(evaluate(problem, x), expected, 1e-12, "fitness")

        logger.info("Hand summation matched")

    @allure.title("Vectorized evaluation agrees with single evaluation")
    def test_evaluate_many(self, small_nk, rng):
        """Пакетное вычисление совпадает с построчным"""
        population = rng.integers(0, 2, (50, small_nk.n)).astype(np.uint8)
        batch = evaluate_many(small_nk, population)
        single = np.array([evaluate(small_nk, row) for row in population])
        np.testing.assert_allclose(batch, single, rtol=0, atol=1e-12)

        logger.info("Batch evaluation verified on 50 rows")

    @allure.title("Unused bit does not change fitness")
    def test_unused_bit(self, rng):
        """Переменная вне всех подмножеств не влияет на значение"""
        problem = AdditiveProblem(4, [[0, 1], [1, 2]], [rng.random(4), rng.random(4)])
        x = np.array([1, 0, 1, 0])
        flipped = x.copy()
        flipped[3] = 1
        assert evaluate(problem, x) == evaluate(problem, flipped)

        logger.info("Unused bit verified")

    @allure.title("Length mismatch is an input error")
    @pytest.mark.parametrize("x", [[0, 1], [0, 1, 0, 1, 0, 1], [0, 2, 0, 1, 0]])
    def test_bad_solution(self, chain_problem, x):
        """Неверная длина или небинарные значения отклоняются"""
        with pytest.raises(InputError):
            evaluate(chain_problem, x)

        logger.info(f"Rejected solution {x}")

    @allure.title("Malformed problem definitions are rejected")
    @pytest.mark.parametrize(
        "subsets, tables",
        [
            ([[0, 0]], [[0.0] * 4]),
            ([[0, 5]], [[0.0] * 4]),
            ([[]], [[0.0]]),
            ([[0, 1]], [[0.0] * 3]),
            ([[0, 1]], []),
        ],
    )
    def test_bad_problem(self, subsets, tables):
        """Повторы, выход за диапазон, пустые подмножества и неверные таблицы"""
        with pytest.raises(InputError):
            AdditiveProblem(3, subsets, tables)

        logger.info(f"Rejected subsets {subsets}")


@allure.feature("Distance Metric")
class TestDistances:
    @allure.title("Chain distances and disconnected pairs")
    @pytest.mark.smoke
    def test_chain(self, chain_problem):
        """Цепочка 0-1-2-3, переменная 4 изолирована: расстояние n"""
        d = chain_problem.distances
        assert d[0, 0] == 0
        assert d[0, 1] == 1
        assert d[0, 3] == 3
        assert d[1, 3] == 2
        assert d[0, 4] == chain_problem.n
        assert d[4, 4] == 0

        logger.info("Chain distances verified")

    @allure.title("Shared subset gives distance one")
    def test_same_subset(self):
        """Переменные одного подмножества на расстоянии 1"""
        problem = AdditiveProblem(4, [[0, 2, 3]], [[0.0] * 8])
        d = problem.distances
        assert d[0, 2] == d[2, 3] == d[0, 3] == 1
        assert d[0, 1] == 4

        logger.info("Same-subset distances verified")

    @allure.title("Distance matrix is a symmetric metric")
    def test_metric_properties(self, small_spin_glass):
        """Симметрия, нулевая диагональ и неравенство треугольника"""
        d = small_spin_glass.distances.d
        assert np.array_equal(d, d.T)
        assert (np.diag(d) == 0).all()
        via = d[:, :, None] + d[None, :, :]
        assert (d <= via.min(axis=1)).all()

        logger.info("Metric properties verified")

    @allure.title("Distance matrix is read-only")
    def test_read_only(self, chain_problem):
        with pytest.raises(ValueError):
            chain_problem.distances.d[0, 1] = 7

        logger.info("Distance matrix is immutable")

    @allure.title("Subset order does not change distances")
    def test_order_invariance(self, rng):
        """Перестановка подмножеств не меняет метрику"""
        problem = generate_nk(NkSpec(n=10, k=2, seed=4))
        order = rng.permutation(problem.m)
        shuffled = AdditiveProblem(
            problem.n,
            [problem.subsets[s] for s in order],
            [problem.tables[s] for s in order],
        )
        assert np.array_equal(problem.distances.d, shuffled.distances.d)
        assert problem.distances.fingerprint() == shuffled.distances.fingerprint()

        logger.info("Distances invariant under subset order")

    @allure.title("Torus distances on the spin glass lattice")
    def test_torus(self, small_spin_glass):
        """На торе 4×4 максимум расстояния 4, соседи на расстоянии 1"""
        d = small_spin_glass.distances
        assert d[0, 1] == 1
        assert d[0, 3] == 1
        assert d[0, 12] == 1
        assert d[0, 10] == 4
        assert d.d.max() == 4

        logger.info("Torus distances verified")
