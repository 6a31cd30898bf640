"""
Конфигурация pytest: опции прогона, фикстуры задач и генераторов,
свойства окружения и категории ошибок для Allure
"""

import json
import os
import sys

import allure
import dotenv
import numpy as np
import pytest
from mimesis import Numeric

from hboa.models import NkSpec, SpinGlassSpec
from hboa.problems.adf import AdditiveProblem
from hboa.problems.nk import generate_nk
from hboa.problems.spin_glass import generate_spin_glass
from hboa.seeding import make_rng


# ===================================
# КОНФИГУРАЦИЯ PYTEST
# ===================================


def pytest_addoption(parser):
    """Добавляет опции командной строки"""
    parser.addoption(
        "--seeds",
        action="store",
        type=int,
        default=10,
        help="Number of seeds for property tests over random instances",
    )


@pytest.fixture(autouse=True)
def load_env():
    """Автоматически загружает переменные окружения"""
    dotenv.load_dotenv()


@pytest.fixture(scope="session")
def seed_count(request) -> int:
    """Сколько случайных экземпляров проверять в property-тестах"""
    return request.config.getoption("--seeds")


# ===================================
# ГЕНЕРАТОРЫ ТЕСТОВЫХ ДАННЫХ
# ===================================


@pytest.fixture
def fake() -> Numeric:
    """Генератор случайных чисел mimesis"""
    return Numeric()


@pytest.fixture
def random_seed(fake: Numeric) -> int:
    """Случайное зерно экземпляра (фиксируется в отчете Allure)"""
    seed = fake.integer_number(0, 2**31 - 1)
    allure.attach(str(seed), "Instance seed", allure.attachment_type.TEXT)
    return seed


@pytest.fixture
def rng() -> np.random.Generator:
    """Воспроизводимый генератор для тестов"""
    return make_rng(20240601)


# ===================================
# ФИКСТУРЫ ЗАДАЧ
# ===================================


@pytest.fixture
def onemax() -> AdditiveProblem:
    """Каждый бит - отдельное подмножество, награда за 1"""
    return AdditiveProblem(8, [[i] for i in range(8)], [[0.0, 1.0]] * 8)


@pytest.fixture
def small_nk() -> AdditiveProblem:
    """NK n=12, k=2"""
    return generate_nk(NkSpec(n=12, k=2, seed=3))


@pytest.fixture
def small_spin_glass() -> AdditiveProblem:
    """Спиновое стекло 4×4"""
    return generate_spin_glass(SpinGlassSpec(L=4, seed=5))


@pytest.fixture
def chain_problem() -> AdditiveProblem:
    """Цепочка 0-1-2-3 и изолированная переменная 4"""
    table = [1.0, 0.0, 0.0, 1.0]
    return AdditiveProblem(5, [[0, 1], [1, 2], [2, 3], [4]], [table, table, table, [0.0, 1.0]])


# ===================================
# КОНФИГУРАЦИЯ ALLURE ОТЧЕТНОСТИ
# ===================================


@pytest.fixture(scope="session", autouse=True)
def allure_environment():
    """Настраивает свойства окружения для Allure"""
    properties = [
        f"Python_Version={sys.version.split()[0]}",
        f"Numpy_Version={np.__version__}",
        f"Log_Level={os.getenv('HBOA_LOG_LEVEL', 'INFO')}",
        f"Workers={os.getenv('HBOA_WORKERS', '1')}",
        "Test_Framework=pytest + voluptuous + allure",
    ]

    allure_dir = "allure-results"
    os.makedirs(allure_dir, exist_ok=True)

    with open(f"{allure_dir}/environment.properties", "w") as f:
        for prop in properties:
            f.write(f"{prop}\n")


@pytest.hookimpl(tryfirst=True, hookwrapper=True)
def pytest_runtest_makereport(item, call):
    """Детали ошибки и метаданные теста в Allure"""
    outcome = yield
    report = outcome.get_result()

    if report.when == "call" and report.failed:
        if hasattr(report, "longrepr") and report.longrepr:
            allure.attach(
                str(report.longrepr),
                f"Test Failure: {item.name}",
                allure.attachment_type.TEXT,
            )

        allure.attach(
            f"Test: {item.name}\n"
            f"File: {item.fspath.basename}\n"
            f"Duration: {report.duration:.2f}s\n"
            f"Stage: {report.when}",
            "Test Metadata",
            allure.attachment_type.TEXT,
        )


def pytest_configure(config):
    """Настраивает категории Allure и маркеры"""
    categories = [
        {
            "name": "Schema Validation",
            "messageRegex": ".*Schema validation failed.*|.*voluptuous.*",
            "traceRegex": ".*pytest_voluptuous.*",
        },
        {
            "name": "Oracle Mismatch",
            "messageRegex": ".*optimum.*|.*exhaustive.*",
        },
        {
            "name": "Score Drift",
            "messageRegex": ".*score.*|.*delta.*",
        },
    ]

    allure_dir = "allure-results"
    os.makedirs(allure_dir, exist_ok=True)

    with open(f"{allure_dir}/categories.json", "w") as f:
        json.dump(categories, f, indent=2)

    config.addinivalue_line("markers", "smoke: Smoke тесты базовой функциональности")
    config.addinivalue_line("markers", "oracle: Точные оракулы и генераторы задач")
    config.addinivalue_line("markers", "model: Скоринг, обучение и выборка сети")
    config.addinivalue_line("markers", "engine: Цикл hBOA, операторы, бисекция")
    config.addinivalue_line("markers", "bias: Архивы моделей и таблицы смещения")
    config.addinivalue_line("markers", "harness: Кросс-валидация, ускорения, графики")
    config.addinivalue_line("markers", "acceptance: Воспроизведение критериев приемки")
    config.addinivalue_line("markers", "slow: Медленные тесты")
