from pathlib import Path


class HboaError(Exception):
    """Унифицированная ошибка библиотеки с кодом завершения для CLI"""

    def __init__(self, message: str, exit_code: int = 2):
        super().__init__(message)
        self.message = message
        self.exit_code = exit_code


class InputError(HboaError):
    """Некорректные входные данные операции"""

    def __init__(self, message: str):
        super().__init__(f"Invalid input: {message}", exit_code=2)


class ConfigError(HboaError):
    """Некорректная конфигурация (движок, скоринг, план)"""

    def __init__(self, message: str):
        super().__init__(f"Invalid configuration: {message}", exit_code=2)


class StructureError(HboaError):
    """Структура задачи или модели не подходит для операции"""

    def __init__(self, message: str):
        super().__init__(f"Structure error: {message}", exit_code=3)


class CycleError(StructureError):
    """Граф родителей байесовской сети содержит цикл"""

    def __init__(self, detail: str = "parent graph is cyclic"):
        super().__init__(detail)


class RejectedSplitError(HboaError):
    """Кандидат на разбиение недопустим (цикл или повтор переменной на пути)"""

    def __init__(self, tree: int, variable: int, reason: str):
        super().__init__(
            f"Split of tree {tree} on variable {variable} rejected: {reason}",
            exit_code=3,
        )
        self.tree = tree
        self.variable = variable
        self.reason = reason


class ParseError(HboaError):
    """Ошибка разбора файла с указанием строки и поля"""

    def __init__(self, source: str | Path, line: int, field: str, message: str):
        super().__init__(f"{source}:{line}: field '{field}': {message}", exit_code=2)
        self.source = str(source)
        self.line = line
        self.field = field


class CapabilityError(HboaError):
    """Операция не поддерживается для такого размера задачи"""

    def __init__(self, what: str, limit: str):
        super().__init__(f"{what} is not supported beyond {limit}", exit_code=3)


class UnsolvableAtCapError(HboaError):
    """Удвоение популяции превысило жесткий предел"""

    def __init__(self, cap: int):
        super().__init__(
            f"No population size up to {cap} solved the instance in every run",
            exit_code=4,
        )
        self.cap = cap


class EmptyArchiveError(HboaError):
    """Архив моделей пуст (или пуст после фильтрации)"""

    def __init__(self, detail: str = "no model records"):
        super().__init__(f"Empty model archive: {detail}", exit_code=2)


class PlanError(HboaError):
    """План эксперимента невыполним"""

    def __init__(self, message: str):
        super().__init__(f"Experiment plan error: {message}", exit_code=4)
