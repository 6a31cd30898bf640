from enum import Enum
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from hboa.bias.miner import BiasTable


# ================================
# СПЕЦИФИКАЦИИ ЗАДАЧ
# ================================


class NkSpec(BaseModel):
    """NK-ландшафт с ближайшими соседями"""

    n: int = Field(ge=2)
    k: int = Field(ge=1)
    seed: int = Field(ge=0)
    shuffle: bool = False  # перемешанная нумерация переменных

    @model_validator(mode="after")
    def check_k_below_n(self) -> "NkSpec":
        if self.k >= self.n:
            raise ValueError(f"k={self.k} must be below n={self.n}")
        return self


class SpinGlassSpec(BaseModel):
    """Двумерный ±J спиновое стекло L×L с периодическими границами"""

    L: int = Field(ge=2)
    seed: int = Field(ge=0)
    # 2L² связей: индекс 2*node + direction, direction 0 = right, 1 = down
    couplings: Optional[list[int]] = None

    @model_validator(mode="after")
    def check_couplings(self) -> "SpinGlassSpec":
        if self.couplings is None:
            return self
        if len(self.couplings) != 2 * self.L * self.L:
            raise ValueError(
                f"expected {2 * self.L * self.L} couplings, got {len(self.couplings)}"
            )
        if any(value not in (-1, 1) for value in self.couplings):
            raise ValueError("every coupling must be +1 or -1")
        return self


class ExactSolution(BaseModel):
    """Точный оптимум и одна оптимальная строка"""

    value: float
    witness: list[int]


# ================================
# КОНФИГУРАЦИЯ СКОРИНГА И ДВИЖКА
# ================================


class PriorMode(str, Enum):
    """Априорное распределение структур сети"""

    PENALTY = "penalty"  # штраф за сложность
    BIAS = "bias"  # смещение по расстояниям из архива


class ScoreConfig(BaseModel):
    """Параметры BDe-метрики"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    population_size: int = Field(ge=1)
    prior_mode: PriorMode = PriorMode.PENALTY
    bias: Optional[BiasTable] = None
    kappa: float = 1.0

    @model_validator(mode="after")
    def check_bias(self) -> "ScoreConfig":
        if self.prior_mode is PriorMode.BIAS:
            if self.kappa <= 0:
                raise ValueError("kappa must be positive in distance-bias mode")
            if self.bias is None:
                raise ValueError("distance-bias mode requires a bias table")
        return self


class EngineConfig(BaseModel):
    """Параметры одного запуска hBOA"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    population_size: int = Field(ge=2)
    max_iterations: Optional[int] = Field(default=None, ge=1)  # None -> n
    prior_mode: PriorMode = PriorMode.PENALTY
    kappa: float = 1.0
    bias: Optional[BiasTable] = None
    rts_window: Optional[int] = Field(default=None, ge=1)  # None -> min(n, N/20)
    hc_enabled: bool = True
    seed: int = Field(default=0, ge=0)

    @field_validator("population_size")
    @classmethod
    def check_even(cls, value: int) -> int:
        if value % 2:
            raise ValueError(f"population size must be even, got {value}")
        return value

    @model_validator(mode="after")
    def check_window_and_bias(self) -> "EngineConfig":
        if self.rts_window is not None and self.rts_window > self.population_size:
            raise ValueError("RTS window cannot exceed the population size")
        if self.prior_mode is PriorMode.BIAS and (self.bias is None or self.kappa <= 0):
            raise ValueError("distance-bias mode requires a bias table and kappa > 0")
        return self

    def score_config(self) -> ScoreConfig:
        """Конфигурация скоринга для выбранной популяции размера N"""
        return ScoreConfig(
            population_size=self.population_size,
            prior_mode=self.prior_mode,
            bias=self.bias,
            kappa=self.kappa,
        )

    def window_for(self, n: int) -> int:
        """Размер окна RTS"""
        if self.rts_window is not None:
            return self.rts_window
        return max(1, min(n, self.population_size // 20))

    def iterations_for(self, n: int) -> int:
        """Предел числа итераций (по умолчанию число бит)"""
        return self.max_iterations if self.max_iterations is not None else n


class RunStats(BaseModel):
    """Счетчики одного запуска"""

    instance_id: str = ""
    mode: PriorMode = PriorMode.PENALTY
    kappa: float = 0.0
    population_size: int
    iterations: int = 0
    evaluations: int = 0
    hc_steps: int = 0
    wall_time: float = 0.0
    success: bool = False
    run: int = 0
    seed: int = 0


# ================================
# ПЛАН ЭКСПЕРИМЕНТА
# ================================


class ProblemSection(BaseModel):
    """Класс и размер задач"""

    model_config = ConfigDict(populate_by_name=True)

    kind: Literal["nk", "sg"] = Field(alias="class")
    n: Optional[int] = Field(default=None, ge=2)
    k: Optional[int] = Field(default=None, ge=1)
    L: Optional[int] = Field(default=None, ge=2)
    shuffle: bool = False

    @model_validator(mode="after")
    def check_size(self) -> "ProblemSection":
        if self.kind == "nk" and (self.n is None or self.k is None):
            raise ValueError("NK plans need both n and k")
        if self.kind == "sg" and self.L is None:
            raise ValueError("spin glass plans need L")
        return self

    @property
    def size(self) -> int:
        """Число переменных"""
        return self.n if self.kind == "nk" else self.L * self.L


class InstancesSection(BaseModel):
    """Набор экземпляров"""

    count: int = Field(ge=1)
    seed: int = Field(default=0, ge=0)
    directory: Optional[Path] = None  # по умолчанию <output>/instances


class CrossvalidationSection(BaseModel):
    """Параметры кросс-валидации"""

    folds: int = Field(default=10, ge=2)
    fold_seed: int = Field(default=0, ge=0)
    kappas: list[float] = Field(default_factory=lambda: [1.0])
    pair_base_runs: bool = True
    pooled: bool = False

    @field_validator("kappas")
    @classmethod
    def check_kappas(cls, value: list[float]) -> list[float]:
        if not value or any(kappa <= 0 for kappa in value):
            raise ValueError("kappa values must be positive")
        return value


class EngineSection(BaseModel):
    """Шаблон настроек движка и бисекции"""

    rts_window: Optional[int] = Field(default=None, ge=1)
    hc_enabled: bool = True
    max_iterations: Optional[int] = Field(default=None, ge=1)
    start_population: int = Field(default=32, ge=2)
    population_cap: int = Field(default=2**20, ge=2)
    runs_per_size: int = Field(default=10, ge=1)
    seed: int = Field(default=0, ge=0)
    archive_stride: int = Field(default=1, ge=1)


class OutputSection(BaseModel):
    """Куда писать результаты"""

    directory: Path = Path("results")


class ExperimentPlan(BaseModel):
    """План 10-кратной кросс-валидации"""

    problem: ProblemSection
    instances: InstancesSection
    crossvalidation: CrossvalidationSection = Field(
        default_factory=CrossvalidationSection
    )
    engine: EngineSection = Field(default_factory=EngineSection)
    output: OutputSection = Field(default_factory=OutputSection)

    @model_validator(mode="after")
    def check_folds(self) -> "ExperimentPlan":
        if self.instances.count % self.crossvalidation.folds:
            raise ValueError(
                f"instance count {self.instances.count} is not divisible "
                f"by fold count {self.crossvalidation.folds}"
            )
        return self

    @property
    def instances_dir(self) -> Path:
        """Каталог с файлами экземпляров"""
        return self.instances.directory or self.output.directory / "instances"
