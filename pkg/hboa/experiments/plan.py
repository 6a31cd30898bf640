import logging
from pathlib import Path

import toml
from pydantic import ValidationError

from hboa.exceptions import ConfigError, InputError, ParseError
from hboa.models import ExperimentPlan

logger = logging.getLogger(__name__)

PLANS_DIR = Path(__file__).resolve().parent.parent / "data" / "plans"


def bundled_plan(name: str) -> Path:
    """Путь к плану из hboa/data/plans (имя без расширения)"""
    path = PLANS_DIR / f"{name}.toml"
    if not path.exists():
        available = ", ".join(sorted(p.stem for p in PLANS_DIR.glob("*.toml")))
        raise InputError(f"no bundled plan '{name}' (available: {available})")
    return path


def load_plan(path: str | Path) -> ExperimentPlan:
    """Читает TOML-план и проверяет его модели ExperimentPlan"""
    path = Path(path)
    if not path.exists():
        path = bundled_plan(str(path))
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = toml.load(f)
    except toml.TomlDecodeError as e:
        raise ParseError(path, e.lineno, "toml", e.msg)

    try:
        plan = ExperimentPlan.model_validate(data)
    except ValidationError as e:
        error = e.errors()[0]
        location = ".".join(str(part) for part in error["loc"])
        raise ConfigError(f"{path}: {location}: {error['msg']}")

    logger.info(
        f"Plan loaded from {path}: {plan.problem.kind} n={plan.problem.size}, "
        f"{plan.instances.count} instances, kappas={plan.crossvalidation.kappas}"
    )
    return plan
