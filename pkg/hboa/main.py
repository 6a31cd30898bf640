import argparse
import logging
import sys
from typing import Optional, Sequence

from dotenv import load_dotenv

load_dotenv(".env")

from hboa.commands import experiments, mining, problems, runs  # noqa: E402
from hboa.exceptions import HboaError  # noqa: E402
from hboa.settings import Settings, get_settings  # noqa: E402

logger = logging.getLogger(__name__)


def setup_logging(settings: Settings) -> None:
    """Формат и обработчики логов; файл отключается пустым HBOA_LOG_FILE"""
    handlers: list[logging.Handler] = [logging.StreamHandler()]
    if settings.log_file:
        handlers.insert(0, logging.FileHandler(settings.log_file, encoding="utf-8"))

    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper(), logging.INFO),
        format="%(asctime)s - %(levelname)s - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        handlers=handlers,
        force=True,
    )

    # Для трассировки разбиений: HBOA_SHOW_MODEL_LOGS=true + HBOA_LOG_LEVEL=DEBUG
    if settings.show_model_logs:
        logging.getLogger("hboa.model").setLevel(logging.DEBUG)
    else:
        logging.getLogger("hboa.model").setLevel(logging.INFO)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hboa",
        description="hBOA with distance-based bias mined from prior runs",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Подключаем команды
    problems.register(subparsers)
    runs.register(subparsers)
    mining.register(subparsers)
    experiments.register(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    settings = get_settings()
    setup_logging(settings)
    args = build_parser().parse_args(argv)

    logger.info(f"Starting command '{args.command}'")
    try:
        return args.handler(args)
    except HboaError as e:
        logger.error(e.message)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
