"""
Текстовый формат экземпляров: заголовок `NK n k seed [shuffled]` или `SG L seed`,
затем по строке на подмножество - индексы переменных и значения таблицы в hex-float.
Зерно в заголовке воспроизводит экземпляр только генератором numpy PCG64, файл - при любом
"""

import logging
from pathlib import Path

from pydantic import ValidationError

from hboa.exceptions import InputError, ParseError
from hboa.models import NkSpec, SpinGlassSpec
from hboa.problems.adf import AdditiveProblem

logger = logging.getLogger(__name__)

InstanceSpec = NkSpec | SpinGlassSpec


def write_instance(path: str | Path, problem: AdditiveProblem, spec: InstanceSpec) -> Path:
    """Записывает экземпляр без потерь (таблицы явно, в hex-float)"""
    path = Path(path)
    if isinstance(spec, NkSpec):
        header = f"NK {spec.n} {spec.k} {spec.seed}" + (" shuffled" if spec.shuffle else "")
    else:
        header = f"SG {spec.L} {spec.seed}"

    lines = [header]
    for subset, table in zip(problem.subsets, problem.tables):
        indices = " ".join(str(v) for v in subset)
        entries = " ".join(float(value).hex() for value in table)
        lines.append(f"{indices} {entries}")

    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.debug(f"Instance written to {path}")
    return path


def _parse_int(source: Path, line_no: int, field: str, token: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(source, line_no, field, f"expected an integer, got '{token}'")


def _parse_entry(token: str) -> float:
    """hex-float (как пишет write_instance) или десятичная запись для ручных файлов"""
    if "0x" in token.lower():
        return float.fromhex(token)
    return float(token)


def _parse_header(source: Path, header: str) -> tuple[InstanceSpec, int, int]:
    """Разбирает заголовок: спецификация, число строк-подмножеств, размер подмножества"""
    tokens = header.split()
    if not tokens:
        raise ParseError(source, 1, "type", "empty header")
    kind = tokens[0]
    try:
        if kind == "NK" and len(tokens) in (4, 5):
            n = _parse_int(source, 1, "n", tokens[1])
            k = _parse_int(source, 1, "k", tokens[2])
            seed = _parse_int(source, 1, "seed", tokens[3])
            shuffle = len(tokens) == 5
            if shuffle and tokens[4] != "shuffled":
                raise ParseError(source, 1, "flags", f"unknown flag '{tokens[4]}'")
            return NkSpec(n=n, k=k, seed=seed, shuffle=shuffle), n, k + 1
        if kind == "SG" and len(tokens) == 3:
            L = _parse_int(source, 1, "L", tokens[1])
            seed = _parse_int(source, 1, "seed", tokens[2])
            return SpinGlassSpec(L=L, seed=seed), 2 * L * L, 2
    except ValidationError as e:
        raise ParseError(source, 1, "header", str(e.errors()[0]["msg"]))
    raise ParseError(source, 1, "type", f"unrecognized header '{header.strip()}'")


def read_instance(path: str | Path) -> tuple[AdditiveProblem, InstanceSpec]:
    """Читает экземпляр; при любой ошибке - ParseError без частичного результата"""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read instance {path}: {e}")

    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise ParseError(path, 1, "header", "file is empty")

    spec, expected_lines, subset_size = _parse_header(path, lines[0])
    body = lines[1:]
    if len(body) != expected_lines:
        raise ParseError(
            path,
            len(lines) + 1,
            "subset",
            f"expected {expected_lines} subset lines, found {len(body)}",
        )

    n = spec.n if isinstance(spec, NkSpec) else spec.L * spec.L
    subsets = []
    tables = []
    for offset, line in enumerate(body):
        line_no = offset + 2
        tokens = line.split()
        expected_tokens = subset_size + 2**subset_size
        if len(tokens) != expected_tokens:
            raise ParseError(
                path, line_no, "subset", f"expected {expected_tokens} tokens, got {len(tokens)}"
            )
        subset = [_parse_int(path, line_no, "index", token) for token in tokens[:subset_size]]
        if any(v < 0 or v >= n for v in subset):
            raise ParseError(path, line_no, "subset", f"index outside 0..{n - 1} in {subset}")
        if len(set(subset)) != len(subset):
            raise ParseError(path, line_no, "subset", f"repeated variable in {subset}")
        subsets.append(subset)
        try:
            tables.append([_parse_entry(token) for token in tokens[subset_size:]])
        except ValueError:
            raise ParseError(path, line_no, "table", "malformed table entry")
        if isinstance(spec, SpinGlassSpec) and tables[-1][0] not in (-1.0, 1.0):
            raise ParseError(path, line_no, "table", "coupling must be +1 or -1")

    try:
        problem = AdditiveProblem(n, subsets, tables)
    except InputError as e:
        raise ParseError(path, 2, "subset", e.message)

    if isinstance(spec, SpinGlassSpec):
        try:
            spec = SpinGlassSpec(
                L=spec.L, seed=spec.seed, couplings=[int(table[0]) for table in tables]
            )
        except ValidationError as e:
            raise ParseError(path, 2, "table", str(e.errors()[0]["msg"]))

    logger.debug(f"Instance read from {path}: {problem}")
    return problem, spec
