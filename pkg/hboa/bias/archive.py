"""
Архив моделей прошлых запусков. Формат файла:

    ARCHIVE n=<n> key=value ...
    R <instance_id> <run> <iteration> <n> <fingerprint>
    T 0 ...          (n строк - деревья модели)
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from hboa.exceptions import EmptyArchiveError, HboaError, InputError, ParseError
from hboa.model.network import DtBayesNet

logger = logging.getLogger(__name__)


@dataclass
class ModelRecord:
    instance_id: str
    run: int
    iteration: int
    model: DtBayesNet
    fingerprint: str = ""


@dataclass
class ModelArchive:
    """Записи с общим числом переменных n и метаданными происхождения"""

    n: int
    records: list[ModelRecord] = field(default_factory=list)
    provenance: dict[str, str] = field(default_factory=dict)

    @property
    def instance_ids(self) -> set[str]:
        return {record.instance_id for record in self.records}

    def exclude(self, instance_ids: Iterable[str]) -> "ModelArchive":
        """Копия без записей перечисленных экземпляров"""
        excluded = set(instance_ids)
        kept = [record for record in self.records if record.instance_id not in excluded]
        if not kept:
            raise EmptyArchiveError("every record was excluded")
        return ModelArchive(self.n, kept, dict(self.provenance))


def _header(n: int, provenance: dict[str, str]) -> str:
    items = [f"n={n}"] + [f"{key}={value}" for key, value in sorted(provenance.items())]
    return "ARCHIVE " + " ".join(items)


def _record_lines(record: ModelRecord) -> list[str]:
    if not record.instance_id or any(c.isspace() for c in record.instance_id):
        raise InputError(f"instance id '{record.instance_id}' must be non-empty without spaces")
    head = (
        f"R {record.instance_id} {record.run} {record.iteration} "
        f"{record.model.n} {record.fingerprint or '-'}"
    )
    return [head] + record.model.to_lines()


class ArchiveWriter:
    """Дописывает записи в файл архива; заголовок создается при первом открытии"""

    def __init__(self, path: str | Path, n: int, provenance: dict[str, str] | None = None):
        self.path = Path(path)
        self.n = n
        if self.path.exists() and self.path.stat().st_size:
            with open(self.path, "r", encoding="utf-8") as f:
                existing = _parse_header(self.path, f.readline())
            if existing[0] != n:
                raise InputError(f"archive {self.path} holds n={existing[0]}, not n={n}")
        else:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text(_header(n, provenance or {}) + "\n", encoding="utf-8")

    def append(self, records: Iterable[ModelRecord]) -> int:
        lines = []
        count = 0
        for record in records:
            if record.model.n != self.n:
                raise InputError(
                    f"record for {record.instance_id} has n={record.model.n}, archive has n={self.n}"
                )
            lines += _record_lines(record)
            count += 1
        with open(self.path, "a", encoding="utf-8") as f:
            f.write("".join(line + "\n" for line in lines))
        logger.debug(f"Appended {count} records to {self.path}")
        return count


def write_archive(
    path: str | Path,
    records: Sequence[ModelRecord],
    n: int,
    provenance: dict[str, str] | None = None,
) -> Path:
    writer = ArchiveWriter(path, n, provenance)
    writer.append(records)
    return writer.path


def _parse_header(path: Path, line: str) -> tuple[int, dict[str, str]]:
    tokens = line.split()
    if not tokens or tokens[0] != "ARCHIVE":
        raise ParseError(path, 1, "header", "archive must start with 'ARCHIVE n=...'")
    try:
        meta = dict(token.split("=", 1) for token in tokens[1:])
        n = int(meta.pop("n"))
    except (KeyError, ValueError):
        raise ParseError(path, 1, "n", "header lacks a valid 'n=' entry")
    return n, meta


def _read_file(path: Path) -> ModelArchive:
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise InputError(f"cannot read archive {path}: {e}")
    if not lines:
        raise ParseError(path, 1, "header", "archive file is empty")

    n, provenance = _parse_header(path, lines[0])
    archive = ModelArchive(n, provenance=provenance)
    position = 1
    while position < len(lines):
        index = len(archive.records)
        line_no = position + 1
        tokens = lines[position].split()
        if not tokens:
            position += 1
            continue
        if tokens[0] != "R" or len(tokens) != 6:
            raise ParseError(path, line_no, "record", f"record {index}: bad record header")
        try:
            run, iteration, record_n = int(tokens[2]), int(tokens[3]), int(tokens[4])
        except ValueError:
            raise ParseError(path, line_no, "record", f"record {index}: non-integer counters")
        if record_n != n:
            raise ParseError(path, line_no, "n", f"record {index}: n={record_n}, archive n={n}")

        trees = lines[position + 1 : position + 1 + n]
        if len(trees) != n:
            raise ParseError(path, line_no, "tree", f"record {index}: truncated model")
        try:
            model = DtBayesNet.from_lines(trees)
            model.validate()
        except ValueError as e:
            raise ParseError(path, line_no, "tree", f"record {index}: {e}")
        except HboaError as e:
            raise ParseError(path, line_no, "tree", f"record {index}: {e.message}")

        fingerprint = "" if tokens[5] == "-" else tokens[5]
        archive.records.append(ModelRecord(tokens[1], run, iteration, model, fingerprint))
        position += 1 + n
    return archive


def read_archive(
    paths: str | Path | Iterable[str | Path],
    exclude: Iterable[str] = (),
) -> ModelArchive:
    """Читает один или несколько файлов; записи исключенных экземпляров отбрасываются"""
    if isinstance(paths, (str, Path)):
        paths = [paths]
    excluded = set(exclude)

    merged = None
    for path in paths:
        part = _read_file(Path(path))
        if merged is None:
            merged = ModelArchive(part.n, provenance=dict(part.provenance))
        elif part.n != merged.n:
            raise InputError(f"archive {path} has n={part.n}, expected n={merged.n}")
        merged.records += [r for r in part.records if r.instance_id not in excluded]

    if merged is None or not merged.records:
        raise EmptyArchiveError("no records left after reading and filtering")
    logger.info(f"Read {len(merged.records)} model records (n={merged.n})")
    return merged
