"""
Report emission
Canonical JSON (sorted keys, NaN as null), config hashing and CSV tables
with a commented header line.
"""
import csv
import dataclasses
import hashlib
import json
import logging
import math
from pathlib import Path
from typing import Any, Iterable, List

import numpy as np
from pydantic import BaseModel

from nvregsim.core.errors import ConfigValidationError, ReportError
from nvregsim.schemas.report_schema import RunSummary, TableSpec

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json", "both")


def to_plain(obj: Any) -> Any:
    """Recursively convert results into JSON-ready Python values; non-finite floats become None."""
    if isinstance(obj, BaseModel):
        return to_plain(obj.model_dump(mode="python"))
    if hasattr(obj, "to_dict") and callable(obj.to_dict):
        return to_plain(obj.to_dict())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return to_plain(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, complex):
        return {"re": to_plain(obj.real), "im": to_plain(obj.imag)}
    return obj


def canonical_json(obj: Any, indent: int | None = None) -> str:
    return json.dumps(to_plain(obj), sort_keys=True, indent=indent, separators=None if indent else (",", ":"))


def config_hash(payload: Any) -> str:
    """sha256 of the canonical JSON of ``payload``."""
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def _prepare_dir(output_dir: Path) -> Path:
    try:
        output_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ReportError(f"cannot create output directory {output_dir}: {exc}", {"path": str(output_dir)}) from exc
    return output_dir


def write_json(path: Path, payload: Any) -> Path:
    try:
        path.write_text(canonical_json(payload, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise ReportError(f"cannot write {path}: {exc}", {"path": str(path)}) from exc
    return path


def write_csv(path: Path, table: TableSpec) -> Path:
    """Header comment line, column row, then rows (empty tables stay header-only)."""
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            fh.write(f"# {table.description} | columns: {', '.join(table.columns)}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(table.columns)
            for row in table.rows:
                writer.writerow(["" if v is None else v for v in to_plain(row)])
    except OSError as exc:
        raise ReportError(f"cannot write {path}: {exc}", {"path": str(path)}) from exc
    return path


def emit_report(
    output_dir: str | Path,
    stem: str,
    summary: RunSummary,
    tables: Iterable[TableSpec] = (),
    fmt: str = "both",
) -> List[Path]:
    """Write ``<stem>_<table>.csv`` files and ``<stem>_summary.json``; returns the written paths."""
    if fmt not in FORMATS:
        raise ReportError(f"unknown report format {fmt!r}")
    directory = _prepare_dir(Path(output_dir))
    written: List[Path] = []
    if fmt in ("csv", "both"):
        for table in tables:
            written.append(write_csv(directory / f"{stem}_{table.name}.csv", table))
    if fmt in ("json", "both"):
        summary = summary.model_copy(update={"artifacts": sorted(p.name for p in written)})
        written.append(write_json(directory / f"{stem}_summary.json", summary))
    logger.info("wrote %d report file(s) to %s", len(written), directory)
    return written


def read_csv_rows(path: str | Path, columns: List[str]) -> List[List[float]]:
    """Numeric rows of the named columns; '#' lines are comments."""
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(line for line in fh if not line.startswith("#"))
            missing = [c for c in columns if c not in (reader.fieldnames or [])]
            if missing:
                raise ConfigValidationError(f"{path} lacks column(s) {missing}", {"path": str(path)})
            return [[float(row[c]) for c in columns] for row in reader]
    except ValueError as exc:
        if isinstance(exc, ConfigValidationError):
            raise
        raise ConfigValidationError(f"non-numeric value in {path}: {exc}", {"path": str(path)}) from exc
    except OSError as exc:
        raise ConfigValidationError(f"cannot read {path}: {exc}", {"path": str(path)}) from exc
