"""Atomic CSV and JSON artifact writing."""

import csv
import io
import json
import os
import tempfile
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

ERRORS_FILENAME = "errors.json"


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with tempfile.NamedTemporaryFile(
        "w", dir=path.parent, delete=False, suffix=path.suffix, encoding="utf-8", newline=""
    ) as tmp:
        tmp.write(text)
    os.replace(tmp.name, path)


def config_line(config: dict[str, Any]) -> str:
    """One-line comment embedding the resolved configuration."""
    return "# " + json.dumps(config, sort_keys=True, separators=(",", ":")) + "\n"


def write_csv(
    path: Path,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    config: dict[str, Any] | None = None,
) -> Path:
    """Write a CSV whose first line echoes the configuration."""
    buffer = io.StringIO()
    if config is not None:
        buffer.write(config_line(config))
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_format(value) for value in row])
    _atomic_write(path, buffer.getvalue())
    return path


def _format(value: Any) -> Any:
    if isinstance(value, float):
        return repr(float(value))
    return value


def read_csv(path: Path) -> tuple[dict[str, Any] | None, list[dict[str, str]]]:
    """Read a CSV written by write_csv.

    Returns:
        The echoed configuration (or None) and the rows as dicts.
    """
    lines = path.read_text(encoding="utf-8").splitlines()
    config = None
    if lines and lines[0].startswith("# "):
        config = json.loads(lines[0][2:])
        lines = lines[1:]
    return config, list(csv.DictReader(lines))


def write_json(path: Path, data: Any) -> Path:
    _atomic_write(path, json.dumps(data, indent=2, sort_keys=True) + "\n")
    return path


def read_json(path: Path) -> Any:
    return json.loads(path.read_text(encoding="utf-8"))


def write_errors(out_dir: Path, failures: list[dict[str, Any]]) -> Path | None:
    """Write errors.json when any trial failed."""
    if not failures:
        return None
    return write_json(out_dir / ERRORS_FILENAME, {"failures": failures})
