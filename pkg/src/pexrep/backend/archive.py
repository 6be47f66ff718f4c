"""Deterministic library archives: stored zip files with sorted entries."""

from __future__ import annotations

import json
import zipfile
from pathlib import Path
from typing import Iterable

_EPOCH = (1980, 1, 1, 0, 0, 0)


def class_entry_name(class_name: str) -> str:
    return class_name.replace(".", "/") + ".cls"


def write_archive(path: Path, classes: Iterable[tuple[str, list[str]]]) -> None:
    """Write ``(class name, load refs)`` pairs; identical input gives identical bytes."""
    path.parent.mkdir(parents=True, exist_ok=True)
    entries = sorted((class_entry_name(name), name, list(loads)) for name, loads in classes)
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_STORED) as zf:
        for entry, name, loads in entries:
            info = zipfile.ZipInfo(entry, date_time=_EPOCH)
            info.external_attr = 0o644 << 16
            info.create_system = 3
            body = json.dumps({"name": name, "loads": loads}, sort_keys=True)
            zf.writestr(info, body + "\n")


def read_archive(path: Path) -> list[tuple[str, list[str]]]:
    """Return the ``(class name, load refs)`` pairs stored in an archive."""
    out = []
    with zipfile.ZipFile(path) as zf:
        for entry in sorted(zf.namelist()):
            data = json.loads(zf.read(entry))
            out.append((data["name"], list(data["loads"])))
    return out


def remove_class(path: Path, class_name: str) -> None:
    """Rewrite an archive without one class (used by delete-one experiments)."""
    kept = [(n, loads) for n, loads in read_archive(path) if n != class_name]
    write_archive(path, kept)
