"""Scratch workspaces, the local artifact repository and workspace locks."""

from __future__ import annotations

import contextlib
import hashlib
import os
import shutil
import tempfile
from pathlib import Path
from typing import Iterator, Optional

from filelock import FileLock

WORKDIR_ENV = "PEXREP_WORKDIR"


def scratch_root() -> Path:
    root = Path(os.environ.get(WORKDIR_ENV) or Path(tempfile.gettempdir()) / "pexrep")
    root.mkdir(parents=True, exist_ok=True)
    return root


def default_repository() -> Path:
    """Directory standing in for a public artifact repository."""
    return scratch_root() / "repository"


def copy_project(source: Path, dest: Path) -> Path:
    """Copy a project tree without its build outputs."""
    shutil.copytree(source, dest, ignore=shutil.ignore_patterns("target"), dirs_exist_ok=False)
    return dest


@contextlib.contextmanager
def fresh_workspace(source: Path, label: str, scratch: Optional[Path] = None) -> Iterator[Path]:
    base = Path(tempfile.mkdtemp(prefix=f"{label}-", dir=scratch or scratch_root()))
    try:
        yield copy_project(source, base / "ws")
    finally:
        shutil.rmtree(base, ignore_errors=True)


def workspace_lock(path: Path) -> FileLock:
    """Exclusive lock for one workspace; the lock file lives outside the workspace."""
    digest = hashlib.sha1(str(Path(path).resolve()).encode()).hexdigest()
    locks = scratch_root() / "locks"
    locks.mkdir(exist_ok=True)
    return FileLock(str(locks / f"{digest}.lock"))
