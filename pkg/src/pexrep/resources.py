"""Test-time resource accesses and the reduced resource tree they imply."""

from __future__ import annotations

import filecmp
import json
import shutil
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from pexrep.backend.manifest import RES_ROOT, ProjectModel
from pexrep.backend.minibuild import CLASSES
from pexrep.model import EventKind, ResourceEvent, TaskKind

PLAN_NAME = "resources.plan.json"


@dataclass
class ResourcePlan:
    """Paths are relative to the resource root (``src/main/res``)."""

    extract_with_content: set[str] = field(default_factory=set)
    dummy_empty: set[str] = field(default_factory=set)
    excluded_generated: set[str] = field(default_factory=set)
    # listed directories (and their direct sub-directories) kept as structure
    directories: set[str] = field(default_factory=set)

    def __post_init__(self):
        if self.extract_with_content & self.dummy_empty:
            raise ValueError("a path cannot be both extracted and dummied")

    @property
    def is_empty(self) -> bool:
        return not (self.extract_with_content or self.dummy_empty or self.directories)

    def to_dict(self) -> dict:
        return {
            "extract_with_content": sorted(self.extract_with_content),
            "dummy_empty": sorted(self.dummy_empty),
            "excluded_generated": sorted(self.excluded_generated),
            "directories": sorted(self.directories),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ResourcePlan":
        return cls(*(set(data.get(k, ())) for k in (
            "extract_with_content", "dummy_empty", "excluded_generated", "directories")))


def classify_resource_events(
    events: Iterable[ResourceEvent], project: ProjectModel, workspace_outputs: Iterable[str]
) -> ResourcePlan:
    """Map Test-phase accesses under ``target/classes`` back to resource sources.

    ``project`` must be the traced workspace (its ``target`` tree is inspected)
    and ``workspace_outputs`` the paths copied by ProcessResources.  A target
    path counts as a copy only if it was copied and still matches its source
    byte for byte; anything else under ``target/classes`` was produced by the
    build or the test and is excluded.
    """
    root = project.root_dir
    src_root = root / RES_ROOT
    copied = {p[len(CLASSES) + 1:] for p in workspace_outputs if p.startswith(CLASSES + "/")}
    plan = ResourcePlan()

    def traceable(rel: str) -> bool:
        if rel not in copied:
            return False
        source, target = src_root / rel, root / CLASSES / rel
        if source.is_dir():
            return target.is_dir()
        return source.is_file() and target.is_file() and filecmp.cmp(source, target, shallow=False)

    listed = []
    for ev in events:
        if ev.phase is not TaskKind.Test or not ev.path.startswith(CLASSES + "/"):
            continue
        rel = ev.path[len(CLASSES) + 1:]
        if not traceable(rel):
            plan.excluded_generated.add(rel)
        elif ev.kind is EventKind.FILE_READ:
            plan.extract_with_content.add(rel)
        else:
            listed.append(rel)
    for rel in listed:
        plan.directories.add(rel)
        for child in sorted((src_root / rel).iterdir()):
            child_rel = f"{rel}/{child.name}"
            if child.is_dir():
                plan.directories.add(child_rel)
            elif child_rel not in plan.extract_with_content:
                plan.dummy_empty.add(child_rel)
    return plan


def materialize_resources(plan: ResourcePlan, original_root: Path, package_root: Path) -> list[str]:
    """Create the planned resource tree; returns created package-relative paths."""
    original = Path(original_root) / RES_ROOT
    dest = Path(package_root) / RES_ROOT
    created: list[str] = []
    if plan.is_empty:
        return created
    for rel in sorted(plan.directories):
        (dest / rel).mkdir(parents=True, exist_ok=True)
    for rel in sorted(plan.extract_with_content):
        (dest / rel).parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(original / rel, dest / rel)
        created.append(f"{RES_ROOT}/{rel}")
    for rel in sorted(plan.dummy_empty):
        (dest / rel).parent.mkdir(parents=True, exist_ok=True)
        (dest / rel).write_bytes(b"")
        created.append(f"{RES_ROOT}/{rel}")
    return sorted(created)


def write_plan(plan: ResourcePlan, package_root: Path) -> None:
    (Path(package_root) / PLAN_NAME).write_text(
        json.dumps(plan.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
