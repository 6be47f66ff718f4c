"""Generated source handling: find generated code through compiled source roots."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from pexrep.backend.manifest import GEN_ROOT, MAIN_ROOT, TEST_ROOT, GeneratorKind, ProjectModel, SourceItem, item_rel_path
from pexrep.errors import MissingGeneratedFile
from pexrep.model import BuildRecord, FailureTrace, TaskKind


@dataclass(frozen=True)
class CopyAction:
    source: str
    dest: str


def trace_source_roots(records: Iterable[BuildRecord]) -> list[str]:
    roots: list[str] = []
    for record in records:
        if record.task not in (TaskKind.Compile, TaskKind.TestCompile):
            continue
        for root in record.source_roots:
            if root not in roots:
                roots.append(root)
    return roots


def extract_generated_sources(
    project: ProjectModel, roots: Iterable[str], trace: FailureTrace
) -> list[tuple[SourceItem, Optional[CopyAction]]]:
    """Traced generated items with how to carry them into a package.

    Items from template generators get a copy into ``src/gen``; items from
    annotation processing get ``None`` and are regenerated by the package.
    """
    generated_roots = [r for r in roots if r not in (MAIN_ROOT, TEST_ROOT)]
    out = []
    for ref in sorted(trace.S):
        item = project.item(ref.qualified_name)
        if item is None or item.source_root not in generated_roots:
            continue
        if not (Path(project.root_dir) / item.file_path).is_file():
            raise MissingGeneratedFile(f"generated source {item.file_path} is missing")
        gen = project.generator_of(item.id)
        if gen is not None and gen.kind is GeneratorKind.ANNOTATION_PROCESSING:
            out.append((item, None))
        else:
            out.append((item, CopyAction(item.file_path, f"{GEN_ROOT}/{item_rel_path(item.id)}")))
    return out
