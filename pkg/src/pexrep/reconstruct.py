"""Assemble a stand-alone reproduction package from a failure trace."""

from __future__ import annotations

import json
import shutil
from collections import deque
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional

from pexrep.backend.archive import write_archive
from pexrep.backend.manifest import (
    GEN_ROOT,
    MAIN_ROOT,
    MANIFEST_NAME,
    RES_ROOT,
    TEST_ROOT,
    Generator,
    Library,
    ProjectModel,
    SourceItem,
    dump_json,
    repository_archive,
)
from pexrep.configslice import ConfigDocument
from pexrep.errors import IoFailure, MissingSourceFile, UnknownLibraryClass
from pexrep.gencode import extract_generated_sources, trace_source_roots
from pexrep.model import BuildRecord, FailureOutcome, FailureTrace, ItemKind, LibCoord, is_internal
from pexrep.resources import ResourcePlan, materialize_resources, write_plan

CONFIG_NAME = "config.mb.json"
EXPECTED_NAME = "expected_failure.json"
TRACE_NAME = "trace.json"
METRICS_NAME = "report.metrics.json"
LIBS_DIR = "libs"
TEMPLATE_DIRS = ("src", MAIN_ROOT, TEST_ROOT, RES_ROOT, GEN_ROOT, LIBS_DIR)


@dataclass(frozen=True)
class Options:
    """Which enhancements a package is built with; each flag mirrors one ablation."""

    dynamic: bool = True
    config_slice: bool = True
    resources: bool = True
    gencode: bool = True

    @classmethod
    def bare(cls) -> "Options":
        return cls(dynamic=True, config_slice=False, resources=False, gencode=False)

    def to_dict(self) -> dict:
        return {
            "dynamic": self.dynamic,
            "config_slice": self.config_slice,
            "resources": self.resources,
            "gencode": self.gencode,
        }


@dataclass(frozen=True)
class PrunedLibrary:
    coord: LibCoord
    kept_classes: tuple[str, ...]
    archive_path: str


@dataclass
class ReproPackage:
    root: Path
    manifest: dict
    config: ConfigDocument
    pruned_libraries: list[PrunedLibrary] = field(default_factory=list)
    external_coords: list[LibCoord] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)
    expected: Optional[FailureOutcome] = None
    test_id: str = ""


def create_template(package_root: Path, name: str) -> list[Path]:
    """Lay down the standard package skeleton with stub manifest and config."""
    if not name or "/" in name or "\\" in name or name in (".", ".."):
        raise ValueError(f"invalid package name {name!r}")
    root = Path(package_root)
    if root.exists() and (not root.is_dir() or any(root.iterdir())):
        raise IoFailure(f"IoFailure: {root} is not empty")
    created = []
    for rel in TEMPLATE_DIRS:
        (root / rel).mkdir(parents=True, exist_ok=True)
        created.append(root / rel)
    stub = {
        "name": name,
        "group": "org.example",
        "app_sources": [],
        "test_sources": [],
        "config_files": [CONFIG_NAME],
    }
    (root / MANIFEST_NAME).write_text(dump_json(stub), encoding="utf-8")
    (root / CONFIG_NAME).write_text(dump_json(ConfigDocument().to_config_file(CONFIG_NAME)), encoding="utf-8")
    created += [root / MANIFEST_NAME, root / CONFIG_NAME]
    return created


def _traced_items(trace: FailureTrace, project: ProjectModel, kinds) -> list[SourceItem]:
    items = []
    for ref in sorted(trace.T | trace.S):
        if ref.kind not in kinds:
            continue
        item = project.item(ref.qualified_name)
        if item is None:
            raise MissingSourceFile(f"traced item {ref.qualified_name} is not declared")
        items.append(item)
    return items


def extract_source_files(trace: FailureTrace, project: ProjectModel, package_root: Path) -> list[str]:
    """Copy traced test and application sources, keeping their relative paths."""
    copied = []
    for item in _traced_items(trace, project, (ItemKind.TEST_SOURCE, ItemKind.APP_SOURCE)):
        source = project.root_dir / item.file_path
        if not source.is_file():
            raise MissingSourceFile(f"{item.id}: {item.file_path} is missing")
        dest = Path(package_root) / item.file_path
        dest.parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(source, dest)
        copied.append(item.file_path)
    return copied


def library_load_closure(lib: Library, names: Iterable[str]) -> list[str]:
    """Classes of ``lib`` reachable from ``names`` through intra-library loads."""
    seen: set[str] = set()
    queue = deque(sorted(names))
    while queue:
        name = queue.popleft()
        if name in seen:
            continue
        seen.add(name)
        cls = lib.class_named(name)
        for ref in cls.loads if cls else ():
            if ref.is_lib and (ref.group, ref.artifact) == lib.coord.key and lib.class_named(ref.name):
                queue.append(ref.name)
    return sorted(seen)


def extract_pruned_libraries(
    trace: FailureTrace, project: ProjectModel, project_group: str, package_root: Path
) -> tuple[list[PrunedLibrary], list[LibCoord]]:
    """Prune internal libraries to their traced classes; reference external ones."""
    by_coord: dict[LibCoord, set[str]] = {}
    for ref in trace.L:
        lib = project.library(ref.lib_coord)
        if lib is None or lib.class_named(ref.qualified_name) is None:
            raise UnknownLibraryClass(f"{ref} is not a declared library class")
        by_coord.setdefault(ref.lib_coord, set()).add(ref.qualified_name)
    pruned, external = [], []
    for lib in project.libraries:
        traced = by_coord.get(lib.coord)
        if not traced:
            continue
        if not is_internal(lib.coord, project_group):
            external.append(lib.coord)
            continue
        kept = library_load_closure(lib, traced)
        rel = f"{LIBS_DIR}/{lib.coord.artifact}-{lib.coord.version}.archive"
        write_archive(
            Path(package_root) / rel,
            [(n, [str(r) for r in lib.class_named(n).loads]) for n in kept],
        )
        pruned.append(PrunedLibrary(lib.coord, tuple(kept), rel))
    return pruned, sorted(external)


def publish_external(project: ProjectModel, coords: Iterable[LibCoord], repository: Path) -> None:
    """Make external archives resolvable from ``repository``."""
    for coord in coords:
        lib = project.library(coord)
        dest = repository_archive(repository, coord)
        if lib is None:
            continue
        if dest.is_file():
            if dest.read_bytes() != project.archive_file(lib).read_bytes():
                raise IoFailure(f"IoFailure: repository already holds a different archive for {coord}")
            continue
        dest.parent.mkdir(parents=True, exist_ok=True)
        tmp = dest.with_suffix(".partial")
        shutil.copyfile(project.archive_file(lib), tmp)
        tmp.replace(dest)


def assemble_report(
    project: ProjectModel,
    trace: FailureTrace,
    outcome: FailureOutcome,
    config_doc: ConfigDocument,
    resource_plan: ResourcePlan,
    options: Options,
    *,
    package_root: Path,
    test_id: str,
    records: Iterable[BuildRecord] = (),
    trace_dump: Optional[dict] = None,
    repository: Optional[Path] = None,
) -> ReproPackage:
    """Write a complete package under ``package_root``.

    ``project`` must be the traced workspace so that generated sources exist
    on disk.  Disabled enhancements fall back to a default configuration, no
    resources and no generated code respectively.
    """
    root = Path(package_root)
    create_template(root, project.name)

    extract_source_files(trace, project, root)
    app_items = _traced_items(trace, project, (ItemKind.APP_SOURCE,))
    test_items = _traced_items(trace, project, (ItemKind.TEST_SOURCE,))

    generators: list[Generator] = []
    source_roots = [MAIN_ROOT, TEST_ROOT]
    if options.gencode:
        carried: dict[int, list[SourceItem]] = {}
        for item, action in extract_generated_sources(project, trace_source_roots(records), trace):
            if action is None:
                gen = project.generator_of(item.id)
                carried.setdefault(project.generators.index(gen), []).append(item)
                continue
            dest = root / action.dest
            dest.parent.mkdir(parents=True, exist_ok=True)
            shutil.copyfile(project.root_dir / action.source, dest)
            app_items.append(replace(item, file_path=action.dest, kind=ItemKind.GENERATED_SOURCE))
        if any(i.file_path.startswith(GEN_ROOT + "/") for i in app_items):
            source_roots.append(GEN_ROOT)
        for index in sorted(carried):
            gen = project.generators[index]
            for template in gen.template_resources:
                (root / template).parent.mkdir(parents=True, exist_ok=True)
                shutil.copyfile(project.root_dir / template, root / template)
            generators.append(replace(gen, produces=tuple(sorted(carried[index], key=lambda s: s.id))))

    pruned, external = extract_pruned_libraries(trace, project, project.group, root)
    if external and repository is not None:
        publish_external(project, external, repository)

    plan = resource_plan if options.resources else ResourcePlan()
    resources = materialize_resources(plan, project.root_dir, root)
    write_plan(plan, root)

    doc = config_doc if options.config_slice else ConfigDocument()
    doc = replace(doc, dependency_coords=[p.coord for p in pruned] + list(external))
    (root / CONFIG_NAME).write_text(dump_json(doc.to_config_file(CONFIG_NAME)), encoding="utf-8")

    provenance = {"project": project.name, "test": test_id, "options": options.to_dict()}
    manifest = {
        "name": project.name,
        "group": project.group,
        "app_sources": [s.to_dict() for s in sorted(app_items, key=lambda s: s.id)],
        "test_sources": [s.to_dict() for s in test_items],
        "libraries": [
            {
                "coord": str(p.coord),
                "classes": [project.library(p.coord).class_named(n).to_dict() for n in p.kept_classes],
                "archive_path": p.archive_path,
            }
            for p in pruned
        ],
        "external_libraries": [str(c) for c in external],
        "resources": resources,
        "generators": [g.to_dict() for g in generators],
        "config_files": [CONFIG_NAME],
        "source_roots": source_roots,
        "provenance": provenance,
    }
    (root / MANIFEST_NAME).write_text(dump_json(manifest), encoding="utf-8")
    expected = {"test": test_id, "expected": outcome.to_dict(), "provenance": provenance}
    (root / EXPECTED_NAME).write_text(dump_json(expected), encoding="utf-8")
    (root / TRACE_NAME).write_text(dump_json(trace_dump or {"trace": trace.to_dict()}), encoding="utf-8")

    return ReproPackage(
        root=root,
        manifest=manifest,
        config=doc,
        pruned_libraries=pruned,
        external_coords=list(external),
        provenance=provenance,
        expected=outcome,
        test_id=test_id,
    )


def load_expected(package_root: Path) -> tuple[str, FailureOutcome]:
    data = json.loads((Path(package_root) / EXPECTED_NAME).read_text(encoding="utf-8"))
    return data["test"], FailureOutcome.from_dict(data["expected"])
