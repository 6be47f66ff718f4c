"""MiniBuild: a deterministic reference build backend.

It executes the five lifecycle tasks against a project workspace and reports
what each task touched as a :class:`~pexrep.model.BuildRecord`.  Every task
also appends line-oriented JSON events to ``target/build.log``.
"""

from __future__ import annotations

import json
import shutil
from collections import deque
from pathlib import Path
from typing import Iterable, Optional, Protocol

from pexrep.backend import config as _config
from pexrep.backend import manifest as _manifest
from pexrep.backend.config import EffectiveConfig
from pexrep.backend.manifest import (
    RES_ROOT,
    Library,
    ProjectModel,
    Ref,
    SourceItem,
    item_rel_path,
)
from pexrep.errors import GeneratorFailure, IoFailure, PluginMissing, UnknownTest, UnresolvedRef
from pexrep.model import (
    BuildRecord,
    EventKind,
    FailureOutcome,
    ItemKind,
    ItemRef,
    ResourceEvent,
    TaskKind,
)

TARGET = "target"
CLASSES = "target/classes"
TEST_CLASSES = "target/test-classes"
BUILD_LOG = "target/build.log"


class BuildBackend(Protocol):
    """The operations the rest of pexrep needs from a build tool."""

    def parse_manifest(self, root_dir: Path, strict: bool = True, repository: Optional[Path] = None) -> ProjectModel: ...

    def compute_effective_config(self, project: ProjectModel) -> EffectiveConfig: ...

    def run_generate_sources(self, project: ProjectModel) -> BuildRecord: ...

    def run_process_resources(self, project: ProjectModel) -> BuildRecord: ...

    def run_compile(
        self, project: ProjectModel, request: Iterable[ItemRef], task: TaskKind, config: EffectiveConfig
    ) -> BuildRecord: ...

    def run_test(
        self, project: ProjectModel, test_id: str, config: EffectiveConfig
    ) -> tuple[FailureOutcome, BuildRecord]: ...


def class_output(item: SourceItem) -> str:
    base = TEST_CLASSES if item.kind is ItemKind.TEST_SOURCE else CLASSES
    return f"{base}/{item_rel_path(item.id)[:-4]}.cls"


def log_event(project: ProjectModel, task: TaskKind, event: str, payload) -> None:
    log = project.root_dir / BUILD_LOG
    log.parent.mkdir(parents=True, exist_ok=True)
    with log.open("a", encoding="utf-8") as fh:
        fh.write(json.dumps({"task": task.name, "event": event, "payload": payload}, sort_keys=True) + "\n")


def _log_record(project: ProjectModel, record: BuildRecord) -> BuildRecord:
    log_event(project, record.task, "record", record.to_dict())
    return record


class Classpath:
    """Libraries selected by dependency mediation, looked up by (group, artifact)."""

    def __init__(self, project: ProjectModel, config: EffectiveConfig):
        wanted = set(config.mediated_dependencies)
        self._libs = {lib.coord.key: lib for lib in project.libraries if lib.coord in wanted}

    def resolve(self, ref: Ref) -> Optional[tuple[Library, ItemRef]]:
        lib = self._libs.get((ref.group, ref.artifact))
        if lib is None or lib.class_named(ref.name) is None:
            return None
        return lib, lib.ref_for(ref.name)


class _RunFailure(Exception):
    def __init__(self, failure_type: str, subject: str):
        self.outcome = FailureOutcome.failed(failure_type, f"{failure_type}: {subject}")


class MiniBuild:
    """Reference implementation of :class:`BuildBackend`."""

    def parse_manifest(self, root_dir, strict=True, repository=None) -> ProjectModel:
        return _manifest.parse_manifest(root_dir, strict=strict, repository=repository)

    def compute_effective_config(self, project: ProjectModel) -> EffectiveConfig:
        return _config.compute_effective_config(project)

    def run_generate_sources(self, project: ProjectModel) -> BuildRecord:
        root = project.root_dir
        events, outputs, annotated, roots = [], set(), set(), []
        for gen in project.generators:
            for template in gen.template_resources:
                if not (root / template).is_file():
                    raise GeneratorFailure(f"GeneratorFailure: missing template {template}")
                events.append(ResourceEvent(template, EventKind.FILE_READ, TaskKind.GenerateSources))
            header = f"// generated by {gen.kind.value} from {', '.join(gen.template_resources) or '-'}\n"
            for item in gen.produces:
                path = root / item.file_path
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(header + json.dumps(item.to_dict(), sort_keys=True) + "\n", encoding="utf-8")
                outputs.add(item.file_path)
                if gen.kind is _manifest.GeneratorKind.ANNOTATION_PROCESSING:
                    annotated.add(item.file_path)
            if gen.output_root not in roots:
                roots.append(gen.output_root)
        return _log_record(
            project,
            BuildRecord(
                TaskKind.GenerateSources,
                source_roots=tuple(roots),
                resource_events=tuple(events),
                workspace_outputs=frozenset(outputs),
                annotation_outputs=frozenset(annotated),
            ),
        )

    def run_process_resources(self, project: ProjectModel) -> BuildRecord:
        src = project.root_dir / RES_ROOT
        dest = project.root_dir / CLASSES
        outputs = set()
        try:
            dest.mkdir(parents=True, exist_ok=True)
            if src.is_dir():
                for path in sorted(src.rglob("*")):
                    rel = path.relative_to(src).as_posix()
                    target = dest / rel
                    if path.is_dir():
                        target.mkdir(parents=True, exist_ok=True)
                    else:
                        target.parent.mkdir(parents=True, exist_ok=True)
                        shutil.copyfile(path, target)
                    outputs.add(f"{CLASSES}/{rel}")
        except OSError as exc:
            raise IoFailure(f"IoFailure: {exc}") from exc
        return _log_record(project, BuildRecord(TaskKind.ProcessResources, workspace_outputs=frozenset(outputs)))

    def run_compile(self, project, request, task, config) -> BuildRecord:
        """Compile ``request`` plus everything it statically reaches on the source path.

        Compile searches application and generated sources; TestCompile searches
        test sources and resolves application classes from ``target/classes``.
        Library references are resolved against the classpath but not compiled.
        """
        task = TaskKind(task)
        if task not in (TaskKind.Compile, TaskKind.TestCompile):
            raise ValueError(f"run_compile cannot execute {task.name}")
        request = sorted(request)
        if task is TaskKind.Compile and any(r.kind is ItemKind.TEST_SOURCE for r in request):
            raise ValueError("Compile cannot be asked to compile test sources")
        root = project.root_dir
        searchable = (
            (ItemKind.TEST_SOURCE,)
            if task is TaskKind.TestCompile
            else (ItemKind.APP_SOURCE, ItemKind.GENERATED_SOURCE)
        )
        classpath = Classpath(project, config)

        def on_source_path(item: Optional[SourceItem]) -> bool:
            return item is not None and item.kind in searchable and (root / item.file_path).is_file()

        referenced: set[ItemRef] = set()
        roots: list[str] = []
        outputs: set[str] = set()
        seen: set[str] = set()
        queue = deque(r.qualified_name for r in request)
        while queue:
            name = queue.popleft()
            if name in seen:
                continue
            seen.add(name)
            item = project.item(name)
            if not on_source_path(item):
                raise UnresolvedRef(None, str(Ref.src(name)))
            if item.requires_plugin and not config.has_plugin_for(item.requires_plugin, task.phase):
                raise PluginMissing(item.id, item.requires_plugin)
            for ref in item.static_refs:
                if ref.is_lib:
                    hit = classpath.resolve(ref)
                    if hit is None:
                        raise UnresolvedRef(item.id, str(ref))
                    referenced.add(hit[1])
                    continue
                target = project.item(ref.name)
                if on_source_path(target):
                    queue.append(target.id)
                elif (
                    task is TaskKind.TestCompile
                    and target is not None
                    and target.kind is not ItemKind.TEST_SOURCE
                    and (root / class_output(target)).is_file()
                ):
                    referenced.add(target.ref)
                else:
                    raise UnresolvedRef(item.id, str(ref))
            out = root / class_output(item)
            out.parent.mkdir(parents=True, exist_ok=True)
            shutil.copyfile(root / item.file_path, out)
            outputs.add(class_output(item))
            referenced.add(item.ref)
            if item.source_root not in roots:
                roots.append(item.source_root)
        return _log_record(
            project,
            BuildRecord(task, frozenset(referenced), tuple(roots), workspace_outputs=frozenset(outputs)),
        )

    def run_test(self, project, test_id, config) -> tuple[FailureOutcome, BuildRecord]:
        """Execute one test by dynamic loading from the compiled outputs."""
        test = project.test(test_id)
        if test is None:
            raise UnknownTest(test_id)
        root = project.root_dir
        classes = root / CLASSES
        classpath = Classpath(project, config)
        referenced: set[ItemRef] = set()
        events: list[ResourceEvent] = []
        outputs: set[str] = set()

        def read(rel: str) -> Path:
            path = classes / rel
            if path.is_file():
                kind = EventKind.FILE_READ
            elif path.is_dir():
                kind = EventKind.DIR_LIST
            else:
                raise _RunFailure("ResourceNotFound", rel)
            events.append(ResourceEvent(f"{CLASSES}/{rel}", kind, TaskKind.Test))
            return path

        def write(rel: str, item: SourceItem) -> None:
            path = classes / rel
            missing = [p for p in reversed(path.parents) if not p.exists()]
            path.parent.mkdir(parents=True, exist_ok=True)
            for p in missing:
                outputs.add(p.relative_to(root).as_posix())
            path.write_text(f"written by {item.id}\n", encoding="utf-8")
            outputs.add(f"{CLASSES}/{rel}")

        try:
            seen: set[Ref] = set()
            queue = deque([Ref.src(test_id)])
            while queue:
                ref = queue.popleft()
                if ref in seen:
                    continue
                seen.add(ref)
                if ref.is_lib:
                    hit = classpath.resolve(ref)
                    if hit is None:
                        raise _RunFailure("ClassNotFound", ref.name)
                    lib, item_ref = hit
                    referenced.add(item_ref)
                    queue.extend(lib.class_named(ref.name).loads)
                    continue
                item = project.item(ref.name)
                if item is None or not (root / class_output(item)).is_file():
                    raise _RunFailure("ClassNotFound", ref.name)
                referenced.add(item.ref)
                for rel in item.resource_writes:
                    write(rel, item)
                for rel in item.resource_reads:
                    read(rel)
                queue.extend(item.dynamic_loads)
            if test.failure is None:
                outcome = FailureOutcome.passed()
            else:
                failure_type, message = test.failure
                if test.message_from_resource:
                    path = read(test.message_from_resource)
                    if path.is_dir():
                        message = ",".join(sorted(p.name for p in path.iterdir()))
                    else:
                        lines = path.read_text(encoding="utf-8").splitlines()
                        message = lines[0] if lines else ""
                outcome = FailureOutcome.failed(failure_type, message)
        except _RunFailure as failure:
            outcome = failure.outcome
        record = BuildRecord(
            TaskKind.Test,
            frozenset(referenced),
            resource_events=tuple(events),
            workspace_outputs=frozenset(outputs),
        )
        _log_record(project, record)
        log_event(project, TaskKind.Test, "outcome", outcome.to_dict())
        return outcome, record


def all_app_refs(project: ProjectModel) -> list[ItemRef]:
    return [
        s.ref
        for s in project.all_sources()
        if s.kind in (ItemKind.APP_SOURCE, ItemKind.GENERATED_SOURCE)
    ]


def all_test_refs(project: ProjectModel) -> list[ItemRef]:
    return [s.ref for s in project.test_sources]


def run_lifecycle(backend: BuildBackend, project: ProjectModel, test_id: str, config: EffectiveConfig):
    """Full build of every source followed by one test; returns (outcome, records)."""
    records = [backend.run_generate_sources(project), backend.run_process_resources(project)]
    records.append(backend.run_compile(project, all_app_refs(project), TaskKind.Compile, config))
    records.append(backend.run_compile(project, all_test_refs(project), TaskKind.TestCompile, config))
    outcome, test_record = backend.run_test(project, test_id, config)
    records.append(test_record)
    return outcome, records
