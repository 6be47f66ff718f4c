"""On-disk project model for the MiniBuild backend.

A project is a directory holding ``project.mb.json`` plus the files it names:
source files (``*.src``), library archives, resources, generator templates
and one or more configuration files.  References between items are kept
symbolic (``src:<name>`` / ``lib:<group>:<artifact>:<Class>``) and resolved
by the build tasks, the way a compiler resolves names against a classpath.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional

from pexrep.backend.archive import read_archive
from pexrep.errors import ManifestSemantic, ManifestSyntax
from pexrep.model import ItemKind, ItemRef, LibCoord, normalize_path

MANIFEST_NAME = "project.mb.json"
RES_ROOT = "src/main/res"
MAIN_ROOT = "src/main"
TEST_ROOT = "src/test"
GEN_ROOT = "src/gen"

PHASES = (
    "generate-sources",
    "process-resources",
    "compile",
    "test-compile",
    "test",
    "deploy",
    "verify",
)


@dataclass(frozen=True, order=True)
class Ref:
    """A symbolic reference as written in a manifest."""

    namespace: str
    name: str
    group: str = ""
    artifact: str = ""

    @classmethod
    def parse(cls, text: str) -> "Ref":
        if not isinstance(text, str):
            raise ManifestSyntax(f"reference must be a string, got {text!r}")
        if text.startswith("src:") and len(text) > 4:
            return cls("src", text[4:])
        if text.startswith("lib:"):
            parts = text[4:].split(":")
            if len(parts) == 3 and all(parts):
                return cls("lib", parts[2], parts[0], parts[1])
        raise ManifestSyntax(f"malformed reference {text!r}")

    @classmethod
    def src(cls, name: str) -> "Ref":
        return cls("src", name)

    @classmethod
    def lib(cls, group: str, artifact: str, name: str) -> "Ref":
        return cls("lib", name, group, artifact)

    @property
    def is_lib(self) -> bool:
        return self.namespace == "lib"

    def __str__(self) -> str:
        if self.is_lib:
            return f"lib:{self.group}:{self.artifact}:{self.name}"
        return f"src:{self.name}"


def item_rel_path(item_id: str) -> str:
    return item_id.replace(".", "/") + ".src"


@dataclass(frozen=True)
class SourceItem:
    id: str
    file_path: str
    kind: ItemKind = ItemKind.APP_SOURCE
    static_refs: tuple[Ref, ...] = ()
    dynamic_loads: tuple[Ref, ...] = ()
    resource_reads: tuple[str, ...] = ()
    resource_writes: tuple[str, ...] = ()
    requires_plugin: Optional[str] = None
    failure: Optional[tuple[str, str]] = None
    message_from_resource: Optional[str] = None

    @property
    def source_root(self) -> str:
        return self.file_path[: -len(item_rel_path(self.id)) - 1]

    @property
    def ref(self) -> ItemRef:
        return ItemRef(self.kind, self.id)

    def to_dict(self) -> dict:
        data: dict[str, Any] = {
            "id": self.id,
            "file_path": self.file_path,
            "static_refs": [str(r) for r in self.static_refs],
            "dynamic_loads": [str(r) for r in self.dynamic_loads],
            "resource_reads": list(self.resource_reads),
            "resource_writes": list(self.resource_writes),
            "requires_plugin": self.requires_plugin,
        }
        if self.kind is ItemKind.TEST_SOURCE:
            data["failure"] = (
                {"type": self.failure[0], "message": self.failure[1]} if self.failure else None
            )
            data["message_from_resource"] = self.message_from_resource
        return data


@dataclass(frozen=True)
class LibraryClass:
    name: str
    loads: tuple[Ref, ...] = ()

    def to_dict(self) -> dict:
        return {"name": self.name, "loads": [str(r) for r in self.loads]}


@dataclass(frozen=True)
class Library:
    coord: LibCoord
    classes: tuple[LibraryClass, ...]
    archive_path: str
    # resolved from an artifact repository rather than shipped in the project
    external: bool = False

    def class_named(self, name: str) -> Optional[LibraryClass]:
        for cls in self.classes:
            if cls.name == name:
                return cls
        return None

    def ref_for(self, name: str) -> ItemRef:
        return ItemRef(ItemKind.LIBRARY_CLASS, name, self.coord)

    def to_dict(self) -> dict:
        return {
            "coord": str(self.coord),
            "classes": [c.to_dict() for c in self.classes],
            "archive_path": self.archive_path,
        }


class GeneratorKind(str, enum.Enum):
    TEMPLATE = "Template"
    ANNOTATION_PROCESSING = "AnnotationProcessing"


@dataclass(frozen=True)
class Generator:
    output_root: str
    produces: tuple[SourceItem, ...]
    template_resources: tuple[str, ...] = ()
    kind: GeneratorKind = GeneratorKind.TEMPLATE

    def to_dict(self) -> dict:
        return {
            "output_root": self.output_root,
            "kind": self.kind.value,
            "template_resources": list(self.template_resources),
            "produces": [p.to_dict() for p in self.produces],
        }


@dataclass
class PluginConfig:
    id: str
    phases: frozenset[str]
    category: str = "Build"
    settings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "phases": sorted(self.phases, key=PHASES.index),
            "category": self.category,
            "settings": self.settings,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PluginConfig":
        try:
            pid = data["id"]
            phases = frozenset(data["phases"])
        except (KeyError, TypeError) as exc:
            raise ManifestSyntax(f"malformed plugin entry {data!r}") from exc
        category = data.get("category", "Build")
        if not phases or not phases <= set(PHASES):
            raise ManifestSemantic(f"plugin {pid!r} has invalid phases {sorted(phases)}")
        if category not in ("Build", "Analysis"):
            raise ManifestSemantic(f"plugin {pid!r} has unknown category {category!r}")
        settings = data.get("settings", {})
        if not isinstance(settings, dict):
            raise ManifestSyntax(f"plugin {pid!r} settings must be an object")
        return cls(pid, phases, category, settings)


@dataclass(frozen=True)
class Dependency:
    coord: LibCoord
    via: Optional[LibCoord] = None

    def to_dict(self) -> dict:
        return {"coord": str(self.coord), "via": str(self.via) if self.via else None}


@dataclass
class ConfigFile:
    path: str
    plugins: list[PluginConfig] = field(default_factory=list)
    properties: dict[str, str] = field(default_factory=dict)
    dependencies: list[Dependency] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "plugins": [p.to_dict() for p in self.plugins],
            "properties": dict(self.properties),
            "dependencies": [d.to_dict() for d in self.dependencies],
        }

    @classmethod
    def from_dict(cls, path: str, data: dict) -> "ConfigFile":
        if not isinstance(data, dict):
            raise ManifestSyntax(f"{path}: configuration must be an object")
        plugins = [PluginConfig.from_dict(p) for p in data.get("plugins", [])]
        ids = [p.id for p in plugins]
        if len(ids) != len(set(ids)):
            raise ManifestSemantic(f"{path}: duplicate plugin id")
        props = data.get("properties", {})
        if not isinstance(props, dict) or not all(isinstance(v, str) for v in props.values()):
            raise ManifestSyntax(f"{path}: properties must map strings to strings")
        deps = []
        for d in data.get("dependencies", []):
            try:
                deps.append(
                    Dependency(
                        LibCoord.parse(d["coord"]),
                        LibCoord.parse(d["via"]) if d.get("via") else None,
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ManifestSyntax(f"{path}: malformed dependency {d!r}") from exc
        return cls(path, plugins, dict(props), deps)


@dataclass
class ProjectModel:
    name: str
    group: str
    app_sources: list[SourceItem]
    test_sources: list[SourceItem]
    libraries: list[Library]
    resources: list[str]
    generators: list[Generator]
    config_files: list[ConfigFile]
    root_dir: Path
    source_roots: list[str] = field(default_factory=lambda: [MAIN_ROOT, TEST_ROOT])
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self._index = {item.id: item for item in self.all_sources()}

    def all_sources(self) -> list[SourceItem]:
        out = list(self.app_sources) + list(self.test_sources)
        for gen in self.generators:
            out.extend(gen.produces)
        return out

    def item(self, item_id: str) -> Optional[SourceItem]:
        return self._index.get(item_id)

    def test(self, test_id: str) -> Optional[SourceItem]:
        item = self._index.get(test_id)
        return item if item is not None and item.kind is ItemKind.TEST_SOURCE else None

    def generator_of(self, item_id: str) -> Optional[Generator]:
        for gen in self.generators:
            if any(p.id == item_id for p in gen.produces):
                return gen
        return None

    def library(self, coord: LibCoord) -> Optional[Library]:
        for lib in self.libraries:
            if lib.coord == coord:
                return lib
        return None

    def archive_file(self, lib: Library) -> Path:
        path = Path(lib.archive_path)
        return path if path.is_absolute() else self.root_dir / path

    def to_manifest(self) -> dict:
        data = {
            "name": self.name,
            "group": self.group,
            "app_sources": [s.to_dict() for s in self.app_sources],
            "test_sources": [s.to_dict() for s in self.test_sources],
            "libraries": [lib.to_dict() for lib in self.libraries if not lib.external],
            "external_libraries": [str(lib.coord) for lib in self.libraries if lib.external],
            "resources": list(self.resources),
            "generators": [g.to_dict() for g in self.generators],
            "config_files": [c.path for c in self.config_files],
            "source_roots": list(self.source_roots),
        }
        if self.provenance:
            data["provenance"] = self.provenance
        return data


def repository_archive(repository: Path, coord: LibCoord) -> Path:
    return repository / coord.group / coord.artifact / f"{coord.artifact}-{coord.version}.archive"


def load_json(path: Path) -> Any:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ManifestSyntax(f"{path.name}: {exc}") from exc


class _Parser:
    def __init__(self, root: Path, strict: bool, repository: Optional[Path]):
        self.root = root
        self.strict = strict
        self.repository = repository

    def problem(self, message: str) -> None:
        if self.strict:
            raise ManifestSemantic(message)

    def refs(self, values: Any, where: str) -> tuple[Ref, ...]:
        if not isinstance(values, list):
            raise ManifestSyntax(f"{where}: expected a list of references")
        return tuple(Ref.parse(v) for v in values)

    def paths(self, values: Any, where: str) -> tuple[str, ...]:
        if not isinstance(values, list):
            raise ManifestSyntax(f"{where}: expected a list of paths")
        try:
            return tuple(normalize_path(v) for v in values)
        except (ValueError, TypeError) as exc:
            raise ManifestSyntax(f"{where}: {exc}") from exc

    def source_item(self, data: Any, kind: ItemKind, roots: list[str]) -> Optional[SourceItem]:
        if not isinstance(data, dict) or not isinstance(data.get("id"), str):
            raise ManifestSyntax(f"malformed source item {data!r}")
        item_id = data["id"]
        try:
            ItemRef(ItemKind.APP_SOURCE, item_id)
        except ValueError as exc:
            raise ManifestSyntax(str(exc)) from exc
        rel = item_rel_path(item_id)
        file_path = data.get("file_path") or f"{roots[0]}/{rel}"
        try:
            file_path = normalize_path(file_path)
        except ValueError as exc:
            raise ManifestSyntax(str(exc)) from exc
        root = file_path[: -len(rel) - 1] if file_path.endswith("/" + rel) else None
        if root not in roots:
            raise ManifestSemantic(f"{item_id}: file {file_path} is not <root>/{rel} for roots {roots}")
        if kind is ItemKind.APP_SOURCE and root != MAIN_ROOT:
            kind = ItemKind.GENERATED_SOURCE
        failure = data.get("failure")
        mfr = data.get("message_from_resource")
        if kind is not ItemKind.TEST_SOURCE and (failure or mfr):
            raise ManifestSemantic(f"{item_id}: only test sources declare failures")
        if failure is not None:
            if not isinstance(failure, dict) or not failure.get("type"):
                raise ManifestSyntax(f"{item_id}: malformed failure {failure!r}")
            failure = (failure["type"], failure.get("message", ""))
        return SourceItem(
            id=item_id,
            file_path=file_path,
            kind=kind,
            static_refs=self.refs(data.get("static_refs", []), item_id),
            dynamic_loads=self.refs(data.get("dynamic_loads", []), item_id),
            resource_reads=self.paths(data.get("resource_reads", []), item_id),
            resource_writes=self.paths(data.get("resource_writes", []), item_id),
            requires_plugin=data.get("requires_plugin"),
            failure=failure,
            message_from_resource=normalize_path(mfr) if mfr else None,
        )

    def present(self, item: SourceItem) -> bool:
        if (self.root / item.file_path).is_file():
            return True
        self.problem(f"{item.id}: source file {item.file_path} does not exist")
        return False

    def library(self, data: Any) -> Optional[Library]:
        try:
            coord = LibCoord.parse(data["coord"])
            archive_path = normalize_path(data["archive_path"])
            declared = [
                LibraryClass(c["name"], self.refs(c.get("loads", []), c["name"]))
                for c in data.get("classes", [])
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise ManifestSyntax(f"malformed library entry {data!r}: {exc}") from exc
        names = [c.name for c in declared]
        if len(names) != len(set(names)):
            raise ManifestSemantic(f"{coord}: duplicate class names")
        archive = self.root / archive_path
        if not archive.is_file():
            self.problem(f"{coord}: archive {archive_path} does not exist")
            return None
        actual = self.archive_classes(archive)
        if self.strict and sorted(actual, key=lambda c: c.name) != sorted(declared, key=lambda c: c.name):
            raise ManifestSemantic(f"{coord}: archive content differs from declared classes")
        return Library(coord, tuple(actual), archive_path)

    def archive_classes(self, archive: Path) -> list[LibraryClass]:
        try:
            return [LibraryClass(n, tuple(Ref.parse(r) for r in loads)) for n, loads in read_archive(archive)]
        except Exception as exc:  # zipfile / json errors
            raise ManifestSemantic(f"unreadable archive {archive.name}: {exc}") from exc

    def external(self, text: Any) -> Optional[Library]:
        try:
            coord = LibCoord.parse(text)
        except (TypeError, ValueError) as exc:
            raise ManifestSyntax(f"malformed external library {text!r}") from exc
        archive = repository_archive(self.repository, coord) if self.repository else None
        if archive is None or not archive.is_file():
            self.problem(f"{coord}: not available in the artifact repository")
            return None
        return Library(coord, tuple(self.archive_classes(archive)), str(archive), external=True)

    def config(self, path: Any) -> ConfigFile:
        try:
            rel = normalize_path(path)
        except (TypeError, ValueError) as exc:
            raise ManifestSyntax(f"malformed config path {path!r}") from exc
        try:
            data = load_json(self.root / rel)
        except FileNotFoundError:
            raise ManifestSemantic(f"configuration file {rel} does not exist") from None
        return ConfigFile.from_dict(rel, data)


def parse_manifest(
    root_dir: Path | str, strict: bool = True, repository: Optional[Path] = None
) -> ProjectModel:
    """Load and validate the project rooted at ``root_dir``.

    With ``strict=False`` (used when validating reduced packages) items whose
    files are missing and references that name undeclared items are tolerated;
    they surface later as build or run-time failures instead.
    """
    root = Path(root_dir).resolve()
    try:
        data = load_json(root / MANIFEST_NAME)
    except FileNotFoundError:
        raise ManifestSyntax(f"no {MANIFEST_NAME} in {root}") from None
    if not isinstance(data, dict):
        raise ManifestSyntax(f"{MANIFEST_NAME} must hold an object")
    for key in ("name", "group", "app_sources", "test_sources", "config_files"):
        if key not in data:
            raise ManifestSyntax(f"{MANIFEST_NAME}: missing key {key!r}")
    group = data["group"]
    if not isinstance(group, str) or "." not in group:
        raise ManifestSyntax(f"group {group!r} is not a reverse-domain identifier")

    p = _Parser(root, strict, repository)
    source_roots = list(data.get("source_roots") or [MAIN_ROOT, TEST_ROOT])
    app_roots = [r for r in source_roots if r != TEST_ROOT]

    app = [p.source_item(d, ItemKind.APP_SOURCE, app_roots) for d in data["app_sources"]]
    tests = [p.source_item(d, ItemKind.TEST_SOURCE, [TEST_ROOT]) for d in data["test_sources"]]
    generators = []
    for g in data.get("generators", []):
        try:
            out_root = normalize_path(g["output_root"])
            kind = GeneratorKind(g.get("kind", "Template"))
        except (KeyError, TypeError, ValueError) as exc:
            raise ManifestSyntax(f"malformed generator {g!r}") from exc
        if out_root == "src" or out_root.startswith("src/"):
            raise ManifestSemantic(f"generator output root {out_root} overlaps src/")
        produces = tuple(
            p.source_item(d, ItemKind.GENERATED_SOURCE, [out_root]) for d in g.get("produces", [])
        )
        templates = p.paths(g.get("template_resources", []), out_root)
        generators.append(Generator(out_root, produces, templates, kind))

    ids = [s.id for s in app + tests] + [s.id for g in generators for s in g.produces]
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        raise ManifestSemantic(f"duplicate item ids: {dupes}")

    app = [s for s in app if p.present(s)]
    tests = [s for s in tests if p.present(s)]

    libraries = [lib for lib in (p.library(d) for d in data.get("libraries", [])) if lib]
    libraries += [lib for lib in (p.external(c) for c in data.get("external_libraries", [])) if lib]
    coords = [lib.coord for lib in libraries]
    if len(coords) != len(set(coords)):
        raise ManifestSemantic("duplicate library coordinates")

    resources = list(p.paths(data.get("resources", []), "resources"))
    for res in resources:
        if not res.startswith(RES_ROOT + "/"):
            raise ManifestSemantic(f"resource {res} is not under {RES_ROOT}")
        if not (root / res).is_file():
            p.problem(f"resource {res} does not exist")

    if not data["config_files"]:
        raise ManifestSemantic("at least one configuration file is required")
    configs = [p.config(c) for c in data["config_files"]]

    model = ProjectModel(
        name=data["name"],
        group=group,
        app_sources=app,
        test_sources=tests,
        libraries=libraries,
        resources=resources,
        generators=generators,
        config_files=configs,
        root_dir=root,
        source_roots=source_roots,
        provenance=data.get("provenance", {}),
    )
    if strict:
        _check_references(model)
    return model


def _check_references(model: ProjectModel) -> None:
    lib_classes = {(lib.coord.group, lib.coord.artifact, c.name) for lib in model.libraries for c in lib.classes}

    def check(owner: str, ref: Ref) -> None:
        if ref.is_lib:
            if (ref.group, ref.artifact, ref.name) not in lib_classes:
                raise ManifestSemantic(f"{owner}: dangling reference {ref}")
        elif model.item(ref.name) is None:
            raise ManifestSemantic(f"{owner}: dangling reference {ref}")

    for item in model.all_sources():
        for ref in item.static_refs:
            check(item.id, ref)
            target = None if ref.is_lib else model.item(ref.name)
            if item.kind is not ItemKind.TEST_SOURCE and target and target.kind is ItemKind.TEST_SOURCE:
                raise ManifestSemantic(f"{item.id}: application code cannot reference test {target.id}")
        for ref in item.dynamic_loads:
            check(item.id, ref)
    for lib in model.libraries:
        for cls in lib.classes:
            for ref in cls.loads:
                check(f"{lib.coord}:{cls.name}", ref)
                if not ref.is_lib:
                    raise ManifestSemantic(f"{lib.coord}:{cls.name}: libraries cannot load project sources")


def write_manifest(root: Path, data: dict) -> None:
    (root / MANIFEST_NAME).write_text(dump_json(data), encoding="utf-8")


def dump_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def iter_files(root: Path) -> Iterable[Path]:
    if root.is_dir():
        yield from sorted(p for p in root.rglob("*") if p.is_file())
