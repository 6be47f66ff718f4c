"""Value types shared across the tracing, extraction and reporting stages.

Every type here is immutable and serializes to a canonical JSON-ready dict via
``to_dict`` / ``from_dict``.  Sets are emitted sorted so that dumps are stable.
"""

from __future__ import annotations

import enum
import posixpath
import re
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

_NAME_RE = re.compile(r"^[^\s/\\]+$")


class ItemKind(str, enum.Enum):
    APP_SOURCE = "AppSource"
    TEST_SOURCE = "TestSource"
    GENERATED_SOURCE = "GeneratedSource"
    LIBRARY_CLASS = "LibraryClass"

    @property
    def is_source(self) -> bool:
        return self is not ItemKind.LIBRARY_CLASS


_KIND_ORDER = {k: i for i, k in enumerate(ItemKind)}


class TaskKind(enum.IntEnum):
    """Build tasks in their fixed lifecycle order."""

    GenerateSources = 0
    ProcessResources = 1
    Compile = 2
    TestCompile = 3
    Test = 4

    @property
    def phase(self) -> str:
        return _PHASES[self]


_PHASES = {
    TaskKind.GenerateSources: "generate-sources",
    TaskKind.ProcessResources: "process-resources",
    TaskKind.Compile: "compile",
    TaskKind.TestCompile: "test-compile",
    TaskKind.Test: "test",
}


@dataclass(frozen=True, order=True)
class LibCoord:
    group: str
    artifact: str
    version: str

    def __post_init__(self):
        for part in (self.group, self.artifact, self.version):
            if not part or ":" in part or not _NAME_RE.match(part):
                raise ValueError(f"invalid library coordinate {self}")
        if "." not in self.group:
            raise ValueError(f"group {self.group!r} is not a reverse-domain identifier")

    @classmethod
    def parse(cls, text: str) -> "LibCoord":
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"expected group:artifact:version, got {text!r}")
        return cls(*parts)

    @property
    def key(self) -> tuple[str, str]:
        return (self.group, self.artifact)

    def __str__(self) -> str:
        return f"{self.group}:{self.artifact}:{self.version}"


def is_internal(lib: LibCoord, project_group: str) -> bool:
    """True when ``lib`` belongs to the same organization as the project.

    Organizations are identified by the first two labels of the group id,
    e.g. ``com.acme.util`` and ``com.acme.app`` share ``com.acme``.
    """
    return lib.group.split(".")[:2] == project_group.split(".")[:2]


@dataclass(frozen=True)
class ItemRef:
    kind: ItemKind
    qualified_name: str
    lib_coord: Optional[LibCoord] = None

    def __post_init__(self):
        if not self.qualified_name or not _NAME_RE.match(self.qualified_name):
            raise ValueError(f"invalid qualified name {self.qualified_name!r}")
        if (self.kind is ItemKind.LIBRARY_CLASS) != (self.lib_coord is not None):
            raise ValueError("lib_coord must be present exactly for library classes")

    @property
    def sort_key(self) -> tuple:
        return (_KIND_ORDER[self.kind], str(self.lib_coord or ""), self.qualified_name)

    def __lt__(self, other: "ItemRef") -> bool:
        return self.sort_key < other.sort_key

    def __str__(self) -> str:
        if self.lib_coord is not None:
            return f"{self.lib_coord}:{self.qualified_name}"
        return self.qualified_name

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "qualified_name": self.qualified_name,
            "lib_coord": str(self.lib_coord) if self.lib_coord else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ItemRef":
        coord = data.get("lib_coord")
        return cls(
            ItemKind(data["kind"]),
            data["qualified_name"],
            LibCoord.parse(coord) if coord else None,
        )


def _refs(items: Iterable[ItemRef]) -> list[dict]:
    return [r.to_dict() for r in sorted(items)]


@dataclass(frozen=True)
class FailureTrace:
    """The test (T), application (S) and library (L) items a failure needs."""

    T: frozenset[ItemRef]
    S: frozenset[ItemRef]
    L: frozenset[ItemRef]
    test: Optional[ItemRef] = field(default=None, compare=False)

    def __post_init__(self):
        for name in "TSL":
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        if any(r.kind is not ItemKind.TEST_SOURCE for r in self.T):
            raise ValueError("T may only hold test sources")
        if any(r.kind not in (ItemKind.APP_SOURCE, ItemKind.GENERATED_SOURCE) for r in self.S):
            raise ValueError("S may only hold application or generated sources")
        if any(r.kind is not ItemKind.LIBRARY_CLASS for r in self.L):
            raise ValueError("L may only hold library classes")
        if self.test is not None and self.test not in self.T:
            raise ValueError("T must contain the failed test")

    @property
    def items(self) -> frozenset[ItemRef]:
        return self.T | self.S | self.L

    def to_dict(self) -> dict:
        return {"T": _refs(self.T), "S": _refs(self.S), "L": _refs(self.L)}

    @classmethod
    def from_dict(cls, data: dict) -> "FailureTrace":
        return cls(*(frozenset(ItemRef.from_dict(r) for r in data[k]) for k in "TSL"))


class Status(str, enum.Enum):
    PASSED = "Passed"
    FAILED = "Failed"
    BUILD_ERROR = "BuildError"


@dataclass(frozen=True)
class FailureOutcome:
    status: Status
    failure_type: str = ""
    message: str = ""

    def __post_init__(self):
        object.__setattr__(self, "status", Status(self.status))
        if self.status is Status.PASSED and (self.failure_type or self.message):
            raise ValueError("a passing outcome carries no failure text")
        if self.status is not Status.PASSED and not self.failure_type:
            raise ValueError("a failing outcome needs a failure type")

    @classmethod
    def passed(cls) -> "FailureOutcome":
        return cls(Status.PASSED)

    @classmethod
    def failed(cls, failure_type: str, message: str) -> "FailureOutcome":
        return cls(Status.FAILED, failure_type, message)

    def to_dict(self) -> dict:
        return {"status": self.status.value, "failure_type": self.failure_type, "message": self.message}

    @classmethod
    def from_dict(cls, data: dict) -> "FailureOutcome":
        return cls(Status(data["status"]), data["failure_type"], data["message"])


class EventKind(str, enum.Enum):
    FILE_READ = "FileRead"
    DIR_LIST = "DirList"


def normalize_path(path: str) -> str:
    """Normalize a workspace-relative path, rejecting anything that escapes it."""
    if not path or path.startswith("/") or "\\" in path:
        raise ValueError(f"not a relative path: {path!r}")
    norm = posixpath.normpath(path)
    if norm == ".." or norm.startswith("../") or norm == ".":
        raise ValueError(f"path escapes the workspace: {path!r}")
    return norm


@dataclass(frozen=True)
class ResourceEvent:
    path: str
    kind: EventKind
    phase: TaskKind

    def __post_init__(self):
        if normalize_path(self.path) != self.path:
            raise ValueError(f"resource event path not normalized: {self.path!r}")
        object.__setattr__(self, "kind", EventKind(self.kind))
        object.__setattr__(self, "phase", TaskKind(self.phase))

    def to_dict(self) -> dict:
        return {"path": self.path, "kind": self.kind.value, "phase": self.phase.name}

    @classmethod
    def from_dict(cls, data: dict) -> "ResourceEvent":
        return cls(data["path"], EventKind(data["kind"]), TaskKind[data["phase"]])


@dataclass(frozen=True)
class BuildRecord:
    """What one build task touched."""

    task: TaskKind
    referenced: frozenset[ItemRef] = frozenset()
    source_roots: tuple[str, ...] = ()
    resource_events: tuple[ResourceEvent, ...] = ()
    workspace_outputs: frozenset[str] = frozenset()
    # generator outputs that come from annotation processing
    annotation_outputs: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "task", TaskKind(self.task))
        object.__setattr__(self, "referenced", frozenset(self.referenced))
        object.__setattr__(self, "source_roots", tuple(self.source_roots))
        object.__setattr__(self, "resource_events", tuple(self.resource_events))
        object.__setattr__(self, "workspace_outputs", frozenset(self.workspace_outputs))
        object.__setattr__(self, "annotation_outputs", frozenset(self.annotation_outputs))
        if self.task is TaskKind.Compile and any(
            r.kind is ItemKind.TEST_SOURCE for r in self.referenced
        ):
            raise ValueError("a Compile record cannot reference test sources")

    def to_dict(self) -> dict:
        return {
            "task": self.task.name,
            "referenced": _refs(self.referenced),
            "source_roots": list(self.source_roots),
            "resource_events": [e.to_dict() for e in self.resource_events],
            "workspace_outputs": sorted(self.workspace_outputs),
            "annotation_outputs": sorted(self.annotation_outputs),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BuildRecord":
        return cls(
            TaskKind[data["task"]],
            frozenset(ItemRef.from_dict(r) for r in data["referenced"]),
            tuple(data["source_roots"]),
            tuple(ResourceEvent.from_dict(e) for e in data["resource_events"]),
            frozenset(data["workspace_outputs"]),
            frozenset(data.get("annotation_outputs", ())),
        )


def to_json_value(obj: Any) -> Any:
    """Canonical JSON-ready form of any model value."""
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if isinstance(obj, LibCoord):
        return str(obj)
    if isinstance(obj, TaskKind):
        return obj.name
    if isinstance(obj, enum.Enum):
        return obj.value
    raise TypeError(f"cannot serialize {type(obj).__name__}")
