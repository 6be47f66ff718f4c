"""Package validation by exact failure identity, and reduction metrics."""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from pexrep.backend import MiniBuild
from pexrep.backend.archive import read_archive
from pexrep.backend.config import EffectiveConfig, compute_effective_config
from pexrep.backend.manifest import MANIFEST_NAME, RES_ROOT, ProjectModel, iter_files, parse_manifest
from pexrep.backend.minibuild import BuildBackend, run_lifecycle
from pexrep.errors import BackendError, ManifestError, ManifestSyntax, PackageCorrupt
from pexrep.model import FailureOutcome, Status, is_internal
from pexrep.reconstruct import EXPECTED_NAME, ReproPackage, load_expected
from pexrep.workspace import default_repository, fresh_workspace, workspace_lock

CATEGORIES = ("internal_classes", "source_classes", "source_plus_internal", "config_chars", "resources")
_WS = re.compile(r"\s", re.UNICODE)


@dataclass(frozen=True)
class ValidationResult:
    valid: bool
    original: FailureOutcome
    reproduced: FailureOutcome
    elapsed_ms: float = 0.0

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "original": self.original.to_dict(),
            "reproduced": self.reproduced.to_dict(),
            "elapsed_ms": self.elapsed_ms,
        }


def same_failure(original: FailureOutcome, reproduced: FailureOutcome) -> bool:
    return (
        original.status is Status.FAILED
        and reproduced.status is Status.FAILED
        and original.failure_type == reproduced.failure_type
        and original.message == reproduced.message
    )


def _build_error(exc: Exception) -> FailureOutcome:
    failure_type = getattr(exc, "failure_type", type(exc).__name__)
    return FailureOutcome(Status.BUILD_ERROR, failure_type, str(exc))


def reproduce(
    package_root: Path, test_id: str, backend: Optional[BuildBackend] = None, repository: Optional[Path] = None
) -> FailureOutcome:
    """Run the full lifecycle of a package in a scratch copy and return the outcome."""
    backend = backend or MiniBuild()
    with fresh_workspace(package_root, "validate") as ws:
        try:
            project = backend.parse_manifest(ws, strict=False, repository=repository)
            config = backend.compute_effective_config(project)
            outcome, _ = run_lifecycle(backend, project, test_id, config)
        except ManifestSyntax as exc:
            raise PackageCorrupt(str(exc)) from exc
        except (BackendError, ManifestError) as exc:
            outcome = _build_error(exc)
    return outcome


def validate_report(
    package: Union[ReproPackage, Path, str],
    backend: Optional[BuildBackend] = None,
    repository: Optional[Path] = None,
) -> ValidationResult:
    """Rebuild the package and compare its failure with the recorded one."""
    root = Path(package.root if isinstance(package, ReproPackage) else package)
    if not (root / MANIFEST_NAME).is_file() or not (root / EXPECTED_NAME).is_file():
        raise PackageCorrupt(f"{root} lacks {MANIFEST_NAME} or {EXPECTED_NAME}")
    try:
        test_id, expected = load_expected(root)
    except (ValueError, KeyError, TypeError) as exc:
        raise PackageCorrupt(f"unreadable {EXPECTED_NAME}: {exc}") from exc
    repository = repository or default_repository()
    start = time.perf_counter()
    with workspace_lock(root):
        reproduced = reproduce(root, test_id, backend, repository)
    elapsed = (time.perf_counter() - start) * 1000.0
    return ValidationResult(same_failure(expected, reproduced), expected, reproduced, elapsed)


@dataclass(frozen=True)
class CategoryMetric:
    original_count: int
    kept_count: int
    percent_reduction: float

    def to_dict(self) -> dict:
        return {
            "original_count": self.original_count,
            "kept_count": self.kept_count,
            "percent_reduction": self.percent_reduction,
        }


@dataclass(frozen=True)
class Metrics:
    internal_classes: CategoryMetric
    source_classes: CategoryMetric
    source_plus_internal: CategoryMetric
    config_chars: CategoryMetric
    resources: CategoryMetric

    def to_dict(self) -> dict:
        return {c: getattr(self, c).to_dict() for c in CATEGORIES}


def reduction(original: int, kept: int, valid: bool = True) -> float:
    if not valid or original == 0:
        return 0.0
    return max(0.0, min(1.0, (original - kept) / original))


def config_size(tree: dict) -> int:
    """Non-whitespace characters of a serialized configuration, dependencies excluded."""
    body = {k: v for k, v in tree.items() if k not in ("dependencies", "path", "origin")}
    return len(_WS.sub("", json.dumps(body, sort_keys=True, ensure_ascii=False)))


def effective_config_size(config: EffectiveConfig) -> int:
    return config_size(config.to_tree())


def count_internal_classes(project: ProjectModel) -> int:
    total = 0
    for lib in project.libraries:
        if is_internal(lib.coord, project.group) and not lib.external:
            total += len(read_archive(project.archive_file(lib)))
    return total


def count_source_classes(project: ProjectModel) -> int:
    return len(project.all_sources())


def count_resources(root: Path) -> int:
    return sum(1 for _ in iter_files(Path(root) / RES_ROOT))


@dataclass(frozen=True)
class Counts:
    internal: int
    sources: int
    config_chars: int
    resources: int


def project_counts(project: ProjectModel) -> Counts:
    return Counts(
        count_internal_classes(project),
        count_source_classes(project),
        effective_config_size(compute_effective_config(project)),
        count_resources(project.root_dir),
    )


def package_counts(package_root: Path) -> Counts:
    root = Path(package_root)
    try:
        pkg = parse_manifest(root, strict=False)
    except ManifestError as exc:
        raise PackageCorrupt(str(exc)) from exc
    return Counts(
        count_internal_classes(pkg),
        count_source_classes(pkg),
        effective_config_size(compute_effective_config(pkg)),
        count_resources(root),
    )


def compute_metrics(project: ProjectModel, package: Union[ReproPackage, Path, str], valid: bool) -> Metrics:
    root = Path(package.root if isinstance(package, ReproPackage) else package)
    orig = project_counts(project)
    kept = package_counts(root)

    def metric(o: int, k: int) -> CategoryMetric:
        return CategoryMetric(o, k, reduction(o, k, valid))

    return Metrics(
        internal_classes=metric(orig.internal, kept.internal),
        source_classes=metric(orig.sources, kept.sources),
        source_plus_internal=metric(orig.sources + orig.internal, kept.sources + kept.internal),
        config_chars=metric(orig.config_chars, kept.config_chars),
        resources=metric(orig.resources, kept.resources),
    )
