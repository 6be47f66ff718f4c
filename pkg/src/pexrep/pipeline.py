"""End-to-end report creation: trace, extract, assemble, validate, measure."""

from __future__ import annotations

import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from pexrep.backend import MiniBuild
from pexrep.backend.manifest import dump_json
from pexrep.backend.minibuild import BuildBackend
from pexrep.configslice import select_required_plugins, slice_config
from pexrep.errors import IoFailure, UnknownTest
from pexrep.model import TaskKind
from pexrep.reconstruct import METRICS_NAME, Options, ReproPackage, assemble_report
from pexrep.report import Metrics, ValidationResult, compute_metrics, validate_report
from pexrep.resources import classify_resource_events
from pexrep.tracer import TraceResult, hybrid_backward_trace
from pexrep.workspace import default_repository, scratch_root


@dataclass
class CreateResult:
    package: ReproPackage
    trace: TraceResult
    validation: ValidationResult
    metrics: Metrics

    @property
    def valid(self) -> bool:
        return self.validation.valid


def write_metrics_report(package_root: Path, validation: ValidationResult, metrics: Metrics) -> None:
    body = {"validation": validation.to_dict(), "metrics": metrics.to_dict()}
    (Path(package_root) / METRICS_NAME).write_text(dump_json(body), encoding="utf-8")


def create_report(
    project_dir: Path | str,
    test_id: str,
    out_dir: Path | str,
    options: Options = Options(),
    *,
    backend: Optional[BuildBackend] = None,
    repository: Optional[Path] = None,
) -> CreateResult:
    """Build, validate and measure a reproduction package for one failing test.

    The package is written even when validation fails.
    """
    backend = backend or MiniBuild()
    out = Path(out_dir)
    if out.exists() and (not out.is_dir() or any(out.iterdir())):
        raise IoFailure(f"IoFailure: output directory {out} is not empty")
    project = backend.parse_manifest(project_dir)
    if project.test(test_id) is None:
        raise UnknownTest(test_id)
    config = backend.compute_effective_config(project)
    repository = repository or default_repository()

    with tempfile.TemporaryDirectory(prefix="create-", dir=scratch_root()) as tmp:
        traced = hybrid_backward_trace(
            project, test_id, config, backend=backend, workspace=Path(tmp) / "ws", dynamic=options.dynamic
        )
        ws = traced.workspace
        doc = slice_config(config, select_required_plugins(config), project.root_dir)
        test_record = next(r for r in traced.records if r.task is TaskKind.Test)
        copies = next(r for r in traced.records if r.task is TaskKind.ProcessResources)
        plan = classify_resource_events(test_record.resource_events, ws, copies.workspace_outputs)
        package = assemble_report(
            ws,
            traced.trace,
            traced.outcome,
            doc,
            plan,
            options,
            package_root=out,
            test_id=test_id,
            records=traced.records,
            trace_dump=traced.dump(),
            repository=repository,
        )
    validation = validate_report(package, backend, repository)
    metrics = compute_metrics(project, package, validation.valid)
    write_metrics_report(out, validation, metrics)
    return CreateResult(package, traced, validation, metrics)
