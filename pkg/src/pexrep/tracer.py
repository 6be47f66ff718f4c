"""Hybrid backward failure tracing.

Three build rounds recover the items a failing test needs:

1. full build, then run the test and partition everything it loaded;
2. reuse the compiled application classes and compile only the traced tests
   on demand, collecting what that compilation referenced;
3. in a fresh workspace, compile only the traced application sources on
   demand, collecting what that compilation referenced.
"""

from __future__ import annotations

import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from pexrep.backend import MiniBuild
from pexrep.backend.config import EffectiveConfig
from pexrep.backend.manifest import ProjectModel
from pexrep.backend.minibuild import BuildBackend, all_app_refs, all_test_refs
from pexrep.errors import BackendError, BackendFailure, ManifestError, TestPassed, WrongTask
from pexrep.model import BuildRecord, FailureOutcome, FailureTrace, ItemKind, ItemRef, Status, TaskKind
from pexrep.workspace import copy_project, fresh_workspace, scratch_root

Partition = tuple[frozenset[ItemRef], frozenset[ItemRef], frozenset[ItemRef]]


def partition(refs: Iterable[ItemRef]) -> Partition:
    T, S, L = set(), set(), set()
    for ref in refs:
        if ref.kind is ItemKind.TEST_SOURCE:
            T.add(ref)
        elif ref.kind is ItemKind.LIBRARY_CLASS:
            L.add(ref)
        else:
            S.add(ref)
    return frozenset(T), frozenset(S), frozenset(L)


def dynamic_tracer(record: BuildRecord) -> Partition:
    if record.task is not TaskKind.Test:
        raise WrongTask(f"dynamic tracing needs a Test record, got {record.task.name}")
    return partition(record.referenced)


def static_analyzer(record: BuildRecord) -> Partition:
    if record.task not in (TaskKind.Compile, TaskKind.TestCompile):
        raise WrongTask(f"static analysis needs a compilation record, got {record.task.name}")
    return partition(record.referenced)


@dataclass
class TraceResult:
    trace: FailureTrace
    outcome: FailureOutcome
    records: list[BuildRecord]
    # round-1 workspace model; only usable while its directory exists
    workspace: Optional[ProjectModel] = None
    round3_passes: int = 1
    rounds: list[dict] = field(default_factory=list)

    def __iter__(self):
        return iter((self.trace, self.outcome, self.records))

    def dump(self) -> dict:
        return {
            "trace": self.trace.to_dict(),
            "outcome": self.outcome.to_dict(),
            "rounds": self.rounds,
            "round3_passes": self.round3_passes,
            "fixed_point_iterated": self.round3_passes > 1,
        }


def _summary(round_no: int, record: BuildRecord) -> dict:
    return {
        "round": round_no,
        "task": record.task.name,
        "referenced": [str(r) for r in sorted(record.referenced)],
        "source_roots": list(record.source_roots),
    }


def hybrid_backward_trace(
    project: ProjectModel,
    test_id: str,
    config: EffectiveConfig,
    *,
    backend: Optional[BuildBackend] = None,
    workspace: Optional[Path] = None,
    dynamic: bool = True,
) -> TraceResult:
    """Trace the items needed to reproduce ``test_id``'s failure.

    Rounds 1 and 2 run in ``workspace`` (a copy of the project that is kept for
    downstream extraction); a temporary copy is used and removed when it is
    None.  ``dynamic=False`` skips the run-time trace and seeds Round 2 with the
    failed test alone.
    """
    backend = backend or MiniBuild()
    tmp = None
    if workspace is None:
        tmp = Path(tempfile.mkdtemp(prefix="trace-", dir=scratch_root()))
        workspace = tmp / "ws"
    try:
        return _trace(backend, project, test_id, config, Path(workspace), dynamic)
    finally:
        if tmp is not None:
            shutil.rmtree(tmp, ignore_errors=True)


def _trace(backend, project, test_id, config, workspace, dynamic) -> TraceResult:
    copy_project(project.root_dir, workspace)
    try:
        ws = backend.parse_manifest(workspace)
    except ManifestError as exc:
        raise BackendFailure(f"workspace copy does not parse: {exc}") from exc
    if ws.test(test_id) is None:
        raise BackendFailure(f"unknown test {test_id}")
    records: list[BuildRecord] = []
    rounds: list[dict] = []

    def run(round_no: int, step):
        try:
            record = step()
        except BackendError as exc:
            raise BackendFailure(f"round {round_no}: {exc}") from exc
        records.append(record)
        rounds.append(_summary(round_no, record))
        return record

    # Round 1: full build, run only the failed test.
    run(1, lambda: backend.run_generate_sources(ws))
    run(1, lambda: backend.run_process_resources(ws))
    run(1, lambda: backend.run_compile(ws, all_app_refs(ws), TaskKind.Compile, config))
    run(1, lambda: backend.run_compile(ws, all_test_refs(ws), TaskKind.TestCompile, config))
    outcome_box = []

    def test_step():
        outcome, record = backend.run_test(ws, test_id, config)
        outcome_box.append(outcome)
        return record

    r1 = run(1, test_step)
    outcome = outcome_box[0]
    if outcome.status is Status.PASSED:
        raise TestPassed(f"{test_id} passed; there is no failure to report")

    test_ref = ws.test(test_id).ref
    if dynamic:
        T, S, L = (set(p) for p in dynamic_tracer(r1))
    else:
        T, S, L = {test_ref}, set(), set()

    def merge(part: Partition) -> None:
        T.update(part[0])
        S.update(part[1])
        L.update(part[2])

    # Round 2: reuse compiled application classes, compile the traced tests on demand.
    merge(static_analyzer(run(2, lambda: backend.run_compile(ws, T, TaskKind.TestCompile, config))))

    # Round 3: fresh workspace, compile the traced application sources on demand.
    # repeat until a pass requests every application item known so far
    compiled: set[ItemRef] = set()
    passes = 0
    while not S <= compiled:
        passes += 1
        request = frozenset(S)
        with fresh_workspace(project.root_dir, "round3") as fresh:
            ws3 = backend.parse_manifest(fresh)
            try:
                backend.run_generate_sources(ws3)
            except BackendError as exc:
                raise BackendFailure(f"round 3: {exc}") from exc
            r3 = run(3, lambda: backend.run_compile(ws3, request, TaskKind.Compile, config))
        part = static_analyzer(r3)
        merge(part)
        compiled |= request

    trace = FailureTrace(frozenset(T), frozenset(S), frozenset(L), test=test_ref)
    return TraceResult(trace, outcome, records, ws, passes, rounds)
