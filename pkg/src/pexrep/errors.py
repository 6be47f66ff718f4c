"""Exception hierarchy shared by every pexrep module."""

from __future__ import annotations


class PexrepError(Exception):
    """Base class for all pexrep errors."""


class ManifestError(PexrepError):
    pass


class ManifestSyntax(ManifestError):
    pass


class ManifestSemantic(ManifestError):
    pass


class BackendError(PexrepError):
    """Raised by a build task; carries a stable ``failure_type`` / ``message`` pair."""

    failure_type = "BuildError"

    @property
    def message(self) -> str:
        return str(self)


class BuildFailure(BackendError):
    """A build task failed in a way that has a synthesized, comparable message."""


class UnresolvedRef(BuildFailure):
    failure_type = "UnresolvedRef"

    def __init__(self, item: str | None, ref: str):
        self.item = item
        self.ref = ref
        super().__init__(f"UnresolvedRef: {ref}")


class PluginMissing(BuildFailure):
    failure_type = "PluginMissing"

    def __init__(self, item: str, plugin: str):
        self.item = item
        self.plugin = plugin
        super().__init__(f"PluginMissing: {plugin}")


class GeneratorFailure(BuildFailure):
    failure_type = "GeneratorFailure"


class UnknownTest(BuildFailure):
    failure_type = "UnknownTest"

    def __init__(self, test_id: str):
        self.test_id = test_id
        super().__init__(f"UnknownTest: {test_id}")


class IoFailure(BackendError):
    failure_type = "IoFailure"


class TraceError(PexrepError):
    pass


class WrongTask(TraceError):
    pass


class TestPassed(TraceError):
    __test__ = False


class BackendFailure(TraceError):
    pass


class ExtractionError(PexrepError):
    pass


class MissingGeneratedFile(ExtractionError):
    pass


class MissingSourceFile(ExtractionError):
    pass


class UnknownLibraryClass(ExtractionError):
    pass


class PackageCorrupt(PexrepError):
    pass
