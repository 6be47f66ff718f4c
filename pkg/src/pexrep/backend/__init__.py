"""Pluggable build backend and the MiniBuild reference implementation."""

from pexrep.backend.config import EffectiveConfig, compute_effective_config
from pexrep.backend.manifest import (
    ConfigFile,
    Dependency,
    Generator,
    GeneratorKind,
    Library,
    LibraryClass,
    PluginConfig,
    ProjectModel,
    Ref,
    SourceItem,
    parse_manifest,
)
from pexrep.backend.minibuild import BuildBackend, MiniBuild, run_lifecycle

__all__ = [
    "BuildBackend",
    "ConfigFile",
    "Dependency",
    "EffectiveConfig",
    "Generator",
    "GeneratorKind",
    "Library",
    "LibraryClass",
    "MiniBuild",
    "PluginConfig",
    "ProjectModel",
    "Ref",
    "SourceItem",
    "compute_effective_config",
    "parse_manifest",
    "run_lifecycle",
]
