"""Effective configuration: parent-first merge plus nearest-definition mediation."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

from pexrep.backend.manifest import ConfigFile, Dependency, PluginConfig, ProjectModel
from pexrep.model import LibCoord


@dataclass
class EffectiveConfig:
    plugins: list[PluginConfig] = field(default_factory=list)
    properties: dict[str, str] = field(default_factory=dict)
    mediated_dependencies: list[LibCoord] = field(default_factory=list)
    origin: dict[str, str] = field(default_factory=dict)

    def plugin(self, plugin_id: str) -> PluginConfig | None:
        for p in self.plugins:
            if p.id == plugin_id:
                return p
        return None

    def has_plugin_for(self, plugin_id: str, phase: str) -> bool:
        p = self.plugin(plugin_id)
        return p is not None and phase in p.phases

    def to_tree(self) -> dict:
        """Configuration tree queried by the slicer (dependencies excluded)."""
        return {
            "plugins": [p.to_dict() for p in self.plugins],
            "properties": dict(self.properties),
        }

    def to_dict(self) -> dict:
        tree = self.to_tree()
        tree["dependencies"] = [str(c) for c in self.mediated_dependencies]
        tree["origin"] = dict(self.origin)
        return tree


def deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def dependency_depth(dep: Dependency, declared: list[Dependency]) -> int:
    """Length of the ``via`` chain leading from the project root to ``dep``."""
    depth, seen, current = 0, set(), dep
    while current.via is not None and current.via.key not in seen:
        seen.add(current.via.key)
        depth += 1
        parent = next((d for d in declared if d.coord == current.via), None)
        if parent is None:
            parent = next((d for d in declared if d.coord.key == current.via.key), None)
        if parent is None:
            break
        current = parent
    return depth


def mediate(declared: list[Dependency]) -> list[LibCoord]:
    """Keep one version per (group, artifact): minimal depth, earliest on ties."""
    best: dict[tuple[str, str], tuple[int, int, LibCoord]] = {}
    for pos, dep in enumerate(declared):
        cand = (dependency_depth(dep, declared), pos, dep.coord)
        cur = best.get(dep.coord.key)
        if cur is None or cand[:2] < cur[:2]:
            best[dep.coord.key] = cand
    return [c for _, _, c in sorted(best.values(), key=lambda t: t[1])]


def merge_configs(files: list[ConfigFile]) -> EffectiveConfig:
    plugins: dict[str, dict] = {}
    props: dict[str, str] = {}
    origin: dict[str, str] = {}
    declared: list[Dependency] = []
    for cfg in files:
        for p in cfg.plugins:
            raw = {"phases": sorted(p.phases), "category": p.category, "settings": p.settings}
            plugins[p.id] = deep_merge(plugins.get(p.id, {}), raw)
            origin[f"plugins.{p.id}"] = cfg.path
        for key, value in cfg.properties.items():
            props[key] = value
            origin[f"properties.{key}"] = cfg.path
        declared.extend(cfg.dependencies)
    mediated = mediate(declared)
    for coord in mediated:
        src = next(c.path for c in files if any(d.coord == coord for d in c.dependencies))
        origin[f"dependencies.{coord.group}:{coord.artifact}"] = src
    return EffectiveConfig(
        plugins=[
            PluginConfig(pid, frozenset(raw["phases"]), raw["category"], raw["settings"])
            for pid, raw in plugins.items()
        ],
        properties=props,
        mediated_dependencies=mediated,
        origin=origin,
    )


def compute_effective_config(project: ProjectModel) -> EffectiveConfig:
    return merge_configs(project.config_files)
