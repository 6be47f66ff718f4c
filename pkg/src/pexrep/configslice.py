"""Build-configuration slicing.

Keeps only build plugins attached to the lifecycle phases a test reproduction
runs, copies their settings out of the effective configuration tree with path
queries, keeps the properties those settings mention, and rewrites
project-location values so the result is relocatable.
"""

from __future__ import annotations

import copy
import re
from dataclasses import dataclass, field
from typing import Any

from pexrep.backend.config import EffectiveConfig
from pexrep.backend.manifest import PluginConfig
from pexrep.model import LibCoord

REPRO_PHASES = frozenset({"generate-sources", "process-resources", "compile", "test-compile", "test"})
PROJECT_DIR = "${project.dir}"
_TOKEN = re.compile(r"\$\{([^}]+)\}")
_STEP = re.compile(r"^(?P<name>[^\[\]/]+)(?:\[(?P<key>[^=\]]+)='(?P<value>[^']*)'\])?$")


def query(tree: Any, path: str) -> list[Any]:
    """Select nodes from a dict/list tree.

    ``path`` is a ``/``-separated list of steps; a step is a key name
    (``*`` for any) optionally followed by ``[key='value']``, which filters
    list elements (or the node itself) by a child value.
    """
    nodes = [tree]
    for step in filter(None, path.split("/")):
        m = _STEP.match(step)
        if m is None:
            raise ValueError(f"bad query step {step!r}")
        name, key, value = m.group("name", "key", "value")
        selected = []
        for node in nodes:
            if not isinstance(node, dict):
                continue
            children = list(node.values()) if name == "*" else [node[name]] if name in node else []
            for child in children:
                members = child if isinstance(child, list) else [child]
                if key is None:
                    selected.extend(members if isinstance(child, list) else [child])
                else:
                    selected.extend(
                        m for m in members if isinstance(m, dict) and str(m.get(key)) == value
                    )
        nodes = selected
    return nodes


@dataclass
class ConfigDocument:
    plugins: list[PluginConfig] = field(default_factory=list)
    properties: dict[str, str] = field(default_factory=dict)
    dependency_coords: list[LibCoord] = field(default_factory=list)
    rewrites_applied: list[tuple[str, str]] = field(default_factory=list)

    def to_config_file(self, path: str = "config.mb.json") -> dict:
        """Serialize using the configuration-file schema."""
        return {
            "path": path,
            "plugins": [p.to_dict() for p in self.plugins],
            "properties": dict(self.properties),
            "dependencies": [{"coord": str(c), "via": None} for c in self.dependency_coords],
        }

    def as_effective(self) -> EffectiveConfig:
        return EffectiveConfig(
            plugins=copy.deepcopy(self.plugins),
            properties=dict(self.properties),
            mediated_dependencies=list(self.dependency_coords),
        )


def select_required_plugins(cfg: EffectiveConfig) -> list[PluginConfig]:
    return [p for p in cfg.plugins if p.category == "Build" and p.phases & REPRO_PHASES]


def _walk_strings(node: Any):
    if isinstance(node, str):
        yield node
    elif isinstance(node, dict):
        for v in node.values():
            yield from _walk_strings(v)
    elif isinstance(node, list):
        for v in node:
            yield from _walk_strings(v)


def referenced_properties(values, properties: dict[str, str]) -> list[str]:
    """Property keys mentioned as ``${key}`` by ``values``, followed transitively."""
    found: list[str] = []
    pending = [tok for v in values for tok in _TOKEN.findall(v)]
    while pending:
        key = pending.pop(0)
        if key in properties and key not in found:
            found.append(key)
            pending.extend(_TOKEN.findall(properties[key]))
    return sorted(found)


def slice_config(cfg: EffectiveConfig, selected: list[PluginConfig], original_root) -> ConfigDocument:
    tree = cfg.to_tree()
    root = str(original_root)
    rewrites: list[tuple[str, str]] = []

    def rewrite(node: Any) -> Any:
        if isinstance(node, str):
            new = node.replace(root, ".") if root else node
            new = new.replace(PROJECT_DIR, ".")
            if new != node and (node, new) not in rewrites:
                rewrites.append((node, new))
            return new
        if isinstance(node, dict):
            return {k: rewrite(v) for k, v in node.items()}
        if isinstance(node, list):
            return [rewrite(v) for v in node]
        return node

    plugins = []
    for plugin in selected:
        hits = query(tree, f"plugins[id='{plugin.id}']/settings")
        if not hits:
            raise ValueError(f"plugin {plugin.id!r} is not part of the effective configuration")
        settings = copy.deepcopy(hits[0])
        plugins.append(PluginConfig(plugin.id, plugin.phases & REPRO_PHASES, plugin.category, settings))

    keys = referenced_properties(
        [s for p in plugins for s in _walk_strings(p.settings)], cfg.properties
    )
    properties = {k: cfg.properties[k] for k in keys}

    for p in plugins:
        p.settings = rewrite(p.settings)
    properties = rewrite(properties)
    return ConfigDocument(plugins, properties, [], rewrites)
