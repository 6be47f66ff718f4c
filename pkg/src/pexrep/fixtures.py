"""Builders for MiniBuild projects: the golden scenarios and a random corpus."""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from pexrep.backend.archive import write_archive
from pexrep.backend.manifest import RES_ROOT, dump_json, item_rel_path


def _item(item_id, root, static=(), dynamic=(), reads=(), writes=(), plugin=None) -> dict:
    return {
        "id": item_id,
        "file_path": f"{root}/{item_rel_path(item_id)}",
        "static_refs": list(static),
        "dynamic_loads": list(dynamic),
        "resource_reads": list(reads),
        "resource_writes": list(writes),
        "requires_plugin": plugin,
    }


class ProjectBuilder:
    """Collects a project description and writes it to disk."""

    def __init__(self, name: str, group: str = "com.acme.app"):
        self.name = name
        self.group = group
        self.apps: list[dict] = []
        self.tests: list[dict] = []
        self.libraries: list[tuple[str, dict[str, list[str]]]] = []
        self.resources: dict[str, Optional[bytes]] = {}
        self.generators: list[dict] = []
        self.templates: dict[str, str] = {}
        self.configs: list[tuple[str, dict]] = []

    def app(self, item_id: str, **kw) -> "ProjectBuilder":
        self.apps.append(_item(item_id, "src/main", **kw))
        return self

    def test(self, item_id: str, failure=None, message_from_resource=None, **kw) -> "ProjectBuilder":
        data = _item(item_id, "src/test", **kw)
        data["failure"] = {"type": failure[0], "message": failure[1]} if failure else None
        data["message_from_resource"] = message_from_resource
        self.tests.append(data)
        return self

    def library(self, coord: str, classes: dict[str, list[str]]) -> "ProjectBuilder":
        self.libraries.append((coord, classes))
        return self

    def resource(self, rel: str, content: Optional[bytes | str] = b"") -> "ProjectBuilder":
        """Add a resource file, or an empty directory when ``content`` is None."""
        if isinstance(content, str):
            content = content.encode()
        self.resources[rel] = content
        return self

    def generator(self, output_root: str, produces: list[dict], kind: str = "Template",
                  templates: Optional[dict[str, str]] = None) -> "ProjectBuilder":
        templates = templates or {}
        self.templates.update(templates)
        items = [_item(p.pop("id"), output_root, **p) for p in (dict(x) for x in produces)]
        self.generators.append(
            {"output_root": output_root, "kind": kind, "template_resources": sorted(templates), "produces": items}
        )
        return self

    def config(self, path: str, plugins=(), properties=None, dependencies=()) -> "ProjectBuilder":
        deps = [d if isinstance(d, dict) else {"coord": d, "via": None} for d in dependencies]
        self.configs.append(
            (path, {"plugins": list(plugins), "properties": dict(properties or {}), "dependencies": deps})
        )
        return self

    @staticmethod
    def archive_path(coord: str) -> str:
        _, artifact, version = coord.split(":")
        return f"libs/{artifact}-{version}.archive"

    @property
    def item_count(self) -> int:
        gens = sum(len(g["produces"]) for g in self.generators)
        return len(self.apps) + len(self.tests) + gens + sum(len(c) for _, c in self.libraries)

    def write(self, root: Path | str) -> Path:
        root = Path(root)
        root.mkdir(parents=True, exist_ok=True)
        for item in self.apps + self.tests:
            path = root / item["file_path"]
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(f"// {item['id']}\nclass {item['id'].rsplit('.', 1)[-1]} {{}}\n", encoding="utf-8")
        for coord, classes in self.libraries:
            write_archive(root / self.archive_path(coord), sorted(classes.items()))
        res_files = []
        for rel, content in sorted(self.resources.items()):
            path = root / RES_ROOT / rel
            if content is None:
                path.mkdir(parents=True, exist_ok=True)
            else:
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_bytes(content)
                res_files.append(f"{RES_ROOT}/{rel}")
        for rel, text in self.templates.items():
            (root / rel).parent.mkdir(parents=True, exist_ok=True)
            (root / rel).write_text(text, encoding="utf-8")
        for path, body in self.configs:
            (root / path).parent.mkdir(parents=True, exist_ok=True)
            (root / path).write_text(dump_json(body), encoding="utf-8")
        manifest = {
            "name": self.name,
            "group": self.group,
            "app_sources": self.apps,
            "test_sources": self.tests,
            "libraries": [
                {
                    "coord": coord,
                    "classes": [{"name": n, "loads": list(l)} for n, l in sorted(classes.items())],
                    "archive_path": self.archive_path(coord),
                }
                for coord, classes in self.libraries
            ],
            "resources": res_files,
            "generators": self.generators,
            "config_files": [p for p, _ in self.configs],
        }
        (root / "project.mb.json").write_text(dump_json(manifest), encoding="utf-8")
        return root


FIG3_TEST = "t.T1"
FIG3_FAILURE = ("AssertFail", "expected 2 but was 3")


def fig3_builder(absolute_root: Optional[str] = None) -> ProjectBuilder:
    """Three-task scenario: run-time edge T1->A2, test-compile edge T1->A3,
    compile edge A3->A5, irrelevant A4 and an unused internal library class."""
    compiler_settings = {"out": "${project.dir}/target", "level": "${compiler.level}"}
    if absolute_root:
        compiler_settings["basedir"] = absolute_root
    b = ProjectBuilder("fig3", "com.acme.app")
    b.test(FIG3_TEST, failure=FIG3_FAILURE, static=["src:app.A3"],
           dynamic=["src:app.A2", "lib:org.logging:log:log.Log"])
    b.app("app.A2")
    b.app("app.A3", static=["src:app.A5"])
    b.app("app.A4", static=["src:app.A5", "lib:com.acme:util:util.U"])
    b.app("app.A5")
    b.library("org.logging:log:1.0", {"log.Log": []})
    b.library("com.acme:util:1.0", {"util.U": []})
    b.config(
        "config.mb.json",
        plugins=[
            {"id": "compiler", "phases": ["compile", "test-compile"], "category": "Build",
             "settings": compiler_settings},
            {"id": "deployer", "phases": ["deploy"], "category": "Build",
             "settings": {"url": "${deploy.url}", "user": "ci@acme.example"}},
            {"id": "checkstyle", "phases": ["verify"], "category": "Analysis",
             "settings": {"rules": "${checkstyle.rules}"}},
        ],
        properties={
            "compiler.level": "17",
            "deploy.url": "https://repo.acme.example/releases",
            "checkstyle.rules": "acme-rules.xml",
        },
        dependencies=["org.logging:log:1.0", "com.acme:util:1.0"],
    )
    return b


FIG4_TEST = "t.ResTest"


def fig4_builder() -> ProjectBuilder:
    """Resource scenario: one read file, one listed directory, build-generated output."""
    b = ProjectBuilder("fig4", "com.acme.app")
    b.test(
        FIG4_TEST,
        failure=("AssertFail", "placeholder"),
        message_from_resource="data/data2.dat",
        writes=["out/out1.log"],
        reads=["data/data2.dat", "form", "out", "out/out1.log"],
    )
    b.resource("data/data1.dat", "first data set\n")
    b.resource("data/data2.dat", "checksum mismatch in data2\nmore\n")
    b.resource("form/form1.fm", "form one\n")
    b.resource("form/form2.fm", "form two\n")
    b.config("config.mb.json", plugins=[
        {"id": "compiler", "phases": ["compile", "test-compile"], "settings": {}}])
    return b


STRATA = ("plugin", "resource", "generator", "dynamic")


@dataclass
class CorpusCase:
    name: str
    seed: int
    test_id: str
    strata: frozenset[str]
    builder: ProjectBuilder
    annotation: bool = False
    tight: bool = False

    @property
    def item_count(self) -> int:
        return self.builder.item_count

    def write(self, root: Path | str) -> Path:
        return self.builder.write(root)


def _pick(rng: random.Random, pool: list[str], k: int, exclude: Iterable[str] = ()) -> list[str]:
    cands = [p for p in pool if p not in set(exclude)]
    return rng.sample(cands, min(k, len(cands)))


def random_case(seed: int, *, tight: bool = False, max_items: int = 40,
                strata: Optional[Iterable[str]] = None) -> CorpusCase:
    """Generate one random project.

    Stratum flags make one enhancement load-bearing: ``plugin`` gates a traced
    item behind a build plugin, ``resource`` derives the failure message from
    a resource file, ``generator`` makes the test depend on generated code and
    ``dynamic`` adds a run-time-only load the static analysis cannot see.
    Outside the ``dynamic`` stratum every run-time load is mirrored by a
    static reference.
    """
    rng = random.Random(seed)
    # every generation parameter goes into library versions: a shared artifact
    # repository must never see two different archives under one coordinate
    tag = str(seed)
    if strata is not None:
        tag += "-s" + "".join(sorted(s[0] for s in strata))
    if tight:
        tag += "-t"
    if max_items != 40:
        tag += f"-m{max_items}"
    if strata is None:
        probs = {"plugin": 0.3, "resource": 0.3, "generator": 0.2, "dynamic": 0.4}
        strata = {s for s, p in probs.items() if rng.random() < p}
    strata = frozenset(strata)
    annotation = "generator" in strata and not tight and rng.random() < 0.5

    n_items = rng.randint(5, max_items)
    n_gen = rng.randint(1, 2) if "generator" in strata else 0
    n_lib = rng.randint(1, max(1, n_items // 5))
    n_tests = rng.randint(1, max(1, n_items // 8))
    n_app = max(1, n_items - n_gen - n_lib - n_tests - (1 if "dynamic" in strata else 0))

    tests = [f"tst.T{i}" for i in range(n_tests)]
    apps = [f"app.m{i % 3}.A{i}" for i in range(n_app)]
    gens = [f"gen.G{i}" for i in range(n_gen)]
    dyn_only = "app.hidden.Loaded" if "dynamic" in strata else None

    libs: list[tuple[str, list[str]]] = []
    split = sorted(rng.sample(range(1, n_lib), min(rng.randint(0, 2), n_lib - 1))) if n_lib > 1 else []
    bounds = [0, *split, n_lib]
    for k in range(len(bounds) - 1):
        group = f"com.acme.lib{k}" if rng.random() < 0.6 else f"org.vendor{k}"
        coord = f"{group}:lib{k}:1.{k}.{tag}"
        names = [f"v{k}.C{j}" for j in range(bounds[k + 1] - bounds[k])]
        libs.append((coord, names))
    lib_refs = [f"lib:{c.rsplit(':', 1)[0]}:{n}" for c, names in libs for n in names]

    src_refs = {x: f"src:{x}" for x in tests + apps + gens}
    app_pool = [src_refs[x] for x in apps + gens] + lib_refs
    test_pool = [src_refs[x] for x in tests] + app_pool
    test_id = tests[0]

    static: dict[str, list[str]] = {}
    dynamic: dict[str, list[str]] = {}
    for x in tests + apps + gens:
        pool = test_pool if x in tests else app_pool
        static[x] = _pick(rng, pool, rng.randint(0, 2), [src_refs[x]])
        dynamic[x] = _pick(rng, pool, rng.randint(0, 2), [src_refs[x]])
        if "dynamic" in strata and x not in tests and rng.random() < 0.1:
            dynamic[x] += _pick(rng, [src_refs[t] for t in tests], 1)
    if "dynamic" not in strata:
        for x in static:
            static[x] += [r for r in dynamic[x] if r not in static[x]]
    else:
        dynamic[test_id].append(f"src:{dyn_only}")
    if gens:
        static[test_id].append(src_refs[gens[0]])

    plugin_owner = None
    plugins = [
        {"id": "compiler", "phases": ["compile", "test-compile"], "category": "Build",
         "settings": {"out": "${project.dir}/target", "release": "${compiler.release}"}},
        {"id": "deployer", "phases": ["deploy"], "category": "Build",
         "settings": {"url": "${deploy.url}", "credentials": {"user": "release-bot", "token": "${deploy.token}"}}},
        {"id": "checkstyle", "phases": [rng.choice(["verify", "compile"])], "category": "Analysis",
         "settings": {"config": "${checkstyle.config}", "failOnViolation": "true"}},
        {"id": "site", "phases": ["verify"], "category": "Build", "settings": {"theme": "fluido"}},
    ]
    properties = {
        "compiler.release": "17",
        "deploy.url": f"https://repo.acme.example/{seed}",
        "deploy.token": "s3cr3t",
        "checkstyle.config": "acme_checks.xml",
        "unused.flag": "on",
    }
    if "plugin" in strata:
        if rng.random() < 0.5:
            plugin_owner, phases = test_id, ["test-compile"]
        else:
            plugin_owner, phases = apps[0], ["compile"]
            if src_refs[apps[0]] not in static[test_id]:
                static[test_id].append(src_refs[apps[0]])
        plugins.append({"id": "codegen", "phases": phases, "category": "Build",
                        "settings": {"mode": "${codegen.mode}", "target": "${project.dir}/target/cg"}})
        properties["codegen.mode"] = "strict"

    b = ProjectBuilder(f"case{seed}", "com.acme.app")
    failure = (rng.choice(["AssertFail", "NullPointer", "IllegalState", "Timeout"]),
               f"expected {rng.randint(0, 99)} but was {rng.randint(100, 199)}")
    t_reads: list[str] = []
    t_writes: list[str] = []
    mfr = None
    if "resource" in strata:
        b.resource("conf/message.txt", f"boom from case {seed}\nsecond line\n")
        mfr = "conf/message.txt"
        if rng.random() < 0.5:
            b.resource("form/a.fm", "a\n").resource("form/b.fm", "b\n")
            t_reads.append("form")
        if rng.random() < 0.5:
            b.resource("data/d0.dat", f"{seed}\n").resource("data/d1.dat", "unused\n")
            t_reads.append("data/d0.dat")
        if rng.random() < 0.5:
            t_writes.append("out/run.log")
            t_reads += ["out", "out/run.log"]
    for i in range(rng.randint(0, 4)):
        b.resource(f"unused/u{i}.dat", f"unused {i}\n")

    def kw(x):
        return dict(static=static[x], dynamic=dynamic[x], plugin="codegen" if x == plugin_owner else None)

    for x in tests:
        if x == test_id:
            b.test(x, failure=failure, message_from_resource=mfr, reads=t_reads, writes=t_writes, **kw(x))
        else:
            b.test(x, failure=None, **kw(x))
    for x in apps:
        b.app(x, **kw(x))
    if dyn_only:
        b.app(dyn_only)
    if gens:
        templates = {"src/templates/g0.tpl": f"template for case {seed}\n"}
        b.generator("gen/g0", [{"id": g, **{k: v for k, v in kw(g).items() if k != "plugin"}} for g in gens],
                    kind="AnnotationProcessing" if annotation else "Template", templates=templates)

    deps_parent, deps_child = [], []
    planned = b.item_count + n_lib
    for k, (coord, names) in enumerate(libs):
        loads = {}
        for j, n in enumerate(names):
            nxt = names[j + 1:]
            loads[n] = [f"lib:{coord.rsplit(':', 1)[0]}:{nxt[0]}"] if (nxt and not tight and rng.random() < 0.4) else []
        b.library(coord, loads)
        deps_child.append(coord)
        if rng.random() < 0.3 and planned < max_items:
            planned += 1
            # an older version reachable transitively; nearest definition must reject it
            group, artifact, _ = coord.split(":")
            old = f"{group}:{artifact}:0.{k}.{tag}"
            b.library(old, {n: [] for n in names[:1]})
            deps_parent.append({"coord": old, "via": "org.platform:bom:1.0"})
    parent_plugins = plugins[1:]
    child_plugins = [plugins[0]] + [{"id": "deployer", "phases": ["deploy"], "category": "Build",
                                     "settings": {"url": "${deploy.url}/child"}}]
    b.config("parent/parent.mb.json", plugins=parent_plugins, properties=properties, dependencies=deps_parent)
    b.config("config.mb.json", plugins=child_plugins, properties={"compiler.release": "21"},
             dependencies=deps_child)
    return CorpusCase(f"case{seed}", seed, test_id, strata, b, annotation, tight)


def corpus(n: int = 200, seed: int = 0, **kw) -> list[CorpusCase]:
    return [random_case(seed * 100_000 + i, **kw) for i in range(n)]
