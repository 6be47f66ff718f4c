import json
import shutil

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from oracles import naive_merge, naive_mediation, raw_configs, static_closure_oracle
from pexrep.backend import MiniBuild, parse_manifest
from pexrep.backend.archive import read_archive, write_archive
from pexrep.backend.config import compute_effective_config, merge_configs
from pexrep.backend.manifest import ConfigFile, Dependency
from pexrep.backend.minibuild import BUILD_LOG, CLASSES, all_app_refs, all_test_refs, run_lifecycle
from pexrep.errors import GeneratorFailure, ManifestSemantic, ManifestSyntax, PluginMissing, UnknownTest
from pexrep.fixtures import FIG3_TEST, ProjectBuilder, random_case
from pexrep.model import FailureOutcome, ItemKind, ItemRef, LibCoord, Status, TaskKind

mb = MiniBuild()


def app(name):
    return ItemRef(ItemKind.APP_SOURCE, name)


def full_build(project, config):
    mb.run_generate_sources(project)
    mb.run_process_resources(project)
    mb.run_compile(project, all_app_refs(project), TaskKind.Compile, config)
    mb.run_compile(project, all_test_refs(project), TaskKind.TestCompile, config)


class TestParse:
    def test_fig3_shape(self, fig3):
        p = parse_manifest(fig3)
        assert len(p.app_sources) == 4
        assert len(p.test_sources) == 1
        # one external logging library plus one internal library
        assert sorted(str(l.coord) for l in p.libraries) == ["com.acme:util:1.0", "org.logging:log:1.0"]

    def test_single_test_project(self, tmp_path):
        root = ProjectBuilder("solo").test("t.Only", failure=("X", "y")).config("c.json").write(tmp_path)
        p = parse_manifest(root)
        assert [t.id for t in p.test_sources] == ["t.Only"]
        assert p.app_sources == []

    def test_dangling_reference(self, tmp_path):
        b = ProjectBuilder("d").test("t.T", static=["src:ghost.X"]).config("c.json")
        with pytest.raises(ManifestSemantic):
            parse_manifest(b.write(tmp_path))

    def test_app_cannot_reference_tests(self, tmp_path):
        b = ProjectBuilder("d").test("t.T").app("a.A", static=["src:t.T"]).config("c.json")
        with pytest.raises(ManifestSemantic):
            parse_manifest(b.write(tmp_path))

    def test_library_cannot_load_sources(self, tmp_path):
        b = ProjectBuilder("d").test("t.T").library("com.x:l:1", {"l.C": ["src:t.T"]}).config("c.json")
        with pytest.raises(ManifestSemantic):
            parse_manifest(b.write(tmp_path))

    def test_duplicate_ids(self, tmp_path):
        b = ProjectBuilder("d").test("a.A").app("a.A").config("c.json")
        with pytest.raises(ManifestSemantic):
            parse_manifest(b.write(tmp_path))

    def test_missing_source_file(self, fig3):
        (fig3 / "src/main/app/A5.src").unlink()
        with pytest.raises(ManifestSemantic):
            parse_manifest(fig3)

    def test_archive_must_match_declaration(self, fig3):
        write_archive(fig3 / "libs/util-1.0.archive", [("util.Other", [])])
        with pytest.raises(ManifestSemantic):
            parse_manifest(fig3)

    def test_malformed_json(self, fig3):
        (fig3 / "project.mb.json").write_text("{not json")
        with pytest.raises(ManifestSyntax):
            parse_manifest(fig3)

    def test_no_config_files(self, tmp_path):
        root = ProjectBuilder("d").test("t.T").write(tmp_path)
        with pytest.raises(ManifestSemantic):
            parse_manifest(root)

    def test_lenient_drops_missing_items(self, fig3):
        (fig3 / "src/main/app/A5.src").unlink()
        p = parse_manifest(fig3, strict=False)
        assert p.item("app.A5") is None and p.item("app.A3") is not None


class TestEffectiveConfig:
    def test_single_file_is_identity(self, fig3):
        p = parse_manifest(fig3)
        cfg = compute_effective_config(p)
        raw = raw_configs(fig3)[0]
        assert cfg.properties == raw["properties"]
        assert {pl.id: pl.settings for pl in cfg.plugins} == {pl["id"]: pl["settings"] for pl in raw["plugins"]}
        assert [str(c) for c in cfg.mediated_dependencies] == [d["coord"] for d in raw["dependencies"]]

    def test_nearest_definition(self):
        files = [ConfigFile("a", [], {}, [
            Dependency(LibCoord.parse("com.c:c:1.0"), LibCoord.parse("com.b:b:1.0")),
            Dependency(LibCoord.parse("com.c:c:2.0"), None),
        ])]
        assert [str(c) for c in merge_configs(files).mediated_dependencies] == ["com.c:c:2.0"]

    def test_tie_goes_to_first_declaration(self):
        files = [
            ConfigFile("parent", [], {}, [Dependency(LibCoord.parse("com.c:c:1.0"), None)]),
            ConfigFile("child", [], {}, [Dependency(LibCoord.parse("com.c:c:2.0"), None)]),
        ]
        assert [str(c) for c in merge_configs(files).mediated_dependencies] == ["com.c:c:1.0"]

    def test_transitive_depth(self):
        deps = [
            Dependency(LibCoord.parse("com.b:b:1"), LibCoord.parse("com.a:a:1")),
            Dependency(LibCoord.parse("com.a:a:1"), None),
            Dependency(LibCoord.parse("com.x:x:1"), LibCoord.parse("com.b:b:1")),
            Dependency(LibCoord.parse("com.x:x:2"), LibCoord.parse("com.a:a:1")),
        ]
        out = merge_configs([ConfigFile("f", [], {}, deps)]).mediated_dependencies
        assert LibCoord.parse("com.x:x:2") in out and LibCoord.parse("com.x:x:1") not in out


keys = st.sampled_from(["a", "b", "c", "out", "mode"])
values = st.sampled_from(["1", "2", "${p}", "x y"])
settings_trees = st.recursive(values, lambda inner: st.dictionaries(keys, inner, min_size=1, max_size=3), max_leaves=6)
plugin_dicts = st.fixed_dictionaries({
    "id": st.sampled_from(["compiler", "surefire", "codegen"]),
    "phases": st.lists(st.sampled_from(["compile", "test", "deploy", "verify"]), min_size=1, max_size=3, unique=True),
    "category": st.sampled_from(["Build", "Analysis"]),
    "settings": st.dictionaries(keys, settings_trees, max_size=3),
})
config_dicts = st.fixed_dictionaries({
    "plugins": st.lists(plugin_dicts, max_size=3, unique_by=lambda p: p["id"]),
    "properties": st.dictionaries(keys, values, max_size=3),
    "dependencies": st.lists(st.fixed_dictionaries({
        "coord": st.sampled_from(["com.a:x:1", "com.a:x:2", "com.a:y:1", "org.b:z:3"]),
        "via": st.sampled_from([None, "com.a:y:1", "org.q:q:1"]),
    }), max_size=3),
})


@settings(max_examples=150, deadline=None)
@given(st.lists(config_dicts, min_size=3, max_size=3))
def test_merge_matches_sequential_replay(files):
    cfg = merge_configs([ConfigFile.from_dict(f"f{i}", d) for i, d in enumerate(files)])
    expected = naive_merge(files)
    got = {
        p.id: {"phases": sorted(p.phases), "category": p.category, "settings": p.settings} for p in cfg.plugins
    }
    assert got == expected["plugins"]
    assert cfg.properties == expected["properties"]
    mediated = {(c.group, c.artifact): str(c) for c in cfg.mediated_dependencies}
    assert mediated == naive_mediation(files)


class TestGenerateAndResources:
    def test_generator_output(self, tmp_path):
        b = ProjectBuilder("g").test("t.T").config("c.json")
        b.generator("gen/parser", [{"id": "p.P"}], templates={"tpl/p.tpl": "x"})
        p = parse_manifest(b.write(tmp_path))
        rec = mb.run_generate_sources(p)
        assert (tmp_path / "gen/parser/p/P.src").is_file()
        assert rec.source_roots == ("gen/parser",)
        assert rec.workspace_outputs == {"gen/parser/p/P.src"}
        assert [e.path for e in rec.resource_events] == ["tpl/p.tpl"]
        assert all(e.phase is TaskKind.GenerateSources for e in rec.resource_events)

    def test_no_generators(self, fig3):
        rec = mb.run_generate_sources(parse_manifest(fig3))
        assert not rec.workspace_outputs and not rec.source_roots and not rec.resource_events

    def test_annotation_outputs_flagged(self, tmp_path):
        b = ProjectBuilder("g").test("t.T").config("c.json")
        b.generator("gen/apt", [{"id": "a.Anno"}], kind="AnnotationProcessing")
        rec = mb.run_generate_sources(parse_manifest(b.write(tmp_path)))
        assert rec.annotation_outputs == {"gen/apt/a/Anno.src"}

    def test_missing_template(self, tmp_path):
        b = ProjectBuilder("g").test("t.T").config("c.json")
        b.generator("gen/parser", [{"id": "p.P"}], templates={"tpl/p.tpl": "x"})
        root = b.write(tmp_path)
        (root / "tpl/p.tpl").unlink()
        with pytest.raises(GeneratorFailure):
            mb.run_generate_sources(parse_manifest(root))

    def test_resources_copied(self, fig4):
        rec = mb.run_process_resources(parse_manifest(fig4))
        files = sorted(p.relative_to(fig4 / CLASSES).as_posix() for p in (fig4 / CLASSES).rglob("*") if p.is_file())
        assert files == ["data/data1.dat", "data/data2.dat", "form/form1.fm", "form/form2.fm"]
        assert f"{CLASSES}/form/form1.fm" in rec.workspace_outputs

    def test_no_resources(self, fig3):
        mb.run_process_resources(parse_manifest(fig3))
        assert list((fig3 / CLASSES).iterdir()) == []

    def test_nested_empty_directory(self, tmp_path):
        root = ProjectBuilder("r").test("t.T").resource("a/b/c", None).config("c.json").write(tmp_path)
        mb.run_process_resources(parse_manifest(root))
        assert (root / CLASSES / "a/b/c").is_dir()
        assert not any((root / CLASSES / "a/b/c").iterdir())


class TestCompile:
    def test_fig3_compile_a3(self, fig3):
        p = parse_manifest(fig3)
        rec = mb.run_compile(p, {app("app.A3")}, TaskKind.Compile, compute_effective_config(p))
        assert rec.referenced >= {app("app.A3"), app("app.A5")}
        assert app("app.A4") not in rec.referenced
        assert not (fig3 / CLASSES / "app/A4.cls").exists()
        assert rec.source_roots == ("src/main",)

    def test_empty_request(self, fig3):
        p = parse_manifest(fig3)
        rec = mb.run_compile(p, set(), TaskKind.Compile, compute_effective_config(p))
        assert rec.referenced == frozenset() and not (fig3 / CLASSES).exists()

    def test_plugin_missing(self, tmp_path):
        b = ProjectBuilder("pl").test("t.T", static=["src:a.Gated"]).app("a.Gated", plugin="codegen")
        b.config("c.json", plugins=[{"id": "codegen", "phases": ["deploy"]}])
        p = parse_manifest(b.write(tmp_path))
        with pytest.raises(PluginMissing) as err:
            mb.run_compile(p, {app("a.Gated")}, TaskKind.Compile, compute_effective_config(p))
        assert err.value.message == "PluginMissing: codegen"

    def test_plugin_present(self, tmp_path):
        b = ProjectBuilder("pl").test("t.T").app("a.Gated", plugin="codegen")
        b.config("c.json", plugins=[{"id": "codegen", "phases": ["compile"]}])
        p = parse_manifest(b.write(tmp_path))
        rec = mb.run_compile(p, {app("a.Gated")}, TaskKind.Compile, compute_effective_config(p))
        assert rec.referenced == {app("a.Gated")}

    def test_compile_rejects_test_request(self, fig3):
        p = parse_manifest(fig3)
        with pytest.raises(ValueError):
            mb.run_compile(p, {ItemRef(ItemKind.TEST_SOURCE, FIG3_TEST)}, TaskKind.Compile, compute_effective_config(p))


def _refnames(record):
    out = set()
    for r in record.referenced:
        out.add(r.qualified_name if r.lib_coord is None else f"{r.lib_coord.group}:{r.lib_coord.artifact}:{r.qualified_name}")
    return out


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.integers(0, 10_000), st.data())
def test_on_demand_soundness_and_monotonicity(tmp_path_factory, seed, data):
    case = random_case(seed, max_items=20)
    root = case.write(tmp_path_factory.mktemp("sound"))
    p = parse_manifest(root)
    cfg = compute_effective_config(p)
    mb.run_generate_sources(p)
    apps = sorted(r.qualified_name for r in all_app_refs(p))
    q2 = data.draw(st.lists(st.sampled_from(apps), unique=True, max_size=len(apps)))
    q1 = data.draw(st.lists(st.sampled_from(q2), unique=True)) if q2 else []
    gated = any(p.item(n).requires_plugin for n in static_closure_oracle(root, q2) if p.item(n))
    if gated and not cfg.has_plugin_for("codegen", "compile"):
        return
    recs = []
    for q in (q1, q2):
        shutil.rmtree(root / "target", ignore_errors=True)
        kinds = {n: p.item(n).ref for n in q}
        recs.append(mb.run_compile(p, set(kinds.values()), TaskKind.Compile, cfg))
        assert _refnames(recs[-1]) == static_closure_oracle(root, q)
    assert recs[0].referenced <= recs[1].referenced


def test_run_test_fig3(fig3):
    p = parse_manifest(fig3)
    cfg = compute_effective_config(p)
    full_build(p, cfg)
    outcome, rec = mb.run_test(p, FIG3_TEST, cfg)
    assert outcome == FailureOutcome(Status.FAILED, "AssertFail", "expected 2 but was 3")
    assert _refnames(rec) == {FIG3_TEST, "app.A2", "org.logging:log:log.Log"}
    assert rec.task is TaskKind.Test


def test_isolated_test_loads_itself(tmp_path):
    root = ProjectBuilder("i").test("t.T", failure=("X", "m")).config("c.json").write(tmp_path)
    p = parse_manifest(root)
    cfg = compute_effective_config(p)
    full_build(p, cfg)
    outcome, rec = mb.run_test(p, "t.T", cfg)
    assert _refnames(rec) == {"t.T"} and outcome.status is Status.FAILED


def test_missing_class_message(fig3):
    """Deleting A2's compiled class gives the synthesized run-time failure."""
    p = parse_manifest(fig3)
    cfg = compute_effective_config(p)
    full_build(p, cfg)
    (fig3 / CLASSES / "app/A2.cls").unlink()
    outcome, _ = mb.run_test(p, FIG3_TEST, cfg)
    assert outcome == FailureOutcome(Status.FAILED, "ClassNotFound", "ClassNotFound: app.A2")


def test_missing_resource_message(fig4):
    p = parse_manifest(fig4)
    cfg = compute_effective_config(p)
    full_build(p, cfg)
    (fig4 / CLASSES / "data/data2.dat").unlink()
    outcome, _ = mb.run_test(p, "t.ResTest", cfg)
    assert outcome == FailureOutcome(Status.FAILED, "ResourceNotFound", "ResourceNotFound: data/data2.dat")


def test_message_from_resource(fig4):
    p = parse_manifest(fig4)
    outcome, _ = run_lifecycle(mb, p, "t.ResTest", compute_effective_config(p))
    assert outcome.message == "checksum mismatch in data2"


def test_unknown_test(fig3):
    p = parse_manifest(fig3)
    with pytest.raises(UnknownTest):
        mb.run_test(p, "t.Nope", compute_effective_config(p))


def test_determinism_and_log(tmp_path):
    case = random_case(7)
    results = []
    for name in ("a", "b"):
        root = case.write(tmp_path / name)
        p = parse_manifest(root)
        outcome, recs = run_lifecycle(mb, p, case.test_id, compute_effective_config(p))
        results.append((outcome, [json.dumps(r.to_dict(), sort_keys=True) for r in recs]))
        for line in (root / BUILD_LOG).read_text().splitlines():
            assert set(json.loads(line)) == {"task", "event", "payload"}
    assert results[0] == results[1]


def test_compile_never_references_tests(tmp_path):
    for seed in range(10):
        case = random_case(seed)
        p = parse_manifest(case.write(tmp_path / str(seed)))
        cfg = compute_effective_config(p)
        _, recs = run_lifecycle(mb, p, case.test_id, cfg)
        compile_rec = next(r for r in recs if r.task is TaskKind.Compile)
        assert all(r.kind is not ItemKind.TEST_SOURCE for r in compile_rec.referenced)


def test_archive_round_trip(tmp_path):
    classes = [("b.B", ["lib:x.y:z:a.A"]), ("a.A", [])]
    write_archive(tmp_path / "x.archive", classes)
    first = (tmp_path / "x.archive").read_bytes()
    write_archive(tmp_path / "x.archive", list(reversed(classes)))
    assert (tmp_path / "x.archive").read_bytes() == first
    assert read_archive(tmp_path / "x.archive") == sorted(classes)
