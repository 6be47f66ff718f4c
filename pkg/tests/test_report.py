import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import count_tree, tree_bytes
from pexrep import create_report
from pexrep.backend import parse_manifest
from pexrep.errors import PackageCorrupt
from pexrep.fixtures import FIG3_TEST, random_case
from pexrep.model import FailureOutcome, Status
from pexrep.reconstruct import EXPECTED_NAME
from pexrep.report import CATEGORIES, compute_metrics, config_size, reduction, same_failure, validate_report


@pytest.fixture
def fig3_pkg(fig3, tmp_path):
    create_report(fig3, FIG3_TEST, tmp_path / "pkg")
    return tmp_path / "pkg"


def mutate_message(pkg):
    data = json.loads((pkg / EXPECTED_NAME).read_text())
    msg = data["expected"]["message"]
    data["expected"]["message"] = msg[:-1] + ("X" if msg[-1] != "X" else "Y")
    (pkg / EXPECTED_NAME).write_text(json.dumps(data))


class TestValidate:
    def test_faithful(self, fig3_pkg):
        assert validate_report(fig3_pkg).valid

    def test_one_character(self, fig3_pkg):
        mutate_message(fig3_pkg)
        result = validate_report(fig3_pkg)
        assert not result.valid
        assert result.reproduced.message == "expected 2 but was 3"

    def test_deleted_class(self, fig3_pkg):
        (fig3_pkg / "src/main/app/A2.src").unlink()
        result = validate_report(fig3_pkg)
        assert not result.valid
        assert result.reproduced == FailureOutcome(Status.FAILED, "ClassNotFound", "ClassNotFound: app.A2")

    def test_deleted_compile_dependency(self, fig3_pkg):
        (fig3_pkg / "src/main/app/A5.src").unlink()
        result = validate_report(fig3_pkg)
        assert result.reproduced.status is Status.BUILD_ERROR
        assert result.reproduced.message == "UnresolvedRef: src:app.A5"

    def test_corrupt(self, fig3_pkg):
        (fig3_pkg / EXPECTED_NAME).unlink()
        with pytest.raises(PackageCorrupt):
            validate_report(fig3_pkg)

    def test_deterministic_and_read_only(self, fig3_pkg):
        before = tree_bytes(fig3_pkg)
        a, b = validate_report(fig3_pkg), validate_report(fig3_pkg)
        assert (a.valid, a.original, a.reproduced) == (b.valid, b.original, b.reproduced)
        assert tree_bytes(fig3_pkg) == before


outcomes = st.builds(
    lambda s, t, m: FailureOutcome.passed() if s is Status.PASSED else FailureOutcome(s, t, m),
    st.sampled_from(list(Status)),
    st.sampled_from(["A", "B"]),
    st.sampled_from(["m", "n", ""]),
)


@given(outcomes, outcomes)
def test_same_failure_definition(a, b):
    expected = (a.status is Status.FAILED and b.status is Status.FAILED and a.failure_type == b.failure_type
                and a.message == b.message)
    assert same_failure(a, b) == expected


@given(st.integers(0, 1000), st.integers(0, 1000), st.booleans())
def test_reduction_bounds(o, k, valid):
    r = reduction(o, k, valid)
    assert 0.0 <= r <= 1.0
    if not valid or o == 0:
        assert r == 0.0


def test_config_size_ignores_whitespace_and_dependencies():
    a = {"plugins": [{"id": "x y"}], "properties": {}, "dependencies": [{"coord": "a.b:c:1"}]}
    assert config_size(a) == config_size({"plugins": [{"id": "xy"}], "properties": {}})
    assert config_size({"properties": {"k": "\u2003v"}}) == len('{"properties":{"k":"v"}}')


class TestMetrics:
    def test_fig3(self, fig3, fig3_pkg):
        m = compute_metrics(parse_manifest(fig3), fig3_pkg, True)
        o_src, o_int = count_tree(fig3, "com.acme.app")
        k_src, k_int = count_tree(fig3_pkg, "com.acme.app")
        assert (o_src + o_int, k_src + k_int) == (6, 4)
        assert m.source_plus_internal.original_count == 6
        assert m.source_plus_internal.kept_count == 4
        assert m.source_plus_internal.percent_reduction == pytest.approx(1 / 3, abs=5e-5)
        assert m.internal_classes.percent_reduction == 1.0
        assert m.config_chars.kept_count < m.config_chars.original_count

    def test_invalid_means_zero(self, fig3, fig3_pkg):
        m = compute_metrics(parse_manifest(fig3), fig3_pkg, False)
        d = m.to_dict()
        assert all(d[c]["percent_reduction"] == 0 for c in CATEGORIES)
        assert d["source_plus_internal"]["original_count"] == 6

    def test_identity(self, fig3):
        m = compute_metrics(parse_manifest(fig3), fig3, True)
        assert all(getattr(m, c).percent_reduction == 0 for c in CATEGORIES)

    @pytest.mark.parametrize("seed", range(15))
    def test_invariants(self, tmp_path, seed):
        case = random_case(seed)
        root = case.write(tmp_path / "p")
        result = create_report(root, case.test_id, tmp_path / "pkg")
        m = result.metrics
        assert result.valid
        for c in CATEGORIES:
            metric = getattr(m, c)
            assert 0 <= metric.kept_count <= metric.original_count
            assert 0 <= metric.percent_reduction <= 1
        spi = m.source_plus_internal
        assert spi.original_count == m.source_classes.original_count + m.internal_classes.original_count
        assert spi.kept_count == m.source_classes.kept_count + m.internal_classes.kept_count
        report = json.loads((tmp_path / "pkg/report.metrics.json").read_text())
        assert report["metrics"] == m.to_dict() and report["validation"]["valid"] is True
