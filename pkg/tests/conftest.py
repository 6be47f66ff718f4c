import os
import sys
from pathlib import Path

import pytest

from pexrep.fixtures import fig3_builder, fig4_builder

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(scope="session", autouse=True)
def scratch(tmp_path_factory):
    """Keep every workspace, lock and artifact repository inside pytest's tmp dir."""
    root = tmp_path_factory.mktemp("pexrep-work")
    old = os.environ.get("PEXREP_WORKDIR")
    os.environ["PEXREP_WORKDIR"] = str(root)
    yield root
    if old is None:
        os.environ.pop("PEXREP_WORKDIR", None)
    else:
        os.environ["PEXREP_WORKDIR"] = old


@pytest.fixture
def fig3(tmp_path) -> Path:
    root = tmp_path / "fig3"
    return fig3_builder(str(root.resolve())).write(root)


@pytest.fixture
def fig4(tmp_path) -> Path:
    return fig4_builder().write(tmp_path / "fig4")


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.RESULTS:
        terminalreporter.write_line(line)
