"""Reduction metrics for a handful of random projects, plus what a broken package scores.

    python3 demos/metrics.py
"""

import json
import os
import tempfile
from pathlib import Path

from pexrep import create_report
from pexrep.cli import main as cli
from pexrep.fixtures import random_case
from pexrep.reconstruct import EXPECTED_NAME
from pexrep.report import CATEGORIES


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        os.environ.setdefault("PEXREP_WORKDIR", str(Path(tmp, "work")))
        print(f"{'case':<8} " + " ".join(f"{c:>22}" for c in CATEGORIES))
        for seed in range(8):
            case = random_case(seed)
            root = case.write(Path(tmp, case.name))
            m = create_report(root, case.test_id, Path(tmp, f"{case.name}-pkg")).metrics.to_dict()
            cells = [f"{m[c]['kept_count']}/{m[c]['original_count']} {m[c]['percent_reduction']:>6.1%}"
                     for c in CATEGORIES]
            print(f"{case.name:<8} " + " ".join(f"{x:>22}" for x in cells))

        # a single altered character in the recorded message makes the package count for nothing
        pkg = Path(tmp, "case0-pkg")
        data = json.loads((pkg / EXPECTED_NAME).read_text())
        data["expected"]["message"] += "!"
        (pkg / EXPECTED_NAME).write_text(json.dumps(data))
        print("after tampering with the expected message:")
        cli(["metrics", "--project", str(Path(tmp, "case0")), "--package", str(pkg)])


if __name__ == "__main__":
    main()
