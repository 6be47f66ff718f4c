"""Walk through the three-round trace and package of the small reference project.

The test t.T1 statically uses A3 (which needs A5), and loads A2 and a logging
class reflectively. A4 and the util library are never touched.

    python3 demos/fig3_walkthrough.py
"""

import json
import tempfile
from pathlib import Path

from pexrep import create_report
from pexrep.fixtures import FIG3_TEST, fig3_builder


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        root = fig3_builder(str(Path(tmp, "project").resolve())).write(Path(tmp, "project"))
        result = create_report(root, FIG3_TEST, Path(tmp, "package"))

        for r in result.trace.rounds:
            print(f"round {r['round']} {r['task']:<16} referenced {r['referenced']}")
        trace = result.trace.trace
        for label, refs in (("T", trace.T), ("S", trace.S), ("L", trace.L)):
            print(f"{label}: {sorted(r.qualified_name for r in refs)}")

        v = result.validation
        print(f"original:   {v.original.failure_type}: {v.original.message}")
        print(f"reproduced: {v.reproduced.failure_type}: {v.reproduced.message}")
        print("valid:", v.valid)

        pkg = Path(tmp, "package")
        print("package files:")
        for path in sorted(p for p in pkg.rglob("*") if p.is_file()):
            print("  ", path.relative_to(pkg).as_posix())
        config = json.loads((pkg / "config.mb.json").read_text())
        print("kept plugins:", [p["id"] for p in config["plugins"]])
        print(json.dumps(result.metrics.to_dict(), indent=2))


if __name__ == "__main__":
    main()
