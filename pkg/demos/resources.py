"""Show which resource files survive: the read one in full, sibling forms as empty
placeholders, and nothing the test only writes.

    python3 demos/resources.py
"""

import tempfile
from pathlib import Path

from pexrep import Options, create_report
from pexrep.fixtures import FIG4_TEST, fig4_builder


def tree(root: Path) -> list[str]:
    return [f"{p.relative_to(root).as_posix()} ({p.stat().st_size} bytes)"
            for p in sorted(root.rglob("*")) if p.is_file()]


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        root = fig4_builder().write(Path(tmp, "project"))
        print("original resources:")
        for line in tree(root / "src/main/res"):
            print("  ", line)
        for label, options in (("with resources", Options()), ("without resources", Options(resources=False))):
            out = Path(tmp, label.replace(" ", "-"))
            result = create_report(root, FIG4_TEST, out, options)
            print(f"{label}: valid={result.valid} reproduced={result.validation.reproduced.failure_type}")
            for line in tree(out / "src/main/res"):
                print("  ", line)


if __name__ == "__main__":
    main()
