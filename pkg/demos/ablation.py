"""Reproduction rate of each pipeline variant over a randomized corpus.

    python3 demos/ablation.py [N]
"""

import os
import sys
import tempfile
from pathlib import Path

from pexrep import Options, create_report
from pexrep.fixtures import STRATA, corpus

VARIANTS = {
    "full": Options(),
    "no-dynamic": Options(dynamic=False),
    "no-config-slice": Options(config_slice=False),
    "no-resources": Options(resources=False),
    "no-gencode": Options(gencode=False),
    "bare": Options.bare(),
}


def main(n: int) -> None:
    with tempfile.TemporaryDirectory() as tmp:
        os.environ.setdefault("PEXREP_WORKDIR", str(Path(tmp, "work")))
        cases = corpus(n)
        roots = {c.name: c.write(Path(tmp, "projects", c.name)) for c in cases}
        print(f"{'variant':<16} {'all':>6} " + " ".join(f"{s:>10}" for s in STRATA))
        for variant, options in VARIANTS.items():
            valid = {c.name: create_report(roots[c.name], c.test_id, Path(tmp, variant, c.name), options).valid
                     for c in cases}
            cols = []
            for s in STRATA:
                members = [c.name for c in cases if s in c.strata]
                cols.append(f"{sum(valid[m] for m in members) / len(members):>10.0%}" if members else f"{'-':>10}")
            print(f"{variant:<16} {sum(valid.values()) / n:>6.0%} " + " ".join(cols))


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 60)
