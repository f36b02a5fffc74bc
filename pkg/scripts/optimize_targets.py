"""Search for SSP-optimal third- and fourth-order methods at desk scale.

Runs the multistart searches for (s, k, p) in a small target list,
writes the resulting coefficient files and search logs, and prints the
achieved effective SSP coefficients.  The (2, 2, 4) case is expected to
be infeasible and is reported as such.
"""

import argparse
import sys
from pathlib import Path

from sspmsrk.msrkio import write_method
from sspmsrk.optimizer import (
    SearchFailure,
    SearchSpec,
    maximize_ssp,
    warm_start_ladder,
    write_search_log,
)

TARGETS = [(2, 2, 3), (3, 2, 3), (2, 3, 4), (2, 2, 4)]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--starts", type=int, default=20)
    parser.add_argument("--seed", type=int, default=123)
    parser.add_argument("--r-tol", type=float, default=1e-4)
    parser.add_argument("--outdir", default="optimized")
    args = parser.parse_args()

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    found = {}
    for s, k, p in TARGETS:
        spec = SearchSpec(s=s, k=k, p=p, starts=args.starts, seed=args.seed,
                          r_tol=args.r_tol, warm_starts=warm_start_ladder(s, k, p, found))
        tag = f"opt_{s}_{k}_{p}"
        try:
            res = maximize_ssp(spec)
        except SearchFailure as exc:
            print(f"({s},{k},{p}): infeasible ({exc})")
            continue
        found[(s, k, p)] = res.method
        write_method(res.method, outdir / f"{tag}.msrk")
        write_search_log(res.history, outdir / f"{tag}_log.csv")
        certified = "yes" if res.certified else "no"
        print(f"({s},{k},{p}): C_eff {res.Ceff:.5f} certified {certified}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
