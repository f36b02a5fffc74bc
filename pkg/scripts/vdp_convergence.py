"""Step-refinement convergence study on the van der Pol oscillator.

Runs the closed-form second-order methods and, optionally, methods
loaded from coefficient files, and reports the fitted convergence slope
for each.
"""

import argparse
import csv
import sys

from sspmsrk.msrkio import read_method
from sspmsrk.orderlab import convergence_order
from sspmsrk.pdelab import vdp_convergence_study
from sspmsrk.theory import gen_second_order


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--methods", nargs="*", default=[],
                        help="additional method files to include")
    parser.add_argument("--tf", type=float, default=4.0)
    parser.add_argument("--out", default="vdp_convergence.csv")
    args = parser.parse_args()

    methods = [gen_second_order(2, 2), gen_second_order(3, 3)]
    methods += [read_method(path) for path in args.methods]

    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "dt", "error"])
        for method in methods:
            pairs = vdp_convergence_study(method, tf=args.tf)
            slope = convergence_order(pairs)
            print(f"{method.name}: slope {slope:.3f} "
                  f"(claimed order {method.claimed_order})")
            for dt, err in pairs:
                writer.writerow([method.name, f"{dt:.12g}", f"{err:.12e}"])
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
