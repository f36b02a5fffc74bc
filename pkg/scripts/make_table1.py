"""Tabulate the optimal second-order effective SSP coefficients.

Writes the grid of r_sk2(s, k) / s and cross-checks each entry against
the SSP coefficient of the generated closed-form method.
"""

import argparse
import csv
import sys

from sspmsrk.methods import ssp_coefficient, to_spijker
from sspmsrk.theory import gen_second_order, r_sk2


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--smax", type=int, default=8)
    parser.add_argument("--kmax", type=int, default=5)
    parser.add_argument("--out", default="table1.csv")
    args = parser.parse_args()

    mismatches = 0
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["s"] + [f"k={k}" for k in range(2, args.kmax + 1)])
        for s in range(2, args.smax + 1):
            row = [str(s)]
            for k in range(2, args.kmax + 1):
                target = r_sk2(s, k)
                realized = ssp_coefficient(to_spijker(gen_second_order(s, k)))
                if abs(realized - target) > 1e-7:
                    mismatches += 1
                    print(f"mismatch at (s={s}, k={k}): "
                          f"formula {target:.8f}, realized {realized:.8f}")
                row.append(f"{target / s:.5f}")
            writer.writerow(row)
    print(f"wrote {args.out}")
    return 1 if mismatches else 0


if __name__ == "__main__":
    sys.exit(main())
