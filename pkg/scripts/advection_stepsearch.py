"""Observed TVD and positivity steps on the advection problem.

Reproduces the step-search table for SSPRK(3,3) and the closed-form
second-order family: for each method, the largest time step preserving
each property, normalized by the spatial step and compared with the
theoretical value C * dt_fe.
"""

import argparse
import csv
import sys

from sspmsrk.methods import ssp_coefficient, ssprk33, to_spijker
from sspmsrk.pdelab import advection_upwind, max_stable_step
from sspmsrk.theory import gen_second_order


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--smax", type=int, default=4)
    parser.add_argument("--kmax", type=int, default=3)
    parser.add_argument("--out", default="advection_steps.csv")
    args = parser.parse_args()

    problem = advection_upwind()
    methods = [ssprk33()]
    methods += [gen_second_order(s, k)
                for s in range(2, args.smax + 1) for k in range(2, args.kmax + 1)]

    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "dt_tvd/dx", "dt_tvd/(s*dx)",
                         "C*dt_fe/dx", "Ceff*dt_fe/dx", "dt_pos/dx", "dt_pos/(s*dx)"])
        for method in methods:
            C = ssp_coefficient(to_spijker(method))
            tf = max(0.125, 12.0 * method.k * max(C, 1.0) * problem.dt_fe)
            tvd = max_stable_step(problem, method, "tvd", tf=tf)
            pos = max_stable_step(problem, method, "positivity", tf=tf)
            dx = problem.dx
            writer.writerow([
                method.name,
                f"{tvd.normalized:.3f}", f"{tvd.normalized / method.s:.3f}",
                f"{C * problem.dt_fe / dx:.3f}",
                f"{C / method.s * problem.dt_fe / dx:.3f}",
                f"{pos.normalized:.3f}", f"{pos.normalized / method.s:.3f}",
            ])
            print(f"{method.name}: tvd {tvd.normalized:.3f} pos {pos.normalized:.3f} "
                  f"theory {C * problem.dt_fe / dx:.3f}")
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
