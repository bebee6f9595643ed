"""sup_E resolvent norm for strip damping far into the semiclassical range.

Prints local exponents between successive h and writes a CSV.  With
sigma = 1, beta = 2 the local exponent climbs toward -1/4 only once
h^{1/4} is small against sigma.
"""

import argparse
import csv

import numpy as np

from dampwave.damping_models import strip_profile
from dampwave.rate_calculus import GrowthExpr
from dampwave.resolvent import auto_N, sup_over_E


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sigma", type=float, default=1.0)
    ap.add_argument("--beta", type=float, default=2.0)
    ap.add_argument("--exponents", type=int, nargs="+", default=[4, 8, 12, 16, 20])
    ap.add_argument("--E-max", type=float, default=50.0)
    ap.add_argument("--out", default="strip_asymptotics.csv")
    args = ap.parse_args()

    prof = strip_profile(args.sigma, GrowthExpr.small(pow=args.beta))
    rows = []
    for e in args.exponents:
        h = 2.0 ** -e
        # finer grids for the thin boundary layer at small h
        N = max(auto_N(prof, h), 256 * 2 ** max(0, (e - 12) // 4))
        r = sup_over_E(h, prof, N=N, E_max=args.E_max)
        rows.append({"h": h, "N": r.N, "E_star": r.E_star, "norm": r.norm})
        print(f"h=2^-{e:<3d} N={r.N:<5d} E*={r.E_star:.6f} norm={r.norm:.6f}", flush=True)
    lh = np.log([r["h"] for r in rows])
    ln = np.log([r["norm"] for r in rows])
    for i in range(1, len(rows)):
        print(f"local exponent [{rows[i - 1]['h']:.2e}, {rows[i]['h']:.2e}]: "
              f"{(ln[i] - ln[i - 1]) / (lh[i] - lh[i - 1]):+.4f}")
    with open(args.out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


if __name__ == "__main__":
    main()
