"""Quasimode residuals against the measured two-dimensional resolvent norm."""

import argparse

from dampwave.damping_models import thin_profile
from dampwave.quasimodes import build_quasimode, residual, residual_exponent, residual_sweep
from dampwave.rate_calculus import GrowthExpr


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--betas", type=float, nargs="+", default=[1, 2, 4])
    ap.add_argument("--ns", type=int, nargs="+", default=[16, 32, 64, 128, 256, 512])
    args = ap.parse_args()
    from dampwave.resolvent import two_d_norm
    for beta in args.betas:
        V = GrowthExpr.small(pow=beta)
        rows = residual_sweep(V, args.ns)
        print(f"beta={beta}: exponent {residual_exponent(rows):+.5f} (order {-2 / (beta + 2):+.5f})")
        W = thin_profile(V)
        for r in rows:
            lower = 1 / residual(build_quasimode(V, r.n), W)
            print(f"  n={r.n:<4d} rho={r.rho:.4f} residual={r.residual:.4e} ratio={r.ratio:.4f} "
                  f"1/r={lower:.3e} two_d={two_d_norm(float(r.n), W):.3e}")


if __name__ == "__main__":
    main()
