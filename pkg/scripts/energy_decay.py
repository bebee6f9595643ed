"""Energy time series for strip, thin and constant damping from the same data.

Decay fits are qualitative: generic data shows worst-case rates late, if at all.
"""

import argparse
import csv

from dampwave.damping_models import strip_profile, thin_profile
from dampwave.rate_calculus import GrowthExpr
from dampwave.wave_sim import WaveSystem, evolve, fit_decay_rate, fit_power_decay, random_smooth


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--T", type=float, default=20.0)
    ap.add_argument("--dt", type=float, default=5e-3)
    ap.add_argument("--N-x", type=int, default=64)
    ap.add_argument("--modes", type=int, nargs="+", default=[0, 1, 2, 4, 8])
    ap.add_argument("--out", default="energy_decay.csv")
    args = ap.parse_args()
    S = GrowthExpr.small
    profiles = {"constant": 1.0, "strip": strip_profile(1.0, S(pow=2)), "thin": thin_profile(S(pow=2))}
    data = random_smooth(args.N_x, args.modes, seed=0)
    steps = round(args.T / args.dt)
    series = {}
    for name, prof in profiles.items():
        tr = evolve(WaveSystem(prof, args.N_x), data, args.dt, steps, check=False)
        series[name] = tr
        print(f"{name:9s} E(T)/E(0)={tr.E[-1] / tr.E[0]:.4e} exp rate {fit_decay_rate(tr.t, tr.E):.4f} "
              f"power rate {fit_power_decay(tr.t, tr.E):.3f} monotone={tr.monotone}")
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + list(series))
        t = series["constant"].t
        for i in range(0, len(t), 20):
            w.writerow([repr(float(t[i]))] + [repr(float(series[k].E[i])) for k in series])


if __name__ == "__main__":
    main()
