"""Largest-cluster estimates of the null component on the four-component mixture.

Prints one csv row per tau: mean share, MSE of the center, and the k-means
reference MSE at the gap-selected K. With --s-sweep, prints the mean share
at one tau for several values of s instead.
"""

import argparse
import csv
import sys

from gsup.datagen import MixtureSpec
from gsup.experiments import MIXTURE_TAUS, mixture_study, s_sensitivity


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=100)
    ap.add_argument("--c", type=float, default=4.0)
    ap.add_argument("--pi0", type=float, default=0.8)
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--s", type=float, default=0.025)
    ap.add_argument("--taus", type=lambda t: [float(v) for v in t.split(",")], default=list(MIXTURE_TAUS))
    ap.add_argument("--nonblurring", action="store_true")
    ap.add_argument("--s-sweep", action="store_true", help="vary s at the first tau")
    ap.add_argument("--seed0", type=int, default=0)
    args = ap.parse_args()

    spec = MixtureSpec(args.c, args.pi0, args.n)
    out = csv.writer(sys.stdout)
    if args.s_sweep:
        out.writerow(["s", "tau", "mean_pi"])
        for s, pi in s_sensitivity(tau=args.taus[0], n_rep=args.reps, spec=spec).items():
            out.writerow([s, args.taus[0], f"{pi:.6g}"])
        return
    st = mixture_study(
        args.reps, args.taus, s=args.s, spec=spec, nonblurring=args.nonblurring,
        with_kmeans=not args.nonblurring, seed0=args.seed0,
    )
    out.writerow(["tau", "mean_pi", "mse", "kmeans_mse"])
    km = "" if st.kmeans_mse is None else f"{st.kmeans_mse:.6g}"
    for tau, pi, mse in zip(st.taus, st.mean_pi, st.mse):
        out.writerow([tau, f"{pi:.6g}", f"{mse:.6g}", km])


if __name__ == "__main__":
    main()
