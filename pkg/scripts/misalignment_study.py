"""Simulated image classes with rotated outliers: gamma-SUP against k-means+.

Prints a key=value report per seed.
"""

import argparse

from gsup.experiments import misalignment_study


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=lambda t: [int(v) for v in t.split(",")], default=[0])
    args = ap.parse_args()

    for seed in args.seeds:
        st = misalignment_study(seed)
        print(f"seed={seed}")
        for key in (
            "snr", "tau", "gsup_impurity", "gsup_c_impurity", "isolated_frac", "kmp_impurity", "kmp_c_impurity",
            "left_tau", "left_impurity", "left_c_impurity", "left_isolated_frac",
        ):
            print(f"{key}={getattr(st, key)}")
        print(f"plateau={st.scan.plateau}")


if __name__ == "__main__":
    main()
