"""Achieved ratio C_r ||f*g||_r / (C_p ||f||_p C_q ||g||_q) for Gaussian
pairs of varying variance ratio, in both Young regimes."""

import argparse

from epi_lab import Gaussian, ineq


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ratios", type=float, nargs="*", default=[0.25, 0.5, 1.0, 2.0, 4.0])
    args = ap.parse_args(argv)
    print(f"{'var_Y/var_X':>12s}{'forward (4/3,4/3,2)':>22s}{'reverse (4/5,4/5,2/3)':>24s}")
    for k in args.ratios:
        X, Y = Gaussian(1.0), Gaussian(k)
        f = ineq.young_check(X, Y, 4 / 3, 4 / 3, 2.0).extra["ratio"]
        r = ineq.young_check(X, Y, 0.8, 0.8, 2 / 3).extra["ratio"]
        print(f"{k:12.3f}{f:22.9f}{r:24.9f}")


if __name__ == "__main__":
    main()
