"""Step-by-step table of the transport proof for a few input pairs.

Each row shows the gap contributed by one step; the last column checks that
the steps add up to the deficit h(U) - l h(X) - (1-l) h(Y).
"""

import argparse

from epi_lab import Gaussian, GaussianMixture, Laplace, Logistic, ineq

PAIRS = {
    "gauss(4) + gauss(1)": (Gaussian(4.0), Gaussian(1.0)),
    "laplace + laplace": (Laplace(1.0), Laplace(1.0)),
    "laplace + logistic": (Laplace(1.0), Logistic(1.0)),
    "mixture + gauss": (GaussianMixture((0.5, 0.5), (-2.0, 2.0), (1.0, 1.0)), Gaussian(1.0)),
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lam", type=float, default=0.5)
    args = ap.parse_args(argv)

    head = None
    for label, (X, Y) in PAIRS.items():
        c = ineq.proof_chain(X, Y, args.lam)
        if head is None:
            head = [s.name for s in c.steps]
            print(f"{'pair':22s}" + "".join(f"{h:>22s}" for h in head) + f"{'sum':>14s}{'deficit':>14s}")
        row = "".join(f"{s.gap:22.3e}" for s in c.steps)
        print(f"{label:22s}{row}{c.total_gap:14.8f}{c.extra['epi_lieb_gap']:14.8f}")


if __name__ == "__main__":
    main()
