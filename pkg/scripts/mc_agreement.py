"""Closed-form SER, symbol-class SER and Monte Carlo side by side.

The closed-form total averages relay failures and destination errors over
the transmitted symbol independently.  For M > 4 both depend on the symbol's
neighbour count, so the simulation sits slightly above the closed form once
relays are present.  This script quantifies the gap.

    python scripts/mc_agreement.py [--trials 1000000] [--seed 20240101]
"""

import argparse
import math

from hoytdf.analytic import NetworkScenario, symbol_conditioned_ser, total_ser
from hoytdf.mcsim import estimate_ser


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=10**6)
    ap.add_argument("--seed", type=int, default=20240101)
    args = ap.parse_args()

    print(f"{'M':>3} {'K':>2} {'q':>4} {'dB':>3} {'closed':>11} {'z':>6} {'by class':>11} {'z':>6} {'sim':>11}")
    for m in (4, 16):
        for k in (0, 1, 2, 3):
            for q in (0.3, 1.0):
                for s in (5.0, 10.0):
                    sc = NetworkScenario.symmetric(m, k, q, 10.0 ** (s / 10.0))
                    closed = total_ser(sc).total
                    by_class = symbol_conditioned_ser(sc)
                    sim = estimate_ser(sc, args.trials, args.seed).ser
                    z = lambda p: (sim - p) / math.sqrt(p * (1 - p) / args.trials)
                    print(
                        f"{m:3d} {k:2d} {q:4.1f} {s:3.0f} {closed:11.4e} {z(closed):6.1f} "
                        f"{by_class:11.4e} {z(by_class):6.1f} {sim:11.4e}"
                    )


if __name__ == "__main__":
    main()
