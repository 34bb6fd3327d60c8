"""Which hop's fading severity hurts more: source-relay or relay-destination?

Two relays, 4-QAM, equal mean SNR on every hop.  Each hop family is swept
over q in [0.1, 1] with the other held at q = 1.

    python scripts/link_sensitivity.py [--snr-db 15]
"""

import argparse

import numpy as np

from hoytdf.analytic import total_ser
from hoytdf.validation import sensitivity_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--snr-db", type=float, default=15.0)
    args = ap.parse_args()

    base = total_ser(sensitivity_scenario(1.0, 1.0, args.snr_db)).total
    print(f"all hops Rayleigh: SER {base:.4e}")
    print(f"{'q':>5} {'degrade S-R':>12} {'degrade R-D':>12}")
    for q in np.round(np.linspace(0.1, 1.0, 10), 2):
        sr = total_ser(sensitivity_scenario(q, 1.0, args.snr_db)).total
        rd = total_ser(sensitivity_scenario(1.0, q, args.snr_db)).total
        print(f"{q:5.2f} {sr:12.4e} {rd:12.4e}")


if __name__ == "__main__":
    main()
