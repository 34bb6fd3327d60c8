"""4-QAM against 16-QAM with two relays, analytic plus Monte Carlo.

    python scripts/modulation_sweep.py [--seed 3] [--trials 400000]
"""

import argparse
from pathlib import Path

from hoytdf.sweep import SnrGrid, SweepConfig, emit_csv, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/modulation.csv")
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--trials", type=int, default=400_000)
    args = ap.parse_args()

    cfg = SweepConfig(
        m=(4, 16),
        k=(2,),
        q=(0.3, 1.0),
        snr_db=SnrGrid(0.0, 30.0, 5.0),
        mode="compare",
        trials=args.trials,
        seed=args.seed,
    )
    result = run_sweep(cfg)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    emit_csv(result, args.out)
    for row in result.rows:
        p = row.point
        print(f"M={p.m:2d} q={p.q_sd:g} {p.snr_db:4.0f} dB  analytic {row.ser_analytic:.3e}  sim {row.ser_sim:.3e}")


if __name__ == "__main__":
    main()
