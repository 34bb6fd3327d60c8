"""SER against SNR for 0-3 relays and two fading severities (4-QAM).

    python scripts/relay_count_sweep.py [--out results/relay_count.csv] [--seed 1 --trials 200000]

Without ``--seed`` only the analytic curves are computed; with it, every
point is also simulated (compare mode).
"""

import argparse
from pathlib import Path

from hoytdf.sweep import SnrGrid, SweepConfig, emit_csv, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/relay_count.csv")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--trials", type=int, default=200_000)
    args = ap.parse_args()

    cfg = SweepConfig(
        m=(4,),
        k=(0, 1, 2, 3),
        q=(0.3, 1.0),
        snr_db=SnrGrid(0.0, 30.0, 2.0),
        mode="analytic" if args.seed is None else "compare",
        trials=args.trials,
        seed=args.seed,
    )
    result = run_sweep(cfg)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    emit_csv(result, args.out)
    print(f"{len(result.rows)} rows -> {args.out}")


if __name__ == "__main__":
    main()
