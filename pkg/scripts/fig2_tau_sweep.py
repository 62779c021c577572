"""Two-qutrit engine efficiency against swap-pulse duration (fig2ab parameters)."""

import argparse
import dataclasses

import numpy as np

from qotto.experiments import PRESETS, TAU_COLUMNS, sweep_tau, to_csv


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=61)
    parser.add_argument("--out", default="fig2_tau_sweep.csv")
    args = parser.parse_args()

    cfg = dataclasses.replace(PRESETS["fig2ab"], tau=tuple(np.logspace(-3, 3, args.points)))
    rows = sweep_tau(cfg)
    with open(args.out, "w") as fh:
        fh.write(to_csv(rows, TAU_COLUMNS))

    print(f"{'tau':>10} {'p_n(B)':>10} {'p_m(B)':>10} {'eta/eta_C':>11} engine")
    for row in rows[:: max(1, len(rows) // 12)]:
        print(f"{row['tau']:10.3g} {row['p_n_B']:10.6f} {row['p_m_B']:10.6f} "
              f"{row['eta_over_carnot']:11.6f} {row['engine']}")
    print(f"wrote {len(rows)} rows to {args.out}")


if __name__ == "__main__":
    main()
