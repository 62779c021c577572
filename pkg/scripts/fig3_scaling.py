"""Perfect-swap cycle quantities per copy as N grows (fig3 parameters).

N <= 13 runs on the full population vector, larger N on permutation classes.
"""

import argparse
import dataclasses

from qotto.experiments import COPIES_COLUMNS, PRESETS, sweep_copies, to_csv


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-max", type=int, default=300)
    parser.add_argument("--out", default="fig3_scaling.csv")
    args = parser.parse_args()

    cfg = PRESETS["fig3"]
    small = sweep_copies(dataclasses.replace(cfg, n_min=1, n_max=min(10, args.n_max)))
    large_ns = [n for n in (20, 50, 100, 150, 200, 250, 300, 400, 500) if 10 < n <= args.n_max]
    large = [sweep_copies(dataclasses.replace(cfg, n_min=n, n_max=n))[0] for n in large_ns]
    rows = small + large
    with open(args.out, "w") as fh:
        fh.write(to_csv(rows, COPIES_COLUMNS))

    limit = rows[0]["eta_manybody"]
    print(f"many-body limit eta/eta_C = {limit / cfg.eta_carnot:.6f}")
    print(f"{'N':>4} {'W/N':>13} {'Q_h/N':>13} {'|Q_c|/N':>12} {'eta/eta_C':>10} engine")
    for r in rows:
        n = r["N"]
        eta = f"{r['eta_over_carnot']:10.4f}" if r["engine"] else f"{'-':>10}"
        print(f"{n:4d} {r['W_per_copy']:13.5e} {r['Q_h'] / n:13.5e} {abs(r['Q_c']) / n:12.5e} {eta} {r['engine']}")
    print(f"wrote {len(rows)} rows to {args.out}")


if __name__ == "__main__":
    main()
