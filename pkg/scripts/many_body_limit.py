"""Asymptotic many-copy efficiency and its reference cycle for every preset."""

from qotto.experiments import PRESETS, limit_table


def main():
    print(f"{'preset':>7} {'eta_C':>9} {'eta_inf':>10} {'ratio':>8} {'beta_B_ref':>11} {'beta_D_ref':>11}")
    for name, cfg in PRESETS.items():
        (row,) = limit_table(cfg)
        print(f"{name:>7} {row['eta_carnot']:9.6f} {row['eta_manybody']:10.6f} "
              f"{row['eta_manybody_over_carnot']:8.4f} {row['beta_B_ref']:11.6f} {row['beta_D_ref']:11.6f}")


if __name__ == "__main__":
    main()
