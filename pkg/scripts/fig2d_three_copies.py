"""Three-qutrit cooperative crossing: passivity at B and efficiency gain over QA (fig2d)."""

from qotto.experiments import PRESETS, crossings_table
from qotto.passivity import ergotropy, is_passive
from qotto.protocol import diagonal_cycle


def main():
    cfg = PRESETS["fig2d"]
    for row in crossings_table(cfg):
        print(f"crossing {row['n_word']} <-> {row['m_word']} ({row['m_count']} partners) at E1 = {row['e1_cross']:.6f}")
    print(f"{'N':>2} {'QA passive at B':>16} {'ergotropy':>11} {'eta_QA/eta_C':>13} {'eta_swap/eta_C':>15}")
    for n in (1, 2, 3):
        qa = diagonal_cycle(cfg.params, n, cfg.beta_c, cfg.beta_h, "QA")
        swap = diagonal_cycle(cfg.params, n, cfg.beta_c, cfg.beta_h, "perfect")
        b = qa.points[1]
        print(f"{n:2d} {str(is_passive(b.state, b.hamiltonian)):>16} {ergotropy(b.state, b.hamiltonian):11.3e} "
              f"{qa.eta / qa.eta_carnot:13.6f} {swap.eta / swap.eta_carnot:15.6f}")


if __name__ == "__main__":
    main()
