"""Quick in-package invariant checks behind ``qotto selftest``.

Each check returns ``(name, passed, detail)``. They exercise the physics
invariants only (energy bookkeeping, bounds, equivalences), not reproduction
of published numbers.
"""

from __future__ import annotations

import math

import numpy as np

from qotto.cycle import carnot_swap_check, run_cycle, second_law_check
from qotto.linalg import commutator_norm, thermal_populations, unitarity_error
from qotto.passivity import is_passive, make_passive, reference_beta, thermal_entropy
from qotto.protocol import (
    QutritParams,
    collective_energies,
    detect_crossings,
    diagonal_cycle,
    make_schedule,
    symmetric_cycle,
)
from qotto.spin import build_spin_ops, qubit_cycle, swap_unitary

FIG2AB = (QutritParams(1 / 3, 1 / 3), 6.66, 3.28)
FIG3 = (QutritParams(0.595, 0.125), 1.85, 1.71)


def _first_law() -> tuple[str, bool, str]:
    worst = 0.0
    for params, bc, bh in (FIG2AB, FIG3):
        for n in (1, 2, 3, 5):
            for mode in ("QA", "perfect"):
                worst = max(worst, diagonal_cycle(params, n, bc, bh, mode).first_law_residual)
    return "first law W + Q_h + Q_c = 0", worst < 1e-10, f"max residual {worst:.2e}"


def _carnot() -> tuple[str, bool, str]:
    rng = np.random.default_rng(0)
    failures = 0
    for _ in range(100):
        levels = 9
        e_a = np.sort(rng.uniform(0, 1, levels))
        e_b = np.sort(rng.uniform(0, 2, levels))
        perm = rng.permutation(levels)
        bh = rng.uniform(0.2, 3.0)
        bc = bh * rng.uniform(1.0, 4.0)
        failures += not carnot_swap_check(e_a, e_b, perm, bc, bh).passed
    return "Carnot bound for random permutation strokes", failures == 0, f"{failures}/100 failed"


def _second_law() -> tuple[str, bool, str]:
    params, bc, bh = FIG2AB
    res = diagonal_cycle(params, 2, bc, bh, "perfect")
    check = second_law_check(res.points, res)
    return "entropy production and reference optimality", check.passed, ""


def _dense_vs_diagonal() -> tuple[str, bool, str]:
    params, bc, bh = FIG2AB
    dense = run_cycle(make_schedule(params, 2, "perfect"), bc, bh)
    diag = diagonal_cycle(params, 2, bc, bh, "perfect")
    err = max(abs(a - b) for a, b in zip(dense.numeric_fields().values(), diag.numeric_fields().values())
              if not (math.isnan(a) and math.isnan(b)))
    return "dense and diagonal perfect-swap cycles agree", err < 1e-12, f"max difference {err:.2e}"


def _decomposition() -> tuple[str, bool, str]:
    params, bc, bh = FIG2AB
    dec = diagonal_cycle(params, 2, bc, bh, "perfect").decomposition
    return "closed-form efficiency matches -W/Q_h", dec.mismatch < 1e-9, f"mismatch {dec.mismatch:.2e}"


def _class_path() -> tuple[str, bool, str]:
    params, bc, bh = FIG3
    full = diagonal_cycle(params, 6, bc, bh, "perfect")
    cls = symmetric_cycle(params, 6, bc, bh, "perfect")
    err = max(abs(full.W - cls.W), abs(full.Q_h - cls.Q_h))
    return "permutation-class path matches full population vector", err < 1e-12, f"difference {err:.2e}"


def _passivity() -> tuple[str, bool, str]:
    params, bc, _ = FIG2AB
    h = collective_energies(params, params.E1_final, 3)
    rng = np.random.default_rng(1)
    p = rng.dirichlet(np.ones(h.size))
    res = make_passive(p, h)
    ok = is_passive(res.passive_state, h) and res.ergotropy >= -1e-15
    return "passivization yields a passive state", ok, f"ergotropy {res.ergotropy:.3e}"


def _reference_roundtrip() -> tuple[str, bool, str]:
    e = np.array([0.0, 0.4, 1.0])
    worst = max(abs(reference_beta(e, thermal_entropy(e, b)) - b) / b for b in (0.1, 1.0, 5.0, 30.0))
    return "entropy-matched temperature round trip", worst < 1e-9, f"relative error {worst:.2e}"


def _spin_swap() -> tuple[str, bool, str]:
    ops = build_spin_ops(2)
    s = swap_unitary(ops, ops)
    params, bc, bh = FIG2AB
    err = abs(qubit_cycle(params, bc, bh).W - diagonal_cycle(params, 2, bc, bh).W)
    ok = unitarity_error(s) < 1e-12 and err < 1e-12
    return "qubit-pair swap reproduces the two-qutrit cycle", ok, f"work difference {err:.2e}"


def _crossing_commutation() -> tuple[str, bool, str]:
    params = QutritParams(0.57, 0.35)
    groups = detect_crossings((params, 3))
    ok = len(groups) == 1 and groups[0].n_counts == (0, 3, 0)
    sched = make_schedule(params, 2, "none")
    h0, h1 = sched.h_a, sched.h_b
    ok = ok and commutator_norm(h0, h1) < 1e-14
    pops = thermal_populations(np.array([0.0, 0.5, 1.0]), 2.0)
    ok = ok and abs(pops.sum() - 1) < 1e-14
    return "crossing detection and commuting bare Hamiltonians", ok, f"{len(groups)} group(s) at N=3"


CHECKS = (
    _first_law,
    _carnot,
    _second_law,
    _dense_vs_diagonal,
    _decomposition,
    _class_path,
    _passivity,
    _reference_roundtrip,
    _spin_swap,
    _crossing_commutation,
)


def run_selftest() -> list[tuple[str, bool, str]]:
    return [check() for check in CHECKS]
