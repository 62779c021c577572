"""Multi-copy qutrit Otto engines whose compression strokes swap crossing levels."""

from qotto.cycle import (
    CycleResult,
    carnot_efficiency,
    efficiency_decomposition,
    evaluate_cycle,
    run_cycle,
    second_law_check,
)
from qotto.errors import ConvergenceError, ValidationError
from qotto.experiments import PRESETS, ExperimentConfig, preset, sweep_copies, sweep_tau
from qotto.linalg import gibbs_state, propagate, propagator, von_neumann_entropy
from qotto.passivity import (
    ergotropy,
    is_passive,
    make_passive,
    reference_temperature,
    relative_entropy,
    thermal_relative_entropy,
)
from qotto.protocol import (
    HamiltonianSchedule,
    QutritParams,
    SwapSpec,
    detect_crossings,
    diagonal_cycle,
    make_schedule,
    many_body_limit,
    perfect_swap,
    reference_cycle,
    symmetric_cycle,
)
from qotto.spin import build_spin_ops, qubit_cycle, swap_unitary

__all__ = [
    "ConvergenceError",
    "CycleResult",
    "ExperimentConfig",
    "HamiltonianSchedule",
    "PRESETS",
    "QutritParams",
    "SwapSpec",
    "ValidationError",
    "build_spin_ops",
    "carnot_efficiency",
    "detect_crossings",
    "diagonal_cycle",
    "efficiency_decomposition",
    "ergotropy",
    "evaluate_cycle",
    "gibbs_state",
    "is_passive",
    "make_passive",
    "make_schedule",
    "many_body_limit",
    "perfect_swap",
    "preset",
    "propagate",
    "propagator",
    "qubit_cycle",
    "reference_cycle",
    "reference_temperature",
    "relative_entropy",
    "thermal_relative_entropy",
    "run_cycle",
    "second_law_check",
    "swap_unitary",
    "sweep_copies",
    "sweep_tau",
    "symmetric_cycle",
    "von_neumann_entropy",
]
