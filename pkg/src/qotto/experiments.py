"""Named parameter sets, sweeps over pulse duration and copy number, table output."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial

import numpy as np

from qotto.cycle import CycleResult, run_cycle
from qotto.errors import ConvergenceError, ValidationError
from qotto.protocol import (
    MAX_DENSE_COPIES,
    MAX_DIAGONAL_COPIES,
    QutritParams,
    detect_crossings,
    diagonal_cycle,
    make_schedule,
    reference_cycle,
    symmetric_cycle,
    word_index,
)

DEFAULT_TAUS = tuple(float(t) for t in np.logspace(-3, 3, 61))
CYCLE_MODES = ("finite-tau", "perfect", "QA")


@dataclass(frozen=True)
class ExperimentConfig:
    params: QutritParams
    beta_c: float
    beta_h: float
    copies: int = 2
    n_min: int = 1
    n_max: int = 10
    tau: tuple[float, ...] = DEFAULT_TAUS
    mode: str = "perfect"
    steps: int = 2000
    out: str | None = None
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not (self.beta_c > self.beta_h > 0):
            raise ValidationError(
                f"need beta_c > beta_h > 0, got beta_c={self.beta_c}, beta_h={self.beta_h}"
            )
        if not self.tau or any(not t > 0 for t in self.tau):
            raise ValidationError("tau grid must be non-empty and strictly positive")
        if self.mode not in CYCLE_MODES:
            raise ValidationError(f"mode must be one of {CYCLE_MODES}, got {self.mode!r}")
        if self.copies < 1 or not 1 <= self.n_min <= self.n_max:
            raise ValidationError("copy numbers must satisfy 1 <= n_min <= n_max and copies >= 1")
        if self.steps < 1 or self.workers < 1:
            raise ValidationError("steps and workers must be positive")

    @property
    def eta_carnot(self) -> float:
        return 1.0 - self.beta_h / self.beta_c


# Fig. 2(d) gives no E0; 0 as in the other two sets.
PRESETS: dict[str, ExperimentConfig] = {
    "fig2ab": ExperimentConfig(QutritParams(1 / 3, 1 / 3, E0=0.0), beta_c=6.66, beta_h=3.28, copies=2),
    "fig2d": ExperimentConfig(QutritParams(0.57, 0.35, E0=0.0), beta_c=2.22, beta_h=1.09, copies=3),
    "fig3": ExperimentConfig(QutritParams(0.595, 0.125, E0=0.0), beta_c=1.85, beta_h=1.71, copies=10),
}

_PARAM_KEYS = {"E0", "E1_initial", "E1_shift", "E2"}
_CONFIG_KEYS = {
    "preset", "params", "beta_c", "beta_h", "copies", "n_min", "n_max",
    "tau", "mode", "steps", "out", "seed", "workers",
}


def preset(name: str) -> ExperimentConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValidationError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def _tau_grid(spec) -> tuple[float, ...]:
    if isinstance(spec, (int, float)):
        return (float(spec),)
    if isinstance(spec, list):
        return tuple(float(t) for t in spec)
    if isinstance(spec, dict):
        extra = set(spec) - {"min", "max", "points"}
        if extra:
            raise ValidationError(f"unknown tau grid keys {sorted(extra)}")
        lo, hi, n = spec["min"], spec["max"], int(spec.get("points", 61))
        if not (0 < lo <= hi) or n < 1:
            raise ValidationError("tau grid needs 0 < min <= max and points >= 1")
        return tuple(float(t) for t in np.logspace(math.log10(lo), math.log10(hi), n))
    raise ValidationError(f"cannot read tau specification {spec!r}")


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build a config from a JSON object; unknown keys are rejected."""
    if not isinstance(data, dict):
        raise ValidationError("config must be a JSON object")
    extra = set(data) - _CONFIG_KEYS
    if extra:
        raise ValidationError(f"unknown config keys {sorted(extra)}")
    base = preset(data["preset"]) if "preset" in data else None
    updates = {k: v for k, v in data.items() if k not in ("preset", "params", "tau")}
    if "tau" in data:
        updates["tau"] = _tau_grid(data["tau"])
    if "params" in data:
        p = data["params"]
        if not isinstance(p, dict) or set(p) - _PARAM_KEYS:
            raise ValidationError(f"params must be an object with keys among {sorted(_PARAM_KEYS)}")
        merged = dict(vars(base.params)) if base else {"E0": 0.0, "E2": 1.0}
        merged.update(p)
        try:
            updates["params"] = QutritParams(**merged)
        except TypeError as exc:
            raise ValidationError(f"incomplete params: {exc}") from None
    try:
        return replace(base, **updates) if base else ExperimentConfig(**updates)
    except TypeError as exc:
        raise ValidationError(f"incomplete config: {exc}") from None


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from None
    return config_from_dict(data)


def worker_count(config: ExperimentConfig) -> int:
    env = os.environ.get("QOTTO_WORKERS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValidationError(f"QOTTO_WORKERS must be an integer, got {env!r}") from None
        if n < 1:
            raise ValidationError("QOTTO_WORKERS must be positive")
        return n
    return config.workers


def _map(fn, items, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def cycle_for(config: ExperimentConfig, copies: int, mode: str | None = None, tau: float | None = None) -> CycleResult:
    """One cycle: dense propagation for finite tau, diagonal fast path otherwise."""
    mode = mode or config.mode
    if mode == "finite-tau":
        if copies > MAX_DENSE_COPIES:
            raise ValidationError(f"finite-tau needs dense propagation, N <= {MAX_DENSE_COPIES}")
        tau = config.tau[0] if tau is None else tau
        schedule = make_schedule(config.params, copies, "finite-tau", tau)
        return run_cycle(schedule, config.beta_c, config.beta_h, config.steps)
    return diagonal_cycle(config.params, copies, config.beta_c, config.beta_h, mode)


# -- tables -----------------------------------------------------------------

TAU_COLUMNS = (
    "tau", "p_n_B", "p_m_B", "delta_E_B", "W", "Q_h", "Q_c",
    "eta", "eta_over_carnot", "engine", "status",
)
COPIES_COLUMNS = (
    "N", "W", "W_per_copy", "Q_h", "Q_c", "eta", "eta_over_carnot",
    "eta_manybody", "D_B_over_betaQ", "engine", "status",
)
LIMIT_COLUMNS = (
    "eta_manybody", "eta_carnot", "eta_manybody_over_carnot",
    "beta_B_ref", "beta_D_ref", "Q_h_ref", "Q_c_ref",
)
CROSSING_COLUMNS = ("group", "n_word", "m_word", "n_count", "m_count", "e1_cross", "time")
CYCLE_COLUMNS = (
    "N", "mode", "tau", "W", "Q_h", "Q_c", "eta", "eta_raw", "eta_carnot",
    "Q_h_ref", "Q_c_ref", "D_B", "D_D", "beta_B_ref", "beta_D_ref", "eta_manybody",
    "engine", "series_valid",
)


def _failed_row(columns, key, value, exc) -> dict:
    row = {c: math.nan for c in columns}
    row.update({key: value, "engine": 0, "status": f"error: {exc}"})
    return row


def _tau_row(config: ExperimentConfig, qa_energy_b: float, tau: float) -> dict:
    try:
        schedule = make_schedule(config.params, config.copies, "finite-tau", tau)
        res = run_cycle(schedule, config.beta_c, config.beta_h, config.steps)
    except (ValidationError, ConvergenceError) as exc:
        return _failed_row(TAU_COLUMNS, "tau", tau, exc)
    rho_b = res.points[1].state
    pops = np.real(np.diag(rho_b))
    if schedule.swaps:
        n, m = schedule.swaps[0].pair
        p_n, p_m = pops[word_index(n)], pops[word_index(m)]
    else:
        p_n = p_m = math.nan
    return {
        "tau": tau,
        "p_n_B": p_n,
        "p_m_B": p_m,
        "delta_E_B": res.points[1].energy - qa_energy_b,
        "W": res.W,
        "Q_h": res.Q_h,
        "Q_c": res.Q_c,
        "eta": res.eta_raw,
        "eta_over_carnot": res.eta_raw / res.eta_carnot,
        "engine": int(res.is_engine),
        "status": "ok",
    }


def sweep_tau(config: ExperimentConfig) -> list[dict]:
    """Dense finite-tau cycles over the tau grid (N = 2 or 3).

    ``eta`` is -W/Q_h for every row; ``engine`` flags rows with W < 0 and Q_h > 0.
    """
    if config.copies not in (2, 3):
        raise ValidationError(f"tau sweeps need N in {{2, 3}}, got {config.copies}")
    qa = diagonal_cycle(config.params, config.copies, config.beta_c, config.beta_h, "QA")
    fn = partial(_tau_row, config, qa.points[1].energy)
    return _map(fn, list(config.tau), worker_count(config))


def _copies_row(config: ExperimentConfig, mode: str, eta_mb: float, copies: int) -> dict:
    try:
        if copies <= MAX_DIAGONAL_COPIES:
            res = diagonal_cycle(config.params, copies, config.beta_c, config.beta_h, mode)
            w, q_h, q_c = res.W, res.Q_h, res.Q_c
            ratio = res.D_B / (res.beta_B_ref * res.Q_h_ref)
        else:
            sp = symmetric_cycle(config.params, copies, config.beta_c, config.beta_h, mode)
            w, q_h, q_c, ratio = sp.W, sp.Q_h, sp.Q_c, sp.distance_ratio
    except (ValidationError, ConvergenceError) as exc:
        return _failed_row(COPIES_COLUMNS, "N", copies, exc)
    eta = -w / q_h
    return {
        "N": copies,
        "W": w,
        "W_per_copy": w / copies,
        "Q_h": q_h,
        "Q_c": q_c,
        "eta": eta,
        "eta_over_carnot": eta / config.eta_carnot,
        "eta_manybody": eta_mb,
        "D_B_over_betaQ": ratio,
        "engine": int(w < 0 and q_h > 0),
        "status": "ok",
    }


def sweep_copies(config: ExperimentConfig, mode: str | None = None) -> list[dict]:
    """QA or perfect-swap cycles for N = n_min..n_max with the many-body asymptote.

    N <= 13 runs on the 3^N population vector, larger N on permutation classes.
    """
    mode = mode or config.mode
    if mode not in ("QA", "perfect"):
        raise ValidationError(f"copy sweeps need mode 'QA' or 'perfect', got {mode!r}")
    ref = reference_cycle(config.params, config.beta_c, config.beta_h)
    fn = partial(_copies_row, config, mode, ref.eta)
    return _map(fn, list(range(config.n_min, config.n_max + 1)), worker_count(config))


def limit_table(config: ExperimentConfig) -> list[dict]:
    ref = reference_cycle(config.params, config.beta_c, config.beta_h)
    return [{
        "eta_manybody": ref.eta,
        "eta_carnot": config.eta_carnot,
        "eta_manybody_over_carnot": ref.eta / config.eta_carnot,
        "beta_B_ref": ref.beta_B_ref,
        "beta_D_ref": ref.beta_D_ref,
        "Q_h_ref": ref.Q_h_ref,
        "Q_c_ref": ref.Q_c_ref,
    }]


def _word(w) -> str:
    return "(" + ",".join(str(d) for d in w) + ")"


def crossings_table(config: ExperimentConfig) -> list[dict]:
    rows = []
    for i, g in enumerate(detect_crossings((config.params, config.copies))):
        rows.append({
            "group": i,
            "n_word": _word(g.n_words[0]),
            "m_word": _word(g.m_words[0]),
            "n_count": len(g.n_words),
            "m_count": len(g.m_words),
            "e1_cross": g.e1_cross,
            "time": g.time,
        })
    return rows


def cycle_table(config: ExperimentConfig) -> list[dict]:
    res = cycle_for(config, config.copies)
    return [{
        "N": config.copies,
        "mode": config.mode,
        "tau": config.tau[0] if config.mode == "finite-tau" else 0.0,
        "W": res.W,
        "Q_h": res.Q_h,
        "Q_c": res.Q_c,
        "eta": res.eta,
        "eta_raw": res.eta_raw,
        "eta_carnot": res.eta_carnot,
        "Q_h_ref": res.Q_h_ref,
        "Q_c_ref": res.Q_c_ref,
        "D_B": res.D_B,
        "D_D": res.D_D,
        "beta_B_ref": res.beta_B_ref,
        "beta_D_ref": res.beta_D_ref,
        "eta_manybody": res.eta_manybody,
        "engine": int(res.is_engine),
        "series_valid": int(res.series_valid),
    }]


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def to_csv(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c, "")) for c in columns])
    return buf.getvalue()


def to_json(rows: list[dict], columns) -> str:
    def clean(v):
        if isinstance(v, (np.floating, float)):
            return None if math.isnan(v) else float(v)
        if isinstance(v, np.integer):
            return int(v)
        return v

    return json.dumps([{c: clean(r.get(c)) for c in columns} for r in rows], indent=2) + "\n"
