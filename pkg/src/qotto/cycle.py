"""Four-stroke Otto cycle: heats, work, efficiency and its relative-entropy form.

A protocol is any object exposing

* ``h_a`` / ``h_b``: the Hamiltonians at points A (= D) and B (= C),
* ``compress(rho, steps)``: the isolated A -> B stroke,
* ``expand(rho, steps)``: the isolated C -> D stroke,
* ``tau_total``: wall-clock duration of both isolated strokes.

Both dense matrices and the diagonal (population-vector) representation are
accepted throughout; the equilibration strokes are exact Gibbs replacements.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from qotto.errors import UnattainableEntropyError, ValidationError
from qotto.linalg import (
    expectation,
    gibbs_state,
    thermal_populations,
    von_neumann_entropy,
)
from qotto.passivity import reference_temperature, relative_entropy, thermal_relative_entropy

FIRST_LAW_TOL = 1e-10
DECOMPOSITION_TOL = 1e-9
ISENTROPY_TOL = 1e-6
CARNOT_SLACK = 1e-12
SECOND_LAW_SLACK = 1e-9


@dataclass(frozen=True)
class CyclePoint:
    label: str
    hamiltonian: np.ndarray
    state: np.ndarray
    energy: float
    entropy: float

    @classmethod
    def from_state(cls, label: str, hamiltonian, state) -> "CyclePoint":
        if label not in ("A", "B", "C", "D"):
            raise ValidationError(f"unknown cycle point {label!r}")
        return cls(
            label,
            np.asarray(hamiltonian),
            np.asarray(state),
            expectation(hamiltonian, state),
            von_neumann_entropy(state),
        )


@dataclass(frozen=True)
class Decomposition:
    """Reference-state bookkeeping for one cycle.

    ``eta_closed`` is the two-reference formula (relative entropies at B and
    D only, geometric series summed), ``eta_general`` keeps all four relative
    entropies, and ``eta_direct`` is 1 - |Q_c|/Q_h from the actual heats.
    """

    beta_ref: dict
    relative: dict
    Q_h_ref: float
    Q_c_ref: float
    series_ratio: float
    series_valid: bool
    eta_closed: float
    eta_general: float
    eta_direct: float

    def eta_series(self, terms: int = 20) -> float:
        """Truncated geometric series, meaningful only when ``series_valid``."""
        x = self.series_ratio
        partial = sum(x**n for n in range(terms + 1))
        d_scaled = _excess(self, "D") / (-self.Q_c_ref)
        return 1.0 - (1.0 + d_scaled) * partial * (-self.Q_c_ref / self.Q_h_ref)

    @property
    def mismatch(self) -> float:
        return abs(self.eta_general - self.eta_direct)


@dataclass(frozen=True)
class CycleResult:
    W: float
    Q_h: float
    Q_c: float
    eta: float  # NaN outside the engine regime
    eta_carnot: float
    Q_h_ref: float
    Q_c_ref: float
    D_B: float
    D_D: float
    beta_B_ref: float
    beta_D_ref: float
    eta_manybody: float
    beta_c: float
    beta_h: float
    is_engine: bool
    series_valid: bool
    tau_total: float = 0.0
    points: tuple = field(default=(), compare=False, repr=False)
    decomposition: Decomposition | None = field(default=None, compare=False, repr=False)

    @property
    def eta_raw(self) -> float:
        """-W/Q_h regardless of regime (NaN when Q_h vanishes)."""
        return -self.W / self.Q_h if self.Q_h != 0 else math.nan

    @property
    def first_law_residual(self) -> float:
        return abs(self.W + self.Q_h + self.Q_c)

    @property
    def power(self) -> float:
        """-W per unit stroke time; a convenience value, NaN for instantaneous strokes."""
        return -self.W / self.tau_total if self.tau_total > 0 else math.nan

    def numeric_fields(self) -> dict:
        out = asdict(self)
        for key in ("points", "decomposition", "is_engine", "series_valid"):
            out.pop(key)
        return out


def carnot_efficiency(beta_c: float, beta_h: float) -> float:
    return 1.0 - beta_h / beta_c


def _excess(dec: Decomposition, label: str) -> float:
    # D / beta_ref, the energy excess over the reference state
    return dec.relative[label + "_excess"]


def _energy_excess(point: CyclePoint, ref) -> tuple[float, float]:
    beta = ref.beta_ref
    if 0 < beta < np.inf:
        d = thermal_relative_entropy(point.state, point.hamiltonian, beta)
        return d, d / beta
    # zero-temperature or infinite-temperature reference: D/beta is the energy gap itself
    return relative_entropy(point.state, ref.omega), point.energy - expectation(point.hamiltonian, ref.omega)


def _ratio(x: float, y: float) -> float:
    return x / y if y != 0 else math.nan


def efficiency_decomposition(points) -> Decomposition:
    """Split the heats into reference-state heats plus relative-entropy corrections."""
    pts = {p.label: p for p in points}
    if set(pts) != {"A", "B", "C", "D"}:
        raise ValidationError("need the four cycle points A, B, C, D")
    a, b, c, d = (pts[k] for k in "ABCD")
    if abs(a.entropy - b.entropy) > ISENTROPY_TOL or abs(c.entropy - d.entropy) > ISENTROPY_TOL:
        raise ValidationError(
            "isolated strokes changed the entropy: "
            f"|S_B - S_A| = {abs(a.entropy - b.entropy):.3e}, "
            f"|S_D - S_C| = {abs(c.entropy - d.entropy):.3e}"
        )

    refs = {p.label: reference_temperature(p.hamiltonian, p.entropy, p.label) for p in (a, b, c, d)}
    relative = {}
    for p in (a, b, c, d):
        div, excess = _energy_excess(p, refs[p.label])
        relative[p.label] = div
        relative[p.label + "_excess"] = excess

    q_h_ref = expectation(b.hamiltonian, refs["C"].omega) - expectation(b.hamiltonian, refs["B"].omega)
    q_c_ref = expectation(a.hamiltonian, refs["A"].omega) - expectation(a.hamiltonian, refs["D"].omega)

    q_h = c.energy - expectation(c.hamiltonian, b.state)
    q_c = a.energy - expectation(a.hamiltonian, d.state)
    eta_direct = 1.0 - _ratio(-q_c, q_h)

    ratio = _ratio(relative["B_excess"], q_h_ref)
    series_valid = abs(ratio) < 1.0
    heat_ratio = _ratio(-q_c_ref, q_h_ref)
    eta_closed = 1.0 - _ratio(1.0 + _ratio(relative["D_excess"], -q_c_ref), 1.0 - ratio) * heat_ratio
    numerator = 1.0 + _ratio(relative["D_excess"] - relative["A_excess"], -q_c_ref)
    denominator = 1.0 - _ratio(relative["B_excess"] - relative["C_excess"], q_h_ref)
    eta_general = 1.0 - _ratio(numerator, denominator) * heat_ratio

    return Decomposition(
        beta_ref={k: v.beta_ref for k, v in refs.items()},
        relative=relative,
        Q_h_ref=q_h_ref,
        Q_c_ref=q_c_ref,
        series_ratio=ratio,
        series_valid=series_valid,
        eta_closed=eta_closed,
        eta_general=eta_general,
        eta_direct=eta_direct,
    )


def evaluate_cycle(points, beta_c: float, beta_h: float, tau_total: float = 0.0) -> CycleResult:
    """Work, heats, efficiency and reference quantities from the four cycle points."""
    pts = {p.label: p for p in points}
    a, b, c, d = (pts[k] for k in "ABCD")
    w = b.energy - a.energy + expectation(a.hamiltonian, d.state) - c.energy
    q_h = c.energy - expectation(c.hamiltonian, b.state)
    q_c = a.energy - expectation(a.hamiltonian, d.state)
    if abs(w + q_h + q_c) > FIRST_LAW_TOL * max(1.0, abs(a.energy), abs(c.energy)):
        raise ValidationError(f"first law violated by {abs(w + q_h + q_c):.3e}")
    engine = w < 0 and q_h > 0
    try:
        dec = efficiency_decomposition(points)
    except UnattainableEntropyError:
        # degenerate ground levels can leave a stroke-end entropy below every Gibbs state
        dec = None
    if dec is None:
        return _bare_result(w, q_h, q_c, engine, beta_c, beta_h, tau_total, (a, b, c, d))
    if engine and dec.mismatch > DECOMPOSITION_TOL:
        raise ValidationError(f"efficiency decomposition disagrees by {dec.mismatch:.3e}")
    eta_mb = _ratio(dec.Q_c_ref, dec.Q_h_ref) + 1.0
    return CycleResult(
        W=w,
        Q_h=q_h,
        Q_c=q_c,
        eta=-w / q_h if engine else math.nan,
        eta_carnot=carnot_efficiency(beta_c, beta_h),
        Q_h_ref=dec.Q_h_ref,
        Q_c_ref=dec.Q_c_ref,
        D_B=dec.relative["B"],
        D_D=dec.relative["D"],
        beta_B_ref=dec.beta_ref["B"],
        beta_D_ref=dec.beta_ref["D"],
        eta_manybody=eta_mb,
        beta_c=beta_c,
        beta_h=beta_h,
        is_engine=engine,
        series_valid=dec.series_valid,
        tau_total=tau_total,
        points=(a, b, c, d),
        decomposition=dec,
    )


def _bare_result(w, q_h, q_c, engine, beta_c, beta_h, tau_total, points) -> CycleResult:
    nan = math.nan
    return CycleResult(
        W=w, Q_h=q_h, Q_c=q_c, eta=-w / q_h if engine else nan,
        eta_carnot=carnot_efficiency(beta_c, beta_h),
        Q_h_ref=nan, Q_c_ref=nan, D_B=nan, D_D=nan, beta_B_ref=nan, beta_D_ref=nan,
        eta_manybody=nan, beta_c=beta_c, beta_h=beta_h, is_engine=engine,
        series_valid=False, tau_total=tau_total, points=points, decomposition=None,
    )


def _thermal(h, beta: float) -> np.ndarray:
    h = np.asarray(h)
    return thermal_populations(h, beta) if h.ndim == 1 else gibbs_state(h, beta)


def _same_operator(x, y) -> bool:
    x = np.asarray(x)
    y = np.asarray(y)
    x = np.diag(x) if x.ndim == 1 and y.ndim == 2 else x
    y = np.diag(y) if y.ndim == 1 and x.ndim == 2 else y
    return x.shape == y.shape and float(np.max(np.abs(x - y))) <= 1e-12


def check_temperatures(beta_c: float, beta_h: float) -> None:
    if not (beta_h > 0 and beta_c >= beta_h and np.isfinite(beta_c)):
        raise ValidationError(
            f"need beta_c >= beta_h > 0 (cold bath colder), got beta_c={beta_c}, beta_h={beta_h}"
        )


def run_cycle(protocol, beta_c: float, beta_h: float, steps: int = 2000) -> CycleResult:
    """Simulate one cycle: Gibbs at A, compress, Gibbs at C, expand."""
    check_temperatures(beta_c, beta_h)
    h_a, h_b = protocol.h_a, protocol.h_b
    h_d = getattr(protocol, "h_d", h_a)
    h_c = getattr(protocol, "h_c", h_b)
    if not (_same_operator(h_a, h_d) and _same_operator(h_b, h_c)):
        raise ValidationError("protocol endpoints mismatch: need H_D = H_A and H_C = H_B")
    rho_a = _thermal(h_a, beta_c)
    rho_b = protocol.compress(rho_a, steps)
    rho_c = _thermal(h_b, beta_h)
    rho_d = protocol.expand(rho_c, steps)
    points = (
        CyclePoint.from_state("A", h_a, rho_a),
        CyclePoint.from_state("B", h_b, rho_b),
        CyclePoint.from_state("C", h_b, rho_c),
        CyclePoint.from_state("D", h_a, rho_d),
    )
    return evaluate_cycle(points, beta_c, beta_h, getattr(protocol, "tau_total", 0.0))


class PermutationProtocol:
    """Instantaneous level permutation between two diagonal Hamiltonians.

    ``permutation[n] = m`` sends the population of level ``n`` at A to level
    ``m`` at B; the expansion stroke applies the inverse map.
    """

    tau_total = 0.0

    def __init__(self, energies_a, energies_b, permutation, dense: bool = True):
        self.energies_a = np.asarray(energies_a, dtype=float)
        self.energies_b = np.asarray(energies_b, dtype=float)
        perm = np.asarray(permutation, dtype=int)
        n = self.energies_a.size
        if self.energies_b.size != n or perm.shape != (n,) or sorted(perm.tolist()) != list(range(n)):
            raise ValidationError("permutation must be a bijection on the level indices")
        self.permutation = perm
        self.dense = dense
        self._p = np.zeros((n, n))
        self._p[perm, np.arange(n)] = 1.0

    @property
    def h_a(self):
        return np.diag(self.energies_a) if self.dense else self.energies_a

    @property
    def h_b(self):
        return np.diag(self.energies_b) if self.dense else self.energies_b

    def compress(self, rho, steps=None):
        rho = np.asarray(rho)
        if rho.ndim == 1:
            out = np.empty_like(rho)
            out[self.permutation] = rho
            return out
        return self._p @ rho @ self._p.T

    def expand(self, rho, steps=None):
        rho = np.asarray(rho)
        if rho.ndim == 1:
            return rho[self.permutation]
        return self._p.T @ rho @ self._p


@dataclass(frozen=True)
class CarnotCheck:
    W: float
    Q_h: float
    eta: float
    eta_carnot: float
    is_engine: bool
    within_bound: bool
    cross_check_error: float

    @property
    def passed(self) -> bool:
        return self.within_bound and self.cross_check_error <= 1e-9


def swap_work_terms(energies_a, energies_b, permutation, beta_c, beta_h):
    """Level-resolved work and hot-heat terms of a population permutation.

    Returns arrays ``(A, B)`` indexed by the A-level ``n`` with ``m = permutation[n]``::

        A_n = (E_n(A) - E_m(B)) (p_h(m) - p_c(n))
        B_n =  E_m(B)           (p_h(m) - p_c(n))

    where ``p_c`` / ``p_h`` are Boltzmann populations at A / B.
    """
    ea = np.asarray(energies_a, dtype=float)
    eb = np.asarray(energies_b, dtype=float)
    perm = np.asarray(permutation, dtype=int)
    zc = np.sum(np.exp(-beta_c * (ea - ea.min())))
    zh = np.sum(np.exp(-beta_h * (eb - eb.min())))
    p_c = np.exp(-beta_c * (ea - ea.min())) / zc
    p_h = np.exp(-beta_h * (eb[perm] - eb.min())) / zh
    flow = p_h - p_c
    return (ea - eb[perm]) * flow, eb[perm] * flow


def carnot_swap_check(energies_a, energies_b, permutation, beta_c: float, beta_h: float) -> CarnotCheck:
    """Check the permutation cycle against the Carnot bound and against ``run_cycle``."""
    a_terms, b_terms = swap_work_terms(energies_a, energies_b, permutation, beta_c, beta_h)
    w = float(np.sum(a_terms))
    q_h = float(np.sum(b_terms))
    eta_c = carnot_efficiency(beta_c, beta_h)
    engine = w < 0 and q_h > 0
    eta = -w / q_h if engine else math.nan
    within = (not engine) or eta <= eta_c + CARNOT_SLACK

    res = run_cycle(PermutationProtocol(energies_a, energies_b, permutation), beta_c, beta_h)
    err = max(abs(res.W - w), abs(res.Q_h - q_h))
    return CarnotCheck(w, q_h, eta, eta_c, engine, within, err)


@dataclass(frozen=True)
class SecondLawCheck:
    dS_BC: float
    dS_DA: float
    margin_hot: float
    margin_cold: float
    margin_hot_ref: float
    margin_cold_ref: float
    cyclicity: float

    @property
    def passed(self) -> bool:
        margins = (self.margin_hot, self.margin_cold, self.margin_hot_ref, self.margin_cold_ref)
        # reference margins are NaN when no entropy-matched Gibbs state exists
        return all(m >= -SECOND_LAW_SLACK for m in margins if not math.isnan(m)) and abs(self.cyclicity) <= SECOND_LAW_SLACK


def second_law_check(points, result: CycleResult) -> SecondLawCheck:
    """Entropy balance of the two equilibration strokes, for actual and reference heats."""
    pts = {p.label: p for p in points}
    ds_bc = pts["C"].entropy - pts["B"].entropy
    ds_da = pts["A"].entropy - pts["D"].entropy
    return SecondLawCheck(
        dS_BC=ds_bc,
        dS_DA=ds_da,
        margin_hot=ds_bc - result.beta_h * result.Q_h,
        margin_cold=ds_da - result.beta_c * result.Q_c,
        margin_hot_ref=ds_bc - result.beta_h * result.Q_h_ref,
        margin_cold_ref=ds_da - result.beta_c * result.Q_c_ref,
        cyclicity=ds_bc + ds_da,
    )
