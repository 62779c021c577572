"""Many-copy qutrit Otto protocol.

Each copy has levels (E0, E1(t), E2) with only E1 ramped linearly. The
collective Hamiltonian of N copies is the additive sum plus a sine pulse
f(t) (|n><m| + |m><n|) that couples two collective levels whose energies
crossed during the ramp. Collective basis states are words over {0, 1, 2};
the first copy is the most significant base-3 digit.

Two evaluation routes are provided: a dense one (``HamiltonianSchedule`` +
``qotto.cycle.run_cycle``, N <= 3) that integrates the pulse, and diagonal
ones (``diagonal_cycle`` on 3^N population vectors, ``symmetric_cycle`` on
permutation classes) for the QA and perfect-swap limits.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from qotto.cycle import CycleResult, CyclePoint, check_temperatures, evaluate_cycle
from qotto.errors import ValidationError
from qotto.linalg import eig_hermitian, propagate, thermal_populations
from qotto.passivity import passive_populations, reference_beta, thermal_entropy

log = logging.getLogger(__name__)

MAX_DENSE_COPIES = 3
MAX_DIAGONAL_COPIES = 13
CROSSING_TOL = 1e-12
MODES = ("finite-tau", "perfect", "none")

Word = tuple[int, ...]


@dataclass(frozen=True)
class QutritParams:
    E1_initial: float
    E1_shift: float
    E0: float = 0.0
    E2: float = 1.0

    def __post_init__(self):
        lo, hi = sorted((self.E1_initial, self.E1_final))
        if not (self.E0 < lo and hi < self.E2):
            raise ValidationError(
                f"need E0 < E1(t) < E2 during the ramp, got E0={self.E0}, "
                f"E1 in [{lo}, {hi}], E2={self.E2}"
            )

    @property
    def E1_final(self) -> float:
        return self.E1_initial + self.E1_shift

    def energies(self, e1: float) -> np.ndarray:
        return np.array([self.E0, e1, self.E2], dtype=float)


@dataclass(frozen=True)
class SwapSpec:
    pair: tuple[Word, Word]
    tau: float = 0.0
    mode: str = "finite-tau"

    def __post_init__(self):
        n, m = self.pair
        if self.mode not in MODES:
            raise ValidationError(f"unknown swap mode {self.mode!r}; expected one of {MODES}")
        if len(n) != len(m) or not n or any(d not in (0, 1, 2) for d in n + m):
            raise ValidationError(f"invalid collective labels {self.pair!r}")
        if tuple(n) == tuple(m):
            raise ValidationError("swap pair must couple two distinct levels")
        if self.mode == "finite-tau" and not self.tau > 0:
            raise ValidationError(f"finite-tau swap needs tau > 0, got {self.tau}")


def word_index(word: Word) -> int:
    idx = 0
    for d in word:
        idx = 3 * idx + d
    return idx


def collective_values(single, copies: int) -> np.ndarray:
    """Additive collective quantity sum_i x[n_i] for every word, in basis order."""
    single = np.asarray(single, dtype=float)
    out = single
    for _ in range(copies - 1):
        out = (out[:, None] + single[None, :]).ravel()
    return out


def collective_energies(params: QutritParams, e1: float, copies: int) -> np.ndarray:
    return collective_values(params.energies(e1), copies)


def product_populations(single, copies: int) -> np.ndarray:
    single = np.asarray(single, dtype=float)
    out = single
    for _ in range(copies - 1):
        out = (out[:, None] * single[None, :]).ravel()
    return out


def _class_keys(copies: int) -> np.ndarray:
    """Per-word key k1 * (N + 1) + k2 identifying the copy-permutation class."""
    k1 = collective_values([0, 1, 0], copies)
    k2 = collective_values([0, 0, 1], copies)
    return (k1 * (copies + 1) + k2).astype(np.int64)


def _class_words(counts: tuple[int, int, int]) -> list[Word]:
    """All words with digit counts ``counts`` in lexicographic order."""
    out: list[Word] = []

    def rec(prefix, left):
        if not any(left):
            out.append(tuple(prefix))
            return
        for d in range(3):
            if left[d]:
                left[d] -= 1
                prefix.append(d)
                rec(prefix, left)
                prefix.pop()
                left[d] += 1

    rec([], list(counts))
    return out


@dataclass(frozen=True)
class CrossingGroup:
    """Two copy-permutation classes whose additive energies cross during the ramp.

    ``n_counts`` / ``m_counts`` are digit counts (k0, k1, k2); the n class is
    the lower one at A (hence the more populated) and the upper one at B.
    """

    copies: int
    n_counts: tuple[int, int, int]
    m_counts: tuple[int, int, int]
    e1_cross: float
    time: float

    @cached_property
    def n_words(self) -> list[Word]:
        return _class_words(self.n_counts)

    @cached_property
    def m_words(self) -> list[Word]:
        return _class_words(self.m_counts)

    @property
    def key_n(self) -> int:
        return self.n_counts[1] * (self.copies + 1) + self.n_counts[2]

    @property
    def key_m(self) -> int:
        return self.m_counts[1] * (self.copies + 1) + self.m_counts[2]


def _class_energy(params: QutritParams, counts, e1: float) -> float:
    return counts[0] * params.E0 + counts[1] * e1 + counts[2] * params.E2


def _crossings(params: QutritParams, copies: int, t_a: float, t_ab: float) -> list[CrossingGroup]:
    classes = [
        (copies - k1 - k2, k1, k2) for k1 in range(copies + 1) for k2 in range(copies + 1 - k1)
    ]
    e_a, e_b = params.E1_initial, params.E1_final
    scale = CROSSING_TOL * max(1.0, copies * abs(params.E2))
    groups = []
    for x, y in itertools.combinations(classes, 2):
        if x[1] == y[1]:
            continue
        d_a = _class_energy(params, x, e_a) - _class_energy(params, y, e_a)
        d_b = _class_energy(params, x, e_b) - _class_energy(params, y, e_b)
        if abs(d_a) <= scale or abs(d_b) <= scale or (d_a > 0) == (d_b > 0):
            continue
        frac = d_a / (d_a - d_b)
        n, m = (x, y) if d_a < 0 else (y, x)
        groups.append(
            CrossingGroup(
                copies=copies,
                n_counts=n,
                m_counts=m,
                e1_cross=e_a + frac * (e_b - e_a),
                time=t_a + frac * (t_ab - t_a),
            )
        )
    groups.sort(key=lambda g: (g.e1_cross, g.n_counts[::-1], g.m_counts[::-1]))
    return groups


def default_swaps(groups, tau: float = 0.0, mode: str = "finite-tau") -> tuple[SwapSpec, ...]:
    """Disjoint word pairs realizing the crossed-level permutation.

    Within a group the lexicographically ordered words of the two classes are
    matched in order (min(|n|, |m|) pairs). Words already used by an earlier
    group are skipped.
    """
    used: set[Word] = set()
    swaps = []
    for g in groups:
        ns = [w for w in g.n_words if w not in used]
        ms = [w for w in g.m_words if w not in used]
        for n, m in zip(ns, ms):
            used.update((n, m))
            swaps.append(SwapSpec((n, m), tau, mode))
    return tuple(swaps)


@dataclass(frozen=True)
class HamiltonianSchedule:
    """Time-dependent collective Hamiltonian for the compression stroke A -> B.

    The ramp runs on [t_a, t_ab] and the pulse on [t_ab, t_b]. The expansion
    stroke C -> D uses the time-mirrored schedule. ``ramp_time = 0`` executes
    the ramp analytically: it is diagonal, hence populations are untouched.
    """

    params: QutritParams
    copies: int
    swaps: tuple[SwapSpec, ...] = ()
    ramp_time: float = 0.0
    t_a: float = 0.0

    def __post_init__(self):
        if not 1 <= self.copies <= MAX_DENSE_COPIES:
            raise ValidationError(
                f"dense schedule limited to N <= {MAX_DENSE_COPIES} copies, got {self.copies}; "
                "use diagonal_cycle"
            )
        if self.ramp_time < 0:
            raise ValidationError("ramp_time must be >= 0")
        modes = {s.mode for s in self.swaps}
        taus = {s.tau for s in self.swaps if s.mode == "finite-tau"}
        if len(modes) > 1 or len(taus) > 1:
            raise ValidationError("all swaps must share one mode and one pulse window")
        for s in self.swaps:
            if any(len(w) != self.copies for w in s.pair):
                raise ValidationError(f"swap labels {s.pair} do not match N = {self.copies}")
        words = [w for s in self.swaps for w in s.pair]
        if len(set(words)) != len(words):
            raise ValidationError("swap pairs must be disjoint")

    @property
    def mode(self) -> str:
        return self.swaps[0].mode if self.swaps else "none"

    @property
    def tau(self) -> float:
        return self.swaps[0].tau if self.mode == "finite-tau" else 0.0

    @property
    def t_ab(self) -> float:
        return self.t_a + self.ramp_time

    @property
    def t_b(self) -> float:
        return self.t_ab + self.tau

    @property
    def tau_total(self) -> float:
        return 2.0 * (self.ramp_time + self.tau)

    @property
    def dim(self) -> int:
        return 3**self.copies

    def e1(self, t: float) -> float:
        p = self.params
        if t <= self.t_a:
            return p.E1_initial
        if t >= self.t_ab:
            return p.E1_final
        return p.E1_initial + p.E1_shift * (t - self.t_a) / self.ramp_time

    def f(self, t: float) -> float:
        if self.mode != "finite-tau" or not (self.t_ab <= t <= self.t_b):
            return 0.0
        tau = self.tau
        return math.pi**2 / (4.0 * tau) * math.sin(math.pi * (t - self.t_ab) / tau)

    @cached_property
    def coupling(self) -> np.ndarray:
        """Symmetric 0/1 matrix linking every swapped pair of collective levels."""
        x = np.zeros((self.dim, self.dim))
        for s in self.swaps:
            i, j = word_index(s.pair[0]), word_index(s.pair[1])
            x[i, j] = x[j, i] = 1.0
        return x

    def hamiltonian(self, t: float) -> np.ndarray:
        return collective_hamiltonian(self, t)

    def mirrored_hamiltonian(self, t: float) -> np.ndarray:
        return collective_hamiltonian(self, self.t_a + self.t_b - t)

    @cached_property
    def energies_a(self) -> np.ndarray:
        return collective_energies(self.params, self.params.E1_initial, self.copies)

    @cached_property
    def energies_b(self) -> np.ndarray:
        return collective_energies(self.params, self.params.E1_final, self.copies)

    @property
    def h_a(self) -> np.ndarray:
        return np.diag(self.energies_a)

    @property
    def h_b(self) -> np.ndarray:
        return np.diag(self.energies_b)

    def impulse(self) -> np.ndarray:
        """tau -> 0 limit of the pulse: exp(-i pi/2 X) on every coupled pair."""
        spectrum = eig_hermitian(self.coupling)
        v = spectrum.eigenvectors
        return (v * np.exp(-0.5j * math.pi * spectrum.eigenvalues)) @ v.conj().T

    def _pulse(self, rho, steps, hamiltonian):
        if self.mode == "finite-tau":
            return propagate(rho, hamiltonian, self.t_ab, self.t_b, steps)
        if self.mode == "perfect":
            s = self.impulse()
            return s @ rho @ s.conj().T
        return rho

    def compress(self, rho, steps: int = 2000) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        if self.ramp_time > 0:
            rho = propagate(rho, self.hamiltonian, self.t_a, self.t_ab, steps)
        return self._pulse(rho, steps, self.hamiltonian)

    def expand(self, rho, steps: int = 2000) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        if self.mode == "finite-tau":
            # mirrored pulse occupies [t_a, t_a + tau]
            rho = propagate(rho, self.mirrored_hamiltonian, self.t_a, self.t_a + self.tau, steps)
        elif self.mode == "perfect":
            s = self.impulse()
            rho = s.conj().T @ rho @ s
        if self.ramp_time > 0:
            start = self.t_a + self.tau
            rho = propagate(rho, self.mirrored_hamiltonian, start, start + self.ramp_time, steps)
        return rho


def collective_hamiltonian(schedule: HamiltonianSchedule, t: float) -> np.ndarray:
    """Dense 3^N x 3^N Hamiltonian H_N(t): additive energies plus the swap pulse."""
    if schedule.copies > MAX_DENSE_COPIES:
        raise ValidationError(f"dense construction refused for N = {schedule.copies} > 3")
    if t >= schedule.t_ab:
        energies = schedule.energies_b
    elif t <= schedule.t_a:
        energies = schedule.energies_a
    else:
        energies = collective_energies(schedule.params, schedule.e1(t), schedule.copies)
    h = np.diag(energies)
    amp = schedule.f(t)
    if amp:
        h = h + amp * schedule.coupling
    return h


def detect_crossings(schedule) -> list[CrossingGroup]:
    """Collective level crossings of the bare (f = 0) spectrum during the ramp.

    Accepts a ``HamiltonianSchedule`` or a ``(params, copies)`` tuple. Only
    strict sign changes of the energy difference count; touching at an
    endpoint does not.
    """
    if isinstance(schedule, HamiltonianSchedule):
        return _crossings(schedule.params, schedule.copies, schedule.t_a, schedule.t_ab)
    params, copies = schedule
    return _crossings(params, copies, 0.0, 0.0)


def make_schedule(
    params: QutritParams,
    copies: int,
    mode: str = "finite-tau",
    tau: float = 1.0,
    ramp_time: float = 0.0,
) -> HamiltonianSchedule:
    """Schedule whose swap pulses target every detected crossing group.

    ``mode`` is ``"finite-tau"``, ``"perfect"`` or ``"none"`` (pure ramp,
    i.e. the QA protocol). When a crossing group has several
    permutation-equivalent members the lexicographically smallest words are
    coupled first.
    """
    if mode not in MODES:
        raise ValidationError(f"unknown mode {mode!r}; expected one of {MODES}")
    if mode == "none":
        return HamiltonianSchedule(params, copies, (), ramp_time)
    groups = _crossings(params, copies, 0.0, ramp_time)
    swaps = default_swaps(groups, tau if mode == "finite-tau" else 0.0, mode)
    if mode == "finite-tau" and len(swaps) > 1:
        log.warning("finite-tau pulse on %d pairs sharing one window is experimental", len(swaps))
    return HamiltonianSchedule(params, copies, swaps, ramp_time)


def crossed_mask(groups, copies: int) -> np.ndarray:
    keys = _class_keys(copies)
    crossed = {g.key_n for g in groups} | {g.key_m for g in groups}
    return np.isin(keys, list(crossed))


def perfect_swap(rho_diagonal, crossings, energies) -> np.ndarray:
    """Passivize the populations of all crossed levels with respect to ``energies``.

    ``rho_diagonal`` is a population vector or a diagonal density matrix in
    the collective product basis; the output has the same form. Levels that
    took part in no crossing keep their populations.
    """
    rho = np.asarray(rho_diagonal)
    matrix = rho.ndim == 2
    if matrix:
        off = rho - np.diag(np.diag(rho))
        if np.any(np.abs(off) > 1e-12):
            raise ValidationError(
                f"perfect_swap needs a diagonal state, off-diagonal norm {np.max(np.abs(off)):.3e}"
            )
        pops = np.real(np.diag(rho)).astype(float)
    else:
        pops = rho.astype(float)
    energies = np.asarray(energies, dtype=float)
    copies = round(math.log(pops.size, 3))
    if 3**copies != pops.size or energies.size != pops.size:
        raise ValidationError("state and energies must live on the 3^N collective basis")
    out = pops.copy()
    if crossings:
        mask = crossed_mask(crossings, copies)
        out[mask] = passive_populations(pops[mask], energies[mask])[0]
    return np.diag(out).astype(rho.dtype) if matrix else out


def _check_copies(copies: int, limit: int) -> None:
    if not 1 <= copies <= limit:
        raise ValidationError(f"number of copies must be in [1, {limit}], got {copies}")


class DiagonalProtocol:
    """QA or perfect-swap strokes acting on 3^N population vectors."""

    tau_total = 0.0

    def __init__(self, params: QutritParams, copies: int, mode: str = "perfect"):
        _check_copies(copies, MAX_DIAGONAL_COPIES)
        if mode not in ("QA", "perfect"):
            raise ValidationError(f"diagonal path supports modes 'QA' and 'perfect', got {mode!r}")
        self.params = params
        self.copies = copies
        self.mode = mode
        self.h_a = collective_energies(params, params.E1_initial, copies)
        self.h_b = collective_energies(params, params.E1_final, copies)
        self.crossings = _crossings(params, copies, 0.0, 0.0) if mode == "perfect" else []

    def compress(self, pops, steps=None):
        return perfect_swap(pops, self.crossings, self.h_b)

    def expand(self, pops, steps=None):
        return perfect_swap(pops, self.crossings, self.h_a)


def diagonal_cycle(params: QutritParams, copies: int, beta_c: float, beta_h: float, mode: str = "perfect") -> CycleResult:
    """QA or perfect-swap cycle on the 3^N population vector.

    Thermal populations are products of single-copy Boltzmann factors; the QA
    stroke keeps populations, the perfect stroke applies ``perfect_swap``.
    """
    check_temperatures(beta_c, beta_h)
    proto = DiagonalProtocol(params, copies, mode)
    single_a = thermal_populations(params.energies(params.E1_initial), beta_c)
    single_c = thermal_populations(params.energies(params.E1_final), beta_h)
    rho_a = product_populations(single_a, copies)
    rho_c = product_populations(single_c, copies)
    points = (
        CyclePoint.from_state("A", proto.h_a, rho_a),
        CyclePoint.from_state("B", proto.h_b, proto.compress(rho_a)),
        CyclePoint.from_state("C", proto.h_b, rho_c),
        CyclePoint.from_state("D", proto.h_a, proto.expand(rho_c)),
    )
    return evaluate_cycle(points, beta_c, beta_h)


@dataclass(frozen=True)
class ReferenceCycle:
    """Single-copy thermal-reference cycle; its heats are extensive in N."""

    beta_B_ref: float
    beta_D_ref: float
    Q_h_ref: float
    Q_c_ref: float
    energy_B_ref: float
    energy_D_ref: float

    @property
    def is_engine(self) -> bool:
        return self.Q_h_ref > 0 and self.Q_c_ref < 0 and self.Q_h_ref + self.Q_c_ref > 0

    @property
    def eta(self) -> float:
        return 1.0 + self.Q_c_ref / self.Q_h_ref


def reference_cycle(params: QutritParams, beta_c: float, beta_h: float) -> ReferenceCycle:
    e_a = params.energies(params.E1_initial)
    e_b = params.energies(params.E1_final)
    p_a = thermal_populations(e_a, beta_c)
    p_c = thermal_populations(e_b, beta_h)
    beta_b = reference_beta(e_b, thermal_entropy(e_a, beta_c))
    beta_d = reference_beta(e_a, thermal_entropy(e_b, beta_h))
    energy_b = float(e_b @ thermal_populations(e_b, beta_b))
    energy_d = float(e_a @ thermal_populations(e_a, beta_d))
    return ReferenceCycle(
        beta_B_ref=beta_b,
        beta_D_ref=beta_d,
        Q_h_ref=float(e_b @ p_c) - energy_b,
        Q_c_ref=float(e_a @ p_a) - energy_d,
        energy_B_ref=energy_b,
        energy_D_ref=energy_d,
    )


def many_body_limit(params: QutritParams, beta_c: float, beta_h: float) -> float:
    """N -> infinity efficiency 1 + Q_c^ref / Q_h^ref of the perfect-swap protocol.

    Returns 0.0 (with a warning) in the degenerate case where the reference
    cycle exchanges no heat at all; raises outside the engine regime.
    """
    check_temperatures(beta_c, beta_h)
    ref = reference_cycle(params, beta_c, beta_h)
    if abs(ref.Q_h_ref) < 1e-14 and abs(ref.Q_c_ref) < 1e-14:
        log.warning("reference cycle exchanges no heat; no engine, limit reported as 0")
        return 0.0
    if not ref.is_engine:
        raise ValidationError(
            f"reference cycle is not an engine (Q_h_ref={ref.Q_h_ref:.3e}, Q_c_ref={ref.Q_c_ref:.3e})"
        )
    return ref.eta


@dataclass(frozen=True)
class ScalingPoint:
    """Perfect-swap or QA cycle of N copies evaluated on permutation classes."""

    copies: int
    W: float
    Q_h: float
    Q_c: float
    eta_carnot: float
    distance_ratio: float  # D(rho_B || omega_B) / (beta_B_ref Q_h_ref)

    @property
    def is_engine(self) -> bool:
        return self.W < 0 and self.Q_h > 0

    @property
    def eta(self) -> float:
        return -self.W / self.Q_h if self.is_engine else math.nan

    @property
    def eta_raw(self) -> float:
        return -self.W / self.Q_h


def _passive_energy(log_pops, counts, energies) -> float:
    """Energy of the passive rearrangement of a state given per class.

    Classes carry ``counts[i]`` degenerate states, each with population
    ``exp(log_pops[i])`` and energy ``energies[i]``.
    """
    by_pop = sorted(range(len(log_pops)), key=lambda i: -log_pops[i])
    by_energy = sorted(range(len(energies)), key=lambda i: energies[i])
    total = 0.0
    i = j = 0
    left_i, left_j = counts[by_pop[0]], counts[by_energy[0]]
    while i < len(by_pop):
        take = min(left_i, left_j)
        total += math.exp(math.log(take) + log_pops[by_pop[i]]) * energies[by_energy[j]]
        left_i -= take
        left_j -= take
        if left_i == 0:
            i += 1
            if i < len(by_pop):
                left_i = counts[by_pop[i]]
        if left_j == 0:
            j += 1
            if j < len(by_energy):
                left_j = counts[by_energy[j]]
    return total


def symmetric_cycle(params: QutritParams, copies: int, beta_c: float, beta_h: float, mode: str = "perfect") -> ScalingPoint:
    """Cycle quantities for large N using the (N+1)(N+2)/2 permutation classes.

    Product states and additive energies depend on a word only through its
    digit counts, so both are stored per class with an exact integer
    degeneracy. In perfect mode the populations are passivized over the whole
    spectrum; for states reached by a QA ramp from a thermal state this equals
    passivization over the crossed levels.
    """
    check_temperatures(beta_c, beta_h)
    if copies < 1:
        raise ValidationError("need at least one copy")
    if mode not in ("QA", "perfect"):
        raise ValidationError(f"unknown mode {mode!r}")
    e_a = params.energies(params.E1_initial)
    e_b = params.energies(params.E1_final)
    p_a = thermal_populations(e_a, beta_c)
    p_c = thermal_populations(e_b, beta_h)
    energy_a = copies * float(e_a @ p_a)
    energy_c = copies * float(e_b @ p_c)
    if mode == "QA":
        energy_b = copies * float(e_b @ p_a)
        energy_d = copies * float(e_a @ p_c)
    else:
        classes = [(copies - k1 - k2, k1, k2) for k1 in range(copies + 1) for k2 in range(copies + 1 - k1)]
        counts = [math.comb(copies, k[1]) * math.comb(copies - k[1], k[2]) for k in classes]
        la, lc = np.log(p_a), np.log(p_c)
        log_a = [float(np.dot(k, la)) for k in classes]
        log_c = [float(np.dot(k, lc)) for k in classes]
        en_a = [float(np.dot(k, e_a)) for k in classes]
        en_b = [float(np.dot(k, e_b)) for k in classes]
        energy_b = _passive_energy(log_a, counts, en_b)
        energy_d = _passive_energy(log_c, counts, en_a)
    w = energy_b - energy_a + energy_d - energy_c
    q_h = energy_c - energy_b
    q_c = energy_a - energy_d
    ref = reference_cycle(params, beta_c, beta_h)
    ratio = (energy_b - copies * ref.energy_B_ref) / (copies * ref.Q_h_ref)
    return ScalingPoint(copies, w, q_h, q_c, 1.0 - beta_h / beta_c, ratio)
