"""Qutrits realized as spin-1 blocks of qubit pairs.

A qubit pair's fully symmetric subspace is a spin-1 system. The quench
Hamiltonian Omega [Jz + b(t) (Jz^2 - 1)] only moves the m = 0 level and is
diagonal at all times; the swap S = exp(-i pi H_sw) of two such blocks
exchanges |m1=0, m2=0> with |m1=-1, m2=+1>.

Mapping to the qutrit protocol: with Omega = E2 / 2 the levels
m = -1, 0, +1 correspond to qutrit levels 0, 1, 2 after the constant shift
+Omega, and b = 1 - E1 / Omega.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from qotto.cycle import CyclePoint, CycleResult, check_temperatures, evaluate_cycle
from qotto.errors import ValidationError
from qotto.linalg import eig_hermitian, gibbs_state, propagate, tensor_product

MAX_QUBITS = 10

SIGMA_Z = np.diag([1.0, -1.0])
SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]])  # |up><down|


@dataclass(frozen=True)
class SpinOperators:
    jz: np.ndarray
    jplus: np.ndarray
    jminus: np.ndarray
    isometry: np.ndarray | None = None  # columns: symmetric Dicke states, m ascending

    @property
    def dim(self) -> int:
        return self.jz.shape[0]

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.dim)


def _site_operator(op: np.ndarray, site: int, n: int) -> np.ndarray:
    factors = [np.eye(2)] * n
    factors[site] = op
    return tensor_product(*factors)


def symmetric_isometry(n_qubits: int) -> np.ndarray:
    """2^n x (n+1) isometry onto the Dicke states |J = n/2, m>, m ascending."""
    dim = 2**n_qubits
    iso = np.zeros((dim, n_qubits + 1))
    for ups in range(n_qubits + 1):
        # qubit value 0 is spin up; m = ups - n/2
        for pos in combinations(range(n_qubits), ups):
            idx = sum(1 << (n_qubits - 1 - p) for p in range(n_qubits) if p not in pos)
            iso[idx, ups] = 1.0
        iso[:, ups] /= math.sqrt(math.comb(n_qubits, ups))
    return iso


def build_spin_ops(n_qubits: int, project_symmetric: bool = True) -> SpinOperators:
    """Collective spin J_a = 1/2 sum_i sigma_a^i and ladders J_+- = sum_i sigma_+-^i."""
    if n_qubits < 1:
        raise ValidationError("need at least one qubit")
    if n_qubits > MAX_QUBITS:
        raise ValidationError(f"dense spin operators refused above {MAX_QUBITS} qubits")
    jz = 0.5 * sum(_site_operator(SIGMA_Z, i, n_qubits) for i in range(n_qubits))
    jp = sum(_site_operator(SIGMA_PLUS, i, n_qubits) for i in range(n_qubits))
    if not project_symmetric:
        return SpinOperators(jz, jp, jp.T.copy())
    iso = symmetric_isometry(n_qubits)
    jz_s = iso.T @ jz @ iso
    jp_s = iso.T @ jp @ iso
    return SpinOperators(jz_s, jp_s, jp_s.T.copy(), iso)


def quench_hamiltonian(ops: SpinOperators, omega: float, b: float) -> np.ndarray:
    """Omega [Jz + b (Jz^2 - 1)]; diag(-Omega, -b Omega, Omega) on a spin-1 block."""
    jz = ops.jz
    return omega * (jz + b * (jz @ jz - ops.identity))


def pair_hamiltonian(ops1: SpinOperators, ops2: SpinOperators, omega: float, b: float) -> np.ndarray:
    return np.kron(quench_hamiltonian(ops1, omega, b), ops2.identity) + np.kron(
        ops1.identity, quench_hamiltonian(ops2, omega, b)
    )


def quench_propagator(omega: float, t: float, b_integral: float) -> np.ndarray:
    """Closed-form propagator of the spin-1 quench for any b(t) with integral ``b_integral``."""
    return np.diag([np.exp(1j * omega * t), np.exp(1j * omega * b_integral), np.exp(-1j * omega * t)])


def swap_hamiltonian(ops1: SpinOperators, ops2: SpinOperators) -> np.ndarray:
    p1 = ops1.identity - ops1.jz @ ops1.jz
    p2 = ops2.identity - ops2.jz @ ops2.jz
    z1 = ops1.jz @ ops1.jz - ops1.jz
    z2 = ops2.jz @ ops2.jz + ops2.jz
    return (
        0.25 * np.kron(ops1.jminus @ p1, ops2.jplus @ p2)
        + 0.25 * np.kron(p1 @ ops1.jplus, p2 @ ops2.jminus)
        - 0.5 * np.kron(p1, p2)
        - 0.125 * np.kron(z1, z2)
    )


def swap_unitary(ops1: SpinOperators, ops2: SpinOperators) -> np.ndarray:
    """S = exp(-i pi H_sw), exponentiated exactly in the eigenbasis of H_sw."""
    spectrum = eig_hermitian(swap_hamiltonian(ops1, ops2))
    v = spectrum.eigenvectors
    return (v * np.exp(-1j * math.pi * spectrum.eigenvalues)) @ v.conj().T


def off_sector_action(s: np.ndarray, isometry: np.ndarray) -> dict:
    """How S acts outside the symmetric sector spanned by ``isometry``'s columns.

    ``leakage`` measures transitions out of the sector (zero when S preserves
    it), ``nontrivial`` how far S is from the identity on the complement.
    """
    proj = isometry @ isometry.conj().T
    comp = np.eye(proj.shape[0]) - proj
    return {
        "leakage": float(np.linalg.norm(comp @ s @ proj, 2)),
        "nontrivial": float(np.linalg.norm(comp @ s @ comp - comp, 2)),
    }


def omega_for_e2(e2: float = 1.0) -> float:
    return 0.5 * e2


def b_for_e1(e1: float, e2: float = 1.0) -> float:
    return 1.0 - e1 / omega_for_e2(e2)


class QubitPairSwapProtocol:
    """Two spin-1 blocks: diagonal quench ramp followed by the swap S.

    ``project_symmetric=False`` works on the full four-qubit space; the
    thermal states are then prepared inside the symmetric-symmetric sector.
    A ``ramp_time > 0`` integrates the (diagonal) ramp numerically.
    """

    tau_total = 0.0

    def __init__(self, e1_initial: float, e1_final: float, project_symmetric: bool = True,
                 ramp_time: float = 0.0, e2: float = 1.0):
        self.ops = build_spin_ops(2, project_symmetric)
        self.omega = omega_for_e2(e2)
        self.b_a = b_for_e1(e1_initial, e2)
        self.b_b = b_for_e1(e1_final, e2)
        self.ramp_time = ramp_time
        self.tau_total = 2.0 * ramp_time
        shift = 2 * self.omega * np.eye(self.ops.dim**2)
        self.h_a = pair_hamiltonian(self.ops, self.ops, self.omega, self.b_a) + shift
        self.h_b = pair_hamiltonian(self.ops, self.ops, self.omega, self.b_b) + shift
        self.swap = swap_unitary(self.ops, self.ops)
        iso = symmetric_isometry(2)
        self.sector = np.eye(9) if project_symmetric else np.kron(iso, iso)

    def hamiltonian(self, t: float) -> np.ndarray:
        frac = min(max(t / self.ramp_time, 0.0), 1.0) if self.ramp_time > 0 else 1.0
        b = self.b_a + (self.b_b - self.b_a) * frac
        return pair_hamiltonian(self.ops, self.ops, self.omega, b) + 2 * self.omega * np.eye(self.ops.dim**2)

    def thermal(self, h: np.ndarray, beta: float) -> np.ndarray:
        v = self.sector
        return v @ gibbs_state(v.T @ h @ v, beta) @ v.T

    def _ramp(self, rho, steps, reverse=False):
        if self.ramp_time <= 0:
            return rho
        ham = (lambda t: self.hamiltonian(self.ramp_time - t)) if reverse else self.hamiltonian
        return propagate(rho, ham, 0.0, self.ramp_time, steps)

    def compress(self, rho, steps: int = 2000):
        rho = self._ramp(np.asarray(rho, dtype=complex), steps)
        return self.swap @ rho @ self.swap.conj().T

    def expand(self, rho, steps: int = 2000):
        rho = self.swap.conj().T @ np.asarray(rho, dtype=complex) @ self.swap
        return self._ramp(rho, steps, reverse=True)


def qubit_cycle(params, beta_c: float, beta_h: float, project_symmetric: bool = False,
                ramp_time: float = 0.0, steps: int = 2000) -> CycleResult:
    """Two-qutrit perfect-swap cycle carried out with spin-1 blocks of qubit pairs."""
    check_temperatures(beta_c, beta_h)
    proto = QubitPairSwapProtocol(params.E1_initial, params.E1_final, project_symmetric,
                                  ramp_time, params.E2)
    if params.E0 != 0.0:
        raise ValidationError("the spin-1 mapping assumes E0 = 0")
    rho_a = proto.thermal(proto.h_a, beta_c)
    rho_c = proto.thermal(proto.h_b, beta_h)
    points = (
        CyclePoint.from_state("A", proto.h_a, rho_a),
        CyclePoint.from_state("B", proto.h_b, proto.compress(rho_a, steps)),
        CyclePoint.from_state("C", proto.h_b, rho_c),
        CyclePoint.from_state("D", proto.h_a, proto.expand(rho_c, steps)),
    )
    return evaluate_cycle(points, beta_c, beta_h, proto.tau_total)
