"""Dense quantum-state primitives: spectra, Gibbs states, entropies, propagation.

Units are fixed throughout the package: E2 = 1 and hbar = k_B = 1, so energies
are in units of the top qutrit level and times in units of 1/E2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Callable

import numpy as np

from qotto.errors import ConvergenceError, ValidationError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-11
PSD_TOL = 1e-12
CLAMP_TOL = 1e-9
DEGENERACY_TOL = 1e-10
MAX_DENSE_DIM = 10_000
POPULATION_TOL = 1e-9


@dataclass(frozen=True)
class Spectrum:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def hermiticity_error(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def _as_square(m) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    return m


def check_hermitian(h, tol: float = HERMITIAN_TOL) -> np.ndarray:
    h = _as_square(h)
    err = hermiticity_error(h)
    scale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
    if err > tol * scale:
        raise ValidationError(f"matrix is not Hermitian: max|H - H^dag| = {err:.3e}")
    return h


def check_density_matrix(rho, tol: float = TRACE_TOL) -> np.ndarray:
    """Validate a density matrix (2-D) or a population vector (1-D)."""
    rho = np.asarray(rho)
    if rho.ndim == 1:
        total = float(np.sum(rho))
        if abs(total - 1.0) > tol:
            raise ValidationError(f"populations sum to {total!r}, not 1")
        if rho.size and float(np.min(rho)) < -PSD_TOL:
            raise ValidationError(f"negative population {float(np.min(rho)):.3e}")
        return rho
    rho = check_hermitian(rho, tol=1e-10)
    tr = np.trace(rho)
    if abs(tr - 1.0) > tol:
        raise ValidationError(f"density matrix has trace {tr!r}, not 1")
    lam_min = float(np.linalg.eigvalsh(rho)[0])
    if lam_min < -PSD_TOL * 10:
        raise ValidationError(f"density matrix not PSD: smallest eigenvalue {lam_min:.3e}")
    return rho


def eig_hermitian(h) -> Spectrum:
    """Diagonalize a Hermitian matrix with a reproducible ordering.

    Eigenvalues come out ascending. Near-degenerate eigenvalues
    (closer than ``DEGENERACY_TOL``) are ordered by the index of the dominant
    basis component of their eigenvectors, and each eigenvector is phased so
    that this component is real and positive. Exactly diagonal input is
    short-circuited so that the eigenvectors are unit vectors.
    """
    h = check_hermitian(h)
    n = h.shape[0]
    off = h - np.diag(np.diag(h))
    if not np.any(off):
        vals = np.real(np.diag(h)).astype(float)
        order = np.argsort(vals, kind="stable")
        vecs = np.eye(n, dtype=complex)[:, order]
        return Spectrum(vals[order], vecs)

    vals, vecs = np.linalg.eigh(h)
    dominant = np.argmax(np.abs(vecs), axis=0)
    # group near-degenerate runs and order each run by dominant index
    order = np.arange(n)
    start = 0
    for k in range(1, n + 1):
        if k == n or vals[k] - vals[k - 1] > DEGENERACY_TOL * max(1.0, abs(vals[k - 1])):
            run = order[start:k]
            order[start:k] = run[np.argsort(dominant[run], kind="stable")]
            start = k
    vals = vals[order]
    vecs = vecs[:, order]
    dominant = dominant[order]
    pivot = vecs[dominant, np.arange(n)]
    vecs = vecs * (np.abs(pivot) / pivot)
    return Spectrum(vals, vecs)


def thermal_populations(energies, beta: float) -> np.ndarray:
    """Boltzmann weights exp(-beta E)/Z, shifted by the minimum energy.

    ``beta = np.inf`` returns the uniform distribution over the ground level(s).
    """
    e = np.asarray(energies, dtype=float)
    if np.isnan(beta) or beta < 0:
        raise ValidationError(f"inverse temperature must be >= 0, got {beta!r}")
    shifted = e - e.min()
    if np.isinf(beta):
        ground = shifted <= DEGENERACY_TOL * max(1.0, float(np.max(np.abs(e))))
        return ground / np.count_nonzero(ground)
    w = np.exp(-beta * shifted)
    return w / w.sum()


def log_partition(energies, beta: float) -> float:
    e = np.asarray(energies, dtype=float)
    e0 = float(e.min())
    return -beta * e0 + float(np.log(np.sum(np.exp(-beta * (e - e0)))))


def gibbs_state(h, beta: float) -> np.ndarray:
    """Thermal state exp(-beta H)/Tr exp(-beta H) built in the eigenbasis of ``h``."""
    spec = eig_hermitian(h)
    p = thermal_populations(spec.eigenvalues, beta)
    v = spec.eigenvectors
    return (v * p) @ v.conj().T


def _clamped_spectrum(p: np.ndarray) -> np.ndarray:
    lo = float(np.min(p)) if p.size else 0.0
    hi = float(np.max(p)) if p.size else 0.0
    clamp = max(0.0, -lo, hi - 1.0)
    if clamp > CLAMP_TOL:
        raise ValidationError(f"spectrum leaves [0, 1] by {clamp:.3e}")
    return np.clip(p, 0.0, 1.0)


def shannon_entropy(populations) -> float:
    """-sum p ln p with 0 ln 0 := 0."""
    p = _clamped_spectrum(np.asarray(populations, dtype=float))
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


def von_neumann_entropy(rho) -> float:
    """S(rho) = -Tr rho ln rho; 1-D input is treated as a diagonal state."""
    rho = np.asarray(rho)
    if rho.ndim == 1:
        return shannon_entropy(rho)
    rho = check_hermitian(rho, tol=1e-10)
    return shannon_entropy(np.linalg.eigvalsh(rho))


def expectation(h, rho) -> float:
    """Tr[H rho]; vectors are read as diagonals."""
    h = np.asarray(h)
    rho = np.asarray(rho)
    if h.ndim == 1 and rho.ndim == 1:
        return float(h @ rho)
    if h.ndim == 1:
        return float(np.real(h @ np.diag(rho)))
    if rho.ndim == 1:
        return float(np.real(np.diag(h) @ rho))
    return float(np.real(np.einsum("ij,ji->", h, rho)))


def tensor_product(*factors) -> np.ndarray:
    """Kronecker product; the leftmost factor is the most significant digit."""
    if not factors:
        raise ValidationError("tensor_product needs at least one factor")
    mats = [np.asarray(f) for f in factors]
    dim = int(np.prod([m.shape[0] for m in mats]))
    if dim > MAX_DENSE_DIM:
        raise ValidationError(
            f"dense tensor product of dimension {dim} exceeds {MAX_DENSE_DIM}; "
            "use the diagonal fast path"
        )
    return reduce(np.kron, mats)


def _hamiltonian_callable(schedule) -> Callable[[float], np.ndarray]:
    if hasattr(schedule, "hamiltonian"):
        return schedule.hamiltonian
    if callable(schedule):
        return schedule
    raise ValidationError("schedule must be callable or expose .hamiltonian(t)")


def _blocks(pattern: np.ndarray) -> list[np.ndarray]:
    """Connected components of the nonzero pattern of a (batched) Hamiltonian."""
    n = pattern.shape[0]
    seen = np.zeros(n, dtype=bool)
    out = []
    for root in range(n):
        if seen[root]:
            continue
        stack, comp = [root], []
        seen[root] = True
        while stack:
            k = stack.pop()
            comp.append(k)
            for j in np.flatnonzero(pattern[k] & ~seen):
                seen[j] = True
                stack.append(j)
        out.append(np.array(sorted(comp)))
    return out


def _ordered_product(us: np.ndarray) -> np.ndarray:
    """U_n ... U_2 U_1 as a balanced tree, one batched matmul per level."""
    while us.shape[0] > 1:
        if us.shape[0] % 2:
            us = np.concatenate([us, np.eye(us.shape[1], dtype=complex)[None]])
        us = us[1::2] @ us[0::2]
    return us[0]


def propagator(schedule, t0: float, t1: float, steps: int) -> np.ndarray:
    """Time-ordered product of midpoint exponentials exp(-i H(t_mid) dt).

    Levels that never couple at any midpoint are propagated as separate
    blocks; uncoupled single levels just accumulate a phase.
    """
    if not t1 > t0:
        raise ValidationError(f"need t1 > t0, got [{t0}, {t1}]")
    if steps < 1:
        raise ValidationError("steps must be positive")
    ham = _hamiltonian_callable(schedule)
    dt = (t1 - t0) / steps
    mids = t0 + (np.arange(steps) + 0.5) * dt
    hs = np.stack([np.asarray(ham(t), dtype=complex) for t in mids])
    dim = hs.shape[1]
    u = np.zeros((dim, dim), dtype=complex)
    for block in _blocks(np.any(hs != 0, axis=0)):
        if block.size == 1:
            k = block[0]
            u[k, k] = np.exp(-1j * dt * np.sum(hs[:, k, k]))
            continue
        sub = hs[:, block[:, None], block[None, :]]
        vals, vecs = np.linalg.eigh(sub)
        phases = np.exp(-1j * vals * dt)
        us = (vecs * phases[:, None, :]) @ np.conj(np.swapaxes(vecs, 1, 2))
        u[np.ix_(block, block)] = _ordered_product(us)
    return u


def propagate(
    rho,
    schedule,
    t0: float,
    t1: float,
    steps: int = 2000,
    *,
    adaptive: bool = True,
    max_doublings: int = 8,
) -> np.ndarray:
    """Evolve ``rho`` from ``t0`` to ``t1`` under the von Neumann equation.

    With ``adaptive`` the step count is doubled until no population (diagonal
    element) moves by more than 1e-9 between ``n`` and ``2n`` steps; the
    ``2n``-step result is returned. ``ConvergenceError`` is raised when that
    never happens within ``max_doublings``.
    """
    rho = np.asarray(rho, dtype=complex)
    if not adaptive:
        u = propagator(schedule, t0, t1, steps)
        return u @ rho @ u.conj().T

    u = propagator(schedule, t0, t1, steps)
    prev = u @ rho @ u.conj().T
    n = steps
    for _ in range(max_doublings):
        n *= 2
        u = propagator(schedule, t0, t1, n)
        cur = u @ rho @ u.conj().T
        if np.max(np.abs(np.diag(cur) - np.diag(prev))) <= POPULATION_TOL:
            return cur
        prev = cur
    raise ConvergenceError(
        f"propagation on [{t0}, {t1}] not converged after {n} steps"
    )


def unitarity_error(u) -> float:
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def commutator_norm(a, b) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim == 1 or b.ndim == 1:
        a = np.diag(a) if a.ndim == 1 else a
        b = np.diag(b) if b.ndim == 1 else b
    return float(np.max(np.abs(a @ b - b @ a)))
