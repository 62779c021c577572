"""Passive states, ergotropy, entropy-matched thermal references, relative entropy.

Every function accepts either dense matrices or the diagonal representation
(1-D arrays of energies / populations); the diagonal form is what the
many-copy fast paths use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qotto.errors import UnattainableEntropyError, ValidationError
from qotto.linalg import (
    DEGENERACY_TOL,
    check_hermitian,
    commutator_norm,
    eig_hermitian,
    expectation,
    gibbs_state,
    log_partition,
    shannon_entropy,
    thermal_populations,
    von_neumann_entropy,
)

DIAGONAL_TOL = 1e-10
BETA_RTOL = 1e-15
ENTROPY_TOL = 1e-9


@dataclass(frozen=True)
class PassivizationResult:
    passive_state: np.ndarray
    # permutation[i] = energy slot that receives the population found at slot i
    permutation: np.ndarray
    ergotropy: float


@dataclass(frozen=True)
class ThermalReference:
    beta_ref: float
    omega: np.ndarray
    hamiltonian_tag: str = ""


def _shells(energies: np.ndarray) -> list[np.ndarray]:
    """Index groups of (near-)degenerate energies, in ascending energy order."""
    order = np.argsort(energies, kind="stable")
    scale = max(1.0, float(np.max(np.abs(energies)))) if energies.size else 1.0
    shells, current = [], [order[0]]
    for a, b in zip(order[:-1], order[1:]):
        if energies[b] - energies[a] > DEGENERACY_TOL * scale:
            shells.append(np.array(current))
            current = []
        current.append(b)
    shells.append(np.array(current))
    return shells


def _energy_basis(rho, h, tol: float):
    """Return (energies, populations, basis) with rho diagonal in ``basis``.

    ``basis`` is None for the diagonal representation. Coherences inside a
    degenerate shell are rotated away; coherences between shells are an error.
    """
    rho = np.asarray(rho)
    h = np.asarray(h)
    if h.ndim == 1:
        if rho.ndim == 1:
            return h.astype(float), np.real(rho).astype(float), None
        h = np.diag(h)
    else:
        h = check_hermitian(h)
    if rho.ndim == 1:
        rho = np.diag(rho)
    spec = eig_hermitian(h)
    v = spec.eigenvectors
    r = v.conj().T @ rho @ v
    energies = spec.eigenvalues
    pops = np.real(np.diag(r)).copy()
    basis = v.copy()
    mask = np.ones_like(r, dtype=bool)
    for shell in _shells(energies):
        mask[np.ix_(shell, shell)] = False
        if shell.size > 1:
            block = r[np.ix_(shell, shell)]
            if np.max(np.abs(block - np.diag(np.diag(block)))) > 0:
                w, u = np.linalg.eigh(block)
                pops[shell] = w[::-1]
                basis[:, shell] = v[:, shell] @ u[:, ::-1]
    off = float(np.max(np.abs(r[mask]))) if mask.any() else 0.0
    if off > tol:
        raise ValidationError(
            f"state is not diagonal in the energy eigenbasis: off-diagonal norm {off:.3e}"
        )
    return energies, pops, basis


def passive_populations(populations, energies) -> tuple[np.ndarray, np.ndarray]:
    """Sort populations descending onto energies ascending.

    Both sorts are stable, so ties keep their original relative order.
    Returns ``(passive, permutation)`` with ``passive[permutation[i]] == populations[i]``.
    """
    p = np.asarray(populations, dtype=float)
    e = np.asarray(energies, dtype=float)
    slots = np.argsort(e, kind="stable")
    ranked = np.argsort(-p, kind="stable")
    perm = np.empty(p.size, dtype=int)
    perm[ranked] = slots
    passive = np.empty_like(p)
    passive[perm] = p
    return passive, perm


def make_passive(rho, h) -> PassivizationResult:
    """Passive state reachable from ``rho`` by permuting energy-level populations."""
    energies, pops, basis = _energy_basis(rho, h, DIAGONAL_TOL)
    passive, perm = passive_populations(pops, energies)
    ergotropy = float(energies @ pops - energies @ passive)
    if basis is None:
        state = passive
    else:
        state = (basis * passive) @ basis.conj().T
    return PassivizationResult(state, perm, ergotropy)


def ergotropy(rho, h) -> float:
    return make_passive(rho, h).ergotropy


def is_passive(rho, h, tol: float = 1e-10) -> bool:
    """True iff rho commutes with h and populations do not grow with energy.

    Degenerate shells are compared as a whole: the smallest population of a
    lower shell must not fall below the largest population of a higher one
    (with slack ``tol``).
    """
    rho_a = np.asarray(rho)
    h_a = np.asarray(h)
    if not (rho_a.ndim == 1 and h_a.ndim == 1) and commutator_norm(rho_a, h_a) >= tol:
        return False
    try:
        energies, pops, _ = _energy_basis(rho_a, h_a, tol)
    except ValidationError:
        return False
    floor = np.inf
    for shell in _shells(energies):
        shell_pops = pops[shell]
        if float(np.max(shell_pops)) > floor + tol:
            return False
        floor = min(floor, float(np.min(shell_pops)))
    return True


def _spectrum_of(h) -> np.ndarray:
    h = np.asarray(h)
    if h.ndim == 1:
        return np.sort(h.astype(float))
    return eig_hermitian(h).eigenvalues


def thermal_entropy(energies, beta: float) -> float:
    return shannon_entropy(thermal_populations(energies, beta))


def entropy_range(energies) -> tuple[float, float]:
    """(ground-degeneracy entropy, ln dim): the entropies Gibbs states can reach."""
    e = _spectrum_of(energies)
    return thermal_entropy(e, np.inf), float(np.log(e.size))


def reference_beta(energies, s_target: float) -> float:
    """Inverse temperature whose Gibbs state of ``energies`` has entropy ``s_target``.

    Thermal entropy decreases strictly in beta, so the root is bracketed by
    doubling an upper bound from beta = 1 and then bisected down to machine
    resolution.
    """
    e = _spectrum_of(energies)
    s_min, s_max = entropy_range(e)
    if not (s_min - ENTROPY_TOL <= s_target <= s_max + ENTROPY_TOL):
        raise UnattainableEntropyError(
            f"entropy {s_target!r} unattainable; Gibbs states span [{s_min!r}, {s_max!r}]"
        )
    if s_target >= s_max - 1e-14:
        return 0.0
    if s_target <= s_min + 1e-14:
        return np.inf

    lo, hi = 0.0, 1.0
    while thermal_entropy(e, hi) > s_target:
        lo, hi = hi, 2.0 * hi
        if hi > 1e12:
            raise ValidationError(f"entropy {s_target!r} too close to the ground-state limit")
    while hi - lo > BETA_RTOL * hi:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if thermal_entropy(e, mid) > s_target:
            lo = mid
        else:
            hi = mid
    beta = 0.5 * (lo + hi)
    residual = abs(thermal_entropy(e, beta) - s_target)
    if residual > ENTROPY_TOL:
        raise ValidationError(f"entropy match failed, residual {residual:.3e}")
    return beta


def reference_temperature(h, s_target: float, tag: str = "") -> ThermalReference:
    """Gibbs state of ``h`` with entropy ``s_target`` (same representation as ``h``)."""
    beta = reference_beta(h, s_target)
    h = np.asarray(h)
    omega = thermal_populations(h, beta) if h.ndim == 1 else gibbs_state(h, beta)
    return ThermalReference(beta, omega, tag)


def relative_entropy(rho, omega) -> float:
    """Quantum relative entropy D(rho || omega) = Tr rho (ln rho - ln omega).

    Returns ``inf`` when rho has weight outside the support of omega.
    """
    rho = np.asarray(rho)
    omega = np.asarray(omega)
    if rho.ndim == 1 and omega.ndim == 1:
        p = np.clip(rho.astype(float), 0.0, None)
        q = omega.astype(float)
        nz = p > 0
        if np.any(q[nz] <= 0):
            return np.inf
        d = float(np.sum(p[nz] * (np.log(p[nz]) - np.log(q[nz]))))
    else:
        rho = np.diag(rho) if rho.ndim == 1 else rho
        omega = np.diag(omega) if omega.ndim == 1 else omega
        lam = np.clip(np.linalg.eigvalsh(rho), 0.0, None)
        mu, w = np.linalg.eigh(omega)
        weights = np.real(np.einsum("ij,jk,ki->i", w.conj().T, rho, w))
        support = mu > 0
        if np.any(weights[~support] > 1e-14):
            return np.inf
        neg_s = float(np.sum(lam[lam > 0] * np.log(lam[lam > 0])))
        d = neg_s - float(np.sum(weights[support] * np.log(mu[support])))
    if d < -1e-10:
        raise ValidationError(f"relative entropy came out negative ({d:.3e})")
    return max(d, 0.0)


def thermal_relative_entropy(rho, h, beta: float) -> float:
    """D(rho || gibbs(h, beta)) = beta Tr[h rho] + ln Z - S(rho).

    Built from the energies rather than the Gibbs populations, so it stays
    finite when those populations underflow at large ``beta``.
    """
    if not 0 <= beta < np.inf:
        raise ValidationError(f"need a finite beta >= 0, got {beta!r}")
    h = np.asarray(h)
    rho = np.asarray(rho)
    energies = _spectrum_of(h)
    s = shannon_entropy(rho) if rho.ndim == 1 else von_neumann_entropy(rho)
    return max(beta * expectation(h, rho) + log_partition(energies, beta) - s, 0.0)


def thermal_energy(h, beta: float) -> float:
    e = _spectrum_of(h)
    return float(e @ thermal_populations(e, beta))


__all__ = [
    "PassivizationResult",
    "ThermalReference",
    "entropy_range",
    "ergotropy",
    "expectation",
    "is_passive",
    "make_passive",
    "passive_populations",
    "reference_beta",
    "reference_temperature",
    "relative_entropy",
    "thermal_energy",
    "thermal_entropy",
]
