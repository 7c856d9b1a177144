"""Weak values of momentum and energy for flavor-post-selected neutrinos.

The flavor density and current are evaluated as ``2 Re{N conj(A)}`` where
``N`` is the weak-value numerator, so zeros of the flavor amplitude are
handled without dividing by it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NearOrthogonalPostselectionError, ParameterError
from .kinematics import MassStateKinematics, MixingMatrix, PacketWidths
from .wavepackets import delay, mass_amplitudes, trajectory_offsets

__all__ = [
    "FlavorWeakValues",
    "CurrentSample",
    "ContinuityResidual",
    "momentum_matrix_element",
    "energy_matrix_element",
    "flavor_numerators",
    "weak_momentum",
    "weak_energy",
    "flavor_weak_values",
    "flavor_density_current",
    "flavor_current",
    "continuity_residual",
    "continuity_model_residual",
    "OVERLAP_FLOOR",
]

OVERLAP_FLOOR = 1e-12


@dataclass(frozen=True)
class FlavorWeakValues:
    p_w: complex
    eps_w: complex
    L: float
    T: float
    alpha: int
    beta: int


@dataclass(frozen=True)
class CurrentSample:
    """Flavor density ``rho`` (1/length) and current ``J`` (1/time) at one point."""

    rho: float
    J: float
    L: float
    T: float
    alpha: int
    beta: int


def _shift(kin, widths, L, tau, anchor=None):
    """``i (L - v_a T) / 2 sigma_x^2``: the momentum offset of the sharp-peak packet."""
    return 1j * trajectory_offsets(kin, L, tau=tau, anchor=anchor) / (2 * widths.sigma_x**2)


def momentum_matrix_element(kin: MassStateKinematics, a: int, widths: PacketWidths, L, T=None, *, tau=None):
    """``<nu_a^D| p |nu_a^P(L, T)> = (p_a + i (L - v_a T) / 2 sigma_x^2) A_a``."""
    tau = delay(L, T, tau)
    A = mass_amplitudes(kin, widths, L, tau=tau)[a]
    return complex((kin.p[a] + _shift(kin, widths, L, tau)[a]) * A)


def energy_matrix_element(kin: MassStateKinematics, a: int, widths: PacketWidths, L, T=None, *, tau=None):
    """``<nu_a^D| H |nu_a^P(L, T)>`` under ``E_a(p) ~ eps_a + v_a (p - p_a)``."""
    tau = delay(L, T, tau)
    A = mass_amplitudes(kin, widths, L, tau=tau)[a]
    return complex((kin.eps[a] + kin.v[a] * _shift(kin, widths, L, tau)[a]) * A)


def flavor_numerators(
    U: MixingMatrix, kin: MassStateKinematics, widths: PacketWidths, alpha, beta, L, T=None, *, tau=None, anchor=None
):
    """Flavor amplitude and the momentum/energy numerators, vectorized over ``(L, T)``.

    Returns ``(A, N_p, N_H, scale)``; ``scale = sum_a |U* U A_a|`` is the size
    the flavor amplitude would have without cancellation.  ``anchor`` is
    passed on to :func:`mass_amplitudes`.
    """
    if kin.n != U.n_flavors:
        raise ParameterError(f"{kin.n} masses but {U.n_flavors} flavors")
    tau = delay(L, T, tau)
    A = mass_amplitudes(kin, widths, L, tau=tau, anchor=anchor)
    shape = (kin.n,) + (1,) * (A.ndim - 1)
    c = np.reshape(U.weights(alpha, beta), shape) * A
    shift = _shift(kin, widths, L, tau, anchor)
    N_p = np.sum(c * (np.reshape(kin.p, shape) + shift), axis=0)
    N_H = np.sum(c * (np.reshape(kin.eps, shape) + np.reshape(kin.v, shape) * shift), axis=0)
    return np.sum(c, axis=0), N_p, N_H, np.sum(np.abs(c), axis=0)


def _ratio(num, A, scale, floor, alpha, beta, L):
    if not abs(A) > floor * scale:
        raise NearOrthogonalPostselectionError(
            f"flavor amplitude {alpha}->{beta} vanishes at L={float(L):.6g} "
            f"(|A| = {abs(A):.3e}); weak value is undefined"
        )
    return complex(num / A)


def weak_momentum(U, kin, widths, alpha, beta, L, T=None, *, tau=None, overlap_floor=OVERLAP_FLOOR) -> complex:
    """``<nu_b^D| p |nu_a^P(L,T)> / <nu_b^D|nu_a^P(L,T)>``.

    ``overlap_floor`` is relative: the flavor amplitude must exceed it times
    the sum of the magnitudes of its mass components.
    """
    A, N_p, _, scale = flavor_numerators(U, kin, widths, alpha, beta, L, T, tau=tau)
    return _ratio(N_p, A, scale, overlap_floor, alpha, beta, L)


def weak_energy(U, kin, widths, alpha, beta, L, T=None, *, tau=None, overlap_floor=OVERLAP_FLOOR) -> complex:
    """Energy analogue of :func:`weak_momentum`."""
    A, _, N_H, scale = flavor_numerators(U, kin, widths, alpha, beta, L, T, tau=tau)
    return _ratio(N_H, A, scale, overlap_floor, alpha, beta, L)


def flavor_weak_values(U, kin, widths, alpha, beta, L, T=None, *, tau=None, overlap_floor=OVERLAP_FLOOR):
    tau = delay(L, T, tau)
    A, N_p, N_H, scale = flavor_numerators(U, kin, widths, alpha, beta, L, tau=tau)
    return FlavorWeakValues(
        p_w=_ratio(N_p, A, scale, overlap_floor, alpha, beta, L),
        eps_w=_ratio(N_H, A, scale, overlap_floor, alpha, beta, L),
        L=float(L),
        T=float(L + tau),
        alpha=alpha,
        beta=beta,
    )


def flavor_density_current(U, kin, widths, alpha, beta, L, T=None, *, tau=None, anchor=None):
    """Vectorized ``(rho, J)`` with ``rho = 2 Re{eps_w}|A|^2`` and ``J = 2 Re{p_w}|A|^2``."""
    A, N_p, N_H, _ = flavor_numerators(U, kin, widths, alpha, beta, L, T, tau=tau, anchor=anchor)
    Ac = np.conj(A)
    return 2 * np.real(N_H * Ac), 2 * np.real(N_p * Ac)


def flavor_current(U, kin, widths, alpha, beta, L, T=None, *, tau=None) -> CurrentSample:
    tau = delay(L, T, tau)
    rho, J = flavor_density_current(U, kin, widths, alpha, beta, L, tau=tau)
    return CurrentSample(float(rho), float(J), float(L), float(L + tau), alpha, beta)


@dataclass(frozen=True)
class ContinuityResidual:
    """Finite-difference ``d rho/dT + dJ/dL``.

    ``normalized`` divides by the flavor-summed density times the largest
    mean energy, making it dimensionless.
    """

    raw: float
    normalized: float
    rho: float
    h: float


def continuity_residual(
    U: MixingMatrix,
    kin: MassStateKinematics,
    widths: PacketWidths,
    alpha: int,
    L: float,
    T: float = None,
    h: float = None,
    *,
    beta: int = None,
    tau=None,
) -> ContinuityResidual:
    """Central-difference continuity residual, summed over detected flavors.

    With ``beta`` set, only that flavor is used; that residual carries the
    flavor-conversion source and does not vanish.
    """
    tau = float(delay(L, T, tau))
    eps_max = float(np.max(kin.eps))
    h_max = min(widths.sigma_x, 2 * math.pi / eps_max) / 50
    if h is None:
        h = h_max
    if not 0 < h <= h_max:
        raise ParameterError(f"step h={h} must lie in (0, {h_max:.3g}]")
    betas = range(U.n_flavors) if beta is None else [beta]
    # T +- h at fixed L shifts tau by +-h; L +- h at fixed T shifts tau by -+h.
    Ls = np.array([L, L, L + h, L - h])
    taus = np.array([tau + h, tau - h, tau - h, tau + h])
    raw = 0.0
    for b in betas:
        rho, J = flavor_density_current(U, kin, widths, alpha, b, Ls, tau=taus)
        raw += (rho[0] - rho[1]) / (2 * h) + (J[2] - J[3]) / (2 * h)
    rho_sum = sum(
        float(flavor_density_current(U, kin, widths, alpha, b, L, tau=tau)[0])
        for b in range(U.n_flavors)
    )
    return ContinuityResidual(raw=raw, normalized=raw / (rho_sum * eps_max), rho=rho_sum, h=h)


def continuity_model_residual(U, kin, widths, alpha, L, T=None, *, tau=None) -> float:
    """Exact flavor-summed residual of the sharp-peak amplitudes.

    Summing over detected flavors removes the interference terms, leaving
    ``sum_a |U_alpha a|^2 2 (L - v_a T)/sigma_x^2 |A_a|^2 (eps_a v_a - p_a)``
    with ``eps_a v_a - p_a = -xi m_a^4 / 4E^3``.  It vanishes only for
    ``xi = 0`` or massless states.
    """
    tau = delay(L, T, tau)
    A = mass_amplitudes(kin, widths, L, tau=tau)
    X = trajectory_offsets(kin, L, tau=tau)
    mismatch = -kin.xi * kin.masses**4 / (4 * kin.E**3)
    w = np.abs(U.entries[alpha]) ** 2
    return float(np.sum(w * 2 * X / widths.sigma_x**2 * np.abs(A) ** 2 * mismatch))
