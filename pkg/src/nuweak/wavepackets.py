"""Gaussian envelopes and coordinate-space amplitudes of mass eigenstates.

Amplitudes can be requested at ``(L, T)`` or at ``(L, tau)`` with
``tau = T - L`` the delay behind the light front.  The second form is what
makes realistic baselines usable: at ``L ~ 1e21 GeV^-1`` the difference
``L - v T`` is lost to rounding if formed directly, while
``(1 - v) L - v tau`` is not.

When ``tau`` itself is large (heavy states at long baselines) even that
form cancels badly.  Passing ``anchor=r`` reads ``tau`` as the offset from
the arrival delay of packet ``r``; offsets and relative phases are then
built from squared-mass differences, and the common phase of packet ``r``
is dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ParameterError
from .kinematics import MassStateKinematics, MixingMatrix, PacketWidths
from .quadrature import QuadratureSpec, integrate

__all__ = [
    "GaussianEnvelope",
    "ComplexAmplitude",
    "correlated_envelope",
    "delay",
    "arrival_delays",
    "trajectory_offsets",
    "mass_amplitudes",
    "amplitude_mass_closed",
    "amplitude_mass_quadrature",
    "matrix_element_quadrature",
    "amplitude_flavor",
]

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class GaussianEnvelope:
    """Normalized momentum envelope ``(2 pi s^2)^(-1/4) exp(-(p - c)^2 / 4 s^2)``."""

    center: float
    sigma_p: float

    @property
    def peak(self) -> float:
        return (TWO_PI * self.sigma_p**2) ** -0.25

    def __call__(self, p):
        q = np.asarray(p) - self.center
        return self.peak * np.exp(-(q**2) / (4 * self.sigma_p**2))


@dataclass(frozen=True)
class ComplexAmplitude:
    """Amplitude value at baseline ``L`` and time ``T`` (natural units)."""

    value: complex
    L: float
    T: float

    def __abs__(self):
        return abs(self.value)


def correlated_envelope(widths: PacketWidths, p_a: float) -> GaussianEnvelope:
    """Product of production and detection envelopes, normalized as one Gaussian.

    The product of two Gaussians of widths ``sigma_pP`` and ``sigma_pD`` has
    width ``sigma_p``; it is renormalized as a whole rather than inheriting
    the two separate normalizations.
    """
    return GaussianEnvelope(center=float(p_a), sigma_p=widths.sigma_p)


def delay(L, T=None, tau=None):
    """Resolve the ``(T, tau)`` alternatives into ``tau = T - L``."""
    if (T is None) == (tau is None):
        raise ParameterError("give exactly one of T or tau")
    if tau is None:
        return np.asarray(T, dtype=float) - np.asarray(L, dtype=float)
    return np.asarray(tau, dtype=float)


def _column(values, ndim):
    return np.reshape(values, (len(values),) + (1,) * ndim)


def arrival_delays(kin: MassStateKinematics, L, anchor: int = None):
    """Delay ``tau`` at which each packet peaks at ``L``.

    With ``anchor`` set, the delays are relative to packet ``anchor``'s.
    """
    L = np.asarray(L, dtype=float)
    if anchor is None:
        return _column(kin.one_minus_v, L.ndim) * L / _column(kin.v, L.ndim)
    # (v_r - v_a) L / (v_r v_a), with v_r - v_a taken from squared masses.
    dv = (kin.m2 - kin.m2[anchor]) / (2 * kin.E**2)
    return _column(dv / (kin.v[anchor] * kin.v), L.ndim) * L


def _frame(kin, L, tau, anchor):
    """Offsets ``L - v_a T`` and carrier phases, shape ``(n,) + broadcast(L, tau)``."""
    L = np.asarray(L, dtype=float)
    nd = np.broadcast(L, tau).ndim
    v, eps = _column(kin.v, nd), _column(kin.eps, nd)
    if anchor is None:
        X = _column(kin.one_minus_v, nd) * L - v * tau
        phase = -_column(kin.eps_minus_p, nd) * L - eps * tau
        return X, phase
    dm2 = kin.m2 - kin.m2[anchor]
    tau_r = kin.one_minus_v[anchor] * L / kin.v[anchor]
    X = _column(dm2 / (2 * kin.E**2) / kin.v[anchor], nd) * L - v * tau
    phase = -_column(dm2 / (2 * kin.E), nd) * L - _column(kin.xi * dm2 / (2 * kin.E), nd) * tau_r - eps * tau
    return X, phase


def trajectory_offsets(kin: MassStateKinematics, L, T=None, *, tau=None, anchor: int = None):
    """``L - v_a T`` for every mass eigenstate, shape ``(n,) + broadcast(L, T)``."""
    tau = delay(L, T, tau)
    return _frame(kin, L, tau, anchor)[0]


def mass_amplitudes(kin: MassStateKinematics, widths: PacketWidths, L, T=None, *, tau=None, anchor: int = None):
    """Closed-form ``A_a(L, T)`` for all mass eigenstates at once.

    Returns an array of shape ``(n,) + broadcast(L, T)``.
    """
    tau = delay(L, T, tau)
    X, phase = _frame(kin, L, tau, anchor)
    sx = widths.sigma_x
    eps = _column(kin.eps, X.ndim - 1)
    pref = (TWO_PI * 2 * eps) ** -0.5 * (TWO_PI / sx**2) ** 0.25
    return pref * np.exp(1j * phase - X**2 / (4 * sx**2))


def amplitude_mass_closed(
    kin: MassStateKinematics, a: int, widths: PacketWidths, L: float, T: float = None, *, tau=None
) -> ComplexAmplitude:
    """Sharp-peak amplitude of mass eigenstate ``a``.

    ``(2 pi 2 eps_a)^(-1/2) (2 pi / sigma_x^2)^(1/4)
    exp(-i eps_a T + i p_a L - (L - v_a T)^2 / 4 sigma_x^2)``
    """
    tau = delay(L, T, tau)
    value = complex(mass_amplitudes(kin, widths, L, tau=tau)[a])
    return ComplexAmplitude(value, float(L), float(L + tau))


def _momentum_integral(kin, a, widths, L, tau, grid, weight):
    """Exact-dispersion integral over ``p`` of ``phi(p - p_a) e^{-iE(p)T + ipL} w(p) / sqrt(2pi 2E(p))``.

    The phase is taken as ``-(E - p) L - E tau`` with ``E - p = m^2/(E + p)``.
    """
    if not isinstance(grid, QuadratureSpec):
        raise ParameterError("grid must be a QuadratureSpec")
    m2 = float(kin.m2[a])
    p_a = float(kin.p[a])
    env = correlated_envelope(widths, p_a)
    half = grid.k * env.sigma_p
    if p_a - half <= 0:
        raise ParameterError("momentum window reaches p <= 0; packet is not sharply peaked")
    L = float(L)
    tau = float(tau)

    def f(p):
        E = np.sqrt(p * p + m2)
        phase = -(m2 / (E + p)) * L - E * tau
        return env(p) * np.exp(1j * phase) * weight(p, E) / np.sqrt(TWO_PI * 2 * E)

    X = float(trajectory_offsets(kin, L, tau=tau)[a])
    T = L + tau
    span = 2 * half * abs(X) + 0.5 * m2 / p_a**3 * half**2 * abs(T)
    value, _, _ = integrate(f, p_a - half, p_a + half, grid, phase_span=span)
    return complex(value)


_WEIGHTS = {
    None: lambda p, E: 1.0,
    "p": lambda p, E: p,
    "H": lambda p, E: E,
}


def amplitude_mass_quadrature(
    kin: MassStateKinematics,
    a: int,
    widths: PacketWidths,
    L: float,
    T: float = None,
    grid: QuadratureSpec = QuadratureSpec(),
    *,
    tau=None,
) -> ComplexAmplitude:
    """Brute-force amplitude using ``E_a(p) = sqrt(p^2 + m_a^2)`` exactly.

    This keeps dispersion and the momentum dependence of the
    ``1/sqrt(2 E_a(p))`` weight that the closed form drops, so the two
    agree only inside the sharp-peak window.
    """
    tau = float(delay(L, T, tau))
    value = _momentum_integral(kin, a, widths, L, tau, grid, _WEIGHTS[None])
    return ComplexAmplitude(value, float(L), float(L) + tau)


def matrix_element_quadrature(
    kin: MassStateKinematics,
    a: int,
    widths: PacketWidths,
    L: float,
    T: float = None,
    operator: str = "p",
    grid: QuadratureSpec = QuadratureSpec(),
    *,
    tau=None,
) -> complex:
    """Brute-force ``<nu_a^D| O |nu_a^P(L, T)>`` for ``O`` = ``"p"`` or ``"H"``."""
    if operator not in ("p", "H"):
        raise ParameterError(f"operator must be 'p' or 'H', got {operator!r}")
    tau = float(delay(L, T, tau))
    return _momentum_integral(kin, a, widths, L, tau, grid, _WEIGHTS[operator])


def amplitude_flavor(
    U: MixingMatrix, alpha: int, beta: int, per_mass_amplitudes: Sequence
) -> ComplexAmplitude:
    """Coherent sum ``A_ab = sum_a conj(U[alpha, a]) U[beta, a] A_a``."""
    amps = list(per_mass_amplitudes)
    if len(amps) != U.n_flavors:
        raise ParameterError(
            f"expected {U.n_flavors} mass amplitudes, got {len(amps)}"
        )
    values = np.array([getattr(x, "value", x) for x in amps], dtype=complex)
    total = complex(np.sum(U.weights(alpha, beta) * values))
    first = amps[0]
    return ComplexAmplitude(total, getattr(first, "L", math.nan), getattr(first, "T", math.nan))
