"""Flavor oscillation probabilities.

Three routes are provided:

* ``probability_standard``: squared flavor amplitude integrated over time,
  normalized the usual way (its flavor sum is not 1 and it has units of
  length);
* ``probability_weak_closed``: the time integral of the weak-value current
  in closed form, optionally with the kinematic prefactor set to 1;
* ``probability_weak_quadrature``: the same time integral done numerically.

``time_integrated_current`` evaluates that time integral exactly for the
sharp-peak amplitudes (a complex Gaussian integral), keeping the terms the
closed form drops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ParameterError
from .kinematics import MassStateKinematics, MixingMatrix, PacketWidths
from .quadrature import QuadratureSpec, integrate
from .wavepackets import arrival_delays
from .weakflavor import flavor_density_current

__all__ = [
    "DecoherenceFactors",
    "ProbabilityResult",
    "TimeWindow",
    "CONVENTIONS",
    "decoherence_factors",
    "interference_envelope",
    "probability_standard",
    "standard_flavor_sum",
    "probability_weak_closed",
    "probability_weak_quadrature",
    "time_integrated_current",
]

# "standard": delta_eps = xi dm2 / 2E.  "as-written": delta_eps = xi dm2 L / 2E.
CONVENTIONS = ("standard", "as-written")
REALITY_TOL = 1e-12


@dataclass(frozen=True)
class DecoherenceFactors:
    """Per-pair phases and damping exponents, as ``n x n`` arrays indexed ``[a, b]``.

    ``osc_phase = dm2_ab L / 2E``, ``wp_separation = (L / L_coh_ab)^2`` and
    ``prod_det_coherence = delta_eps_ab^2 / 8 sigma_e^2``.
    """

    osc_phase: np.ndarray
    wp_separation: np.ndarray
    prod_det_coherence: np.ndarray

    def pair(self, a: int, b: int):
        return (
            float(self.osc_phase[a, b]),
            float(self.wp_separation[a, b]),
            float(self.prod_det_coherence[a, b]),
        )

    def damping(self) -> np.ndarray:
        return np.exp(-self.wp_separation - self.prod_det_coherence)


@dataclass(frozen=True)
class ProbabilityResult:
    """An oscillation probability.

    ``dimension`` is ``"length"`` for the standard route, whose value is
    not a probability at all, and ``"dimensionless"`` otherwise.
    """

    value: float
    mode: str
    dimension: str
    imag_residue: float = 0.0

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class TimeWindow:
    """Integration range for the time integral of the current.

    By default the window spans every packet's arrival ``+- k sigma_x``.
    ``tau_range`` overrides it with explicit delays ``T - L``; it must still
    cover the default ``k = 8`` window.
    """

    k: float = 12.0
    tau_range: tuple = None

    def __post_init__(self):
        if self.k < 8:
            raise ParameterError(f"time window must cover at least 8 sigma_x, got k={self.k}")


def _check_convention(convention):
    if convention not in CONVENTIONS:
        raise ParameterError(f"unknown delta_eps convention {convention!r}; choose from {CONVENTIONS}")


def _check_sizes(U, kin):
    if kin.n != U.n_flavors:
        raise ParameterError(f"{kin.n} masses but {U.n_flavors} flavors")


def decoherence_factors(
    kin: MassStateKinematics, widths: PacketWidths, L, convention: str = "standard"
) -> DecoherenceFactors:
    """Oscillation phase and both damping exponents for every mass pair.

    ``L`` may be an array; the pair axes come first.
    """
    _check_convention(convention)
    L = np.asarray(L, dtype=float)
    if np.any(L < 0):
        raise ParameterError("baseline must be non-negative")
    dm2 = kin.dm2()
    ext = (Ellipsis,) + (None,) * L.ndim
    E = kin.E
    phase = dm2[ext] * L / (2 * E)
    inv_lcoh = np.abs(dm2) / (4 * math.sqrt(2) * E**2 * widths.sigma_x)
    separation = (L * inv_lcoh[ext]) ** 2
    d_eps = kin.xi * dm2 / (2 * E)
    if convention == "as-written":
        d_eps = d_eps[ext] * L
    else:
        d_eps = np.broadcast_to(d_eps[ext], phase.shape)
    sigma_e2 = 0.5 * (kin.v[:, None] ** 2 + kin.v[None, :] ** 2) * widths.sigma_p**2
    coherence = d_eps**2 / (8 * sigma_e2[ext])
    return DecoherenceFactors(phase, separation, coherence)


def interference_envelope(kin, widths, a, b, L, convention="standard"):
    """Damping ``exp(-(L/L_coh)^2 - delta_eps^2/8 sigma_e^2)`` of the ``(a, b)`` interference term."""
    f = decoherence_factors(kin, widths, L, convention)
    return np.exp(-f.wp_separation[a, b] - f.prod_det_coherence[a, b])


def _pair_sum(U, kin, widths, alpha, beta, L, kinematic, convention):
    _check_sizes(U, kin)
    f = decoherence_factors(kin, widths, L, convention)
    w = U.weights(alpha, beta)
    W = w[:, None] * w.conj()[None, :]
    ext = (Ellipsis,) + (None,) * np.ndim(L)
    terms = (W * kinematic)[ext] * np.exp(-1j * f.osc_phase - f.wp_separation - f.prod_det_coherence)
    return np.sum(terms, axis=(0, 1))


def _velocity_factor(kin):
    return np.sqrt(2 / (kin.v[:, None] ** 2 + kin.v[None, :] ** 2))


def _prefactor(widths):
    return 2 * math.sqrt(2 * math.pi) * widths.sigma_xP * widths.sigma_xD / widths.sigma_x


def _real(total, what):
    residue = float(np.max(np.abs(np.imag(total))))
    scale = max(1.0, float(np.max(np.abs(np.real(total)))))
    if residue > REALITY_TOL * scale:
        raise NumericalError(f"{what}: pair sum has imaginary part {residue:.3e}")
    return np.real(total), residue


def probability_standard(
    U: MixingMatrix, kin: MassStateKinematics, widths: PacketWidths, alpha, beta, L, convention="standard"
) -> ProbabilityResult:
    """Usual wave-packet result with independently normalized packets.

    ``2 sqrt(2 pi) sigma_xP sigma_xD / sigma_x * sum_ab sqrt(2/(v_a^2 + v_b^2)) ...``
    The value has units of length.
    """
    total = _prefactor(widths) * _pair_sum(U, kin, widths, alpha, beta, L, _velocity_factor(kin), convention)
    value, residue = _real(total, "standard probability")
    return ProbabilityResult(_scalar(value), "standard", "length", residue)


def standard_flavor_sum(U: MixingMatrix, kin: MassStateKinematics, widths: PacketWidths, alpha) -> float:
    """What the standard probabilities add up to: ``prefactor * sum_a |U_alpha a|^2 / v_a``."""
    return _prefactor(widths) * float(np.sum(np.abs(U.entries[alpha]) ** 2 / kin.v))


def probability_weak_closed(
    U: MixingMatrix,
    kin: MassStateKinematics,
    widths: PacketWidths,
    alpha,
    beta,
    L,
    simplify: bool = True,
    convention: str = "standard",
    symmetrize: bool = False,
) -> ProbabilityResult:
    """Closed-form time integral of the weak-value current.

    With ``simplify`` the kinematic factor
    ``sqrt(2/(v_a^2 + v_b^2)) p_a / sqrt(eps_a eps_b)`` is replaced by 1 and the
    pair sum is checked to be real.  ``symmetrize`` uses ``sqrt(p_a p_b)`` in
    place of ``p_a``.
    """
    if simplify:
        total = _pair_sum(U, kin, widths, alpha, beta, L, 1.0, convention)
        value, residue = _real(total, "weak probability")
    else:
        p = np.sqrt(kin.p[:, None] * kin.p[None, :]) if symmetrize else kin.p[:, None]
        kinematic = _velocity_factor(kin) * p / np.sqrt(kin.eps[:, None] * kin.eps[None, :])
        total = _pair_sum(U, kin, widths, alpha, beta, L, kinematic, convention)
        value, residue = np.real(total), float(np.max(np.abs(np.imag(total))))
    return ProbabilityResult(_scalar(value), "weak_closed", "dimensionless", residue)


def _scalar(value):
    return float(value) if np.ndim(value) == 0 else value


def _arrival_window(kin, widths, L, window, anchor):
    """Integration range in delays measured from packet ``anchor``'s arrival."""
    centers = arrival_delays(kin, L, anchor)
    pad = window.k * widths.sigma_x / float(np.min(kin.v))
    lo, hi = float(np.min(centers)) - pad, float(np.max(centers)) + pad
    if window.tau_range is not None:
        base = float(arrival_delays(kin, L)[anchor])
        t_lo, t_hi = (float(t) - base for t in window.tau_range)
        need = 8 * widths.sigma_x / float(np.min(kin.v))
        if t_lo > float(np.min(centers)) - need or t_hi < float(np.max(centers)) + need:
            raise ParameterError(
                f"time window [{t_lo + base:.6g}, {t_hi + base:.6g}] does not cover all arrivals +- 8 sigma_x"
            )
        lo, hi = t_lo, t_hi
    return lo, hi


def probability_weak_quadrature(
    U: MixingMatrix,
    kin: MassStateKinematics,
    widths: PacketWidths,
    alpha,
    beta,
    L: float,
    T_window: TimeWindow = TimeWindow(),
    grid: QuadratureSpec = QuadratureSpec(nodes=256, rtol=1e-11),
) -> ProbabilityResult:
    """Integrate ``J_alpha beta(L, T)`` over the detection time numerically.

    The integration variable is the delay measured from the arrival of the
    heaviest packet, which keeps offsets and relative phases exact at any
    baseline.  The starting node count grows with the number of beat
    periods ``4 pi E / (xi dm2)`` that fit in the window.
    """
    _check_sizes(U, kin)
    L = float(L)
    anchor = int(np.argmax(kin.masses))
    lo, hi = _arrival_window(kin, widths, L, T_window, anchor)
    beat = float(np.max(np.abs(kin.eps[:, None] - kin.eps[None, :])))
    span = beat * (hi - lo)

    def current(u):
        return flavor_density_current(U, kin, widths, alpha, beta, L, tau=u, anchor=anchor)[1]

    value, _, _ = integrate(current, lo, hi, grid, phase_span=span, atol=1e-15)
    if not math.isfinite(value):
        raise NumericalError(f"time integral is not finite at L={L}")
    return ProbabilityResult(float(value), "weak_quadrature", "dimensionless")


def time_integrated_current(
    U: MixingMatrix, kin: MassStateKinematics, widths: PacketWidths, alpha, beta, L: float
) -> float:
    """Exact time integral of the sharp-peak flavor current.

    Unlike ``probability_weak_closed`` this keeps the imaginary momentum
    shift ``i (L - v_a T)/2 sigma_x^2`` and does not expand velocities in the
    Gaussian integral, so it agrees with ``probability_weak_quadrature`` to
    quadrature accuracy.
    """
    _check_sizes(U, kin)
    L = float(L)
    s2 = widths.sigma_x**2
    w = U.weights(alpha, beta)
    W = w[:, None] * w.conj()[None, :]
    v, eps, p = kin.v, kin.eps, kin.p
    c = kin.one_minus_v * L  # trajectory offset at tau = 0
    va, vb = v[:, None], v[None, :]
    ca, cb = c[:, None], c[None, :]
    S = va**2 + vb**2
    d_eps = eps[:, None] - eps[None, :]
    d_ep = kin.eps_minus_p[:, None] - kin.eps_minus_p[None, :]
    # Quadratic exponent -S tau^2/4s2 + (R - i d_eps) tau + const, completed stably.
    R = (ca * va + cb * vb) / (2 * s2)
    expo = (
        -1j * d_ep * L
        - (ca * vb - cb * va) ** 2 / (4 * s2 * S)
        - 1j * d_eps * (ca * va + cb * vb) / S
        - s2 * d_eps**2 / S
    )
    I0 = np.sqrt(4 * math.pi * s2 / S) * np.exp(expo)
    I1 = (2 * s2 * (R - 1j * d_eps) / S) * I0
    K = (2 * math.pi / s2) ** 0.5 / (2 * math.pi * 2 * np.sqrt(eps[:, None] * eps[None, :]))
    pa = p[:, None]
    integral = (pa + 1j * ca / (2 * s2)) * I0 - 1j * va / (2 * s2) * I1
    return float(2 * np.real(np.sum(W * K * integral)))
