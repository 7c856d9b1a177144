"""Mixing matrices and first-order relativistic kinematics of mass eigenstates.

Everything here is in natural units (hbar = c = 1).  Rows of a mixing matrix
are flavors, columns are mass eigenstates: ``U[alpha, a]``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError, RelativityWarning

__all__ = [
    "MixingMatrix",
    "MassStateKinematics",
    "PacketWidths",
    "build_pmns",
    "mass_kinematics",
    "packet_widths",
    "coherence_length",
    "RELATIVISTIC_WARN_RATIO",
]

RELATIVISTIC_WARN_RATIO = 0.1
UNITARITY_TOL = 1e-12


def _frozen(array, dtype):
    out = np.array(array, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class MixingMatrix:
    """Unitary flavor-from-mass matrix ``U[alpha, a]``."""

    entries: np.ndarray

    def __post_init__(self):
        U = _frozen(self.entries, np.complex128)
        if U.ndim != 2 or U.shape[0] != U.shape[1] or U.shape[0] < 1:
            raise ParameterError(f"mixing matrix must be square, got shape {U.shape}")
        dev = np.max(np.abs(U @ U.conj().T - np.eye(U.shape[0])))
        if dev > UNITARITY_TOL:
            raise ParameterError(f"mixing matrix is not unitary (max deviation {dev:.3e})")
        object.__setattr__(self, "entries", U)

    @property
    def n_flavors(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, n: int) -> "MixingMatrix":
        return cls(np.eye(n))

    def weights(self, alpha: int, beta: int) -> np.ndarray:
        """Per-mass coefficients ``conj(U[alpha, a]) * U[beta, a]``."""
        return self.entries[alpha].conj() * self.entries[beta]

    def conj(self) -> "MixingMatrix":
        """Mixing matrix for antineutrinos."""
        return MixingMatrix(self.entries.conj())


def build_pmns(angles, cp_phase: float = 0.0, n_flavors: int = 3) -> MixingMatrix:
    """Build a 2- or 3-flavor mixing matrix.

    Two flavors take a single angle and no phase, giving
    ``[[cos t, sin t], [-sin t, cos t]]``.  Three flavors take
    ``(theta12, theta13, theta23)`` and use ``R23 @ U13(delta) @ R12``, the
    usual product of rotations with the CP phase on the 1-3 rotation.
    """
    angles = [float(a) for a in np.atleast_1d(angles)]
    if n_flavors == 2:
        if len(angles) != 1:
            raise ParameterError(f"2-flavor mixing takes 1 angle, got {len(angles)}")
        if cp_phase:
            raise ParameterError("2-flavor mixing has no CP phase")
        c, s = math.cos(angles[0]), math.sin(angles[0])
        return MixingMatrix(np.array([[c, s], [-s, c]]))
    if n_flavors == 3:
        if len(angles) != 3:
            raise ParameterError(
                f"3-flavor mixing takes (theta12, theta13, theta23), got {len(angles)} angles"
            )
        t12, t13, t23 = angles
        c12, s12 = math.cos(t12), math.sin(t12)
        c13, s13 = math.cos(t13), math.sin(t13)
        c23, s23 = math.cos(t23), math.sin(t23)
        phase = np.exp(1j * cp_phase)
        r23 = np.array([[1, 0, 0], [0, c23, s23], [0, -s23, c23]], dtype=complex)
        u13 = np.array(
            [[c13, 0, s13 / phase], [0, 1, 0], [-s13 * phase, 0, c13]], dtype=complex
        )
        r12 = np.array([[c12, s12, 0], [-s12, c12, 0], [0, 0, 1]], dtype=complex)
        return MixingMatrix(r23 @ u13 @ r12)
    raise ParameterError(f"n_flavors must be 2 or 3, got {n_flavors}")


@dataclass(frozen=True)
class MassStateKinematics:
    """Mean energy, momentum and group velocity of each mass eigenstate.

    ``E`` is the energy the process would give a massless neutrino and ``xi``
    splits the mass correction between energy and momentum.
    """

    E: float
    xi: float
    masses: np.ndarray
    eps: np.ndarray
    p: np.ndarray
    v: np.ndarray

    @property
    def n(self) -> int:
        return len(self.masses)

    @property
    def m2(self) -> np.ndarray:
        return self.masses**2

    @property
    def eps_minus_p(self) -> np.ndarray:
        """``eps_a - p_a = m_a^2 / 2E``, computed without cancellation."""
        return self.m2 / (2 * self.E)

    @property
    def one_minus_v(self) -> np.ndarray:
        """``1 - v_a = m_a^2 / 2E^2``, computed without cancellation."""
        return self.m2 / (2 * self.E**2)

    def dm2(self) -> np.ndarray:
        """Matrix of squared-mass differences ``m_a^2 - m_b^2``."""
        return self.m2[:, None] - self.m2[None, :]


def mass_kinematics(E: float, masses, xi: float = 0.5) -> MassStateKinematics:
    """First-order mean energy, momentum and velocity for each mass.

    ``eps_a = E + xi m^2/2E``, ``p_a = E - (1 - xi) m^2/2E`` and
    ``v_a = 1 - m^2/2E^2``.
    """
    E = float(E)
    m = np.atleast_1d(np.asarray(masses, dtype=float))
    if not E > 0:
        raise DomainError(f"energy must be positive, got {E}")
    if np.any(m < 0):
        raise DomainError("masses must be non-negative")
    ratio = np.max(m) / E
    if ratio >= 1:
        raise DomainError(f"non-relativistic input: max m/E = {ratio:.3g}")
    if ratio > RELATIVISTIC_WARN_RATIO:
        warnings.warn(
            f"m/E = {ratio:.3g} exceeds {RELATIVISTIC_WARN_RATIO}; first-order kinematics degrade",
            RelativityWarning,
            stacklevel=2,
        )
    half = m**2 / (2 * E)
    return MassStateKinematics(
        E=E,
        xi=float(xi),
        masses=_frozen(m, float),
        eps=_frozen(E + xi * half, float),
        p=_frozen(E - (1 - xi) * half, float),
        v=_frozen(1 - half / E, float),
    )


@dataclass(frozen=True)
class PacketWidths:
    """Production/detection packet widths and the combined resolutions.

    ``sigma_x**2 = sigma_xP**2 + sigma_xD**2`` and every position width is
    paired with a momentum width through ``sigma_x * sigma_p = 1/2``.
    """

    sigma_xP: float
    sigma_xD: float

    def __post_init__(self):
        for name in ("sigma_xP", "sigma_xD"):
            val = float(getattr(self, name))
            if not (val > 0 and math.isfinite(val)):
                raise ParameterError(f"{name} must be positive and finite, got {val}")
            object.__setattr__(self, name, val)

    @property
    def sigma_pP(self) -> float:
        return 0.5 / self.sigma_xP

    @property
    def sigma_pD(self) -> float:
        return 0.5 / self.sigma_xD

    @property
    def sigma_x(self) -> float:
        return math.hypot(self.sigma_xP, self.sigma_xD)

    @property
    def sigma_p(self) -> float:
        return 0.5 / self.sigma_x

    def sigma_e(self, v_a, v_b):
        """Energy resolution for the pair ``(a, b)``: ``sqrt((v_a^2 + v_b^2)/2) sigma_p``."""
        return np.sqrt(0.5 * (np.asarray(v_a) ** 2 + np.asarray(v_b) ** 2)) * self.sigma_p


def packet_widths(sigma_xP: float, sigma_xD: float) -> PacketWidths:
    return PacketWidths(sigma_xP, sigma_xD)


def coherence_length(E: float, dm2: float, sigma_x: float) -> float:
    """Baseline ``4 sqrt(2) E^2 sigma_x / |dm2|`` at which two packets stop overlapping.

    Degenerate masses (``dm2 == 0``) never separate, so the result is ``inf``.
    """
    if dm2 == 0:
        return math.inf
    return 4 * math.sqrt(2) * E**2 * sigma_x / abs(dm2)
