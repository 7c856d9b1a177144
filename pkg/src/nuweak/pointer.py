"""Von Neumann pointer measurements on a finite-dimensional system.

The pointer is a Gaussian in its momentum-like variable ``p_D``.  An
impulsive coupling ``exp(i A x_D)`` translates that Gaussian by each
eigenvalue of ``A``; post-selecting a final state and keeping only the
first-order term translates it by the weak value instead.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import NearOrthogonalPostselectionError, NumericalError, ParameterError, RegimeWarning
from .quadrature import gauss_legendre

__all__ = [
    "QuantumState",
    "Observable",
    "GaussianPointer",
    "Regime",
    "measurement_regime",
    "pointer_distribution_strong",
    "weak_value",
    "pointer_distribution_weak_postselected",
    "pointer_distribution_postselected_exact",
    "postselected_pointer_mean",
    "pointer_expectation",
    "pointer_integral",
    "OVERLAP_FLOOR",
]

OVERLAP_FLOOR = 1e-12
HERMITIAN_TOL = 1e-12
DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class QuantumState:
    """Pure state, normalized on construction."""

    amplitudes: np.ndarray

    def __post_init__(self):
        psi = np.array(self.amplitudes, dtype=np.complex128).ravel()
        norm = np.linalg.norm(psi)
        if psi.size == 0 or not norm > 0:
            raise ParameterError("state vector must be non-empty and non-zero")
        psi = psi / norm
        psi.setflags(write=False)
        object.__setattr__(self, "amplitudes", psi)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def overlap(self, other: "QuantumState") -> complex:
        """``<self|other>``."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class Observable:
    """Hermitian matrix with its eigendecomposition cached."""

    matrix: np.ndarray
    eigenvalues: np.ndarray = field(init=False, repr=False)
    eigenvectors: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        M = np.array(self.matrix, dtype=np.complex128)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ParameterError(f"observable must be a square matrix, got shape {M.shape}")
        if np.max(np.abs(M - M.conj().T)) >= HERMITIAN_TOL:
            raise ParameterError("observable is not Hermitian")
        vals, vecs = np.linalg.eigh(M)
        for arr in (M, vals, vecs):
            arr.setflags(write=False)
        object.__setattr__(self, "matrix", M)
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "eigenvectors", vecs)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def min_spacing(self) -> float:
        """Smallest nonzero eigenvalue gap, ``nan`` if the spectrum is degenerate."""
        vals = self.eigenvalues
        scale = max(1.0, float(np.max(np.abs(vals))))
        gaps = np.diff(vals)
        gaps = gaps[gaps > DEGENERACY_TOL * scale]
        return float(gaps.min()) if gaps.size else math.nan

    def components(self, psi: QuantumState) -> np.ndarray:
        """``<a|psi>`` for every eigenvector."""
        _check_dim(self, psi)
        return self.eigenvectors.conj().T @ psi.amplitudes


def _check_dim(obs, *states):
    for s in states:
        if s.dim != obs.dim:
            raise ParameterError(f"state has dimension {s.dim}, observable {obs.dim}")


@dataclass(frozen=True)
class GaussianPointer:
    """Pointer wavefunction ``phi(p_D) ~ exp(-(p_D - center)^2 / 4 sigma_p^2)``."""

    sigma_p: float
    center: float = 0.0

    def __post_init__(self):
        if not (self.sigma_p > 0 and math.isfinite(self.sigma_p)):
            raise ParameterError(f"sigma_p must be positive, got {self.sigma_p}")

    def wavefunction(self, p_D):
        """Normalized ``phi(p_D)``; accepts complex arguments for complex shifts."""
        q = np.asarray(p_D) - self.center
        return (2 * math.pi * self.sigma_p**2) ** -0.25 * np.exp(-(q**2) / (4 * self.sigma_p**2))

    def density(self, p_D):
        return np.abs(self.wavefunction(p_D)) ** 2


class Regime(str, Enum):
    STRONG = "strong"
    WEAK = "weak"
    INTERMEDIATE = "intermediate"


def measurement_regime(obs: Observable, pointer: GaussianPointer, strong_below=0.1, weak_above=10.0):
    """Classify by ``r = sigma_p / (smallest eigenvalue gap)``.

    Returns ``(Regime, r)``.  A degenerate spectrum has nothing to resolve:
    it is tagged weak with ``r = nan``.
    """
    gap = obs.min_spacing()
    if math.isnan(gap):
        return Regime.WEAK, math.nan
    r = pointer.sigma_p / gap
    if r < strong_below:
        return Regime.STRONG, r
    if r > weak_above:
        return Regime.WEAK, r
    return Regime.INTERMEDIATE, r


def pointer_distribution_strong(psi_i: QuantumState, obs: Observable, pointer: GaussianPointer, p_D):
    """Pointer density after the kick, with no post-selection.

    ``sum_a |<a|psi_i>|^2 |phi(p_D - a)|^2``; exact for any ``sigma_p``.
    """
    w = np.abs(obs.components(psi_i)) ** 2
    p_D = np.asarray(p_D, dtype=float)
    shifted = pointer.density(p_D[..., None] - obs.eigenvalues)
    return shifted @ w


def _overlap(psi_f, psi_i, floor):
    ov = psi_f.overlap(psi_i)
    if abs(ov) <= floor:
        raise NearOrthogonalPostselectionError(
            f"|<psi_f|psi_i>| = {abs(ov):.3e} is below the floor {floor:.1e}"
        )
    return ov


def weak_value(
    psi_i: QuantumState, psi_f: QuantumState, obs: Observable, order: int = 1, overlap_floor: float = OVERLAP_FLOOR
) -> complex:
    """``<psi_f|A^n|psi_i> / <psi_f|psi_i>``."""
    _check_dim(obs, psi_i, psi_f)
    if order < 0:
        raise ParameterError("order must be non-negative")
    ov = _overlap(psi_f, psi_i, overlap_floor)
    An = np.linalg.matrix_power(obs.matrix, order)
    return complex(np.vdot(psi_f.amplitudes, An @ psi_i.amplitudes)) / ov


def pointer_distribution_weak_postselected(
    psi_i: QuantumState,
    psi_f: QuantumState,
    obs: Observable,
    pointer: GaussianPointer,
    p_D,
    overlap_floor: float = OVERLAP_FLOOR,
):
    """First-order post-selected pointer density.

    Returns ``(density, overlap)`` where ``density`` is
    ``|<psi_f|psi_i>|^2 exp((Im A_w)^2 / 2 sigma_p^2) |phi(p_D - Re A_w)|^2``
    (unnormalized: it carries the post-selection probability) and
    ``overlap`` is ``<psi_f|psi_i>``.
    """
    regime, r = measurement_regime(obs, pointer)
    if regime is not Regime.WEAK:
        warnings.warn(
            f"pointer is in the {regime.value} regime (r = {r:.3g}); first-order result is unreliable",
            RegimeWarning,
            stacklevel=2,
        )
    aw = weak_value(psi_i, psi_f, obs, overlap_floor=overlap_floor)
    ov = psi_f.overlap(psi_i)
    scale = abs(ov) ** 2 * math.exp(aw.imag**2 / (2 * pointer.sigma_p**2))
    return scale * pointer.density(np.asarray(p_D, dtype=float) - aw.real), ov


def pointer_distribution_postselected_exact(
    psi_i: QuantumState, psi_f: QuantumState, obs: Observable, pointer: GaussianPointer, p_D
):
    """``|<p_D|<psi_f| exp(i A x_D) |psi_i>|phi>|^2`` without any expansion.

    The kick is applied through the spectral decomposition of ``A`` as a sum
    of translations ``phi(p_D - a)`` weighted by ``<psi_f|a><a|psi_i>``.
    """
    _check_dim(obs, psi_i, psi_f)
    c = obs.components(psi_f).conj() * obs.components(psi_i)
    p_D = np.asarray(p_D, dtype=float)
    amp = pointer.wavefunction(p_D[..., None] - obs.eigenvalues) @ c
    return np.abs(amp) ** 2


def pointer_integral(f, obs: Observable, pointer: GaussianPointer, k: float = 12.0, order: int = 16):
    """Integrate ``f(p_D)`` over the pointer axis.

    Composite Gauss-Legendre with one panel per ``sigma_p`` on
    ``[min a - k sigma_p, max a + k sigma_p]`` (shifted by the pointer center),
    so narrow peaks are resolved for any ``sigma_p``.
    """
    s = pointer.sigma_p
    lo = float(obs.eigenvalues.min()) + pointer.center - k * s
    hi = float(obs.eigenvalues.max()) + pointer.center + k * s
    panels = int(math.ceil((hi - lo) / s))
    x, w = gauss_legendre(lo, hi, panels, order)
    return float(np.sum(w * f(x)))


def postselected_pointer_mean(
    psi_i: QuantumState, psi_f: QuantumState, obs: Observable, pointer: GaussianPointer
) -> float:
    """Mean pointer reading of the post-selected subensemble, by quadrature of the exact density."""
    dens = lambda x: pointer_distribution_postselected_exact(psi_i, psi_f, obs, pointer, x)
    norm = pointer_integral(dens, obs, pointer)
    if norm <= 0:
        raise NearOrthogonalPostselectionError("post-selected subensemble is empty")
    first = pointer_integral(lambda x: x * dens(x), obs, pointer)
    return first / norm - pointer.center


def pointer_expectation(psi_i: QuantumState, obs: Observable, pointer: GaussianPointer) -> float:
    """Mean pointer shift with no post-selection.

    Taken from the mixture of shifted Gaussians, whose mean does not depend
    on ``sigma_p``; it must equal ``<psi_i|A|psi_i>``.
    """
    w = np.abs(obs.components(psi_i)) ** 2
    shift = float(w @ obs.eigenvalues)
    direct = float(np.vdot(psi_i.amplitudes, obs.matrix @ psi_i.amplitudes).real)
    if abs(shift - direct) > 1e-10 * max(1.0, abs(direct)):
        raise NumericalError(f"pointer mean {shift!r} differs from <A> {direct!r}")
    return shift
