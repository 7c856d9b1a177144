"""Parameter scans over baseline and energy, emitted as fixed-format rows."""

from __future__ import annotations

import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..errors import NumericalError
from ..kinematics import MixingMatrix, PacketWidths, build_pmns, mass_kinematics
from ..pointer import (
    GaussianPointer,
    Observable,
    QuantumState,
    pointer_distribution_postselected_exact,
    pointer_distribution_strong,
    pointer_distribution_weak_postselected,
)
from ..probability import (
    decoherence_factors,
    probability_standard,
    probability_weak_closed,
    probability_weak_quadrature,
)
from ..weakflavor import flavor_density_current
from . import units
from .config import FLAVOR_NAMES, ScanConfig

__all__ = ["NaturalParams", "to_natural_units", "run_scan", "scan_columns", "write_rows"]


@dataclass(frozen=True)
class NaturalParams:
    """Scan inputs in natural units: lengths in 1/GeV, masses and energies in GeV."""

    U: MixingMatrix
    masses: np.ndarray
    E: np.ndarray
    xi: float
    widths: PacketWidths
    L: np.ndarray

    def physical(self) -> dict:
        """Back to the config's units."""
        return {
            "masses_eV": units.natural_to_ev(self.masses),
            "E_GeV": np.array(self.E),
            "sigma_xP_m": units.natural_to_m(self.widths.sigma_xP),
            "sigma_xD_m": units.natural_to_m(self.widths.sigma_xD),
            "L_km": units.natural_to_km(self.L),
        }


def masses_from_splittings(dm2_ev2):
    """Masses in eV for splittings ``dm2_a1``, with the lightest state massless."""
    m2 = np.concatenate([[0.0], np.asarray(dm2_ev2, dtype=float)])
    m2 = m2 - m2.min()
    return np.sqrt(m2)


def to_natural_units(cfg: ScanConfig) -> NaturalParams:
    masses_ev = np.array(cfg.masses_eV) if cfg.masses_eV is not None else masses_from_splittings(cfg.dm2_eV2)
    return NaturalParams(
        U=build_pmns(cfg.angles, cfg.delta_cp, cfg.n_flavors),
        masses=units.ev_to_natural(masses_ev),
        E=np.array(cfg.E_GeV, dtype=float),
        xi=cfg.xi,
        widths=PacketWidths(units.m_to_natural(cfg.sigma_xP_m), units.m_to_natural(cfg.sigma_xD_m)),
        L=units.km_to_natural(np.array(cfg.L_km, dtype=float)),
    )


def _mass_pairs(n):
    return [(a, b) for a in range(1, n) for b in range(a)]


def scan_columns(cfg: ScanConfig):
    if cfg.mode == "current_profile":
        return ["L_km", "E_GeV", "tau_sigma", "alpha", "beta", "rho", "J"]
    if cfg.mode == "pointer_demo":
        return ["p_D", "strong", "weak_postselected", "exact_postselected"]
    cols = ["L_km", "E_GeV", "alpha", "beta", "mode", "value"]
    for a, b in _mass_pairs(cfg.n_flavors):
        tag = f"{a + 1}{b + 1}"
        cols += [f"phase_{tag}", f"damp_sep_{tag}", f"damp_coh_{tag}"]
    return cols


def _probability(cfg, U, kin, widths, alpha, beta, L):
    if cfg.mode == "standard":
        # Standard-route values carry units of length; report them in meters.
        res = probability_standard(U, kin, widths, alpha, beta, L, cfg.delta_eps)
        return units.natural_to_m(res.value)
    if cfg.mode == "weak_closed":
        res = probability_weak_closed(
            U, kin, widths, alpha, beta, L, cfg.simplify, cfg.delta_eps, cfg.symmetrize
        )
        return res.value
    return probability_weak_quadrature(U, kin, widths, alpha, beta, L).value


def _scan_point(cfg, nat, i, j):
    L_km, E_GeV = cfg.L_km[i], cfg.E_GeV[j]
    L = float(nat.L[i])
    try:
        kin = mass_kinematics(nat.E[j], nat.masses, nat.xi)
        f = decoherence_factors(kin, nat.widths, L, cfg.delta_eps)
        extra = []
        for a, b in _mass_pairs(cfg.n_flavors):
            extra += list(f.pair(a, b))
        values = {}
        for alpha, beta in cfg.flavor_pairs():
            values[alpha, beta] = _probability(cfg, nat.U, kin, nat.widths, alpha, beta, L)
        if cfg.mode != "standard":
            for alpha in {a for a, _ in cfg.flavor_pairs()}:
                total = sum(
                    values.get((alpha, b))
                    if (alpha, b) in values
                    else _probability(cfg, nat.U, kin, nat.widths, alpha, b, L)
                    for b in range(cfg.n_flavors)
                )
                if abs(total - 1) > cfg.unitarity_tol:
                    raise NumericalError(f"flavor sum from {FLAVOR_NAMES[alpha]} is {total!r}")
        rows = []
        for (alpha, beta), value in values.items():
            if not math.isfinite(value):
                raise NumericalError(f"non-finite value for {alpha}->{beta}")
            rows.append([L_km, E_GeV, FLAVOR_NAMES[alpha], FLAVOR_NAMES[beta], cfg.mode, value] + extra)
        return rows
    except (NumericalError, ArithmeticError) as exc:
        raise NumericalError(f"at L_km={L_km!r}, E_GeV={E_GeV!r}: {exc}") from exc


def _current_point(cfg, nat, i, j):
    L_km, E_GeV = cfg.L_km[i], cfg.E_GeV[j]
    L = float(nat.L[i])
    kin = mass_kinematics(nat.E[j], nat.masses, nat.xi)
    # Offsets are measured from the mean arrival delay of the mass packets.
    center = float(np.mean(kin.one_minus_v * L / kin.v))
    taus = center + np.array(cfg.tau_sigma) * nat.widths.sigma_x
    rows = []
    for alpha, beta in cfg.flavor_pairs():
        rho, J = flavor_density_current(nat.U, kin, nat.widths, alpha, beta, L, tau=taus)
        if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(J))):
            raise NumericalError(f"at L_km={L_km!r}, E_GeV={E_GeV!r}: non-finite current")
        for s, r, j_ in zip(cfg.tau_sigma, rho, J):
            rows.append([L_km, E_GeV, s, FLAVOR_NAMES[alpha], FLAVOR_NAMES[beta], float(r), float(j_)])
    return rows


def _pointer_rows(cfg):
    p = cfg.pointer
    obs = Observable(np.array([[complex(*c) for c in row] for row in p.observable]))
    psi_i = QuantumState([complex(*c) for c in p.psi_i])
    psi_f = QuantumState([complex(*c) for c in p.psi_f])
    pointer = GaussianPointer(p.sigma_p)
    grid = np.array(p.p_grid)
    strong = pointer_distribution_strong(psi_i, obs, pointer, grid)
    weak, _ = pointer_distribution_weak_postselected(psi_i, psi_f, obs, pointer, grid)
    exact = pointer_distribution_postselected_exact(psi_i, psi_f, obs, pointer, grid)
    return [[float(x), float(s), float(w), float(e)] for x, s, w, e in zip(grid, strong, weak, exact)]


def run_scan(cfg: ScanConfig, threads: int = 1):
    """Yield rows in deterministic order: L outer, E inner, flavor pairs innermost.

    Points may be evaluated concurrently; rows are always emitted in index order.
    """
    if cfg.mode == "pointer_demo":
        yield from _pointer_rows(cfg)
        return
    nat = to_natural_units(cfg)
    point = _current_point if cfg.mode == "current_profile" else _scan_point
    jobs = [(i, j) for i in range(len(cfg.L_km)) for j in range(len(cfg.E_GeV))]
    if threads <= 1:
        for i, j in jobs:
            yield from point(cfg, nat, i, j)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for rows in pool.map(lambda ij: point(cfg, nat, *ij), jobs):
            yield from rows


def _fmt(x):
    if isinstance(x, str):
        return x
    return f"{x:.16e}"


def write_rows(cfg: ScanConfig, rows, stream, fmt: str = "csv"):
    """Write rows as CSV (17 significant digits, LF endings) or as a JSON list."""
    cols = scan_columns(cfg)
    if fmt == "csv":
        stream.write(",".join(cols) + "\n")
        for row in rows:
            stream.write(",".join(_fmt(x) for x in row) + "\n")
    elif fmt == "json":
        records = [dict(zip(cols, row)) for row in rows]
        stream.write(json.dumps(records, indent=1) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def render(cfg: ScanConfig, threads: int = 1, fmt: str = "csv") -> str:
    buf = io.StringIO()
    write_rows(cfg, run_scan(cfg, threads), buf, fmt)
    return buf.getvalue()
