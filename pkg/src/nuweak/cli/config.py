"""Scan configuration: a JSON document validated into :class:`ScanConfig`.

Layout (units in key names; ``?`` marks optional keys)::

    {
      "n_flavors": 3,
      "mixing": {"angles": [t12, t13, t23], "delta_cp"?: 0.0},
      "masses_eV": [...]          # exactly one of these two
      "dm2_eV2": [dm2_21, dm2_31],
      "E_GeV": 1.0 | [1.0, 2.0, ...],
      "xi"?: 0.5,
      "sigma_xP_m": 1e-12, "sigma_xD_m": 1e-12,
      "L_km": [...],
      "pairs"?: [["e", "mu"], ...],
      "mode"?: "weak_closed",
      "conventions"?: {"delta_eps": "standard", "simplify": true, "symmetrize": false},
      "tolerances"?: {"unitarity": 1e-9},
      "current"?: {"tau_sigma": [...]},
      "pointer"?: {"observable": [[...]], "psi_i": [...], "psi_f": [...],
                   "sigma_p": 10.0, "p_grid": [...]}
    }

Complex numbers in ``pointer`` are written either as plain numbers or as
``[re, im]`` pairs.  Angles and phases are in radians.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Optional

from ..errors import ConfigError

__all__ = ["ScanConfig", "PointerDemo", "load_config", "dump_config", "config_from_dict", "FLAVOR_NAMES", "MODES"]

FLAVOR_NAMES = ("e", "mu", "tau")
MODES = ("standard", "weak_closed", "weak_quadrature", "current_profile", "pointer_demo")
SCAN_MODES = MODES[:3]
DEFAULT_TAU_SIGMA = (-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0)


@dataclass(frozen=True)
class PointerDemo:
    observable: tuple
    psi_i: tuple
    psi_f: tuple
    sigma_p: float
    p_grid: tuple


@dataclass(frozen=True)
class ScanConfig:
    n_flavors: int = 0
    angles: tuple = ()
    delta_cp: float = 0.0
    masses_eV: Optional[tuple] = None
    dm2_eV2: Optional[tuple] = None
    E_GeV: tuple = ()
    xi: float = 0.5
    sigma_xP_m: float = 0.0
    sigma_xD_m: float = 0.0
    L_km: tuple = ()
    pairs: tuple = ()
    mode: str = "weak_closed"
    delta_eps: str = "standard"
    simplify: bool = True
    symmetrize: bool = False
    unitarity_tol: float = 1e-9
    tau_sigma: tuple = DEFAULT_TAU_SIGMA
    pointer: Optional[PointerDemo] = None

    @property
    def flavor_names(self):
        return FLAVOR_NAMES[: self.n_flavors]

    def flavor_pairs(self):
        """Selected ``(alpha, beta)`` index pairs; all pairs when none were given."""
        names = self.flavor_names
        if not self.pairs:
            return [(a, b) for a in range(self.n_flavors) for b in range(self.n_flavors)]
        return [(names.index(a), names.index(b)) for a, b in self.pairs]

    def with_mode(self, mode: str) -> "ScanConfig":
        data = config_to_dict(self)
        data["mode"] = mode
        return config_from_dict(data)


def _get(d, key, path, kind, required=True, default=None):
    if key not in d:
        if required:
            raise ConfigError(path + key, "missing required key")
        return default
    return _typed(d[key], path + key, kind)


def _typed(val, key, kind):
    if kind is float:
        if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
            raise ConfigError(key, f"expected a finite number, got {val!r}")
        return float(val)
    if kind is int:
        if isinstance(val, bool) or not isinstance(val, int):
            raise ConfigError(key, f"expected an integer, got {val!r}")
        return val
    if kind is bool:
        if not isinstance(val, bool):
            raise ConfigError(key, f"expected true/false, got {val!r}")
        return val
    if kind is str:
        if not isinstance(val, str):
            raise ConfigError(key, f"expected a string, got {val!r}")
        return val
    if kind is dict:
        if not isinstance(val, dict):
            raise ConfigError(key, "expected an object")
        return val
    raise TypeError(kind)


def _floats(val, key, allow_scalar=False):
    if allow_scalar and not isinstance(val, list):
        return (_typed(val, key, float),)
    if not isinstance(val, list):
        raise ConfigError(key, "expected a list of numbers")
    return tuple(_typed(x, f"{key}[{i}]", float) for i, x in enumerate(val))


def _increasing(vals, key):
    if not vals:
        raise ConfigError(key, "grid must be non-empty")
    for i in range(1, len(vals)):
        if not vals[i] > vals[i - 1]:
            raise ConfigError(key, f"grid must be strictly increasing (entry {i})")
    return vals


def _complex(val, key):
    if isinstance(val, list):
        if len(val) != 2:
            raise ConfigError(key, "complex numbers are written [re, im]")
        return (_typed(val[0], key, float), _typed(val[1], key, float))
    return (_typed(val, key, float), 0.0)


def _complex_vector(val, key):
    if not isinstance(val, list) or not val:
        raise ConfigError(key, "expected a non-empty list")
    return tuple(_complex(x, f"{key}[{i}]") for i, x in enumerate(val))


def _pointer(d):
    p = "pointer."
    obs = d.get("observable")
    if not isinstance(obs, list) or not obs:
        raise ConfigError(p + "observable", "expected a square matrix (list of rows)")
    rows = tuple(_complex_vector(r, f"{p}observable[{i}]") for i, r in enumerate(obs))
    if any(len(r) != len(rows) for r in rows):
        raise ConfigError(p + "observable", "matrix must be square")
    psi_i = _complex_vector(d.get("psi_i"), p + "psi_i")
    psi_f = _complex_vector(d.get("psi_f"), p + "psi_f")
    for key, vec in (("psi_i", psi_i), ("psi_f", psi_f)):
        if len(vec) != len(rows):
            raise ConfigError(p + key, f"dimension {len(vec)} does not match observable ({len(rows)})")
    sigma_p = _get(d, "sigma_p", p, float)
    if sigma_p <= 0:
        raise ConfigError(p + "sigma_p", "must be positive")
    grid = _increasing(_floats(d.get("p_grid"), p + "p_grid"), p + "p_grid")
    return PointerDemo(rows, psi_i, psi_f, sigma_p, grid)


def config_from_dict(d) -> ScanConfig:
    """Validate a parsed document and fill in defaults."""
    if not isinstance(d, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    mode = _get(d, "mode", "", str, required=False, default="weak_closed")
    if mode not in MODES:
        raise ConfigError("mode", f"unknown mode {mode!r}; choose from {MODES}")
    pointer = _pointer(_get(d, "pointer", "", dict)) if "pointer" in d or mode == "pointer_demo" else None
    if mode == "pointer_demo" and "n_flavors" not in d:
        return ScanConfig(mode=mode, pointer=pointer)

    n = _get(d, "n_flavors", "", int)
    if n not in (2, 3):
        raise ConfigError("n_flavors", f"must be 2 or 3, got {n}")
    mixing = _get(d, "mixing", "", dict)
    angles = _floats(mixing.get("angles"), "mixing.angles")
    if len(angles) != (1 if n == 2 else 3):
        raise ConfigError("mixing.angles", f"{n} flavors need {1 if n == 2 else 3} angle(s), got {len(angles)}")
    delta_cp = _get(mixing, "delta_cp", "mixing.", float, required=False, default=0.0)
    if n == 2 and delta_cp:
        raise ConfigError("mixing.delta_cp", "2-flavor mixing has no CP phase")

    has_m, has_dm = "masses_eV" in d, "dm2_eV2" in d
    if has_m and has_dm:
        raise ConfigError("masses_eV", "give either masses_eV or dm2_eV2, not both (dm2_eV2 also present)")
    if not (has_m or has_dm):
        raise ConfigError("masses_eV", "missing: give masses_eV or dm2_eV2")
    masses = dm2 = None
    if has_m:
        masses = _floats(d["masses_eV"], "masses_eV")
        if len(masses) != n:
            raise ConfigError("masses_eV", f"expected {n} masses, got {len(masses)}")
        if any(m < 0 for m in masses):
            raise ConfigError("masses_eV", "masses must be non-negative")
    else:
        dm2 = _floats(d["dm2_eV2"], "dm2_eV2")
        if len(dm2) != n - 1:
            raise ConfigError("dm2_eV2", f"expected {n - 1} splittings (dm2_a1, a >= 2), got {len(dm2)}")

    E = _increasing(_floats(d.get("E_GeV"), "E_GeV", allow_scalar=True), "E_GeV") if "E_GeV" in d else None
    if E is None:
        raise ConfigError("E_GeV", "missing required key")
    if E[0] <= 0:
        raise ConfigError("E_GeV", "energies must be positive")
    xi = _get(d, "xi", "", float, required=False, default=0.5)
    sxp = _get(d, "sigma_xP_m", "", float)
    sxd = _get(d, "sigma_xD_m", "", float)
    for key, val in (("sigma_xP_m", sxp), ("sigma_xD_m", sxd)):
        if val <= 0:
            raise ConfigError(key, "must be positive")
    if "L_km" not in d:
        raise ConfigError("L_km", "missing required key")
    L = _increasing(_floats(d["L_km"], "L_km"), "L_km")
    if L[0] < 0:
        raise ConfigError("L_km", "baselines must be non-negative")

    names = FLAVOR_NAMES[:n]
    pairs = []
    for i, pair in enumerate(d.get("pairs", [])):
        key = f"pairs[{i}]"
        if not (isinstance(pair, list) and len(pair) == 2 and all(x in names for x in pair)):
            raise ConfigError(key, f"expected [alpha, beta] with flavors from {names}")
        pairs.append(tuple(pair))

    conv = _get(d, "conventions", "", dict, required=False, default={})
    delta_eps = _get(conv, "delta_eps", "conventions.", str, required=False, default="standard")
    if delta_eps not in ("standard", "as-written"):
        raise ConfigError("conventions.delta_eps", "must be 'standard' or 'as-written'")
    simplify = _get(conv, "simplify", "conventions.", bool, required=False, default=True)
    symmetrize = _get(conv, "symmetrize", "conventions.", bool, required=False, default=False)
    tol = _get(d, "tolerances", "", dict, required=False, default={})
    unitarity = _get(tol, "unitarity", "tolerances.", float, required=False, default=1e-9)

    tau_sigma = DEFAULT_TAU_SIGMA
    if "current" in d:
        cur = _get(d, "current", "", dict)
        if "tau_sigma" in cur:
            tau_sigma = _increasing(_floats(cur["tau_sigma"], "current.tau_sigma"), "current.tau_sigma")

    return ScanConfig(
        n_flavors=n,
        angles=angles,
        delta_cp=delta_cp,
        masses_eV=masses,
        dm2_eV2=dm2,
        E_GeV=E,
        xi=xi,
        sigma_xP_m=sxp,
        sigma_xD_m=sxd,
        L_km=L,
        pairs=tuple(pairs),
        mode=mode,
        delta_eps=delta_eps,
        simplify=simplify,
        symmetrize=symmetrize,
        unitarity_tol=unitarity,
        tau_sigma=tuple(tau_sigma),
        pointer=pointer,
    )


def load_config(source) -> ScanConfig:
    """Read a config from a path or an open text stream."""
    if isinstance(source, (str, os.PathLike)):
        try:
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError("<file>", str(exc)) from None
    else:
        text = source.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<json>", f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return config_from_dict(data)


def _complex_out(c):
    return [c[0], c[1]] if c[1] else c[0]


def config_to_dict(cfg: ScanConfig) -> dict:
    """Inverse of :func:`config_from_dict`, with every default written out."""
    d = {"mode": cfg.mode}
    if cfg.n_flavors:
        d.update(
            n_flavors=cfg.n_flavors,
            mixing={"angles": list(cfg.angles), "delta_cp": cfg.delta_cp},
            E_GeV=list(cfg.E_GeV),
            xi=cfg.xi,
            sigma_xP_m=cfg.sigma_xP_m,
            sigma_xD_m=cfg.sigma_xD_m,
            L_km=list(cfg.L_km),
            pairs=[list(p) for p in cfg.pairs],
            conventions={"delta_eps": cfg.delta_eps, "simplify": cfg.simplify, "symmetrize": cfg.symmetrize},
            tolerances={"unitarity": cfg.unitarity_tol},
            current={"tau_sigma": list(cfg.tau_sigma)},
        )
        if cfg.masses_eV is not None:
            d["masses_eV"] = list(cfg.masses_eV)
        else:
            d["dm2_eV2"] = list(cfg.dm2_eV2)
    if cfg.pointer is not None:
        p = cfg.pointer
        d["pointer"] = {
            "observable": [[_complex_out(c) for c in row] for row in p.observable],
            "psi_i": [_complex_out(c) for c in p.psi_i],
            "psi_f": [_complex_out(c) for c in p.psi_f],
            "sigma_p": p.sigma_p,
            "p_grid": list(p.p_grid),
        }
    return d


def dump_config(cfg: ScanConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n"
