"""Conversions between laboratory units and natural units (GeV).

hbar*c is the only constant involved; it is fixed here and nowhere else.
"""

HBARC_MEV_FM = 197.3269804
HBARC_GEV_M = HBARC_MEV_FM * 1e-3 * 1e-15

M_IN_INV_GEV = 1.0 / HBARC_GEV_M
KM_IN_INV_GEV = 1e3 * M_IN_INV_GEV
EV_IN_GEV = 1e-9
EV2_IN_GEV2 = EV_IN_GEV**2

# dm2 L / 4E in radians for dm2 in eV^2, L in km and E in GeV (the familiar 1.267).
PHASE_COEFFICIENT = EV2_IN_GEV2 * KM_IN_INV_GEV / 4


def km_to_natural(L_km):
    return L_km * KM_IN_INV_GEV


def natural_to_km(L):
    return L / KM_IN_INV_GEV


def m_to_natural(x_m):
    return x_m * M_IN_INV_GEV


def natural_to_m(x):
    return x / M_IN_INV_GEV


def ev_to_natural(m_ev):
    return m_ev * EV_IN_GEV


def natural_to_ev(m):
    return m / EV_IN_GEV


def ev2_to_natural(dm2_ev2):
    return dm2_ev2 * EV2_IN_GEV2


def natural_to_ev2(dm2):
    return dm2 / EV2_IN_GEV2
