"""Neutrino oscillations as weak measurements with flavor post-selection."""

from .errors import (
    ConfigError,
    DomainError,
    NearOrthogonalPostselectionError,
    NumericalError,
    ParameterError,
    RegimeWarning,
    RelativityWarning,
)
from .kinematics import MixingMatrix, PacketWidths, build_pmns, coherence_length, mass_kinematics, packet_widths
from .probability import (
    decoherence_factors,
    probability_standard,
    probability_weak_closed,
    probability_weak_quadrature,
    standard_flavor_sum,
)

__version__ = "0.1.0"
