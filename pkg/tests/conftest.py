import numpy as np
import pytest

from nuweak.kinematics import build_pmns, mass_kinematics, packet_widths


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


@pytest.fixture
def two_flavor():
    """A sharp-peak two-flavor setup with an oscillation length of a few thousand sigma_x."""
    U = build_pmns([0.6], n_flavors=2)
    kin = mass_kinematics(1.0, [0.0, 2e-3], xi=0.5)
    widths = packet_widths(3.0, 4.0)
    return U, kin, widths
