import numpy as np
import pytest

from trap.config import CALCIUM_40, TrapConfig


@pytest.fixture
def calcium():
    return CALCIUM_40


@pytest.fixture
def calcium_trap():
    """ Ca-40 in a 1.2 mm trap driven at 17 MHz, 500 V, with a 700 kHz axial frequency. """
    return TrapConfig(
        dc_offset=0.0,
        rf_amplitude=500.0,
        rf_frequency=2 * np.pi * 17e6,
        radial_extent=1.2e-3,
        endcap_distance=5e-3,
        species=CALCIUM_40,
        axial_frequency_override=2 * np.pi * 700e3,
    )
