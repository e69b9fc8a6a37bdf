"""Physical constants (CODATA 2018) and the ion species used throughout the package."""

import numpy as np

ELEMENTARY_CHARGE = 1.602176634e-19  # C, exact
VACUUM_PERMITTIVITY = 8.8541878128e-12  # F/m
HBAR = 1.054571817e-34  # J s
PLANCK = 6.62607015e-34  # J s, exact
ATOMIC_MASS_UNIT = 1.66053906660e-27  # kg
BOLTZMANN = 1.380649e-23  # J/K, exact
SPEED_OF_LIGHT = 299792458.0  # m/s, exact

COULOMB_CONSTANT = 1.0 / (4.0 * np.pi * VACUUM_PERMITTIVITY)

CALCIUM_40_MASS_AMU = 39.962590863

# Ca+ defaults quoted for the 729 nm quadrupole transition.
DEFAULT_WAVELENGTH = 729e-9
DEFAULT_BEAM_ANGLE = np.pi / 3
DEFAULT_AXIAL_FREQUENCY = 2 * np.pi * 700e3
DEFAULT_COUPLING = 2 * np.pi * 50e3
DEFAULT_ANALYSIS_TIME = 5e-6


def hz_to_angular(frequency_hz: float) -> float:
    return 2 * np.pi * frequency_hz


def angular_to_hz(omega: float) -> float:
    return omega / (2 * np.pi)


def joule_to_ev(energy: float) -> float:
    return energy / ELEMENTARY_CHARGE
