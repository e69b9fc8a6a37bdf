from dataclasses import dataclass

import numpy as np
import pandas as pd

from chain.modes import ModeSpectrum
from trap.config import IonSpecies
from utils.constants import (
    DEFAULT_BEAM_ANGLE, DEFAULT_COUPLING, DEFAULT_WAVELENGTH, HBAR,
)

GEOMETRIES = ("travelling", "standing")
TRANSITION_KINDS = ("dipole", "quadrupole")


@dataclass(frozen=True)
class LaserConfig:
    """A laser beam addressing the ions.

    Parameters
    ----------
    wavelength
        Wavelength Lambda in m.
    beam_angle
        Angle theta between the beam and the trap axis in rad.
    coupling
        Coupling magnitude |lambda| in rad/s. Field amplitude, polarisation and the atomic matrix
        element are folded into this number.
    phase
        Laser phase in rad.
    geometry
        - 'travelling' - travelling wave</br>
        - 'standing' - standing wave, requires `standing_positions`</br>
    standing_positions
        Per-ion position chi_j of the ion in the standing wave, in rad.
    transition_kind
        - 'dipole'</br>
        - 'quadrupole'</br>
    """

    wavelength: float = DEFAULT_WAVELENGTH
    beam_angle: float = DEFAULT_BEAM_ANGLE
    coupling: float = DEFAULT_COUPLING
    phase: float = 0.0
    geometry: str = "travelling"
    standing_positions: tuple | None = None
    transition_kind: str = "quadrupole"

    def __post_init__(self):
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        if self.coupling < 0:
            raise ValueError(f"coupling must be non-negative, got {self.coupling}")
        if self.geometry not in GEOMETRIES:
            raise ValueError(f"Invalid geometry: {self.geometry}. Valid options are {', '.join(GEOMETRIES)}.")
        if self.transition_kind not in TRANSITION_KINDS:
            raise ValueError(f"Invalid transition kind: {self.transition_kind}. "
                             f"Valid options are {', '.join(TRANSITION_KINDS)}.")
        if self.geometry == "standing" and self.standing_positions is None:
            raise ValueError("A standing-wave laser needs standing_positions")

    @property
    def wave_number(self) -> float:
        """ Projection (2 pi / Lambda) cos(theta) of the wave vector on the trap axis. """
        return 2 * np.pi / self.wavelength * np.cos(self.beam_angle)

    def recoil_energy(self, species: IonSpecies) -> float:
        """ hbar^2 kappa^2 / 2m in J. """
        return HBAR ** 2 * self.wave_number ** 2 / (2 * species.mass)


def lamb_dicke_parameters(spectrum: ModeSpectrum, laser: LaserConfig, mode_index: int) -> np.ndarray:
    """ Per-ion Lamb-Dicke parameters eta_j = K_j^(alpha) kappa z0 for mode `mode_index` (1-based). """
    if not 1 <= mode_index <= spectrum.n_modes:
        raise ValueError(f"mode_index must lie in 1..{spectrum.n_modes}, got {mode_index}")
    return spectrum.coupling_factors[mode_index - 1] * laser.wave_number * spectrum.ground_state_length


def mode_table(spectrum: ModeSpectrum, laser: LaserConfig) -> pd.DataFrame:
    """ One row per mode with columns alpha, mu, nu_hz, D_1..D_N, K_1..K_N, eta_1..eta_N. """
    n_ions = spectrum.n_modes
    table = {
        "alpha": np.arange(1, n_ions + 1),
        "mu": spectrum.eigenvalues,
        "nu_hz": spectrum.frequencies / (2 * np.pi),
    }
    for prefix, values in (("D", spectrum.eigenvectors), ("K", spectrum.coupling_factors)):
        for ion in range(n_ions):
            table[f"{prefix}_{ion + 1}"] = values[:, ion]
    etas = np.array([lamb_dicke_parameters(spectrum, laser, alpha) for alpha in range(1, n_ions + 1)])
    for ion in range(n_ions):
        table[f"eta_{ion + 1}"] = etas[:, ion]
    return pd.DataFrame(table)
