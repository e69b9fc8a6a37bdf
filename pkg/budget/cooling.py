import logging
from dataclasses import asdict, dataclass

import numpy as np

from utils.constants import BOLTZMANN, HBAR

logger = logging.getLogger(__name__)

# Angular distribution factor of dipole radiation.
DIPOLE_PATTERN = 2 / 5


@dataclass(frozen=True)
class CoolingParams:
    """Parameters of laser cooling on one transition.

    Parameters
    ----------
    linewidth
        Natural linewidth Gamma of the cooling transition in rad/s.
    axial_frequency
        Axial trap frequency omega_z in rad/s.
    detuning
        Red detuning delta of the cooling laser in rad/s, given as a positive number. Defaults to
        the optimum delta = Gamma.
    pattern_factor
        alpha, set by the angular distribution of the emitted light (2/5 for a dipole pattern).
    """

    linewidth: float
    axial_frequency: float
    detuning: float | None = None
    pattern_factor: float = DIPOLE_PATTERN

    def __post_init__(self):
        if not self.linewidth > 0:
            raise ValueError(f"linewidth must be positive, got {self.linewidth}")
        if not self.axial_frequency > 0:
            raise ValueError(f"axial_frequency must be positive, got {self.axial_frequency}")
        if self.detuning is None:
            object.__setattr__(self, "detuning", self.linewidth)
        if not self.detuning > 0:
            raise ValueError(f"detuning must be positive, got {self.detuning}")
        if self.pattern_factor < 0:
            raise ValueError(f"pattern_factor must be non-negative, got {self.pattern_factor}")


@dataclass(frozen=True)
class CoolingLimits:
    doppler: float
    doppler_optimal: float
    sideband: float
    doppler_temperature: float

    def to_dict(self) -> dict:
        return asdict(self)


def doppler_limit(params: CoolingParams) -> float:
    """ <n_z>_min = (Gamma/omega_z) ((1 + alpha)/4) (Gamma/delta + delta/Gamma) - 1/2. """
    ratio = params.linewidth / params.axial_frequency
    detuning_ratio = params.linewidth / params.detuning
    return ratio * (1 + params.pattern_factor) / 4 * (detuning_ratio + 1 / detuning_ratio) - 0.5


def optimal_doppler_limit(params: CoolingParams) -> float:
    """ Doppler limit at delta = Gamma without the zero-point 1/2: (1 + alpha)/2 Gamma/omega_z,
    which is 7/10 Gamma/omega_z for a dipole pattern. """
    return (1 + params.pattern_factor) / 2 * params.linewidth / params.axial_frequency


def sideband_limit(params: CoolingParams) -> float:
    """ <n_z>_min = (Gamma/omega_z)^2 (alpha + 1/2). """
    return (params.linewidth / params.axial_frequency) ** 2 * (params.pattern_factor + 0.5)


def doppler_temperature(linewidth: float) -> float:
    """ hbar Gamma / 2 k_B in K. """
    return HBAR * linewidth / (2 * BOLTZMANN)


def cooling_limits(params: CoolingParams) -> CoolingLimits:
    limits = CoolingLimits(
        doppler=doppler_limit(params),
        doppler_optimal=optimal_doppler_limit(params),
        sideband=sideband_limit(params),
        doppler_temperature=doppler_temperature(params.linewidth),
    )
    logger.debug(f"Cooling limits for Gamma/omega_z = {params.linewidth / params.axial_frequency:.4g}: {limits}")
    return limits


@dataclass(frozen=True)
class EitEstimate:
    stark_shift: float
    rabi_fluctuation: float


def eit_stark_shift(detuning: float, rabi: float) -> float:
    """ Light shift (sqrt(Delta_r^2 + |Omega_r|^2) - |Delta_r|) / 2 of the strong coupling laser, in rad/s. """
    return (np.hypot(detuning, abs(rabi)) - abs(detuning)) / 2


def rabi_fluctuation(spectators) -> float:
    """ Relative blurring sqrt(sum_beta eta_beta^4 <n_beta> (<n_beta> + 1)) of the bus Rabi frequency
    caused by thermally excited spectator modes.

    :param spectators: Iterable of (eta_beta, <n_beta>) pairs, one per spectator mode.
    """
    spectators = np.asarray(list(spectators), dtype=float).reshape(-1, 2)
    if (spectators[:, 1] < 0).any():
        raise ValueError("Mean phonon numbers of spectator modes must be non-negative")
    etas, occupations = spectators[:, 0], spectators[:, 1]
    return float(np.sqrt(np.sum(etas ** 4 * occupations * (occupations + 1))))


def eit_estimates(detuning: float, rabi: float, spectators=()) -> EitEstimate:
    """ Stark shift of the EIT coupling laser and Rabi-frequency blurring of the bus.

    Parameters
    ----------
    detuning
        Detuning Delta_r of the strong laser in rad/s.
    rabi
        Rabi frequency Omega_r of the strong laser in rad/s.
    spectators
        (eta_beta, <n_beta>) of every mode other than the bus.

    Returns
    -------
        EitEstimate with the shift in rad/s and the dimensionless fluctuation Delta Omega / Omega.
    """
    return EitEstimate(eit_stark_shift(detuning, rabi), rabi_fluctuation(spectators))
