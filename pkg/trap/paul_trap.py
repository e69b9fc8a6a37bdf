import logging
from dataclasses import asdict, dataclass

import numpy as np

from trap.config import TrapConfig
from utils.constants import joule_to_ev
from utils.exceptions import PhysicsValidityError

logger = logging.getLogger(__name__)

ZIGZAG_COEFFICIENT = 3.23
ZIGZAG_EXPONENT = -1.83


@dataclass(frozen=True)
class TrapSummary:
    """Derived characteristics of a linear Paul trap.

    Parameters
    ----------
    a, b
        Mathieu parameters of the radial motion.
    omega_x, omega_y
        Secular frequencies along x and y in rad/s (nan when the motion is unbounded).
    omega_r
        Radial pseudopotential frequency in rad/s.
    omega_z
        Axial frequency in rad/s.
    axial_depth, radial_depth
        Depths of the axial and radial pseudopotential wells in eV.
    stable
        Whether the drive lies in the regime |a| << b^2 << 1 in which the secular approximation holds.
    """

    a: float
    b: float
    omega_x: float
    omega_y: float
    omega_r: float
    omega_z: float
    axial_depth: float
    radial_depth: float
    stable: bool

    def to_dict(self) -> dict:
        summary = asdict(self)
        for name in ("omega_x", "omega_y", "omega_r", "omega_z"):
            summary[name.replace("omega", "f") + "_hz"] = summary[name] / (2 * np.pi)
        return summary


def mathieu_parameters(cfg: TrapConfig) -> tuple[float, float]:
    """ Mathieu parameters (a, b) of the radial equations of motion. """
    species = cfg.species
    scale = species.mass * cfg.radial_extent ** 2 * cfg.rf_frequency ** 2
    a = 4 * species.charge_coulomb * cfg.dc_offset / scale
    b = 2 * species.charge_coulomb * cfg.rf_amplitude / scale
    return a, b


def characteristic_exponent(a: float, b: float, order: int = 1) -> float:
    """ Characteristic exponent beta of x'' + (a + 2b cos 2t) x = 0.

    Parameters
    ----------
    a, b
        Mathieu parameters.
    order
        1 for the lowest-order form beta^2 = a + b^2/2, 2 for the series carried to b^6.

    Returns
    -------
        beta, or nan when beta^2 < 0 (unbounded motion).
    """
    if order == 1:
        beta_sq = a + b ** 2 / 2
    elif order == 2:
        beta_sq = (a
                   + (1 / 2 + a / 2) * b ** 2
                   + (25 / 128 + 273 * a / 512) * b ** 4
                   + (317 / 2304 + 59525 * a / 82944) * b ** 6)
    else:
        raise ValueError(f"Invalid order: {order}. Valid options are 1, 2.")
    return float(np.sqrt(beta_sq)) if beta_sq >= 0 else float("nan")


def secular_frequencies(cfg: TrapConfig, order: int = 1) -> tuple[float, float]:
    """ Secular frequencies (omega_x, omega_y) in rad/s. The y motion sees a -> -a. """
    a, b = mathieu_parameters(cfg)
    half_rf = cfg.rf_frequency / 2
    return half_rf * characteristic_exponent(a, b, order), half_rf * characteristic_exponent(-a, b, order)


def axial_frequency(cfg: TrapConfig) -> float:
    """ Axial frequency from the override or from the endcap estimate m wz^2 z0^2 / 2 = xi q U12. """
    if cfg.axial_frequency_override is not None:
        return cfg.axial_frequency_override
    if cfg.endcap_voltage is None or cfg.geometric_factor is None:
        raise ValueError("Axial frequency needs either axial_frequency_override or both endcap_voltage and "
                         "geometric_factor")
    if not cfg.endcap_voltage > 0:
        raise ValueError(f"endcap_voltage must be positive, got {cfg.endcap_voltage}")
    species = cfg.species
    return float(np.sqrt(2 * cfg.geometric_factor * species.charge_coulomb * cfg.endcap_voltage
                         / (species.mass * cfg.endcap_distance ** 2)))


def well_depth(mass: float, omega: float, extent: float) -> float:
    """ Depth m omega^2 extent^2 / 2 of a harmonic well, in eV. """
    return joule_to_ev(mass * omega ** 2 * extent ** 2 / 2)


def trap_characteristics(cfg: TrapConfig) -> TrapSummary:
    """ Evaluate stability parameters, secular frequencies and well depths of a trap drive.

    Parameters
    ----------
    cfg
        The trap drive. Requires a positive RF amplitude and axial data (override or endcap voltage
        with geometric factor).

    Returns
    -------
        The TrapSummary of the drive.
    """
    if not cfg.rf_amplitude > 0:
        raise ValueError(f"rf_amplitude must be positive, got {cfg.rf_amplitude}")

    a, b = mathieu_parameters(cfg)
    omega_x, omega_y = secular_frequencies(cfg)
    omega_r = cfg.rf_frequency * b / (2 * np.sqrt(2))
    omega_z = axial_frequency(cfg)
    mass = cfg.species.mass
    stable = bool(abs(a) < b ** 2 / 10 and b ** 2 < 0.1)
    if not stable:
        logger.warning(f"Trap drive outside the secular regime: a={a:.4g}, b={b:.4g}")

    return TrapSummary(
        a=a,
        b=b,
        omega_x=omega_x,
        omega_y=omega_y,
        omega_r=omega_r,
        omega_z=omega_z,
        axial_depth=well_depth(mass, omega_z, cfg.endcap_distance),
        radial_depth=well_depth(mass, omega_r, cfg.radial_extent),
        stable=stable,
    )


def critical_aspect_ratio(n_ions: int) -> float:
    """ Critical value of (omega_z/omega_r)^2 above which an N-ion string turns into a zig-zag. """
    if n_ions < 2:
        raise ValueError(f"The zig-zag criterion needs at least 2 ions, got {n_ions}")
    return ZIGZAG_COEFFICIENT * n_ions ** ZIGZAG_EXPONENT


def is_linear_configuration(aspect_ratio: float, critical_ratio: float) -> bool:
    """ The boundary is exclusive: a string exactly at the critical ratio counts as unstable. """
    return aspect_ratio < critical_ratio


def linear_stability(n_ions: int, omega_z: float, omega_r: float) -> tuple[float, bool]:
    """ Return (alpha_crit, is_linear) for N ions with axial and radial frequencies omega_z, omega_r. """
    alpha_crit = critical_aspect_ratio(n_ions)
    return alpha_crit, is_linear_configuration((omega_z / omega_r) ** 2, alpha_crit)


def require_stable(cfg: TrapConfig) -> tuple[float, float]:
    """ Return (a, b), refusing drives outside the secular regime. Without RF only a >= 0 passes. """
    a, b = mathieu_parameters(cfg)
    if b == 0:
        if a < 0:
            raise PhysicsValidityError(f"A static field with a={a:.4g} < 0 confines neither radial axis")
        return a, b
    if not (abs(a) < b ** 2 / 10 and b ** 2 < 0.1):
        raise PhysicsValidityError(
            f"Secular approximation requires |a| < b^2/10 and b^2 < 0.1, got a={a:.4g}, b={b:.4g}"
        )
    return a, b
