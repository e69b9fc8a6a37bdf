from dataclasses import dataclass
from pathlib import Path

import numpy as np

from utils.constants import ATOMIC_MASS_UNIT, CALCIUM_40_MASS_AMU, ELEMENTARY_CHARGE
from utils.exceptions import ParseError
from utils.keyvalue import parse_key_value


@dataclass(frozen=True)
class IonSpecies:
    """A trapped ion species.

    Parameters
    ----------
    mass
        Ion mass in kg.
    charge
        Charge in multiples of the elementary charge.
    name
        Display label.
    """

    mass: float
    charge: int = 1
    name: str = ""

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"Ion mass must be positive, got {self.mass}")
        if int(self.charge) != self.charge or self.charge < 1:
            raise ValueError(f"Ion charge must be an integer >= 1, got {self.charge}")

    @classmethod
    def from_amu(cls, mass_amu: float, charge: int = 1, name: str = ""):
        return cls(mass=mass_amu * ATOMIC_MASS_UNIT, charge=int(charge), name=name)

    @property
    def charge_coulomb(self) -> float:
        return self.charge * ELEMENTARY_CHARGE


CALCIUM_40 = IonSpecies.from_amu(CALCIUM_40_MASS_AMU, 1, "40Ca+")


@dataclass(frozen=True)
class TrapConfig:
    """Electrode drive of a linear Paul trap.

    Parameters
    ----------
    dc_offset
        Static quadrupole voltage U0 in V.
    rf_amplitude
        RF voltage amplitude V0 in V.
    rf_frequency
        RF drive frequency Omega in rad/s.
    radial_extent
        Distance r0 from the trap axis to the electrodes in m.
    endcap_distance
        Distance from the trap centre to an endcap in m.
    species
        The trapped ion species.
    endcap_voltage
        Endcap voltage U12 in V. Needed for the axial frequency unless it is overridden.
    geometric_factor
        Dimensionless endcap efficiency xi in (0, 1].
    axial_frequency_override
        Measured axial frequency in rad/s; takes precedence over the endcap estimate.
    """

    dc_offset: float
    rf_amplitude: float
    rf_frequency: float
    radial_extent: float
    endcap_distance: float
    species: IonSpecies = CALCIUM_40
    endcap_voltage: float | None = None
    geometric_factor: float | None = None
    axial_frequency_override: float | None = None

    def __post_init__(self):
        if self.rf_amplitude < 0:
            raise ValueError(f"rf_amplitude must be non-negative, got {self.rf_amplitude}")
        for name in ("rf_frequency", "radial_extent", "endcap_distance"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.geometric_factor is not None and not 0 < self.geometric_factor <= 1:
            raise ValueError(f"geometric_factor must lie in (0, 1], got {self.geometric_factor}")
        if self.axial_frequency_override is not None and not self.axial_frequency_override > 0:
            raise ValueError(f"axial_frequency_override must be positive, got {self.axial_frequency_override}")

    @property
    def rf_period(self) -> float:
        return 2 * np.pi / self.rf_frequency

    @classmethod
    def from_mathieu_parameters(
        cls,
        a: float,
        b: float,
        rf_frequency: float,
        radial_extent: float,
        species: IonSpecies = CALCIUM_40,
        endcap_distance: float = 5e-3,
        **kwargs,
    ):
        """ Build the drive voltages that realise the Mathieu parameters (a, b). """
        scale = species.mass * radial_extent ** 2 * rf_frequency ** 2 / species.charge_coulomb
        return cls(
            dc_offset=a * scale / 4,
            rf_amplitude=b * scale / 2,
            rf_frequency=rf_frequency,
            radial_extent=radial_extent,
            endcap_distance=endcap_distance,
            species=species,
            **kwargs,
        )


CONFIG_KEYS = ("mass_amu", "charge_e", "u0_v", "v0_v", "rf_hz", "r0_m", "endcap_m", "u12_v", "xi", "omega_z_hz")
REQUIRED_KEYS = ("v0_v", "rf_hz", "r0_m", "endcap_m")


def _charge(values: dict, text: str, source: str | None) -> int:
    charge = values.get("charge_e", 1.0)
    if not float(charge).is_integer():
        for line_number, line in enumerate(text.splitlines(), start=1):
            if line.split("#", 1)[0].strip().startswith("charge_e"):
                raise ParseError(
                    f"charge_e must be a whole number of elementary charges, got {charge:g}",
                    line_number, line.index("charge_e") + 1, source,
                )
    return int(charge)


def parse_trap_config(text: str, source: str | None = None) -> TrapConfig:
    """ Read a trap configuration from flat key=value text. Frequencies are given in Hz. """
    values = parse_key_value(text, CONFIG_KEYS, source)
    missing = [key for key in REQUIRED_KEYS if key not in values]
    if missing:
        last_line = max(1, len(text.splitlines()))
        raise ParseError(f"missing required keys: {', '.join(missing)}", last_line, 1, source)

    species = IonSpecies.from_amu(values.get("mass_amu", CALCIUM_40_MASS_AMU), _charge(values, text, source))
    omega_z = values.get("omega_z_hz")
    return TrapConfig(
        dc_offset=values.get("u0_v", 0.0),
        rf_amplitude=values["v0_v"],
        rf_frequency=2 * np.pi * values["rf_hz"],
        radial_extent=values["r0_m"],
        endcap_distance=values["endcap_m"],
        species=species,
        endcap_voltage=values.get("u12_v"),
        geometric_factor=values.get("xi"),
        axial_frequency_override=None if omega_z is None else 2 * np.pi * omega_z,
    )


def load_trap_config(path) -> TrapConfig:
    path = Path(path)
    return parse_trap_config(path.read_text(encoding="utf-8"), source=path.name)
