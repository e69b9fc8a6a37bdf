import logging
from dataclasses import asdict, dataclass

import numpy as np
import pandas as pd

from chain.laser import LaserConfig
from trap.config import CALCIUM_40, IonSpecies
from utils.constants import DEFAULT_ANALYSIS_TIME, DEFAULT_AXIAL_FREQUENCY, HBAR, PLANCK

logger = logging.getLogger(__name__)

TABLE_SIZES = (2, 3, 6, 9, 10)
TABLE_FIDELITIES = (0.99, 0.75)


@dataclass(frozen=True)
class TimingEstimate:
    """Minimal duration of a multi-qubit CNOT on `n_gate_ions` of `n_ions` ions.

    `sideband_time` T_B is the shortest red-sideband pi pulse for the requested fidelity, `total_time` is
    2 (T_A + Q T_B). Energies in J, times in s.
    """

    n_ions: int
    n_gate_ions: int
    fidelity: float
    recoil_energy: float
    eta: float
    analysis_time: float
    sideband_time: float
    total_time: float

    def to_dict(self) -> dict:
        return asdict(self)


def recoil_energy(laser: LaserConfig | None = None, species: IonSpecies = CALCIUM_40) -> float:
    laser = LaserConfig() if laser is None else laser
    return laser.recoil_energy(species)


def sideband_time(n_ions: int, fidelity: float, energy: float,
                  axial_frequency: float = DEFAULT_AXIAL_FREQUENCY) -> float:
    """ T_B from 1/T_B = 2 sqrt(2) eps sqrt(E_r/(N h) omega_z/2pi) with eps = sqrt(1 - F). """
    if not 0 < fidelity < 1:
        raise ValueError(f"fidelity must lie in (0, 1), got {fidelity}")
    if n_ions < 1:
        raise ValueError(f"n_ions must be positive, got {n_ions}")
    imprecision = np.sqrt(1 - fidelity)
    rate = 2 * np.sqrt(2) * imprecision * np.sqrt(energy / (n_ions * PLANCK) * axial_frequency / (2 * np.pi))
    return float(1 / rate)


def timing_report(
    n_ions: int,
    n_gate_ions: int | None = None,
    fidelity: float = 0.99,
    laser: LaserConfig | None = None,
    axial_frequency: float = DEFAULT_AXIAL_FREQUENCY,
    species: IonSpecies = CALCIUM_40,
    analysis_time: float = DEFAULT_ANALYSIS_TIME,
) -> TimingEstimate:
    """ Timing of a multi-qubit CNOT: two carrier pi/2 pulses of T_A each, 2Q-2 red-sideband pi pulses
    and one 2pi pulse of T_B and 2 T_B.

    Parameters
    ----------
    n_ions
        N, ions in the trap.
    n_gate_ions
        Q, ions taking part in the gate; defaults to N.
    fidelity
        Target fidelity F of one sideband pulse.
    laser
        Laser (wavelength and beam angle); Ca+ 729 nm at 60 degrees by default.
    axial_frequency
        omega_z in rad/s.
    species
        Ion species for the recoil energy.
    analysis_time
        T_A in s.
    """
    n_gate_ions = n_ions if n_gate_ions is None else n_gate_ions
    if not 1 <= n_gate_ions <= n_ions:
        raise ValueError(f"n_gate_ions must lie in 1..{n_ions}, got {n_gate_ions}")
    if analysis_time < 0:
        raise ValueError(f"analysis_time must be non-negative, got {analysis_time}")
    energy = recoil_energy(laser, species)
    t_b = sideband_time(n_ions, fidelity, energy, axial_frequency)
    estimate = TimingEstimate(
        n_ions=n_ions,
        n_gate_ions=n_gate_ions,
        fidelity=fidelity,
        recoil_energy=energy,
        eta=float(np.sqrt(energy / (HBAR * axial_frequency))),
        analysis_time=analysis_time,
        sideband_time=t_b,
        total_time=2 * (analysis_time + n_gate_ions * t_b),
    )
    logger.debug(f"Timing for N={n_ions}, Q={n_gate_ions}, F={fidelity}: T_B={t_b:.4g} s")
    return estimate


def speed_table(sizes=TABLE_SIZES, fidelities=TABLE_FIDELITIES, **kwargs) -> pd.DataFrame:
    """ T_B in us and T in ms of an N-ion CNOT on N ions, one row per N and one column pair per fidelity.

    Columns are N, T_B_us_F<percent>... followed by T_ms_F<percent>...; keyword arguments go to
    `timing_report`.
    """
    table = {"N": list(sizes)}
    estimates = {f: [timing_report(n, fidelity=f, **kwargs) for n in sizes] for f in fidelities}
    for f in fidelities:
        table[f"T_B_us_F{round(f * 100)}"] = [e.sideband_time * 1e6 for e in estimates[f]]
    for f in fidelities:
        table[f"T_ms_F{round(f * 100)}"] = [e.total_time * 1e3 for e in estimates[f]]
    return pd.DataFrame(table)


# (name, N, Q, number of gates)
COMPARISON_CASES = (
    ("cnot_two_ions", 2, 2, 1),
    ("cnot_ten_ions", 10, 2, 1),
    ("toffoli_network_nine_ions", 9, 2, 12),
    ("direct_six_qubit_cnot", 6, 6, 1),
)


def network_comparison(fidelity: float = 0.99, **kwargs) -> pd.DataFrame:
    """ A two-qubit CNOT with 2 and with 10 ions in the trap, a six-qubit CNOT decomposed into 12
    two-qubit CNOTs on 9 ions, and the same gate applied directly on 6 ions. """
    rows = []
    for name, n_ions, n_gate_ions, n_gates in COMPARISON_CASES:
        estimate = timing_report(n_ions, n_gate_ions, fidelity=fidelity, **kwargs)
        rows.append({
            "case": name,
            "N": n_ions,
            "Q": n_gate_ions,
            "gates": n_gates,
            "total_time_ms": n_gates * estimate.total_time * 1e3,
        })
    return pd.DataFrame(rows)
