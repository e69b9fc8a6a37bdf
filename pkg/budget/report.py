import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path

from budget.offresonant import lamb_dicke_checks, offres_report
from budget.timing import timing_report
from chain.laser import LaserConfig
from utils.constants import DEFAULT_ANALYSIS_TIME, DEFAULT_AXIAL_FREQUENCY, DEFAULT_COUPLING, angular_to_hz

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BudgetReport:
    """Error and timing budget of one working point.

    Probabilities are peak values, frequencies in rad/s, energies in J and times in s.
    """

    blue_probability: float
    red_probability: float
    carrier_probability: float
    blue_margin: float
    red_margin: float
    carrier_margin: float
    stark_shift: float
    lamb_dicke_margin: float
    eta: float
    recoil_energy: float
    analysis_time: float
    sideband_time: float
    total_time: float

    def __post_init__(self):
        for name in ("blue_probability", "red_probability", "carrier_probability"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {getattr(self, name)}")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, path, seed: int | None = None, extra: dict | None = None):
        content = {"budget": self.to_dict(), **(extra or {})}
        if seed is not None:
            content["seed"] = seed
        Path(path).write_text(json.dumps(content, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def budget_report(
    n_ions: int = 2,
    n_gate_ions: int | None = None,
    fidelity: float = 0.99,
    coupling: float = DEFAULT_COUPLING,
    phonons: int = 1,
    laser: LaserConfig | None = None,
    axial_frequency: float = DEFAULT_AXIAL_FREQUENCY,
    analysis_time: float = DEFAULT_ANALYSIS_TIME,
    eta: float | None = None,
) -> BudgetReport:
    """ Combine the off-resonant, Lamb-Dicke and timing estimates.

    The Lamb-Dicke parameter defaults to sqrt(E_r / hbar omega_z) of the laser; pass `eta` to use a mode
    specific value. The bus (mode frequency nu) is taken to be the axial COM mode.
    """
    timing = timing_report(n_ions, n_gate_ions, fidelity, laser=laser, axial_frequency=axial_frequency,
                           analysis_time=analysis_time)
    eta = timing.eta if eta is None else eta
    offresonant = offres_report(coupling, eta, phonons, axial_frequency)
    report = BudgetReport(
        blue_probability=offresonant.blue,
        red_probability=offresonant.red,
        carrier_probability=offresonant.carrier,
        blue_margin=offresonant.blue_margin,
        red_margin=offresonant.red_margin,
        carrier_margin=offresonant.carrier_margin,
        stark_shift=offresonant.stark_shift,
        lamb_dicke_margin=lamb_dicke_checks(eta, phonons)["lamb_dicke_limit"],
        eta=eta,
        recoil_energy=timing.recoil_energy,
        analysis_time=analysis_time,
        sideband_time=timing.sideband_time,
        total_time=timing.total_time,
    )
    logger.info(f"Budget: P_C={report.carrier_probability:.3g}, T={report.total_time * 1e3:.3f} ms, "
                f"Stark shift {angular_to_hz(report.stark_shift):.4g} Hz")
    return report
