import logging
import warnings
from dataclasses import asdict, dataclass

import numpy as np
import pandas as pd
from tqdm import tqdm

from interaction.coupling import CouplingContext, laguerre_rabi, lamb_dicke_rabi
from interaction.full import peak_population
from interaction.pulse import Pulse
from statespace.state import basis_state
from utils.exceptions import MarginWarning

logger = logging.getLogger(__name__)

WEAK_COUPLING_LIMIT = 0.1
LAMB_DICKE_LIMIT = 0.1
SCAN_KINDS = ("red", "carrier")


@dataclass(frozen=True)
class OffResonantEstimate:
    """Peak off-resonant probabilities and weak-coupling margins of one ion.

    `blue`, `red` and `carrier` are the peaks (sin^2 = 1) of the probabilities of the off-resonant first
    blue sideband and first red sideband while driving the carrier, and of the off-resonant carrier while
    driving the first red sideband. The margins are the ratios that must be small for the weak coupling
    regime, `stark_shift` is |lambda|^2 / 2 nu in rad/s.
    """

    blue: float
    red: float
    carrier: float
    blue_margin: float
    red_margin: float
    carrier_margin: float
    stark_shift: float

    def to_dict(self) -> dict:
        return asdict(self)


def _check_positive(mode_frequency: float, phonons: int):
    if not mode_frequency > 0:
        raise ValueError(f"mode_frequency must be positive, got {mode_frequency}")
    if phonons < 0:
        raise ValueError(f"Phonon number must be non-negative, got {phonons}")


def offres_report(coupling: float, eta: float, phonons: int, mode_frequency: float) -> OffResonantEstimate:
    """ Off-resonant budget of an ion in |g>|n>.

    Parameters
    ----------
    coupling
        |lambda| in rad/s.
    eta
        Lamb-Dicke parameter.
    phonons
        Bus occupation n.
    mode_frequency
        nu in rad/s.

    Returns
    -------
        OffResonantEstimate; probabilities are capped at 1 once the weak coupling regime is left.
    """
    _check_positive(mode_frequency, phonons)
    ratio = abs(coupling) / mode_frequency
    estimate = OffResonantEstimate(
        blue=min(1.0, ratio ** 2 * eta ** 2 * (phonons + 1)),
        red=min(1.0, ratio ** 2 * eta ** 2 * phonons),
        carrier=min(1.0, ratio ** 2),
        blue_margin=ratio * eta * np.sqrt(phonons + 1),
        red_margin=ratio * eta * np.sqrt(phonons),
        carrier_margin=ratio,
        stark_shift=abs(coupling) ** 2 / (2 * mode_frequency),
    )
    if estimate.carrier_margin > WEAK_COUPLING_LIMIT:
        message = f"|lambda| / nu = {ratio:.3g} is outside the weak coupling regime"
        logger.warning(message)
        warnings.warn(message, MarginWarning, stacklevel=2)
    return estimate


def offresonant_curves(coupling: float, eta: float, phonons: int, mode_frequency: float, times) -> pd.DataFrame:
    """ P_B(t), P_R(t), P_C(t) = peak * sin^2(nu t / 2), columns t_s, blue, red, carrier. """
    _check_positive(mode_frequency, phonons)
    times = np.asarray(times, dtype=float)
    ratio = abs(coupling) / mode_frequency
    oscillation = np.sin(mode_frequency * times / 2) ** 2
    return pd.DataFrame({
        "t_s": times,
        "blue": ratio ** 2 * eta ** 2 * (phonons + 1) * oscillation,
        "red": ratio ** 2 * eta ** 2 * phonons * oscillation,
        "carrier": ratio ** 2 * oscillation,
    })


def _coupling_squared(coupling: float, eta: float, ground: int, excited: int) -> float:
    """ |<e,excited|V|g,ground>|^2 / hbar^2 with Lamb-Dicke matrix elements. """
    change = excited - ground
    if excited < 0 or abs(change) > 1:
        return 0.0
    if change == 0:
        return abs(coupling) ** 2 / 4
    return abs(coupling) ** 2 * eta ** 2 * max(ground, excited) / 4


@dataclass(frozen=True)
class LightShift:
    ground: float
    excited: float
    shift: float


def light_shifts(coupling: float, eta: float, phonons: int, mode_frequency: float, sideband: int = -1) -> LightShift:
    """ Second-order level shifts of |g,n> and |e,n+k> while driving sideband k, in rad/s.

    The carrier and both first sidebands are kept as couplings; the resonant pair itself is excluded
    from both sums. For the first red sideband the result reduces to -|lambda|^2/4nu and +|lambda|^2/4nu
    when eta -> 0, so the transition shifts by |lambda|^2/2nu.

    :param coupling: |lambda| in rad/s.
    :param eta: Lamb-Dicke parameter.
    :param phonons: n of the ground-state level.
    :param mode_frequency: nu in rad/s.
    :param sideband: k of the driven transition, the laser detuning is k nu.
    :return: LightShift with the ground and excited shifts and their difference.
    """
    _check_positive(mode_frequency, phonons)
    excited_phonons = phonons + sideband
    if excited_phonons < 0:
        raise ValueError(f"Sideband {sideband} does not couple |g,{phonons}> to any level")
    detuning = sideband * mode_frequency

    ground = 0.0
    for m in (phonons - 1, phonons, phonons + 1):
        if m < 0 or m - phonons == sideband:
            continue
        ground += _coupling_squared(coupling, eta, phonons, m) / (detuning + mode_frequency * (phonons - m))

    excited = 0.0
    for m in (excited_phonons - 1, excited_phonons, excited_phonons + 1):
        if m < 0 or excited_phonons - m == sideband:
            continue
        excited += _coupling_squared(coupling, eta, m, excited_phonons) / (-detuning + mode_frequency * (excited_phonons - m))

    return LightShift(ground, excited, excited - ground)


def lamb_dicke_checks(eta: float, phonons: float, sideband: int = 0) -> dict:
    """ Small quantities of the Lamb-Dicke expansion.

    `half_eta_squared` is eta^2/2, `occupation` is eta^2 n/(|k|+1), `lamb_dicke_limit` is eta sqrt(n + 1/2)
    and `within_limit` tells whether all three stay below 0.1.
    """
    if phonons < 0:
        raise ValueError(f"Phonon number must be non-negative, got {phonons}")
    checks = {
        "half_eta_squared": eta ** 2 / 2,
        "occupation": eta ** 2 * phonons / (abs(sideband) + 1),
        "lamb_dicke_limit": eta * np.sqrt(phonons + 0.5),
    }
    checks["within_limit"] = all(value < LAMB_DICKE_LIMIT for value in checks.values())
    return checks


def expansion_error(eta: float, phonons: int, sideband: int) -> float:
    """ |Omega_exact - Omega_LD| / |Omega_LD| for lambda = 1. """
    exact = laguerre_rabi(1.0, eta, phonons, sideband)
    approximate = lamb_dicke_rabi(1.0, eta, phonons, sideband)
    if approximate == 0:
        raise ValueError(f"The Lamb-Dicke rate vanishes for eta={eta}, k={sideband}")
    return abs(exact - approximate) / abs(approximate)


def expansion_bound(eta: float, phonons: int, sideband: int) -> float:
    """ First-order size eta^2 (1/2 + n/(|k|+1)) of the terms the Lamb-Dicke rate drops. It bounds
    `expansion_error` from above while eta^2 (n+1) < 1. """
    return eta ** 2 * (0.5 + phonons / (abs(sideband) + 1))


def offresonant_peak_scan(ratios, eta: float, mode_frequency: float, kind: str = "red", n_max: int = 4,
                          progress: bool = False) -> pd.DataFrame:
    """ Measure peak off-resonant leakage with `evolve_full` and compare it with the estimate.

    Parameters
    ----------
    ratios
        Values of |lambda|/nu.
    eta
        Lamb-Dicke parameter.
    mode_frequency
        nu in rad/s.
    kind
        - 'red' - drive the first red sideband on |g,0>, leakage is the |e,0> population over two
        trap periods, predicted by P_C</br>
        - 'carrier' - a carrier pi pulse on |g,0>, leakage is everything outside |g,0>, |e,0>,
        predicted by P_B</br>
    n_max
        Fock cutoff.
    progress
        Show a tqdm progress bar.

    Returns
    -------
        DataFrame with columns ratio, measured, predicted.
    """
    if kind not in SCAN_KINDS:
        raise ValueError(f"Invalid scan kind: {kind}. Valid options are {', '.join(SCAN_KINDS)}.")
    state = basis_state("g", 0, n_max=n_max)
    rows = []
    for ratio in tqdm(np.asarray(ratios, dtype=float), desc="off-resonant scan", disable=not progress):
        ctx = CouplingContext.uniform(1, ratio * mode_frequency, eta, mode_frequency)
        if kind == "red":
            pulse = Pulse(1, -1, 1, regime="full_offresonant")
            peak, _ = peak_population(state, pulse, ctx, lambda s: abs(s.amplitude("e", 0)) ** 2,
                                      duration=4 * np.pi / mode_frequency)
            predicted = ratio ** 2
        else:
            pulse = Pulse(1, 0, 1, regime="full_offresonant")
            peak, _ = peak_population(
                state, pulse, ctx, lambda s: 1 - abs(s.amplitude("g", 0)) ** 2 - abs(s.amplitude("e", 0)) ** 2)
            predicted = (ratio * eta) ** 2
        rows.append({"ratio": float(ratio), "measured": peak, "predicted": predicted})
    return pd.DataFrame(rows)
