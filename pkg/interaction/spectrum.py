import logging

import numpy as np
import pandas as pd
from scipy import stats

from interaction.coupling import displacement_elements

logger = logging.getLogger(__name__)

NORMALIZATION_TOLERANCE = 1e-10
# Extra final phonon numbers beyond the initial distribution.
FINAL_STATE_MARGIN = 30
MIN_LINE_WEIGHT = 1e-14


def thermal_distribution(mean_phonons: float, n_max: int) -> np.ndarray:
    """ Thermal occupation P(n) = nbar^n / (nbar+1)^(n+1), cut at n_max and renormalised. """
    if mean_phonons < 0:
        raise ValueError(f"mean_phonons must be non-negative, got {mean_phonons}")
    n = np.arange(n_max + 1)
    if mean_phonons == 0:
        return (n == 0).astype(float)
    weights = (mean_phonons / (mean_phonons + 1)) ** n / (mean_phonons + 1)
    return weights / weights.sum()


def mode_lines(distribution, eta: float) -> pd.DataFrame:
    """ Lines of one mode: weight sum_n P(n) |<n+s| exp(i eta (a + a^dag)) |n>|^2 for every sideband order s. """
    distribution = np.asarray(distribution, dtype=float)
    if np.any(distribution < 0) or abs(distribution.sum() - 1) > NORMALIZATION_TOLERANCE:
        raise ValueError(f"Phonon distribution must be non-negative and sum to 1, got sum {distribution.sum()}")
    n_initial = len(distribution) - 1
    n_final = n_initial + FINAL_STATE_MARGIN
    transition = np.abs(displacement_elements(eta, n_final)) ** 2

    weights = {}
    for n, population in enumerate(distribution):
        if population == 0:
            continue
        for m in range(n_final + 1):
            weights[m - n] = weights.get(m - n, 0.0) + population * transition[m, n]
    orders = sorted(weights)
    return pd.DataFrame({"order": orders, "weight": [weights[order] for order in orders]})


def absorption_lines(distributions, etas, frequencies, min_weight: float = MIN_LINE_WEIGHT) -> pd.DataFrame:
    """ Line list of the absorption spectrum of one ion coupled to several independent modes.

    Parameters
    ----------
    distributions
        Phonon distribution P(n) of each mode.
    etas
        Lamb-Dicke parameter of the ion in each mode.
    frequencies
        Mode frequencies in rad/s.
    min_weight
        Lines below this weight are dropped while combining modes.

    Returns
    -------
        DataFrame with columns detuning (rad/s) and weight, one row per combination of sideband
        orders, plus one `order_<i>` column per mode.
    """
    if not len(distributions) == len(etas) == len(frequencies):
        raise ValueError("distributions, etas and frequencies need one entry per mode")

    combined = pd.DataFrame({"detuning": [0.0], "weight": [1.0]})
    for index, (distribution, eta, frequency) in enumerate(zip(distributions, etas, frequencies), start=1):
        lines = mode_lines(distribution, eta)
        lines = lines[lines["weight"] >= min_weight]
        merged = combined.merge(lines, how="cross")
        merged["detuning"] = merged["detuning"] + merged["order"] * frequency
        merged["weight"] = merged["weight_x"] * merged["weight_y"]
        merged = merged.rename(columns={"order": f"order_{index}"}).drop(columns=["weight_x", "weight_y"])
        combined = merged[merged["weight"] >= min_weight].reset_index(drop=True)

    combined = combined.sort_values("detuning", kind="stable").reset_index(drop=True)
    logger.debug(f"Absorption spectrum with {len(combined)} lines over {len(frequencies)} mode(s)")
    return combined[["detuning", "weight"] + [c for c in combined.columns if c.startswith("order_")]]


def absorption_spectrum(distributions, etas, frequencies, detunings, linewidth: float) -> np.ndarray:
    """ Sampled absorption profile I(delta) with Lorentzian lines of full width `linewidth`.

    Each line has peak height equal to its weight.
    """
    if not linewidth > 0:
        raise ValueError(f"linewidth must be positive, got {linewidth}")
    lines = absorption_lines(distributions, etas, frequencies)
    detunings = np.asarray(detunings, dtype=float)
    half_width = linewidth / 2
    profiles = stats.cauchy.pdf(detunings[:, None], loc=lines["detuning"].to_numpy()[None, :], scale=half_width)
    return np.pi * half_width * profiles @ lines["weight"].to_numpy()
