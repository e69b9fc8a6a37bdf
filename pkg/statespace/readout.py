import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import pandas as pd
from scipy import stats

from statespace.state import QuantumState

logger = logging.getLogger(__name__)

REFERENCE_DURATION = 0.1


def make_rng(seed: int | None = None) -> np.random.Generator:
    """ Generator seeded from a single 64-bit seed. """
    return np.random.default_rng(np.random.SeedSequence(seed))


def spawn_rngs(seed: int | None, count: int) -> list:
    """ `count` independent generators split from one seed, e.g. one per worker thread. """
    return [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(count)]


@dataclass(frozen=True)
class ReadoutModel:
    """Electron-shelving readout by photon counting.

    Parameters
    ----------
    bright_rate
        Mean counts per 100 ms from an ion in |g> (fluorescing).
    dark_rate
        Mean background counts per 100 ms from a shelved ion.
    duration
        Detection time in s.
    threshold
        Count at or above which the ion is called bright. Defaults to the midpoint of the two means.
    """

    bright_rate: float = 2000.0
    dark_rate: float = 150.0
    duration: float = REFERENCE_DURATION
    threshold: float | None = None

    def __post_init__(self):
        if not self.bright_rate > self.dark_rate >= 0:
            raise ValueError(f"Need bright_rate > dark_rate >= 0, got {self.bright_rate}, {self.dark_rate}")
        if not self.duration > 0:
            raise ValueError(f"duration must be positive, got {self.duration}")

    @property
    def mean_bright(self) -> float:
        return self.bright_rate * self.duration / REFERENCE_DURATION

    @property
    def mean_dark(self) -> float:
        return self.dark_rate * self.duration / REFERENCE_DURATION

    @property
    def decision_threshold(self) -> float:
        if self.threshold is not None:
            return self.threshold
        return (self.mean_bright + self.mean_dark) / 2

    def classify(self, counts):
        """ 'bright' where counts >= threshold, else 'dark'. Accepts scalars and arrays. """
        bright = np.asarray(counts) >= self.decision_threshold
        if bright.ndim == 0:
            return "bright" if bright else "dark"
        return np.where(bright, "bright", "dark")

    def misclassification(self) -> tuple[float, float]:
        """ Exact Poisson tail probabilities (P(dark ion called bright), P(bright ion called dark)). """
        smallest_bright_count = np.ceil(self.decision_threshold)
        dark_as_bright = stats.poisson.sf(smallest_bright_count - 1, self.mean_dark)
        bright_as_dark = stats.poisson.cdf(smallest_bright_count - 1, self.mean_bright)
        return float(dark_as_bright), float(bright_as_dark)


class Measurement(NamedTuple):
    outcome: str
    state: QuantumState
    photon_count: int


def _sector_probability(state: QuantumState, ion: int) -> tuple[np.ndarray, float]:
    state._check_ion(ion)
    levels = np.moveaxis(state.probabilities().reshape(state.shape), ion - 1, 0)
    bright_mask = np.zeros(state.shape, dtype=bool)
    index = [slice(None)] * len(state.shape)
    index[ion - 1] = 0
    bright_mask[tuple(index)] = True
    return bright_mask.reshape(-1), float(levels[0].sum())


def measure_internal(
    state: QuantumState,
    ion: int,
    seed: int | np.random.Generator | None = None,
    readout: ReadoutModel = ReadoutModel(),
) -> Measurement:
    """ Projective fluorescence measurement of one ion.

    The ion is projected onto |g> (bright) or onto the shelved span of |e>, |r> (dark) by the Born
    rule, the state is collapsed and renormalised, and a photon count is drawn from the Poisson
    distribution of the projected sector. The reported outcome is the classification of that count,
    so a measurement can be misread.

    Parameters
    ----------
    state
        State to measure; left unchanged.
    ion
        1-based ion index.
    seed
        Integer seed or an existing Generator.
    readout
        Count rates and threshold.

    Returns
    -------
        Measurement(outcome, collapsed state, photon_count).
    """
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    bright_mask, p_bright = _sector_probability(state, ion)

    is_bright = rng.random() < p_bright
    mask = bright_mask if is_bright else ~bright_mask
    projected = np.where(mask, state.amplitudes, 0.0)
    norm = np.linalg.norm(projected)
    if norm == 0:
        raise ValueError(f"Measured sector of ion {ion} has zero norm")

    count = int(rng.poisson(readout.mean_bright if is_bright else readout.mean_dark))
    outcome = readout.classify(count)
    if outcome != ("bright" if is_bright else "dark"):
        logger.debug(f"Ion {ion} misread: {count} counts against threshold {readout.decision_threshold}")
    return Measurement(outcome, state.with_amplitudes(projected / norm), count)


def sample_readout(
    state: QuantumState,
    ion: int,
    shots: int,
    seed: int | None = None,
    readout: ReadoutModel = ReadoutModel(),
) -> pd.DataFrame:
    """ Repeat the measurement of one ion on fresh copies of `state`.

    Returns a DataFrame with columns sector (the projected level set), photon_count and outcome.
    """
    if shots < 1:
        raise ValueError(f"shots must be positive, got {shots}")
    rng = make_rng(seed)
    _, p_bright = _sector_probability(state, ion)

    bright = rng.random(shots) < p_bright
    counts = rng.poisson(np.where(bright, readout.mean_bright, readout.mean_dark))
    return pd.DataFrame({
        "sector": np.where(bright, "bright", "dark"),
        "photon_count": counts,
        "outcome": readout.classify(counts),
    })
