import logging
import re
import warnings
from pathlib import Path

import numpy as np
import pandas as pd

from utils.exceptions import PhysicsValidityError, TruncationWarning

logger = logging.getLogger(__name__)

LEVELS = "ger"
LEVEL_INDEX = {level: index for index, level in enumerate(LEVELS)}
DEFAULT_N_MAX = 20
# Largest state vector accepted, in bytes of complex128 amplitudes.
MAX_STATE_BYTES = 10 ** 8
NORM_TOLERANCE = 1e-10
TOP_LEVEL_THRESHOLD = 1e-8

_LABEL = re.compile(r"^\|([ger]+)>\|(\d+)>$")


def state_dimension(n_ions: int, n_max: int) -> int:
    return 3 ** n_ions * (n_max + 1)


def check_dimension(n_ions: int, n_max: int) -> int:
    """ Validate the ion count and Fock cutoff and return the state dimension. """
    if n_ions < 1:
        raise ValueError(f"n_ions must be at least 1, got {n_ions}")
    if n_max < 1:
        raise ValueError(f"n_max must be at least 1, got {n_max}")
    dimension = state_dimension(n_ions, n_max)
    if dimension * np.dtype(np.complex128).itemsize > MAX_STATE_BYTES:
        raise PhysicsValidityError(
            f"State of {n_ions} ions with n_max={n_max} has {dimension} amplitudes, "
            f"above the limit of {MAX_STATE_BYTES} bytes"
        )
    return dimension


class QuantumState:
    """ Pure state of N three-level ions and one truncated bus mode.

    Amplitudes are stored flat with ion 1 as the slowest index and the Fock number as the fastest;
    internal levels are ordered g, e, r.

    Parameters
    ----------
    amplitudes
        Complex vector of length 3^N (n_max + 1).
    n_ions
        Number of ions N.
    n_max
        Highest Fock state kept.
    normalized
        If True (default), the norm is checked against 1.
    """

    def __init__(self, amplitudes, n_ions: int, n_max: int, normalized: bool = True):
        dimension = check_dimension(n_ions, n_max)
        amplitudes = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        if amplitudes.shape != (dimension,):
            raise ValueError(f"Expected {dimension} amplitudes for {n_ions} ions and n_max={n_max}, "
                             f"got {amplitudes.shape[0]}")
        if not np.all(np.isfinite(amplitudes)):
            raise ValueError("State amplitudes must be finite")
        if normalized and abs(np.linalg.norm(amplitudes) - 1) > NORM_TOLERANCE:
            raise ValueError(f"State is not normalized: norm {np.linalg.norm(amplitudes):.12f}")

        self.amplitudes = amplitudes
        self.n_ions = n_ions
        self.n_max = n_max

    @property
    def dimension(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def fock_dimension(self) -> int:
        return self.n_max + 1

    @property
    def shape(self) -> tuple:
        return (3,) * self.n_ions + (self.fock_dimension,)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.shape)

    def with_amplitudes(self, amplitudes, normalized: bool = True) -> "QuantumState":
        return QuantumState(amplitudes, self.n_ions, self.n_max, normalized)

    def copy(self) -> "QuantumState":
        return self.with_amplitudes(self.amplitudes.copy(), normalized=False)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def basis_label(self, index: int) -> str:
        *levels, phonons = np.unravel_index(index, self.shape)
        return f"|{''.join(LEVELS[level] for level in levels)}>|{phonons}>"

    def labels(self) -> list:
        return [self.basis_label(index) for index in range(self.dimension)]

    def index_of(self, levels: str, phonons: int = 0) -> int:
        if len(levels) != self.n_ions or any(level not in LEVEL_INDEX for level in levels):
            raise ValueError(f"Invalid basis label '{levels}' for {self.n_ions} ions")
        if not 0 <= phonons <= self.n_max:
            raise ValueError(f"Phonon number {phonons} outside 0..{self.n_max}")
        return int(np.ravel_multi_index(tuple(LEVEL_INDEX[level] for level in levels) + (phonons,), self.shape))

    def amplitude(self, levels: str, phonons: int = 0) -> complex:
        return complex(self.amplitudes[self.index_of(levels, phonons)])

    def bus_distribution(self) -> np.ndarray:
        """ Population of each Fock state of the bus. """
        return self.probabilities().reshape(-1, self.fock_dimension).sum(axis=0)

    def bus_population(self, phonons: int = 0) -> float:
        return float(self.bus_distribution()[phonons])

    def top_level_population(self) -> float:
        return float(self.bus_distribution()[-1])

    def ion_populations(self, ion: int) -> np.ndarray:
        """ Populations of g, e, r for ion `ion` (1-based). """
        self._check_ion(ion)
        populations = np.moveaxis(self.probabilities().reshape(self.shape), ion - 1, 0)
        return populations.reshape(3, -1).sum(axis=1)

    def check_truncation(self, threshold: float = TOP_LEVEL_THRESHOLD) -> float:
        """ Warn when the highest kept Fock state carries more than `threshold` population. """
        population = self.top_level_population()
        if population > threshold:
            message = f"Population {population:.2e} at the Fock cutoff n_max={self.n_max}"
            logger.warning(message)
            warnings.warn(message, TruncationWarning, stacklevel=2)
        return population

    def _check_ion(self, ion: int):
        if not 1 <= ion <= self.n_ions:
            raise ValueError(f"Ion index must lie in 1..{self.n_ions}, got {ion}")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "basis_label": self.labels(),
            "re": self.amplitudes.real,
            "im": self.amplitudes.imag,
        })

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "QuantumState":
        """ Rebuild a state from a (basis_label, re, im) table; absent labels get amplitude 0. """
        parsed = []
        for label in frame["basis_label"]:
            match = _LABEL.match(str(label).strip())
            if match is None:
                raise ValueError(f"Invalid basis label: {label}")
            parsed.append((match.group(1), int(match.group(2))))
        n_ions = {len(levels) for levels, _ in parsed}
        if len(n_ions) != 1:
            raise ValueError("Basis labels disagree on the number of ions")
        n_max = max(max(phonons for _, phonons in parsed), 1)

        state = cls(np.zeros(state_dimension(n_ions.pop(), n_max)), len(parsed[0][0]), n_max, normalized=False)
        values = frame["re"].to_numpy(dtype=float) + 1j * frame["im"].to_numpy(dtype=float)
        for (levels, phonons), value in zip(parsed, values):
            state.amplitudes[state.index_of(levels, phonons)] = value
        return state.with_amplitudes(state.amplitudes)

    def to_csv(self, path, seed: int | None = None):
        path = Path(path)
        with path.open("w", encoding="utf-8", newline="") as handle:
            if seed is not None:
                handle.write(f"# seed={seed}\n")
            self.to_frame().to_csv(handle, index=False, float_format="%.17g", lineterminator="\n")

    @classmethod
    def read_csv(cls, path) -> "QuantumState":
        return cls.from_frame(pd.read_csv(path, comment="#", float_precision="round_trip"))

    def __repr__(self):
        return f"QuantumState(n_ions={self.n_ions}, n_max={self.n_max})"


def basis_state(levels: str, phonons: int = 0, n_max: int = DEFAULT_N_MAX) -> QuantumState:
    """ The product state |levels>|phonons>, e.g. basis_state("eg", 0). """
    state = QuantumState(np.zeros(state_dimension(len(levels), n_max)), len(levels), n_max, normalized=False)
    state.amplitudes[state.index_of(levels, phonons)] = 1.0
    return state


def ground_state(n_ions: int, n_max: int = DEFAULT_N_MAX) -> QuantumState:
    """ |g>^N |0>. """
    check_dimension(n_ions, n_max)
    return basis_state("g" * n_ions, 0, n_max)


def superposition(terms: dict, n_ions: int, n_max: int = DEFAULT_N_MAX) -> QuantumState:
    """ Normalized state from {(levels, phonons): amplitude}. """
    state = QuantumState(np.zeros(state_dimension(n_ions, n_max)), n_ions, n_max, normalized=False)
    for (levels, phonons), value in terms.items():
        state.amplitudes[state.index_of(levels, phonons)] += value
    return state.with_amplitudes(state.amplitudes / np.linalg.norm(state.amplitudes))


def fidelity(a: QuantumState, b: QuantumState) -> float:
    """ |<a|b>|^2, clipped to [0, 1]. """
    if a.shape != b.shape:
        raise ValueError(f"Cannot compare states of shapes {a.shape} and {b.shape}")
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2))


def apply_local(state: QuantumState, operator: np.ndarray, ion: int, normalized: bool = True) -> QuantumState:
    """ Apply an operator on (ion `ion` internal levels) x (bus mode) to the full state.

    Parameters
    ----------
    state
        The state to act on.
    operator
        Matrix of shape (3 (n_max+1), 3 (n_max+1)) with the internal level as the slow index.
    ion
        1-based ion index.
    normalized
        Whether the result is expected to keep unit norm.
    """
    state._check_ion(ion)
    fock = state.fock_dimension
    if operator.shape != (3 * fock, 3 * fock):
        raise ValueError(f"Operator shape {operator.shape} does not match one ion with n_max={state.n_max}")

    # Bring the addressed ion next to the bus axis: (..., 3, fock) -> rows of length 3 * fock.
    tensor = np.moveaxis(state.tensor(), ion - 1, -2)
    moved_shape = tensor.shape
    flat = tensor.reshape(-1, 3 * fock) @ operator.T
    result = np.moveaxis(flat.reshape(moved_shape), -2, ion - 1)
    return state.with_amplitudes(result.reshape(-1), normalized=normalized)
