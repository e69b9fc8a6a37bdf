import logging
from dataclasses import dataclass
from itertools import product
from pathlib import Path

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-10
TARGET_COLUMNS = ("basis_label", "alpha", "phi")


def term_labels(n_qubits: int) -> tuple:
    """ g/e labels ordered by the number of excited qubits, lexicographic within each group.

    For three qubits: ggg, gge, geg, egg, gee, ege, eeg, eee.
    """
    labels = ["".join(bits) for bits in product("ge", repeat=n_qubits)]
    return tuple(sorted(labels, key=lambda label: (label.count("e"), label[::-1])))


def register_index(label: str) -> int:
    """ Position of a g/e label in a register vector, qubit 1 most significant. """
    return int(label.replace("g", "0").replace("e", "1"), 2)


@dataclass(frozen=True)
class TargetState:
    """A pure register state sum_j alpha_j exp(i phi_j) |label_j>.

    Parameters
    ----------
    alphas
        Non-negative magnitudes in `term_labels(n_qubits)` order.
    phases
        Phases in rad in the same order; the all-g phase is fixed to 0.
    n_qubits
        Register size.
    """

    alphas: tuple
    phases: tuple
    n_qubits: int = 3

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(alpha) for alpha in self.alphas))
        object.__setattr__(self, "phases", tuple(float(phase) for phase in self.phases))
        size = 2 ** self.n_qubits
        if len(self.alphas) != size or len(self.phases) != size:
            raise ValueError(f"A {self.n_qubits}-qubit target needs {size} magnitudes and phases")
        if any(alpha < 0 for alpha in self.alphas):
            raise ValueError("Target magnitudes must be non-negative")
        norm = sum(alpha ** 2 for alpha in self.alphas)
        if abs(norm - 1) > NORM_TOLERANCE:
            raise ValueError(f"Target state is unnormalized: sum of alpha^2 is {norm:.12f}")
        if self.phases[0] != 0:
            raise ValueError(f"The phase of the all-g component is fixed to 0, got {self.phases[0]}")

    @property
    def labels(self) -> tuple:
        return term_labels(self.n_qubits)

    @classmethod
    def from_amplitudes(cls, amplitudes, n_qubits: int = 3) -> "TargetState":
        """ Target from a register vector (qubit 1 most significant, g = 0). The global phase is
        removed so that the all-g amplitude is real and non-negative. """
        amplitudes = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if amplitudes.shape != (2 ** n_qubits,):
            raise ValueError(f"Expected {2 ** n_qubits} amplitudes, got {amplitudes.shape[0]}")
        if abs(amplitudes[0]) > 0:
            amplitudes = amplitudes * np.exp(-1j * np.angle(amplitudes[0]))
        labels = term_labels(n_qubits)
        ordered = np.array([amplitudes[register_index(label)] for label in labels])
        phases = np.where(np.abs(ordered) > 0, np.angle(ordered), 0.0)
        phases[0] = 0.0
        return cls(tuple(np.abs(ordered)), tuple(phases), n_qubits)

    @classmethod
    def from_terms(cls, terms: dict, n_qubits: int = 3) -> "TargetState":
        """ Target from {label: (alpha, phi)}; missing labels get alpha = 0. """
        labels = term_labels(n_qubits)
        unknown = set(terms) - set(labels)
        if unknown:
            raise ValueError(f"Invalid basis label(s) {sorted(unknown)} for {n_qubits} qubits")
        alphas = [terms.get(label, (0.0, 0.0))[0] for label in labels]
        phases = [terms.get(label, (0.0, 0.0))[1] for label in labels]
        return cls(tuple(alphas), tuple(phases), n_qubits)

    def vector(self) -> np.ndarray:
        """ Register vector with qubit 1 as the most significant bit. """
        vector = np.zeros(2 ** self.n_qubits, dtype=complex)
        for label, alpha, phase in zip(self.labels, self.alphas, self.phases):
            vector[register_index(label)] = alpha * np.exp(1j * phase)
        return vector

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"basis_label": self.labels, "alpha": self.alphas, "phi": self.phases})


def random_target(rng: np.random.Generator, n_qubits: int = 3) -> TargetState:
    """ Haar-random register state. """
    amplitudes = rng.normal(size=2 ** n_qubits) + 1j * rng.normal(size=2 ** n_qubits)
    return TargetState.from_amplitudes(amplitudes / np.linalg.norm(amplitudes), n_qubits)


def load_target_state(path) -> TargetState:
    """ Read `basis_label,alpha,phi` rows; a header row and `#` comments are allowed. """
    path = Path(path)
    frame = pd.read_csv(path, comment="#", header=None, names=list(TARGET_COLUMNS), dtype=str,
                        skipinitialspace=True)
    frame = frame[frame["basis_label"].str.strip() != "basis_label"]
    labels = [label.strip() for label in frame["basis_label"]]
    sizes = {len(label) for label in labels}
    if len(sizes) != 1:
        raise ValueError(f"{path}: basis labels disagree on the number of qubits")
    if len(set(labels)) != len(labels):
        raise ValueError(f"{path}: repeated basis label")
    terms = {label: (float(alpha), float(phi)) for label, alpha, phi in zip(labels, frame["alpha"], frame["phi"])}
    target = TargetState.from_terms(terms, sizes.pop())
    logger.debug(f"Loaded a {target.n_qubits}-qubit target from {path}")
    return target
