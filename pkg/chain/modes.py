import logging
from dataclasses import dataclass

import numpy as np

from chain.equilibrium import IonChain, coupling_matrix
from trap.config import IonSpecies
from utils.constants import HBAR
from utils.exceptions import ConvergenceError

logger = logging.getLogger(__name__)

MIN_EIGENVALUE_SEPARATION = 1e-8


@dataclass(frozen=True)
class ModeSpectrum:
    """Axial normal modes of an ion chain.

    Parameters
    ----------
    couplings
        Symmetric N x N coupling matrix V.
    eigenvalues
        mu_alpha in ascending order (mu_1 = 1 is the centre-of-mass mode).
    eigenvectors
        Orthonormal mode vectors D^(alpha), one per row.
    axial_frequency
        Trap frequency omega_z in rad/s.
    ground_state_length
        sqrt(hbar / (2 m omega_z)) in m.
    """

    couplings: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    axial_frequency: float
    ground_state_length: float

    @property
    def n_modes(self) -> int:
        return len(self.eigenvalues)

    @property
    def frequencies(self) -> np.ndarray:
        return self.axial_frequency * np.sqrt(self.eigenvalues)

    @property
    def coupling_factors(self) -> np.ndarray:
        """ K_i^(alpha) = D_i^(alpha) / mu_alpha^(1/4), one row per mode. """
        return self.eigenvectors / self.eigenvalues[:, None] ** 0.25


def _apply_sign_convention(vectors: np.ndarray) -> np.ndarray:
    vectors = vectors.copy()
    if vectors[0].sum() < 0:
        vectors[0] *= -1
    for alpha in range(1, len(vectors)):
        nonzero = np.flatnonzero(np.abs(vectors[alpha]) > 1e-12)
        if vectors[alpha, nonzero[-1]] < 0:
            vectors[alpha] *= -1
    return vectors


def normal_modes(chain: IonChain, species: IonSpecies, omega_z: float) -> ModeSpectrum:
    """ Diagonalise the axial coupling matrix of a solved chain.

    Eigenpairs are sorted by ascending eigenvalue. Mode vectors are signed so that the
    centre-of-mass vector has a positive sum and every other vector a positive last component.
    """
    couplings = coupling_matrix(chain.positions)
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(couplings)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"Eigen-decomposition of the {chain.n_ions}-ion coupling matrix failed") from exc

    if np.any(np.diff(eigenvalues) <= MIN_EIGENVALUE_SEPARATION):
        raise ConvergenceError(f"Degenerate axial eigenvalues for {chain.n_ions} ions: {eigenvalues}")

    vectors = _apply_sign_convention(eigenvectors.T)
    logger.debug(f"Axial eigenvalues for {chain.n_ions} ions: {np.round(eigenvalues, 6)}")
    return ModeSpectrum(
        couplings=couplings,
        eigenvalues=eigenvalues,
        eigenvectors=vectors,
        axial_frequency=omega_z,
        ground_state_length=float(np.sqrt(HBAR / (2 * species.mass * omega_z))),
    )
