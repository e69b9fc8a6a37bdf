import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from trap.config import IonSpecies
from utils.constants import COULOMB_CONSTANT
from utils.exceptions import ConvergenceError

logger = logging.getLogger(__name__)

SPACING_FIT_COEFFICIENT = 2.018
SPACING_FIT_EXPONENT = -0.559


@dataclass(frozen=True)
class IonChain:
    """Equilibrium configuration of N ions on the trap axis.

    Parameters
    ----------
    n_ions
        Number of ions.
    length_scale
        gamma = (q^2 / (4 pi eps0 m omega_z^2))^(1/3) in m.
    positions
        Dimensionless equilibrium positions Z, strictly ascending.
    min_spacing
        Smallest gap between neighbouring ions in m (exact, from the solved positions).
    fitted_min_spacing
        The power-law estimate 2.018 N^-0.559 gamma in m.
    residual
        Largest component of the force balance at the solution.
    """

    n_ions: int
    length_scale: float
    positions: np.ndarray
    min_spacing: float
    fitted_min_spacing: float
    residual: float

    @property
    def physical_positions(self) -> np.ndarray:
        return self.positions * self.length_scale


def length_scale(species: IonSpecies, omega_z: float) -> float:
    return float(np.cbrt(COULOMB_CONSTANT * species.charge_coulomb ** 2 / (species.mass * omega_z ** 2)))


def potential_energy(positions) -> float:
    """ Dimensionless potential sum(Z_i^2)/2 + sum_{i<j} 1/|Z_i - Z_j|. """
    positions = np.asarray(positions, dtype=float)
    gaps = np.abs(positions[:, None] - positions[None, :])
    upper = np.triu_indices(len(positions), k=1)
    return float(0.5 * np.sum(positions ** 2) + np.sum(1.0 / gaps[upper]))


def equilibrium_force(positions) -> np.ndarray:
    """ Force balance Z_i - sum_{j<i} 1/(Z_i-Z_j)^2 + sum_{j>i} 1/(Z_i-Z_j)^2, zero at equilibrium. """
    positions = np.asarray(positions, dtype=float)
    differences = positions[:, None] - positions[None, :]
    np.fill_diagonal(differences, np.inf)
    return positions - np.sum(np.sign(differences) / differences ** 2, axis=1)


def coupling_matrix(positions) -> np.ndarray:
    """ Axial coupling matrix V; it is also the Jacobian of `equilibrium_force`. """
    positions = np.asarray(positions, dtype=float)
    differences = np.abs(positions[:, None] - positions[None, :])
    np.fill_diagonal(differences, np.inf)
    off_diagonal = -2.0 / differences ** 3
    matrix = off_diagonal.copy()
    np.fill_diagonal(matrix, 1.0 - off_diagonal.sum(axis=1))
    return matrix


def fitted_spacing(n_ions: int) -> float:
    """ Dimensionless minimum spacing from the power-law fit. """
    return SPACING_FIT_COEFFICIENT * n_ions ** SPACING_FIT_EXPONENT


def _solve_positions(n_ions: int, tolerance: float, max_iterations: int) -> tuple[np.ndarray, float]:
    positions = (np.arange(1, n_ions + 1) - (n_ions + 1) / 2) * fitted_spacing(n_ions)
    residual = np.max(np.abs(equilibrium_force(positions)))

    for iteration in range(max_iterations):
        if residual <= tolerance:
            logger.debug(f"Equilibrium of {n_ions} ions converged after {iteration} Newton steps")
            return positions, residual

        step = linalg.solve(coupling_matrix(positions), -equilibrium_force(positions), assume_a="pos")
        damping = 1.0
        while damping > 1e-10:
            trial = positions + damping * step
            # Mirror symmetry of the solution.
            trial = (trial - trial[::-1]) / 2
            if np.all(np.diff(trial) > 0):
                trial_residual = np.max(np.abs(equilibrium_force(trial)))
                if trial_residual < residual:
                    positions, residual = trial, trial_residual
                    break
            damping /= 2
        else:
            if residual <= 100 * tolerance:
                logger.debug(f"Newton iteration stalled at residual {residual:.2e} (round-off)")
                return positions, residual
            raise ConvergenceError(f"Damped Newton iteration for {n_ions} ions stalled at residual {residual:.3e}")

    raise ConvergenceError(
        f"Equilibrium of {n_ions} ions did not converge in {max_iterations} iterations (residual {residual:.3e})"
    )


def equilibrium_positions(
    n_ions: int,
    species: IonSpecies,
    omega_z: float,
    tolerance: float = 1e-12,
    max_iterations: int = 100,
) -> IonChain:
    """ Solve the axial force balance of N ions by damped Newton iteration.

    Parameters
    ----------
    n_ions
        Number of ions, at least 1.
    species
        The ion species (all ions equal).
    omega_z
        Axial trap frequency in rad/s.
    tolerance
        Largest accepted force-balance residual per component.
    max_iterations
        Iteration cap of the Newton loop.

    Returns
    -------
        The IonChain with dimensionless and physical positions.
    """
    if n_ions < 1:
        raise ValueError(f"n_ions must be at least 1, got {n_ions}")
    if not omega_z > 0:
        raise ValueError(f"omega_z must be positive, got {omega_z}")

    gamma = length_scale(species, omega_z)
    if n_ions == 1:
        positions, residual = np.zeros(1), 0.0
        min_gap = float("nan")
    else:
        positions, residual = _solve_positions(n_ions, tolerance, max_iterations)
        min_gap = float(np.min(np.diff(positions)))

    return IonChain(
        n_ions=n_ions,
        length_scale=gamma,
        positions=positions,
        min_spacing=min_gap * gamma,
        fitted_min_spacing=fitted_spacing(n_ions) * gamma,
        residual=float(residual),
    )
