from dataclasses import dataclass

import numpy as np

from trap.config import TrapConfig
from trap.paul_trap import require_stable, secular_frequencies
from utils.exceptions import PhysicsValidityError
from utils.integrators import integrate_fixed_step

STEPS_PER_RF_PERIOD = 50


@dataclass(frozen=True)
class Trajectory:
    """Sampled ion motion. Velocities and z are only filled by the Mathieu integrator."""

    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray | None = None
    vx: np.ndarray | None = None
    vy: np.ndarray | None = None
    vz: np.ndarray | None = None

    def axis(self, name: str) -> np.ndarray:
        if name not in ("x", "y", "z"):
            raise ValueError(f"Invalid axis: {name}. Valid options are x, y, z.")
        return getattr(self, name)


def secular_trajectory(
    cfg: TrapConfig,
    x0: float,
    y0: float,
    phase_x: float,
    phase_y: float,
    times,
    frequency_order: int = 2,
) -> Trajectory:
    """ Closed-form secular motion with first-order micromotion.

    x(t) = x0 [1 + (b/2) cos(Omega t)] cos(omega_x t + phase_x) and the same for y with the
    opposite micromotion sign.

    Parameters
    ----------
    cfg
        The trap drive; must lie in the secular regime.
    x0, y0
        Secular amplitudes in m.
    phase_x, phase_y
        Secular phases in rad.
    times
        Sample times in s.
    frequency_order
        1 uses omega = (Omega/2) sqrt(b^2/2 +- a); 2 uses the higher-order series of the
        characteristic exponent, which keeps long trajectories in phase with the exact motion.
    """
    _, b = require_stable(cfg)
    omega_x, omega_y = secular_frequencies(cfg, frequency_order)
    times = np.asarray(times, dtype=float)
    micromotion = (b / 2) * np.cos(cfg.rf_frequency * times)

    x = x0 * (1 + micromotion) * np.cos(omega_x * times + phase_x)
    y = y0 * (1 - micromotion) * np.cos(omega_y * times + phase_y)
    return Trajectory(times=times, x=x, y=y)


def secular_initial_state(
    cfg: TrapConfig, x0: float, y0: float, phase_x: float, phase_y: float, frequency_order: int = 2
) -> np.ndarray:
    """ Phase-space point (x, vx, y, vy, z, vz) of the closed-form motion at t = 0. """
    _, b = require_stable(cfg)
    omega_x, omega_y = secular_frequencies(cfg, frequency_order)
    return np.array([
        x0 * (1 + b / 2) * np.cos(phase_x),
        -x0 * (1 + b / 2) * omega_x * np.sin(phase_x),
        y0 * (1 - b / 2) * np.cos(phase_y),
        -y0 * (1 - b / 2) * omega_y * np.sin(phase_y),
        0.0,
        0.0,
    ])


def mathieu_integrate(cfg: TrapConfig, initial_state, t_span, step: float | None = None) -> Trajectory:
    """ Integrate the exact radial Mathieu equations (z moves freely).

    Parameters
    ----------
    cfg
        The trap drive.
    initial_state
        (x, vx, y, vy, z, vz) at t_span[0], in m and m/s.
    t_span
        (t_start, t_stop) in s.
    step
        Upper bound on the RK4 step; defaults to a fiftieth of the RF period, which is also the
        largest accepted value.
    """
    max_step = cfg.rf_period / STEPS_PER_RF_PERIOD
    if step is None:
        step = max_step
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    if step > max_step * (1 + 1e-12):
        raise PhysicsValidityError(
            f"step {step:.3e} s exceeds the limit of {max_step:.3e} s (1/50 of the RF period)"
        )

    state = np.asarray(initial_state, dtype=float)
    if state.shape != (6,):
        raise ValueError(f"initial_state must hold (x, vx, y, vy, z, vz), got shape {state.shape}")

    species = cfg.species
    stiffness = species.charge_coulomb / (species.mass * cfg.radial_extent ** 2)

    def rhs(t, y):
        field = stiffness * (cfg.dc_offset + cfg.rf_amplitude * np.cos(cfg.rf_frequency * t))
        return np.array([y[1], -field * y[0], y[3], field * y[2], y[5], 0.0])

    times, values = integrate_fixed_step(rhs, state, t_span[0], t_span[1], step, record=True)
    return Trajectory(
        times=times,
        x=values[:, 0], vx=values[:, 1],
        y=values[:, 2], vy=values[:, 3],
        z=values[:, 4], vz=values[:, 5],
    )


def floquet_exponent(trajectory: Trajectory, axis: str = "x", windows: int = 10) -> float:
    """ Estimate the growth rate (1/s) of an integrated trajectory.

    The trajectory is cut into equal windows; the slope of log(max |coordinate|) against the window
    centre is the Floquet exponent. Bounded motion gives a value near zero.
    """
    coordinate = np.abs(trajectory.axis(axis))
    times = trajectory.times
    if len(times) < 2 * windows:
        raise ValueError(f"Trajectory too short for {windows} windows: {len(times)} samples")

    chunks = np.array_split(np.arange(len(times)), windows)
    centres = np.array([times[chunk].mean() for chunk in chunks])
    peaks = np.array([coordinate[chunk].max() for chunk in chunks])
    if np.any(peaks <= 0):
        return 0.0
    slope, _ = np.polyfit(centres, np.log(peaks), 1)
    return float(slope)
