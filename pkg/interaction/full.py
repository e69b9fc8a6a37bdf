import logging
from typing import Callable

import numpy as np
import pandas as pd
from tqdm import tqdm

from interaction.coupling import CouplingContext, displacement_elements, laguerre_rabi
from interaction.pulse import Pulse
from statespace.state import QuantumState, apply_local, superposition
from utils.exceptions import PhysicsValidityError
from utils.integrators import integrate_fixed_step

logger = logging.getLogger(__name__)

DEFAULT_STEPS_PER_PERIOD = 200
MIN_STEPS_PER_PERIOD = 50


def step_limit(ctx: CouplingContext, pulse: Pulse) -> float:
    """ Largest accepted step 2 pi / (50 max(nu, |delta|, |lambda|)). """
    return 2 * np.pi / (MIN_STEPS_PER_PERIOD * _fastest_rate(ctx, pulse))


def _fastest_rate(ctx: CouplingContext, pulse: Pulse) -> float:
    return max(ctx.mode_frequency, abs(pulse.detuning(ctx.mode_frequency)), ctx.coupling)


def full_duration(pulse: Pulse, ctx: CouplingContext) -> float:
    """ l pi / |Omega^{0,k}| with the exact Laguerre rate. """
    if pulse.area == 0:
        return 0.0
    rate = abs(laguerre_rabi(ctx.coupling, ctx.eta(pulse.ion), 0, pulse.sideband))
    if rate == 0:
        raise PhysicsValidityError(f"Pulse on ion {pulse.ion} with k={pulse.sideband} has zero coupling from |0>")
    return float(pulse.area) * np.pi / rate


def _local_rows(state: QuantumState, ion: int) -> tuple[np.ndarray, tuple]:
    tensor = np.moveaxis(state.tensor(), ion - 1, -2)
    return tensor.reshape(-1, 3 * state.fock_dimension), tensor.shape


def _from_local_rows(state: QuantumState, rows: np.ndarray, moved_shape: tuple, ion: int,
                     normalized: bool = True) -> QuantumState:
    tensor = np.moveaxis(rows.reshape(moved_shape), -2, ion - 1)
    return state.with_amplitudes(tensor.reshape(-1), normalized=normalized)


def evolve_full(
    state: QuantumState,
    pulse: Pulse,
    ctx: CouplingContext,
    duration: float | None = None,
    step: float | None = None,
    observer: Callable[[float, QuantumState], None] | None = None,
) -> QuantumState:
    """ Integrate the interaction-picture Hamiltonian of a pulse with every off-resonant term kept.

    H(t) = (lambda/2) e^{-i delta t} sigma_+ D(t) + h.c. with delta = k nu and
    <m|D(t)|n> = e^{i nu t (m-n)} <m|exp(i eta (a + a^dag))|n>, so the displacement is computed once
    and re-phased at every step. The rotating-wave approximation in the optical frequency is kept.

    Parameters
    ----------
    state
        Initial state of all ions and the bus.
    pulse
        Pulse to apply; its ion, sideband, phase and transition are used.
    ctx
        Coupling context (travelling wave).
    duration
        Interaction time in s. Defaults to l pi / |Omega^{0,k}| with the exact rate.
    step
        RK4 step in s; defaults to 2 pi / (200 max(nu, |delta|, |lambda|)).
    observer
        Optional callable observer(t, state) invoked after every step.

    Returns
    -------
        The evolved state.
    """
    if ctx.geometry != "travelling":
        raise ValueError("evolve_full supports travelling-wave contexts only")
    limit = step_limit(ctx, pulse)
    if step is None:
        step = 2 * np.pi / (DEFAULT_STEPS_PER_PERIOD * _fastest_rate(ctx, pulse))
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    if step > limit * (1 + 1e-12):
        raise PhysicsValidityError(f"step {step:.3e} s is too coarse; the limit is {limit:.3e} s")
    if duration is None:
        duration = full_duration(pulse, ctx)
    if duration < 0:
        raise ValueError(f"duration must be non-negative, got {duration}")

    fock = state.fock_dimension
    nu = ctx.mode_frequency
    delta = pulse.detuning(nu)
    coupling = ctx.laser_coupling(pulse.ion, pulse.phase)
    displacement = displacement_elements(ctx.eta(pulse.ion), state.n_max)
    phonons = np.arange(fock)
    upper = slice(pulse.upper_level * fock, (pulse.upper_level + 1) * fock)
    ground = slice(0, fock)

    rows, moved_shape = _local_rows(state, pulse.ion)

    def rhs(t, y):
        rotation = np.exp(1j * nu * t * phonons)
        # <m|D(t)|n> as rows m, columns n
        dressed = rotation[:, None] * displacement * np.conj(rotation)[None, :]
        raising = 0.5 * coupling * np.exp(-1j * delta * t) * dressed
        derivative = np.zeros_like(y)
        derivative[:, upper] = -1j * y[:, ground] @ raising.T
        derivative[:, ground] = -1j * y[:, upper] @ np.conj(raising)
        return derivative

    watch = None
    if observer is not None:
        def watch(t, y):
            observer(t, _from_local_rows(state, y, moved_shape, pulse.ion, normalized=False))

    rows = integrate_fixed_step(rhs, rows, 0.0, duration, step, observer=watch)
    logger.debug(f"Full evolution of ion {pulse.ion} over {duration:.3e} s with step {step:.3e} s")
    return _from_local_rows(state, rows, moved_shape, pulse.ion, normalized=False)


def _first_order_integral(pulse: Pulse, ctx: CouplingContext, n_max: int, t: float) -> np.ndarray:
    """ Integral of the three-term Lamb-Dicke Hamiltonian of the pulse over [0, t], on ion x bus. """
    fock = n_max + 1
    nu = ctx.mode_frequency
    eta = ctx.eta(pulse.ion)
    coupling = ctx.laser_coupling(pulse.ion, pulse.phase)
    lowering = np.diag(np.sqrt(np.arange(1, fock)), k=1)
    raising = lowering.T

    def oscillating(frequency):
        # integral of exp(i frequency t') over [0, t]
        return t if frequency == 0 else (np.exp(1j * frequency * t) - 1) / (1j * frequency)

    if pulse.sideband == 0:
        motional = (np.eye(fock) * oscillating(0)
                    + 1j * eta * raising * oscillating(nu)
                    + 1j * eta * lowering * oscillating(-nu))
    elif pulse.sideband == -1:
        motional = 1j * eta * lowering * oscillating(0) + np.eye(fock) * oscillating(nu)
    elif pulse.sideband == 1:
        motional = 1j * eta * raising * oscillating(0) + np.eye(fock) * oscillating(-nu)
    else:
        raise ValueError(f"Perturbative evolution covers k in (-1, 0, 1), got {pulse.sideband}")

    integral = np.zeros((3 * fock, 3 * fock), dtype=complex)
    upper = pulse.upper_level
    block = 0.5 * coupling * motional
    integral[upper * fock:(upper + 1) * fock, :fock] = block
    integral[:fock, upper * fock:(upper + 1) * fock] = block.conj().T
    return integral


def perturbative_evolve(state: QuantumState, pulse: Pulse, ctx: CouplingContext, t: float) -> QuantumState:
    """ First-order evolution (1 - i integral_0^t H dt') for the carrier, first red and first blue sideband.

    The carrier Hamiltonian keeps both first sidebands as off-resonant terms; a sideband Hamiltonian
    keeps the off-resonant carrier. The result is not normalised.
    """
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    operator = np.eye(3 * state.fock_dimension) - 1j * _first_order_integral(pulse, ctx, state.n_max, t)
    return apply_local(state, operator, pulse.ion, normalized=False)


def peak_population(state: QuantumState, pulse: Pulse, ctx: CouplingContext, indicator: Callable,
                    duration: float | None = None, step: float | None = None) -> tuple[float, QuantumState]:
    """ Evolve with `evolve_full` and return (max over time of indicator(state), final state). """
    peak = [indicator(state)]

    def observer(_, current):
        peak[0] = max(peak[0], indicator(current))

    final = evolve_full(state, pulse, ctx, duration=duration, step=step, observer=observer)
    return peak[0], final


def locate_dressed_resonance(
    eta: float,
    mode_frequency: float,
    ratios=None,
    n_max: int = 6,
    progress: bool = False,
) -> tuple[float, pd.DataFrame]:
    """ Scan a strong carrier drive for the transfer |+,0> -> |-,1> between dressed states.

    For each ratio |lambda|/nu the single-ion state (|g> + |e>)|0>/sqrt(2) is evolved with every
    off-resonant term for a time long enough for one full transfer at resonance, and the largest
    population of (|g> - |e>)|1>/sqrt(2) is recorded.

    Parameters
    ----------
    eta
        Lamb-Dicke parameter of the ion.
    mode_frequency
        nu in rad/s.
    ratios
        Values of |lambda|/nu to try; defaults to 41 points in [0.8, 1.2].
    n_max
        Fock cutoff.
    progress
        Show a tqdm progress bar.

    Returns
    -------
        The ratio with the largest transfer and a DataFrame with columns ratio, transfer.
    """
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    ratios = np.linspace(0.8, 1.2, 41) if ratios is None else np.asarray(ratios, dtype=float)
    plus = superposition({("g", 0): 1, ("e", 0): 1}, 1, n_max)
    minus_one = superposition({("g", 1): 1, ("e", 1): -1}, 1, n_max)
    # one transfer at resonance takes pi / (lambda eta)
    duration = 1.5 * np.pi / (eta * mode_frequency * ratios.min())

    def transfer(current):
        return abs(np.vdot(minus_one.amplitudes, current.amplitudes)) ** 2

    results = []
    for ratio in tqdm(ratios, desc="dressed-state scan", disable=not progress):
        ctx = CouplingContext.uniform(1, ratio * mode_frequency, eta, mode_frequency)
        pulse = Pulse(ion=1, sideband=0, area=1, regime="full_offresonant")
        peak, _ = peak_population(plus, pulse, ctx, transfer, duration=duration)
        results.append({"ratio": float(ratio), "transfer": peak})

    table = pd.DataFrame(results)
    best = float(table.loc[table["transfer"].idxmax(), "ratio"])
    logger.info(f"Dressed-state resonance at |lambda|/nu = {best:.4f} for eta = {eta}")
    return best, table
