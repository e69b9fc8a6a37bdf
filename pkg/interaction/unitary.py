import logging
import warnings
from dataclasses import dataclass

import numpy as np

from interaction.coupling import CouplingContext, rabi_frequency
from interaction.pulse import Pulse
from statespace.state import QuantumState, apply_local
from utils.exceptions import PhysicsValidityError, TruncationWarning

logger = logging.getLogger(__name__)

FROZEN_POPULATION_THRESHOLD = 1e-12


@dataclass(frozen=True)
class PulseOperator:
    """Unitary of one pulse on (internal levels of the addressed ion) x (bus mode).

    Parameters
    ----------
    matrix
        3 (n_max+1) square unitary; the internal level is the slow index.
    frozen
        Local indices left untouched because their partner state lies beyond n_max.
    duration
        Pulse duration in s.
    """

    matrix: np.ndarray
    frozen: tuple
    duration: float


def reference_rabi(pulse: Pulse, ctx: CouplingContext, phase: float | None = None) -> complex:
    """ Omega^{0,k} of the pulse in its regime; it fixes the duration of every l pi pulse. """
    return rabi_frequency(ctx, 0, pulse.sideband, ion=pulse.ion, phase=pulse.phase if phase is None else phase,
                          lamb_dicke=pulse.regime == "ideal_LD")


def pulse_duration(pulse: Pulse, ctx: CouplingContext) -> float:
    """ t = l pi / |Omega^{0,k}|. """
    if pulse.area == 0:
        return 0.0
    rate = abs(reference_rabi(pulse, ctx))
    if rate == 0:
        raise PhysicsValidityError(
            f"Pulse on ion {pulse.ion} with k={pulse.sideband} has zero coupling from |0>; it cannot be timed"
        )
    return float(pulse.area) * np.pi / rate


def _coupled_pairs(sideband: int, n_max: int):
    """ Yield (n_ground, n_upper) phonon numbers of every coupled pair inside the cutoff. """
    order = abs(sideband)
    for n in range(n_max + 1 - order):
        yield (n, n + order) if sideband >= 0 else (n + order, n)


def pulse_unitary(pulse: Pulse, ctx: CouplingContext, n_max: int) -> PulseOperator:
    """ Block-diagonal evolution operator of a pulse in the weak-coupling regime.

    Each pair |g, n> <-> |e, n+|k|> (blue and carrier) or |e, n> <-> |g, n+|k|> (red) rotates by
    |Omega^{n,k}| t / 2 with t fixed by the n = 0 rate; states without a partner inside the cutoff
    stay unchanged (kernel states and frozen states). The off-diagonal phase is the phase of the
    complex Rabi frequency, exp(-i (phi - pi|k|/2)) for a travelling wave with eta > 0.

    Parameters
    ----------
    pulse
        The pulse; its regime must be 'ideal_LD' or 'exact_laguerre'.
    ctx
        Coupling context of the addressed ion.
    n_max
        Fock cutoff.
    """
    if pulse.regime == "full_offresonant":
        raise ValueError("pulse_unitary covers the 'ideal_LD' and 'exact_laguerre' regimes; "
                         "use evolve_full for 'full_offresonant'")
    fock = n_max + 1
    matrix = np.eye(3 * fock, dtype=complex)
    duration = pulse_duration(pulse, ctx)
    if duration == 0:
        return PulseOperator(matrix, (), 0.0)

    lamb_dicke = pulse.regime == "ideal_LD"
    upper = pulse.upper_level
    for n_ground, n_upper in _coupled_pairs(pulse.sideband, n_max):
        rabi = rabi_frequency(ctx, min(n_ground, n_upper), pulse.sideband, ion=pulse.ion, phase=pulse.phase,
                              lamb_dicke=lamb_dicke)
        angle = abs(rabi) * duration / 2
        direction = rabi / abs(rabi) if abs(rabi) > 0 else 1.0
        g, u = n_ground, upper * fock + n_upper
        matrix[g, g] = matrix[u, u] = np.cos(angle)
        matrix[u, g] = -1j * np.sin(angle) * direction
        matrix[g, u] = -1j * np.sin(angle) * np.conj(direction)

    order = abs(pulse.sideband)
    if pulse.sideband >= 0:
        frozen = tuple(range(fock - order, fock))
    else:
        frozen = tuple(upper * fock + n for n in range(fock - order, fock))
    return PulseOperator(matrix, frozen, duration)


def frozen_population(state: QuantumState, operator: PulseOperator, ion: int) -> float:
    if not operator.frozen:
        return 0.0
    local = np.moveaxis(state.probabilities().reshape(state.shape), ion - 1, -2)
    local = local.reshape(-1, 3 * state.fock_dimension).sum(axis=0)
    return float(local[list(operator.frozen)].sum())


def apply_pulse(state: QuantumState, pulse: Pulse, ctx: CouplingContext) -> QuantumState:
    """ Apply one weak-coupling pulse to a full state, warning when population sits in frozen states. """
    operator = pulse_unitary(pulse, ctx, state.n_max)
    leaked = frozen_population(state, operator, pulse.ion)
    if leaked > FROZEN_POPULATION_THRESHOLD:
        message = (f"Pulse on ion {pulse.ion} (k={pulse.sideband}) leaves population {leaked:.2e} frozen at the "
                   f"Fock cutoff n_max={state.n_max}")
        logger.warning(message)
        warnings.warn(message, TruncationWarning, stacklevel=2)
    return apply_local(state, operator.matrix, pulse.ion)
