import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from itertools import product
from typing import Callable

import numpy as np
import pandas as pd

from gates.compiler import BUS_LEVELS, PulseSchedule
from interaction.evolution import evolution_for
from interaction.pulse import check_regime
from statespace.state import QuantumState, basis_state
from utils.exceptions import BusLeakageWarning

logger = logging.getLogger(__name__)

BUS_TOLERANCE = 1e-10
DEFAULT_TABLE_N_MAX = 4


def simulate_schedule(
    schedule: PulseSchedule,
    state: QuantumState,
    regime: str | None = None,
    observer: Callable[[int, object, QuantumState], None] | None = None,
    check_bus: bool = True,
) -> QuantumState:
    """ Apply every pulse of a schedule to a state.

    Parameters
    ----------
    schedule
        The compiled schedule; its coupling context provides the rates.
    state
        Initial state; it must hold as many ions as the context.
    regime
        If given, every pulse is evolved in this regime instead of its own.
    observer
        Optional callable observer(step, scheduled_pulse, state) invoked after every pulse.
    check_bus
        Warn with BusLeakageWarning when the bus started in |0> and does not end there.

    Returns
    -------
        The final state.
    """
    if state.n_ions != schedule.ctx.n_ions:
        raise ValueError(f"State holds {state.n_ions} ions but the schedule was compiled for {schedule.ctx.n_ions}")
    fixed = None if regime is None else evolution_for(check_regime(regime))
    bus_started_empty = state.bus_population(0) > 1 - BUS_TOLERANCE

    for step, entry in enumerate(schedule, start=1):
        evolution = fixed or evolution_for(entry.pulse.regime)
        state = evolution.apply(state, entry.pulse, schedule.ctx)
        if observer is not None:
            observer(step, entry, state)

    if check_bus and bus_started_empty:
        leaked = 1 - state.bus_population(0)
        if leaked > BUS_TOLERANCE:
            message = f"Bus population {leaked:.2e} left outside |0> after {len(schedule)} pulses"
            logger.warning(message)
            warnings.warn(message, BusLeakageWarning, stacklevel=2)
    return state


def _full_levels(qubits, bits, n_ions: int) -> str:
    levels = ["g"] * n_ions
    for ion, bit in zip(qubits, bits):
        levels[ion - 1] = bit
    return "".join(levels)


def _row(schedule, qubits, bits, phonons, bus_levels, n_max, regime) -> dict:
    n_ions = schedule.ctx.n_ions
    initial = basis_state(_full_levels(qubits, bits, n_ions), phonons, n_max)
    final = simulate_schedule(schedule, initial, regime=regime)

    best, best_amplitude, inside = None, 0j, 0.0
    for out_bits in product("ge", repeat=len(qubits)):
        for out_phonons in bus_levels:
            amplitude = final.amplitude(_full_levels(qubits, out_bits, n_ions), out_phonons)
            inside += abs(amplitude) ** 2
            if best is None or abs(amplitude) > abs(best_amplitude):
                best, best_amplitude = ("".join(out_bits), out_phonons), amplitude
    return {
        "input": f"|{''.join(bits)}>|{phonons}>",
        "output": f"|{best[0]}>|{best[1]}>",
        "amplitude_re": best_amplitude.real,
        "amplitude_im": best_amplitude.imag,
        "probability": abs(best_amplitude) ** 2,
        "leakage": max(0.0, 1.0 - inside),
    }


def truth_table(
    schedule: PulseSchedule,
    qubits=None,
    include_bus: bool = False,
    n_max: int = DEFAULT_TABLE_N_MAX,
    regime: str | None = None,
    workers: int | None = None,
) -> pd.DataFrame:
    """ Simulate every computational basis input of a subset of ions.

    Ions outside `qubits` start in |g>. Each row reports the dominant computational output, its
    amplitude (phases included) and the population left outside the computational subspace.

    Parameters
    ----------
    schedule
        The compiled schedule.
    qubits
        1-based ions forming the register, in label order; all ions by default.
    include_bus
        Also enumerate the bus in |0> and |1> as a qubit; otherwise the bus starts in |0>.
    n_max
        Fock cutoff of the simulation.
    regime
        Optional regime override passed to `simulate_schedule`.
    workers
        Number of worker threads; rows are simulated sequentially when None.

    Returns
    -------
        DataFrame with columns input, output, amplitude_re, amplitude_im, probability, leakage.
    """
    n_ions = schedule.ctx.n_ions
    qubits = tuple(range(1, n_ions + 1)) if qubits is None else tuple(qubits)
    if len(set(qubits)) != len(qubits) or any(not 1 <= ion <= n_ions for ion in qubits):
        raise ValueError(f"qubits must be distinct ions in 1..{n_ions}, got {qubits}")
    bus_levels = BUS_LEVELS if include_bus else (0,)
    inputs = [(bits, phonons) for bits in product("ge", repeat=len(qubits)) for phonons in bus_levels]

    def run(item):
        bits, phonons = item
        return _row(schedule, qubits, bits, phonons, bus_levels, n_max, regime)

    if workers is None or workers <= 1:
        rows = [run(item) for item in inputs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, inputs))
    table = pd.DataFrame(rows)
    logger.debug(f"Truth table over ions {qubits}: worst leakage {table['leakage'].max():.2e}")
    return table


def output_amplitudes(table: pd.DataFrame) -> dict:
    """ {input label: (output label, complex amplitude)} from a truth table. """
    return {row.input: (row.output, complex(row.amplitude_re, row.amplitude_im)) for row in table.itertuples()}


def row_fidelities(table: pd.DataFrame, expected: dict) -> np.ndarray:
    """ Fidelity of each row with an expected {input: output} map of basis labels. """
    fidelities = []
    for row in table.itertuples():
        if expected[row.input] != row.output:
            fidelities.append(0.0)
        else:
            fidelities.append(row.probability)
    return np.array(fidelities)
