import logging

import numpy as np
import pandas as pd

from gates.compiler import compile
from gates.simulate import simulate_schedule
from gates.spec import Cnot, ControlledR, MultiCnot, Rotation
from interaction.coupling import CouplingContext
from statespace.state import QuantumState, basis_state
from synthesis.target import TargetState, register_index
from utils.constants import DEFAULT_AXIAL_FREQUENCY, DEFAULT_COUPLING

logger = logging.getLogger(__name__)

DEFAULT_ETA = 0.06
DEFAULT_NETWORK_N_MAX = 2
# Below this a rotation block is dropped from the network.
NEGLIGIBLE_ROTATION = 1e-15


def w_state_network(n_qubits: int) -> list:
    """ Network preparing (|gee..e> + |ege..e> + ... + |ee..eg>) / sqrt(N) from |ee..e>.

    Rotation Q_j = [[sqrt((N-j)/(N-j+1)), 1/sqrt(N-j+1)], [-1/sqrt(N-j+1), sqrt((N-j)/(N-j+1))]] acts on
    qubit j when qubits 1..j-1 are excited; a final NOT controlled by qubits 1..N-1 turns |ee..e> into
    |ee..eg>.
    """
    if n_qubits < 2:
        raise ValueError(f"A W-state network needs at least 2 qubits, got {n_qubits}")
    circuit = []
    for j in range(1, n_qubits):
        theta = np.arccos(np.sqrt((n_qubits - j) / (n_qubits - j + 1)))
        circuit.append(ControlledR(tuple(range(1, j)), j, theta, 0.0))
    circuit.append(MultiCnot(tuple(range(1, n_qubits)), n_qubits))
    return circuit


def w_state_vector(n_qubits: int) -> np.ndarray:
    vector = np.zeros(2 ** n_qubits, dtype=complex)
    for qubit in range(n_qubits):
        label = "e" * qubit + "g" + "e" * (n_qubits - qubit - 1)
        vector[register_index(label)] = 1 / np.sqrt(n_qubits)
    return vector


def _rotation_parameters(target: TargetState) -> tuple[np.ndarray, np.ndarray]:
    """ b_j and rotation phases phi_j of the seven blocks of a three-qubit network. """
    alphas = np.array(target.alphas)
    phases = np.array(target.phases)
    last_phase = phases[-1]
    blocks = len(alphas) - 1
    b = np.zeros(blocks)
    phi = np.zeros(blocks)
    b[0] = np.sqrt(max(0.0, 1 - alphas[0] ** 2))
    phi[0] = (np.pi - last_phase) / 2
    for j in range(1, blocks):
        remaining = 1 - np.sum(alphas[:j] ** 2)
        # the prefix exhausted the norm: nothing is left to split
        b[j] = 0.0 if remaining <= NEGLIGIBLE_ROTATION else min(1.0, alphas[j] / np.sqrt(remaining))
        phi[j] = (phases[j] - last_phase) / 2
    return b, phi


def network_parameters(target: TargetState) -> pd.DataFrame:
    """ One row per rotation U_j = [[a_j, exp(2i phi_j) b_j], [-exp(-2i phi_j) b_j, a_j]]. """
    b, phi = _rotation_parameters(target)
    return pd.DataFrame({
        "block": np.arange(len(b)),
        "label": target.labels[:len(b)],
        "a": np.sqrt(1 - b ** 2),
        "b": b,
        "theta": np.arcsin(b),
        "phi": phi,
    })


def _move_from_reservoir(label: str) -> list:
    """ Gates that carry amplitude from |ee..e> into |label> after the split on its first g qubit.

    The split leaves the amplitude on u = all e except the first g qubit of `label`; every further g
    qubit of `label` is flipped by a NOT controlled by all other qubits, with g-valued controls
    sandwiched between R(pi, 0) and R(-pi, 0).
    """
    n_qubits = len(label)
    ground = [index + 1 for index, level in enumerate(label) if level == "g"]
    current = ["e"] * n_qubits
    current[ground[0] - 1] = "g"
    gates = []
    for qubit in ground[1:]:
        controls = tuple(ion for ion in range(1, n_qubits + 1) if ion != qubit)
        negated = [ion for ion in controls if current[ion - 1] == "g"]
        gates += [Rotation(ion, np.pi, 0.0) for ion in negated]
        gates.append(MultiCnot(controls, qubit))
        gates += [Rotation(ion, -np.pi, 0.0) for ion in negated]
        current[qubit - 1] = "g"
    return gates


def arbitrary_state_network(target: TargetState, skip_trivial: bool = True) -> list:
    """ Network preparing an arbitrary three-qubit state from |ggg>.

    Block 0 rotates qubit 1 and copies it onto qubits 2 and 3, leaving alpha_0 on |ggg> and the rest
    on |eee>. Block j then splits alpha_j exp(i phi_j) off |eee> with a rotation of the first g qubit of
    label j controlled by the other qubits, and moves it onto |label_j>.

    Parameters
    ----------
    target
        A three-qubit TargetState.
    skip_trivial
        Drop blocks whose rotation has b_j = 0.

    Returns
    -------
        List of GateSpec objects; the rotations are ControlledR gates.
    """
    if target.n_qubits != 3:
        raise ValueError(f"Arbitrary-state networks are built for three qubits, got {target.n_qubits}")
    b, phi = _rotation_parameters(target)
    thetas = np.arcsin(b)
    labels = target.labels

    circuit = []
    if not (skip_trivial and b[0] <= NEGLIGIBLE_ROTATION):
        circuit += [ControlledR((), 1, thetas[0], phi[0]), Cnot(1, 2), Cnot(1, 3)]
    for j in range(1, len(b)):
        if skip_trivial and b[j] <= NEGLIGIBLE_ROTATION:
            continue
        label = labels[j]
        split = label.index("g") + 1
        controls = tuple(ion for ion in range(1, 4) if ion != split)
        circuit.append(ControlledR(controls, split, thetas[j], phi[j]))
        circuit += _move_from_reservoir(label)
    logger.debug(f"Network with {len(circuit)} gates for target {target.to_frame().to_dict('list')}")
    return circuit


def default_context(n_ions: int) -> CouplingContext:
    """ Every ion with eta = 0.06 on a 700 kHz bus, |lambda| / 2 pi = 50 kHz. """
    return CouplingContext.uniform(n_ions, DEFAULT_COUPLING, DEFAULT_ETA, DEFAULT_AXIAL_FREQUENCY)


def register_amplitudes(state: QuantumState, phonons: int = 0) -> np.ndarray:
    """ Amplitudes of the 2^N g/e labels with the bus in |phonons>, qubit 1 most significant. """
    tensor = state.tensor()[(slice(0, 2),) * state.n_ions + (phonons,)]
    return tensor.reshape(-1)


def simulate_network(circuit, n_qubits: int, initial: str | None = None, ctx: CouplingContext | None = None,
                     regime: str = "ideal_LD", n_max: int = DEFAULT_NETWORK_N_MAX) -> QuantumState:
    """ Compile a network and run it on a register of ions with the bus in |0>.

    :param circuit: GateSpec list.
    :param n_qubits: Number of ions.
    :param initial: Initial g/e label; all g by default.
    :param ctx: Coupling context; `default_context(n_qubits)` if None.
    :param regime: Compilation regime.
    :param n_max: Fock cutoff.
    :return: The final QuantumState.
    """
    initial = "g" * n_qubits if initial is None else initial
    if len(initial) != n_qubits:
        raise ValueError(f"Initial label '{initial}' does not have {n_qubits} qubits")
    ctx = default_context(n_qubits) if ctx is None else ctx
    schedule = compile(circuit, ctx, regime=regime)
    return simulate_schedule(schedule, basis_state(initial, 0, n_max))


def network_fidelity(circuit, target_vector, initial: str | None = None, **kwargs) -> float:
    """ |<target|prepared>|^2 over the register with the bus in |0>. """
    target_vector = np.asarray(target_vector, dtype=complex)
    n_qubits = int(np.log2(target_vector.shape[0]))
    prepared = register_amplitudes(simulate_network(circuit, n_qubits, initial, **kwargs))
    return float(abs(np.vdot(target_vector, prepared)) ** 2)
