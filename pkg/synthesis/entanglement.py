import numpy as np

_SPIN_FLIP = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


def reduced_two_qubit(register, first: int, second: int) -> np.ndarray:
    """ Density matrix of qubits `first` and `second` (1-based) of a pure register vector, all other qubits traced out. """
    register = np.asarray(register, dtype=complex)
    n_qubits = int(np.log2(register.shape[0]))
    if 2 ** n_qubits != register.shape[0]:
        raise ValueError(f"Register length {register.shape[0]} is not a power of two")
    if first == second or not (1 <= first <= n_qubits and 1 <= second <= n_qubits):
        raise ValueError(f"Need two distinct qubits in 1..{n_qubits}, got {first} and {second}")
    tensor = np.moveaxis(register.reshape((2,) * n_qubits), (first - 1, second - 1), (0, 1)).reshape(4, -1)
    return tensor @ tensor.conj().T


def concurrence(rho: np.ndarray) -> float:
    """ Wootters concurrence max(0, l1 - l2 - l3 - l4) of a two-qubit density matrix, where l_i are the
    decreasing square roots of the eigenvalues of rho (sigma_y x sigma_y) rho* (sigma_y x sigma_y). """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"Expected a 4x4 density matrix, got shape {rho.shape}")
    flipped = _SPIN_FLIP @ rho.conj() @ _SPIN_FLIP
    eigenvalues = np.linalg.eigvals(rho @ flipped)
    roots = np.sort(np.sqrt(np.clip(eigenvalues.real, 0.0, None)))[::-1]
    return float(max(0.0, roots[0] - roots[1:].sum()))
