import numpy as np
import pytest

from gates.spec import ControlledR, MultiCnot
from statespace.readout import make_rng
from synthesis.entanglement import concurrence, reduced_two_qubit
from synthesis.networks import (
    arbitrary_state_network, network_fidelity, network_parameters, register_amplitudes, simulate_network,
    w_state_network, w_state_vector,
)
from synthesis.target import TargetState, load_target_state, random_target, register_index, term_labels


def _register_fidelity(a, b):
    return abs(np.vdot(a, b)) ** 2


class TestTargetState:

    def test_term_order(self):
        assert term_labels(3) == ("ggg", "gge", "geg", "egg", "gee", "ege", "eeg", "eee")

    def test_register_index(self):
        assert register_index("ggg") == 0
        assert register_index("egg") == 4

    def test_unnormalized(self):
        with pytest.raises(ValueError, match="unnormalized"):
            TargetState.from_terms({"ggg": (0.5, 0.0), "eee": (0.5, 0.0)})

    def test_gauge(self):
        with pytest.raises(ValueError, match="all-g"):
            TargetState((1.0,) + (0.0,) * 7, (0.3,) + (0.0,) * 7)

    def test_from_amplitudes_removes_global_phase(self):
        vector = np.exp(0.9j) * np.array([0.6, 0, 0, 0, 0, 0, 0, 0.8j])
        target = TargetState.from_amplitudes(vector)
        assert target.phases[0] == 0.0
        assert target.phases[-1] == pytest.approx(np.pi / 2)
        np.testing.assert_allclose(target.vector(), vector * np.exp(-0.9j), atol=1e-15)

    def test_load(self, tmp_path):
        path = tmp_path / "target.csv"
        path.write_text("# three-qubit target\nbasis_label,alpha,phi\nggg,0.6,0\ngge, 0.8, 1.2\n", encoding="utf-8")
        target = load_target_state(path)
        assert target.alphas[:2] == (0.6, 0.8)
        assert target.phases[1] == 1.2
        assert sum(target.alphas[2:]) == 0

    def test_load_without_header(self, tmp_path):
        path = tmp_path / "target.csv"
        path.write_text("gg,0.6,0\nee,0.8,-1\n", encoding="utf-8")
        assert load_target_state(path).n_qubits == 2


class TestWStateNetwork:

    def test_first_rotation_for_two_qubits(self):
        first = w_state_network(2)[0]
        assert first.controls == ()
        assert np.cos(first.theta) == pytest.approx(1 / np.sqrt(2))
        assert np.sin(first.theta) == pytest.approx(1 / np.sqrt(2))

    def test_gates(self):
        circuit = w_state_network(4)
        assert circuit[2] == ControlledR((1, 2), 3, np.arccos(np.sqrt(1 / 2)), 0.0)
        assert circuit[-1] == MultiCnot((1, 2, 3), 4)

    def test_two_qubit_output(self):
        prepared = register_amplitudes(simulate_network(w_state_network(2), 2, initial="ee"))
        expected = np.array([0, 1, 1, 0]) / np.sqrt(2)
        assert _register_fidelity(expected, prepared) >= 1 - 1e-10

    @pytest.mark.parametrize("n_qubits", range(2, 9))
    def test_fidelity(self, n_qubits):
        fidelity = network_fidelity(w_state_network(n_qubits), w_state_vector(n_qubits), initial="e" * n_qubits)
        assert fidelity >= 1 - 1e-10

    def test_concurrence_of_eight_qubits(self):
        prepared = register_amplitudes(simulate_network(w_state_network(8), 8, initial="e" * 8))
        assert concurrence(reduced_two_qubit(prepared, 2, 7)) == pytest.approx(0.25, abs=1e-6)

    def test_permutation_symmetry(self):
        prepared = register_amplitudes(simulate_network(w_state_network(4), 4, initial="eeee"))
        swapped = np.swapaxes(prepared.reshape((2,) * 4), 0, 2).reshape(-1)
        assert _register_fidelity(prepared, swapped) == pytest.approx(1.0, abs=1e-10)

    def test_too_small(self):
        with pytest.raises(ValueError):
            w_state_network(1)


class TestArbitraryStateNetwork:

    def test_ground_target_is_identity(self):
        target = TargetState.from_terms({"ggg": (1.0, 0.0)})
        assert (network_parameters(target)["b"] == 0).all()
        assert arbitrary_state_network(target) == []

    def test_ghz_target(self):
        target = TargetState.from_terms({"ggg": (1 / np.sqrt(2), 0.0), "eee": (1 / np.sqrt(2), 0.0)})
        parameters = network_parameters(target)
        assert parameters["b"][0] == pytest.approx(1 / np.sqrt(2))
        assert (parameters["b"][1:] == 0).all()
        assert network_fidelity(arbitrary_state_network(target), target.vector()) >= 1 - 1e-8

    def test_parameters_follow_term_order(self):
        target = TargetState.from_terms({"ggg": (0.6, 0.0), "gge": (0.48, 0.4), "geg": (0.64, 0.0)})
        parameters = network_parameters(target)
        assert parameters["label"].tolist()[:4] == ["ggg", "gge", "geg", "egg"]
        assert parameters["b"].tolist()[:3] == pytest.approx([0.8, 0.6, 1.0])
        assert (parameters["b"][3:] == 0).all()
        assert network_fidelity(arbitrary_state_network(target), target.vector()) >= 1 - 1e-8

    def test_parameter_count(self):
        target = random_target(make_rng(3))
        circuit = arbitrary_state_network(target)
        rotations = [gate for gate in circuit if isinstance(gate, ControlledR)]
        assert len(rotations) == 7
        assert 2 * len(network_parameters(target)) == 14

    def test_single_excitation_terms(self):
        terms = {"ggg": (0.5, 0.0), "gge": (0.5, 0.3), "geg": (0.5, -1.0), "egg": (0.5, 2.0)}
        target = TargetState.from_terms(terms)
        assert network_fidelity(arbitrary_state_network(target), target.vector()) >= 1 - 1e-8

    def test_random_targets(self):
        rng = make_rng(2024)
        for _ in range(100):
            target = random_target(rng)
            assert network_fidelity(arbitrary_state_network(target), target.vector()) >= 1 - 1e-8

    def test_global_phase_only_changes_global_phase(self):
        vector = random_target(make_rng(11)).vector()
        shifted = TargetState.from_amplitudes(np.exp(1.7j) * vector)
        assert network_fidelity(arbitrary_state_network(shifted), np.exp(1.7j) * vector) >= 1 - 1e-8

    def test_amplitudes_exact(self):
        target = random_target(make_rng(5))
        prepared = register_amplitudes(simulate_network(arbitrary_state_network(target), 3))
        np.testing.assert_allclose(prepared, target.vector(), atol=1e-9)

    def test_only_three_qubits(self):
        with pytest.raises(ValueError):
            arbitrary_state_network(TargetState.from_terms({"gg": (1.0, 0.0)}, n_qubits=2))


class TestConcurrence:

    def test_bell_state(self):
        bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
        assert concurrence(np.outer(bell, bell.conj())) == pytest.approx(1.0)

    def test_product_state(self):
        product = np.kron([0.6, 0.8], [1, 0])
        assert concurrence(np.outer(product, product)) == pytest.approx(0.0, abs=1e-6)

    def test_reduced_state_trace(self):
        rho = reduced_two_qubit(w_state_vector(5), 1, 4)
        assert np.trace(rho).real == pytest.approx(1.0)
        assert concurrence(rho) == pytest.approx(0.4, abs=1e-6)
