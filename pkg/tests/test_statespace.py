import numpy as np
import pytest

from statespace.readout import ReadoutModel, measure_internal, sample_readout, spawn_rngs
from statespace.state import (
    QuantumState, apply_local, basis_state, fidelity, ground_state, state_dimension, superposition,
)
from utils.exceptions import PhysicsValidityError, TruncationWarning


class TestQuantumState:

    def test_single_ion_ground_state(self):
        state = ground_state(1, 1)
        assert state.dimension == 6
        assert state.amplitudes[0] == 1
        assert np.all(state.amplitudes[1:] == 0)

    def test_dimension(self):
        assert ground_state(2, 2).dimension == 27

    def test_oversize_rejected(self):
        with pytest.raises(PhysicsValidityError):
            ground_state(12, 50)

    @pytest.mark.parametrize("n_ions, n_max", [(0, 4), (2, 0)])
    def test_invalid_sizes(self, n_ions, n_max):
        with pytest.raises(ValueError):
            ground_state(n_ions, n_max)

    def test_unnormalized_rejected(self):
        with pytest.raises(ValueError, match="normalized"):
            QuantumState(np.ones(6), 1, 1)

    def test_ordering_and_labels(self):
        state = basis_state("geg", 2, n_max=3)
        index = int(np.flatnonzero(state.amplitudes)[0])
        assert index == (0 * 9 + 1 * 3 + 0) * 4 + 2
        assert state.basis_label(index) == "|geg>|2>"

    def test_ion_and_bus_populations(self):
        state = superposition({("ge", 0): 1, ("ee", 1): 1}, 2, n_max=2)
        assert np.allclose(state.ion_populations(1), [0.5, 0.5, 0.0])
        assert np.allclose(state.ion_populations(2), [0.0, 1.0, 0.0])
        assert np.allclose(state.bus_distribution(), [0.5, 0.5, 0.0])

    def test_truncation_monitor(self):
        state = basis_state("g", 3, n_max=3)
        with pytest.warns(TruncationWarning):
            state.check_truncation()

    def test_csv_read_back(self, tmp_path):
        state = superposition({("eg", 0): 1, ("gr", 2): 1j}, 2, n_max=2)
        path = tmp_path / "state.csv"
        state.to_csv(path, seed=7)
        assert path.read_text(encoding="utf-8").startswith("# seed=7\n")
        restored = QuantumState.read_csv(path)
        assert restored.shape == state.shape
        assert np.array_equal(restored.amplitudes, state.amplitudes)

    def test_csv_read_back_keeps_every_digit(self, tmp_path):
        amplitude = 0.7071067811865475
        state = QuantumState(np.zeros(state_dimension(1, 1)), 1, 1, normalized=False)
        state.amplitudes[state.index_of("g", 0)] = amplitude
        state.amplitudes[state.index_of("e", 1)] = 1j * amplitude
        path = tmp_path / "state.csv"
        state.to_csv(path)
        restored = QuantumState.read_csv(path)
        assert restored.amplitudes[restored.index_of("g", 0)].real == amplitude
        assert restored.amplitudes[restored.index_of("e", 1)].imag == amplitude


class TestFidelity:

    def test_identical(self):
        state = superposition({("g", 0): 1, ("e", 0): 1}, 1)
        assert fidelity(state, state) == pytest.approx(1.0)

    def test_orthogonal(self):
        assert fidelity(basis_state("g"), basis_state("e")) == 0.0

    def test_half(self):
        plus = superposition({("g", 0): 1, ("e", 0): 1}, 1)
        assert fidelity(plus, basis_state("g")) == pytest.approx(0.5)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            fidelity(basis_state("g", n_max=2), basis_state("g", n_max=3))


class TestApplyLocal:

    def test_flip_addresses_one_ion(self):
        fock = 3
        flip = np.kron(np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]]), np.eye(fock))
        result = apply_local(basis_state("gg", 1, n_max=2), flip, ion=2)
        assert fidelity(result, basis_state("ge", 1, n_max=2)) == pytest.approx(1.0)

    def test_wrong_operator_shape(self):
        with pytest.raises(ValueError):
            apply_local(ground_state(2, 2), np.eye(4), ion=1)

    def test_invalid_ion(self):
        with pytest.raises(ValueError):
            apply_local(ground_state(2, 2), np.eye(9), ion=3)


class TestReadout:

    def test_dark_ion(self):
        outcome, collapsed, count = measure_internal(basis_state("e"), 1, seed=3)
        assert outcome == "dark"
        assert collapsed.amplitude("e") == 1
        assert 100 < count < 200

    def test_shelved_level_is_dark(self):
        assert measure_internal(basis_state("r"), 1, seed=4).outcome == "dark"

    def test_midpoint_threshold(self):
        readout = ReadoutModel()
        assert readout.decision_threshold == 1075
        dark_as_bright, bright_as_dark = readout.misclassification()
        assert dark_as_bright < 1e-6
        assert bright_as_dark < 1e-6

    def test_invalid_rates(self):
        with pytest.raises(ValueError):
            ReadoutModel(bright_rate=100, dark_rate=150)

    def test_collapse_is_idempotent(self):
        plus = superposition({("g", 0): 1, ("e", 0): 1}, 1)
        for rng in spawn_rngs(11, 20):
            first = measure_internal(plus, 1, rng)
            second = measure_internal(first.state, 1, rng)
            assert first.outcome == second.outcome

    def test_marginal_statistics(self):
        plus = superposition({("g", 0): 1, ("e", 0): 1}, 1)
        shots = sample_readout(plus, 1, 100_000, seed=2024)
        assert (shots["outcome"] == "bright").mean() == pytest.approx(0.5, abs=0.01)
        assert (shots["outcome"] == shots["sector"]).all()

    def test_seeded_reproducibility(self):
        plus = superposition({("g", 0): 1, ("e", 0): 1}, 1)
        a = sample_readout(plus, 1, 50, seed=5)
        b = sample_readout(plus, 1, 50, seed=5)
        assert a.equals(b)
