from fractions import Fraction

import numpy as np
import pytest

from chain.equilibrium import equilibrium_positions
from chain.laser import LaserConfig
from chain.modes import normal_modes
from interaction.coupling import (
    CouplingContext, displacement_elements, displacement_matrix, laguerre_rabi, lamb_dicke_rabi,
    rabi_frequency, standing_wave_rabi,
)
from interaction.evolution import (
    ExactLaguerreEvolution, FullOffResonantEvolution, IdealLambDickeEvolution, evolution_for,
)
from interaction.full import evolve_full, locate_dressed_resonance, peak_population, perturbative_evolve
from interaction.pulse import Pulse, format_pulse_program, parse_pulse_program
from interaction.spectrum import absorption_lines, absorption_spectrum, mode_lines, thermal_distribution
from interaction.unitary import apply_pulse, pulse_duration, pulse_unitary
from statespace.state import basis_state, fidelity
from utils.exceptions import ParseError, PhysicsValidityError, TruncationWarning

NU = 2 * np.pi * 700e3


def _context(eta=0.06, ratio=0.05, n_ions=1, **kwargs):
    return CouplingContext.uniform(n_ions, ratio * NU, eta, NU, **kwargs)


class TestRabiFrequency:

    @pytest.mark.parametrize("eta", [0.0, 0.1, 0.4])
    def test_carrier_from_first_excited_state(self, eta):
        expected = np.exp(-eta ** 2 / 2) * (1 - eta ** 2)
        assert laguerre_rabi(1.0, eta, 1, 0) == pytest.approx(expected, rel=1e-14)

    def test_no_recoil_gives_bare_coupling(self):
        assert laguerre_rabi(2.5 - 1j, 0.0, 7, 0) == 2.5 - 1j
        assert laguerre_rabi(1.0, 0.0, 3, -1) == 0

    @pytest.mark.parametrize("eta", [0.05, 0.3, 0.5])
    @pytest.mark.parametrize("n", [0, 4, 10])
    @pytest.mark.parametrize("k", [-3, -2, -1, 0, 1, 2, 3])
    def test_matches_matrix_exponential(self, eta, n, k):
        oracle = displacement_matrix(eta, 64)
        assert abs(laguerre_rabi(1.0, eta, n, k) - oracle[n, n + abs(k)]) < 1e-8

    def test_exact_elements_match_oracle_away_from_cutoff(self):
        exact = displacement_elements(0.3, 12)
        oracle = displacement_matrix(0.3, 64)[:13, :13]
        np.testing.assert_allclose(exact, oracle, atol=1e-10)

    @pytest.mark.parametrize("n", [0, 2, 9])
    @pytest.mark.parametrize("k", [-1, 0, 1, 2])
    @pytest.mark.parametrize("bound", [0.05, 0.1])
    def test_lamb_dicke_consistency(self, n, k, bound):
        eta = np.sqrt(bound / (n + 1))
        exact = laguerre_rabi(1.0, eta, n, k)
        approximate = lamb_dicke_rabi(1.0, eta, n, k)
        assert abs(exact - approximate) / abs(approximate) <= eta ** 2 * (n + 1)

    def test_lamb_dicke_rates(self):
        assert lamb_dicke_rabi(1.0, 0.06, 3, 0) == 1.0
        assert abs(lamb_dicke_rabi(1.0, 0.06, 3, -1)) == pytest.approx(0.06 * 2)

    def test_context_phase(self):
        ctx = CouplingContext(coupling=1.0, lamb_dicke=(0.1,), mode_frequency=NU, phase_offsets=(0.3,))
        rabi = rabi_frequency(ctx, 0, 0, ion=1, phase=0.5, lamb_dicke=True)
        assert np.angle(rabi) == pytest.approx(-0.2)


class TestStandingWave:

    def _ctx(self, position, kind):
        return _context(eta=0.1, geometry="standing", standing_positions=(position,), transition_kind=kind)

    def test_dipole_node_suppresses_carrier(self):
        assert abs(standing_wave_rabi(self._ctx(0.0, "dipole"), 0, 0)) < 1e-15

    def test_dipole_node_keeps_odd_sidebands(self):
        assert abs(standing_wave_rabi(self._ctx(0.0, "dipole"), 0, -1)) > 0

    def test_quadrupole_node_is_maximal(self):
        ctx = self._ctx(0.0, "quadrupole")
        assert abs(standing_wave_rabi(ctx, 0, 0)) == pytest.approx(2 * ctx.coupling * np.exp(-0.005))

    def test_dipole_antinode_doubles_carrier(self):
        ctx = self._ctx(np.pi / 2, "dipole")
        travelling = laguerre_rabi(ctx.coupling, 0.1, 0, 0)
        assert abs(standing_wave_rabi(ctx, 0, 0)) == pytest.approx(2 * abs(travelling))

    def test_dispatch_from_rabi_frequency(self):
        ctx = self._ctx(0.0, "dipole")
        assert rabi_frequency(ctx, 0, 0) == standing_wave_rabi(ctx, 0, 0)

    def test_travelling_context_rejected(self):
        with pytest.raises(ValueError):
            standing_wave_rabi(_context(), 0, 0)


class TestCouplingContext:

    def test_from_chain(self, calcium):
        chain = equilibrium_positions(2, calcium, NU)
        spectrum = normal_modes(chain, calcium, NU)
        ctx = CouplingContext.from_chain(chain, spectrum, LaserConfig(), mode_index=1)
        assert ctx.n_ions == 2
        assert ctx.lamb_dicke[0] == pytest.approx(ctx.lamb_dicke[1])
        assert ctx.phase_offsets[0] == pytest.approx(-ctx.phase_offsets[1])
        assert ctx.mode_frequency == pytest.approx(NU)

    def test_invalid_ion(self):
        with pytest.raises(ValueError):
            _context().rabi_frequency(2, 0, 0)

    def test_standing_needs_positions(self):
        with pytest.raises(ValueError):
            _context(geometry="standing")


class TestPulseUnitary:

    @pytest.mark.parametrize("regime", ["ideal_LD", "exact_laguerre"])
    @pytest.mark.parametrize("k", [-2, -1, 0, 1, 2])
    @pytest.mark.parametrize("area", [Fraction(1, 2), 1, 2, 0.37])
    @pytest.mark.parametrize("transition", ["ge", "gr"])
    def test_unitarity(self, regime, k, area, transition):
        pulse = Pulse(ion=1, sideband=k, area=area, phase=0.7, transition=transition, regime=regime)
        matrix = pulse_unitary(pulse, _context(eta=0.2), n_max=8).matrix
        assert np.max(np.abs(matrix.conj().T @ matrix - np.eye(len(matrix)))) <= 1e-12

    def test_four_pi_carrier_is_identity(self):
        matrix = pulse_unitary(Pulse(1, 0, 4, phase=1.1), _context(), n_max=6).matrix
        np.testing.assert_allclose(matrix, np.eye(len(matrix)), atol=1e-14)

    def test_two_pi_red_sideband_flips_sign(self):
        ctx = _context()
        state = basis_state("g", 1, n_max=4)
        result = apply_pulse(state, Pulse(1, -1, 2), ctx)
        assert result.amplitude("g", 1) == pytest.approx(-1, abs=1e-14)
        kernel = apply_pulse(basis_state("g", 0, n_max=4), Pulse(1, -1, 2), ctx)
        assert kernel.amplitude("g", 0) == 1

    def test_pi_pulse_transfers(self):
        result = apply_pulse(basis_state("e", 0, n_max=4), Pulse(1, -1, 1), _context())
        assert abs(result.amplitude("g", 1)) == pytest.approx(1)

    def test_phase_convention(self):
        phase = 0.4
        result = apply_pulse(basis_state("g", 0, n_max=3), Pulse(1, 0, 1, phase=phase), _context())
        assert result.amplitude("e", 0) == pytest.approx(-1j * np.exp(-1j * phase))

    def test_auxiliary_transition(self):
        result = apply_pulse(basis_state("g", 1, n_max=3), Pulse(1, -1, 1, transition="gr"), _context())
        assert abs(result.amplitude("r", 0)) == pytest.approx(1)

    def test_frozen_population_warns(self):
        with pytest.warns(TruncationWarning):
            apply_pulse(basis_state("g", 3, n_max=3), Pulse(1, 1, 1), _context())

    def test_untimeable_pulse(self):
        with pytest.raises(PhysicsValidityError):
            pulse_duration(Pulse(1, -1, 1), _context(eta=0.0))

    def test_full_regime_rejected(self):
        with pytest.raises(ValueError):
            pulse_unitary(Pulse(1, 0, 1, regime="full_offresonant"), _context(), 3)

    def test_durations(self):
        ctx = _context(eta=0.1)
        assert pulse_duration(Pulse(1, 0, 1), ctx) == pytest.approx(np.pi / ctx.coupling)
        assert pulse_duration(Pulse(1, -1, 1), ctx) == pytest.approx(np.pi / (ctx.coupling * 0.1))


class TestEvolutionStrategies:

    @pytest.mark.parametrize("name, cls", [
        ("ld", IdealLambDickeEvolution), ("ideal_LD", IdealLambDickeEvolution),
        ("exact", ExactLaguerreEvolution), ("full", FullOffResonantEvolution),
    ])
    def test_factory(self, name, cls):
        assert isinstance(evolution_for(name), cls)

    def test_invalid_regime(self):
        with pytest.raises(ValueError, match="Invalid regime"):
            evolution_for("adiabatic")

    def test_exact_carrier_is_slower(self):
        ctx = _context(eta=0.1)
        pulse = Pulse(1, 0, 1)
        ratio = evolution_for("exact").duration(pulse, ctx) / evolution_for("ld").duration(pulse, ctx)
        assert ratio == pytest.approx(np.exp(0.005))


class TestFullEvolution:

    def test_no_coupling_leaves_state(self):
        state = basis_state("g", 1, n_max=3)
        result = evolve_full(state, Pulse(1, 0, 1, regime="full"), _context(ratio=0.0), duration=10 / NU)
        assert fidelity(result, state) == pytest.approx(1, abs=1e-14)

    def test_coarse_step_rejected(self):
        with pytest.raises(PhysicsValidityError):
            evolve_full(basis_state("g", 0, n_max=3), Pulse(1, 0, 1), _context(), step=1 / NU)

    def test_weak_carrier_matches_ideal_pulse(self):
        ctx = _context(eta=0.06, ratio=0.02)
        state = basis_state("g", 0, n_max=4)
        full = evolve_full(state, Pulse(1, 0, 1, regime="full"), ctx)
        ideal = apply_pulse(state, Pulse(1, 0, 1, regime="exact"), ctx)
        assert fidelity(full, ideal) > 1 - 1e-2

    def test_offresonant_carrier_peak(self):
        ratio = 0.05
        ctx = _context(eta=0.06, ratio=ratio)
        pulse = Pulse(1, -1, 1, regime="full")
        peak, _ = peak_population(basis_state("g", 0, n_max=4), pulse, ctx,
                                  lambda s: s.ion_populations(1)[1], duration=4 * np.pi / NU)
        assert peak == pytest.approx(ratio ** 2, rel=0.1)

    def test_carrier_leakage_scales_quadratically(self):
        eta = 0.06
        ratios = np.array([0.02, 0.05, 0.1])
        peaks = []
        for ratio in ratios:
            state = basis_state("g", 0, n_max=4)
            leakage = lambda s: 1 - s.probabilities()[[0, 5]].sum()
            peak, _ = peak_population(state, Pulse(1, 0, 1, regime="full"), _context(eta, ratio), leakage)
            peaks.append(peak)
        slope, _ = np.polyfit(np.log(ratios), np.log(peaks), 1)
        assert slope == pytest.approx(2.0, abs=0.1)
        assert peaks[1] == pytest.approx((0.05 * eta) ** 2, rel=0.1)

    def test_dressed_state_resonance(self):
        best, table = locate_dressed_resonance(0.1, NU, ratios=np.linspace(0.9, 1.1, 21), n_max=5)
        assert best == pytest.approx(1.0, rel=0.05)
        assert table["transfer"].max() > 0.5


class TestPerturbativeEvolution:

    def test_zero_time_is_identity(self):
        state = basis_state("g", 2, n_max=4)
        result = perturbative_evolve(state, Pulse(1, 0, 1), _context(), 0.0)
        np.testing.assert_array_equal(result.amplitudes, state.amplitudes)

    @pytest.mark.parametrize("n", [0, 1, 3])
    def test_blue_sideband_probability(self, n):
        ctx = _context(eta=0.06, ratio=0.05)
        result = perturbative_evolve(basis_state("g", n, n_max=5), Pulse(1, 0, 1), ctx, np.pi / NU)
        expected = 0.05 ** 2 * 0.06 ** 2 * (n + 1)
        assert abs(result.amplitude("e", n + 1)) ** 2 == pytest.approx(expected, rel=1e-12)

    def test_red_sideband_probability(self):
        ctx = _context(eta=0.06, ratio=0.05)
        result = perturbative_evolve(basis_state("g", 2, n_max=5), Pulse(1, 0, 1), ctx, np.pi / NU)
        assert abs(result.amplitude("e", 1)) ** 2 == pytest.approx(0.05 ** 2 * 0.06 ** 2 * 2, rel=1e-12)

    def test_offresonant_carrier_probability(self):
        ctx = _context(eta=0.06, ratio=0.05)
        t = 0.3 / NU
        result = perturbative_evolve(basis_state("g", 1, n_max=5), Pulse(1, -1, 1), ctx, t)
        expected = 0.05 ** 2 * np.sin(NU * t / 2) ** 2
        assert abs(result.amplitude("e", 1)) ** 2 == pytest.approx(expected, rel=1e-12)

    def test_higher_sidebands_rejected(self):
        with pytest.raises(ValueError):
            perturbative_evolve(basis_state("g", 0, n_max=3), Pulse(1, 2, 1), _context(), 1e-6)


class TestAbsorptionSpectrum:

    def test_ground_state_weights(self):
        eta = 0.1
        lines = mode_lines([1.0], eta).set_index("order")["weight"]
        assert lines[0] == pytest.approx(np.exp(-eta ** 2), rel=1e-12)
        assert lines[1] == pytest.approx(eta ** 2 * np.exp(-eta ** 2), rel=1e-12)
        assert -1 not in lines.index or lines[-1] == 0

    @pytest.mark.parametrize("n", [0, 3, 8])
    def test_sum_rule(self, n):
        distribution = np.zeros(n + 1)
        distribution[n] = 1
        assert mode_lines(distribution, 0.3)["weight"].sum() == pytest.approx(1, abs=1e-10)

    def test_unnormalized_distribution(self):
        with pytest.raises(ValueError):
            mode_lines([0.5, 0.2], 0.1)

    def test_thermal_distribution(self):
        distribution = thermal_distribution(2.0, 60)
        assert distribution.sum() == pytest.approx(1)
        assert distribution @ np.arange(61) == pytest.approx(2.0, rel=1e-6)

    def test_two_ion_lamb_dicke_spectrum(self, calcium):
        chain = equilibrium_positions(2, calcium, NU)
        spectrum = normal_modes(chain, calcium, NU)
        etas = 0.2 * spectrum.coupling_factors[:, 0]
        distribution = thermal_distribution(2.0, 40)
        lines = absorption_lines([distribution, distribution], etas, spectrum.frequencies)
        carrier = lines.loc[(lines["order_1"] == 0) & (lines["order_2"] == 0), "weight"].item()
        strong = lines[lines["weight"] > 0.01 * carrier]
        orders = set(zip(strong["order_1"], strong["order_2"]))
        assert orders == {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)}
        assert lines["weight"].sum() == pytest.approx(1, abs=1e-8)

    def test_profile_peaks_at_lines(self):
        detunings = np.linspace(-2 * NU, 2 * NU, 401)
        profile = absorption_spectrum([[1.0]], [0.1], [NU], detunings, linewidth=NU / 50)
        assert detunings[np.argmax(profile)] == pytest.approx(0.0, abs=1e-6 * NU)
        assert profile.max() == pytest.approx(np.exp(-0.01), rel=1e-3)


class TestPulseProgram:

    PROGRAM = """
    # two pulses
    pulse ion=2 k=0 area=1/2pi phase=1.5707963267948966 transition=ge regime=ld
    pulse ion=1 k=-1 area=0.25pi phase=0.0 transition=gr regime=exact  # comment
    """

    def test_parse(self):
        first, second = parse_pulse_program(self.PROGRAM)
        assert first == Pulse(2, 0, Fraction(1, 2), np.pi / 2, "ge", "ideal_LD")
        assert second.area == 0.25
        assert second.regime == "exact_laguerre"
        assert second.transition == "gr"

    def test_round_trip(self):
        text = format_pulse_program(parse_pulse_program(self.PROGRAM))
        assert format_pulse_program(parse_pulse_program(text)) == text

    def test_unknown_field(self):
        with pytest.raises(ParseError) as info:
            parse_pulse_program("pulse ion=1 k=0 area=1pi phase=0 transition=ge regime=ld colour=red")
        assert info.value.line == 1
        assert info.value.column == 58

    def test_malformed_area_on_second_line(self):
        text = "pulse ion=1 k=0 area=1pi phase=0 transition=ge regime=ld\n" \
               "pulse ion=1 k=0 area=half phase=0 transition=ge regime=ld"
        with pytest.raises(ParseError) as info:
            parse_pulse_program(text)
        assert info.value.line == 2
        assert info.value.column == 22

    def test_missing_field(self):
        with pytest.raises(ParseError, match="missing"):
            parse_pulse_program("pulse ion=1 k=0 area=1pi")
