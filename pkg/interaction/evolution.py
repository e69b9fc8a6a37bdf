from abc import ABC, abstractmethod

from interaction.coupling import CouplingContext
from interaction.full import evolve_full, full_duration
from interaction.pulse import Pulse, check_regime
from interaction.unitary import apply_pulse, pulse_duration
from statespace.state import QuantumState


class BaseEvolution(ABC):
    """ Base class for the evolution of a state under one pulse.

    Warning: This class should not be used directly.
    """

    regime: str = ""

    @abstractmethod
    def duration(self, pulse: Pulse, ctx: CouplingContext) -> float:
        pass

    @abstractmethod
    def apply(self, state: QuantumState, pulse: Pulse, ctx: CouplingContext) -> QuantumState:
        pass


class IdealLambDickeEvolution(BaseEvolution):
    """ Block rotations with Lamb-Dicke Rabi frequencies. """

    regime = "ideal_LD"

    def duration(self, pulse, ctx):
        return pulse_duration(_as_regime(pulse, self.regime), ctx)

    def apply(self, state, pulse, ctx):
        return apply_pulse(state, _as_regime(pulse, self.regime), ctx)


class ExactLaguerreEvolution(BaseEvolution):
    """ Block rotations with the exact Laguerre Rabi frequency of every phonon number. """

    regime = "exact_laguerre"

    def duration(self, pulse, ctx):
        return pulse_duration(_as_regime(pulse, self.regime), ctx)

    def apply(self, state, pulse, ctx):
        return apply_pulse(state, _as_regime(pulse, self.regime), ctx)


class FullOffResonantEvolution(BaseEvolution):
    """ Time integration including every off-resonant term.

    :param step: Optional RK4 step in s passed to `evolve_full`.
    """

    regime = "full_offresonant"

    def __init__(self, step: float | None = None):
        self.step = step

    def duration(self, pulse, ctx):
        return full_duration(pulse, ctx)

    def apply(self, state, pulse, ctx):
        return evolve_full(state, pulse, ctx, step=self.step)


def _as_regime(pulse: Pulse, regime: str) -> Pulse:
    if pulse.regime == regime:
        return pulse
    return Pulse(pulse.ion, pulse.sideband, pulse.area, pulse.phase, pulse.transition, regime)


def evolution_for(regime: str, **kwargs) -> BaseEvolution:
    """ Evolution strategy of a regime name or file code ('ld', 'exact', 'full'). """
    regime = check_regime(regime)
    if regime == "ideal_LD":
        return IdealLambDickeEvolution()
    elif regime == "exact_laguerre":
        return ExactLaguerreEvolution()
    else:
        return FullOffResonantEvolution(**kwargs)
