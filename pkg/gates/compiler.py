import logging
import warnings
from dataclasses import dataclass

import numpy as np
import pandas as pd

from gates.spec import GateSpec, PulseTemplate, flatten
from interaction.coupling import CouplingContext, rabi_frequency
from interaction.evolution import evolution_for
from interaction.pulse import Pulse, check_regime, format_pulse_program
from utils.exceptions import MarginWarning, PhysicsValidityError

logger = logging.getLogger(__name__)

LAMB_DICKE_LIMIT = 0.1
WEAK_COUPLING_LIMIT = 0.1
# Bus levels used as the logic ancilla.
BUS_LEVELS = (0, 1)


@dataclass(frozen=True)
class ScheduledPulse:
    pulse: Pulse
    duration: float
    start: float
    gate_index: int
    logical_phase: float


class PulseSchedule:
    """Pulses of a compiled circuit, executed one after the other.

    Parameters
    ----------
    entries
        ScheduledPulse objects in time order.
    ctx
        Coupling context the circuit was compiled against.
    regime
        Regime the circuit was compiled in.
    bus_mode
        1-based index of the collective mode used as the bus.
    """

    def __init__(self, entries, ctx: CouplingContext, regime: str, bus_mode: int = 1):
        self.entries = tuple(entries)
        self.ctx = ctx
        self.regime = regime
        self.bus_mode = bus_mode

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def pulses(self) -> list:
        return [entry.pulse for entry in self.entries]

    @property
    def durations(self) -> np.ndarray:
        return np.array([entry.duration for entry in self.entries], dtype=float)

    @property
    def total_time(self) -> float:
        return float(self.durations.sum())

    @property
    def phase_ledger(self) -> dict:
        """ Logical phase history of every pulsed ion. """
        ledger = {}
        for entry in self.entries:
            ledger.setdefault(entry.pulse.ion, []).append(entry.logical_phase)
        return ledger

    def ledger_frame(self) -> pd.DataFrame:
        rows = []
        for step, entry in enumerate(self.entries, start=1):
            pulse = entry.pulse
            rows.append({
                "step": step,
                "gate": entry.gate_index,
                "ion": pulse.ion,
                "sideband": pulse.sideband,
                "transition": pulse.transition,
                "area_pi": float(pulse.area),
                "logical_phase": entry.logical_phase,
                "laser_phase": pulse.phase,
                "phase_offset": float(np.mod(pulse.phase - entry.logical_phase, 2 * np.pi)),
                "start_s": entry.start,
                "duration_s": entry.duration,
            })
        return pd.DataFrame(rows, columns=[
            "step", "gate", "ion", "sideband", "transition", "area_pi", "logical_phase", "laser_phase",
            "phase_offset", "start_s", "duration_s",
        ])

    def to_program(self) -> str:
        return format_pulse_program(self.pulses)

    def timing_report(self) -> dict:
        per_gate = {}
        for entry in self.entries:
            per_gate[entry.gate_index] = per_gate.get(entry.gate_index, 0.0) + entry.duration
        return {
            "regime": self.regime,
            "bus_mode": self.bus_mode,
            "n_pulses": len(self.entries),
            "total_time_s": self.total_time,
            "gate_times_s": [per_gate[index] for index in sorted(per_gate)],
            "pulse_durations_s": [entry.duration for entry in self.entries],
        }

    def __repr__(self):
        return f"PulseSchedule(n_pulses={len(self)}, total_time={self.total_time:.3e} s, regime={self.regime})"


def coupling_margins(ctx: CouplingContext, ion: int, phonons: int = 1) -> dict:
    """ Lamb-Dicke and weak-coupling ratios of one ion at bus occupation `phonons`. """
    eta = ctx.eta(ion)
    ratio = ctx.coupling / ctx.mode_frequency
    return {
        "lamb_dicke": eta * np.sqrt(phonons + 0.5),
        "carrier": ratio,
        "sideband": ratio * eta * np.sqrt(phonons + 1),
    }


def _check_margins(ctx: CouplingContext, ions, regime: str):
    for ion in sorted(ions):
        margins = coupling_margins(ctx, ion, phonons=max(BUS_LEVELS))
        problems = []
        if regime == "ideal_LD" and margins["lamb_dicke"] > LAMB_DICKE_LIMIT:
            problems.append(f"eta sqrt(n + 1/2) = {margins['lamb_dicke']:.3g}")
        if margins["carrier"] > WEAK_COUPLING_LIMIT:
            problems.append(f"|lambda| / nu = {margins['carrier']:.3g}")
        if problems:
            message = f"Ion {ion} is outside the weak-coupling Lamb-Dicke margins: {', '.join(problems)}"
            logger.warning(message)
            warnings.warn(message, MarginWarning, stacklevel=3)


def _pulse_regime(template: PulseTemplate, regime: str) -> str:
    if template.regime is not None and regime == "ideal_LD":
        return template.regime
    return regime


def laser_phase(template: PulseTemplate, ctx: CouplingContext, regime: str) -> float:
    """ Laser phase realising the template's logical phase: the logical phase plus the phase of
    Omega^{0,k} at zero laser phase (pi |k| / 2 plus the ion's travelling-wave offset). """
    reference = rabi_frequency(ctx, 0, template.sideband, ion=template.ion, phase=0.0,
                               lamb_dicke=regime == "ideal_LD")
    if abs(reference) == 0:
        raise PhysicsValidityError(
            f"Ion {template.ion} has no coupling on sideband k={template.sideband}; the pulse cannot be compiled"
        )
    return float(np.mod(template.phase + np.angle(reference), 2 * np.pi))


def compile(circuit, ctx: CouplingContext, regime: str = "ideal_LD", bus_mode: int = 1,
            check_margins: bool = True) -> PulseSchedule:
    """ Compile a list of gates into a pulse schedule.

    Parameters
    ----------
    circuit
        GateSpec objects in circuit order. The bus is assumed to start in |0>.
    ctx
        Coupling context of all ions to the bus mode.
    regime
        - 'ideal_LD'</br>
        - 'exact_laguerre'</br>
        - 'full_offresonant'</br>
        or their file codes. Gates that need exact couplings force them in the 'ideal_LD' regime.
    bus_mode
        Index of the bus mode, recorded in the schedule.
    check_margins
        Warn with MarginWarning when an addressed ion is outside the Lamb-Dicke or weak-coupling margins.

    Returns
    -------
        The PulseSchedule.
    """
    regime = check_regime(regime)
    for gate in circuit:
        if not isinstance(gate, GateSpec):
            raise TypeError(f"Circuits hold GateSpec objects, got {type(gate).__name__}")
        for ion in gate.ions:
            ctx.eta(ion)
        gate.validate(ctx)

    entries = []
    start = 0.0
    for gate_index, template in flatten(circuit):
        pulse_regime = _pulse_regime(template, regime)
        pulse = Pulse(
            ion=template.ion,
            sideband=template.sideband,
            area=template.area,
            phase=laser_phase(template, ctx, pulse_regime),
            transition=template.transition,
            regime=pulse_regime,
        )
        duration = evolution_for(pulse_regime).duration(pulse, ctx)
        entries.append(ScheduledPulse(pulse, duration, start, gate_index, float(template.phase)))
        start += duration

    if check_margins and entries:
        _check_margins(ctx, {entry.pulse.ion for entry in entries}, regime)
    schedule = PulseSchedule(entries, ctx, regime, bus_mode)
    logger.info(f"Compiled {len(circuit)} gate(s) into {len(schedule)} pulses, {schedule.total_time * 1e6:.2f} us")
    return schedule


def schedule_program(pulses, ctx: CouplingContext, bus_mode: int = 1) -> PulseSchedule:
    """ Schedule a parsed pulse program as it stands, one pulse per step.

    Durations follow each pulse's own regime; the logical phase of a pulse is its laser phase minus the
    phase of Omega^{0,k} at zero laser phase. Every pulse counts as its own gate.
    """
    entries = []
    start = 0.0
    for index, pulse in enumerate(pulses):
        ctx.eta(pulse.ion)
        reference = rabi_frequency(ctx, 0, pulse.sideband, ion=pulse.ion, phase=0.0,
                                   lamb_dicke=pulse.regime == "ideal_LD")
        if abs(reference) == 0:
            raise PhysicsValidityError(f"Ion {pulse.ion} has no coupling on sideband k={pulse.sideband}")
        logical = float(np.mod(pulse.phase - np.angle(reference), 2 * np.pi))
        duration = evolution_for(pulse.regime).duration(pulse, ctx)
        entries.append(ScheduledPulse(pulse, duration, start, index, logical))
        start += duration
    regimes = {pulse.regime for pulse in pulses}
    regime = regimes.pop() if len(regimes) == 1 else "mixed"
    return PulseSchedule(entries, ctx, regime, bus_mode)
