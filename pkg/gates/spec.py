import logging
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np
import pyparsing as pp

from interaction.pulse import TRANSITIONS, as_area, check_regime
from utils.exceptions import ParseError, PhysicsValidityError

logger = logging.getLogger(__name__)

MONROE_TOLERANCE = 1e-6


@dataclass(frozen=True)
class PulseTemplate:
    """A pulse before it is placed on hardware.

    Parameters
    ----------
    ion
        1-based ion index.
    sideband
        k of the pulse.
    area
        Area in multiples of pi.
    phase
        Logical phase: the pulse takes |g> to -i exp(-i phase) times the coupled partner. The compiler
        turns it into a laser phase.
    transition
        'ge' or 'gr'.
    regime
        Regime forced on this pulse when the circuit is compiled in the 'ideal_LD' regime; None keeps
        the circuit regime.
    """

    ion: int
    sideband: int
    area: Fraction | float
    phase: float = 0.0
    transition: str = "ge"
    regime: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "area", as_area(self.area))
        if self.transition not in TRANSITIONS:
            raise ValueError(f"Invalid transition: {self.transition}. Valid options are {', '.join(TRANSITIONS)}.")
        if self.regime is not None:
            object.__setattr__(self, "regime", check_regime(self.regime))


def _carrier(ion: int, area, phase: float) -> PulseTemplate:
    return PulseTemplate(ion, 0, area, phase)


def _red(ion: int, area, transition: str = "ge", phase: float = 0.0) -> PulseTemplate:
    return PulseTemplate(ion, -1, area, phase, transition)


def _check_ions(ions):
    if any(ion < 1 for ion in ions):
        raise ValueError(f"Ion indices must be at least 1, got {ions}")
    if len(set(ions)) != len(ions):
        raise ValueError(f"repeated ion index in {ions}")


class GateSpec(ABC):
    """ Base class for gates that compile to laser pulses.

    Warning: This class should not be used directly.
    """

    mnemonic: str = ""

    @property
    @abstractmethod
    def ions(self) -> tuple:
        pass

    @abstractmethod
    def decompose(self) -> list:
        """ Pulse templates of the gate in time order. """
        pass

    def validate(self, ctx):
        """ Check the gate against a coupling context; the default accepts any context. """

    @abstractmethod
    def to_line(self) -> str:
        pass


@dataclass(frozen=True)
class Rotation(GateSpec):
    """ Single-qubit rotation R(theta, phi) with cos(theta/2) on the diagonal and -exp(-i phi) sin(theta/2)
    taking |g> to |e>. One carrier pulse of area |theta| / pi. """

    ion: int
    theta: float
    phi: float = 0.0

    mnemonic = "rot"

    def __post_init__(self):
        _check_ions((self.ion,))

    @property
    def ions(self):
        return (self.ion,)

    def decompose(self):
        if self.theta == 0:
            return []
        phi = self.phi if self.theta > 0 else self.phi + np.pi
        return [_carrier(self.ion, abs(self.theta) / np.pi, phi + np.pi / 2)]

    def to_line(self):
        return f"rot {self.ion} {self.theta!r} {self.phi!r}"


@dataclass(frozen=True)
class MultiCnot(GateSpec):
    """Flip the target when every control is in |e>.

    The bus must start in |0>. The first control is mapped onto the bus with a red pi pulse; every
    further control in |g> shelves a bus phonon into |r>, so the 2 pi pulse on the target only sees
    a phonon when all controls are excited. Takes 2Q+1 pulses for Q = len(controls) + 1 ions.
    """

    controls: tuple
    target: int

    mnemonic = "ncnot"

    def __post_init__(self):
        object.__setattr__(self, "controls", tuple(int(ion) for ion in self.controls))
        if not self.controls:
            raise ValueError("A controlled-NOT needs at least one control")
        _check_ions(self.ions)

    @property
    def ions(self):
        return self.controls + (self.target,)

    def decompose(self):
        first, *others = self.controls
        ladder = [_red(ion, 1, "gr") for ion in others]
        return (
            [_carrier(self.target, Fraction(1, 2), np.pi / 2), _red(first, 1)]
            + ladder
            + [_red(self.target, 2, "gr")]
            + ladder[::-1]
            + [_red(first, 1), _carrier(self.target, Fraction(1, 2), 3 * np.pi / 2)]
        )

    def to_line(self):
        return " ".join([self.mnemonic] + [str(ion) for ion in self.ions])


class Cnot(MultiCnot):
    """ Two-ion controlled-NOT: five pulses. """

    mnemonic = "cnot"

    def __init__(self, control: int, target: int):
        super().__init__((control,), target)

    @property
    def control(self) -> int:
        return self.controls[0]

    def __repr__(self):
        return f"Cnot(control={self.control}, target={self.target})"


@dataclass(frozen=True)
class ControlledR(GateSpec):
    """Rotation conditioned on all controls being excited.

    On the target it acts as [[cos theta, exp(2i phi) sin theta], [-exp(-2i phi) sin theta, cos theta]]
    in the basis (|g>, |e>) when every control is in |e> and as the identity otherwise. It is built
    as R(pi, phi), R(theta, 0), multi-NOT, R(-theta, 0), multi-NOT, R(-pi, phi). Without controls
    the gate is the plain rotation R(2 theta, 2 phi).
    """

    controls: tuple
    target: int
    theta: float
    phi: float = 0.0

    mnemonic = "crot"

    def __post_init__(self):
        object.__setattr__(self, "controls", tuple(int(ion) for ion in self.controls))
        _check_ions(self.ions)

    @property
    def ions(self):
        return self.controls + (self.target,)

    def _flip(self) -> list:
        return MultiCnot(self.controls, self.target).decompose()

    def decompose(self):
        if not self.controls:
            return Rotation(self.target, 2 * self.theta, 2 * self.phi).decompose()
        return (
            Rotation(self.target, np.pi, self.phi).decompose()
            + Rotation(self.target, self.theta).decompose()
            + self._flip()
            + Rotation(self.target, -self.theta).decompose()
            + self._flip()
            + Rotation(self.target, -np.pi, self.phi).decompose()
        )

    def to_line(self):
        ions = " ".join(str(ion) for ion in self.ions)
        return f"crot {ions} {self.theta!r} {self.phi!r}"


@dataclass(frozen=True)
class ReducedControlledR(GateSpec):
    """ Real rotation [[cos theta, sin theta], [-sin theta, cos theta]] conditioned on all controls, without
    the phase-setting pulses of ControlledR. """

    controls: tuple
    target: int
    theta: float

    mnemonic = "rcrot"

    def __post_init__(self):
        object.__setattr__(self, "controls", tuple(int(ion) for ion in self.controls))
        _check_ions(self.ions)

    @property
    def ions(self):
        return self.controls + (self.target,)

    def decompose(self):
        if not self.controls:
            return Rotation(self.target, 2 * self.theta).decompose()
        flip = MultiCnot(self.controls, self.target).decompose()
        return (Rotation(self.target, self.theta).decompose() + flip
                + Rotation(self.target, -self.theta).decompose() + flip)

    def to_line(self):
        ions = " ".join(str(ion) for ion in self.ions)
        return f"rcrot {ions} {self.theta!r}"


@dataclass(frozen=True)
class MonroeCnot(GateSpec):
    """Controlled-NOT that uses the bus |0>, |1> as control and needs no auxiliary level.

    A carrier pulse with Omega^{0,0} t = 2 p pi on `ion` flips its internal state only when the bus
    holds one phonon, provided eta^2 = 1/(2p). The reduced gate is that single pulse. With `control`
    set, red pi pulses on the control ion map its qubit onto the bus and back; the closing pulse
    phase makes the complete gate a CNOT up to the global phase (-1)^p.

    Parameters
    ----------
    ion
        Target ion.
    p
        Positive integer fixing eta^2 = 1/(2p).
    control
        Optional control ion for the complete two-ion gate.
    """

    ion: int
    p: int
    control: int | None = None

    mnemonic = "monroe"

    def __post_init__(self):
        if isinstance(self.p, bool) or int(self.p) != self.p or self.p < 1:
            raise ValueError(f"p must be a positive integer, got {self.p}")
        object.__setattr__(self, "p", int(self.p))
        _check_ions(self.ions)

    @property
    def ions(self):
        return (self.ion,) if self.control is None else (self.control, self.ion)

    def validate(self, ctx):
        eta = ctx.eta(self.ion)
        required = 1 / (2 * self.p)
        if abs(eta ** 2 - required) > MONROE_TOLERANCE:
            raise PhysicsValidityError(
                f"Monroe gate on ion {self.ion} needs eta^2 = 1/(2p) = {required:.6g}, got eta^2 = {eta ** 2:.6g}"
            )

    def decompose(self):
        flip = PulseTemplate(self.ion, 0, 2 * self.p, 0.0, regime="exact_laguerre")
        if self.control is None:
            return [flip]
        return [_red(self.control, 1), flip, _red(self.control, 1, phase=3 * np.pi / 2)]

    def to_line(self):
        suffix = "" if self.control is None else f" {self.control}"
        return f"monroe {self.ion} {self.p}{suffix}"


def flatten(circuit) -> list:
    """ (gate index, template) pairs of a circuit in time order. """
    return [(index, template) for index, gate in enumerate(circuit) for template in gate.decompose()]


_ANGLE = re.compile(
    r"^(?P<sign>[+-]?)(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)(?P<pi>\*?pi)?|(?P<bare>pi))"
    r"(?:/(?P<divisor>\d+\.?\d*|\.\d+))?$"
)
_ION = re.compile(r"^[1-9]\d*$")

_TOKEN = pp.Group(pp.Located(pp.Regex(r"[^\s#]+")))
_CIRCUIT_LINE = pp.OneOrMore(_TOKEN)("tokens") + pp.StringEnd()
_CIRCUIT_LINE.ignore(pp.python_style_comment)

MNEMONICS = ("rot", "cnot", "ccnot", "ncnot", "crot", "rcrot", "monroe")


def parse_angle(text: str) -> float:
    """ Angle in rad; accepts plain numbers and multiples of pi such as 'pi/2', '-0.5pi' or '3*pi/4'. """
    match = _ANGLE.match(text)
    if match is None:
        raise ValueError(f"malformed number '{text}'")
    value = 1.0 if match.group("bare") else float(match.group("number"))
    if match.group("pi") or match.group("bare"):
        value *= np.pi
    if match.group("divisor"):
        divisor = float(match.group("divisor"))
        if divisor == 0:
            raise ValueError(f"division by zero in '{text}'")
        value /= divisor
    return -value if match.group("sign") == "-" else value


class _Line:
    """ Tokens of one circuit line with their 1-based columns. """

    def __init__(self, tokens, line_number: int, source: str | None):
        self.tokens = tokens
        self.line_number = line_number
        self.source = source

    def error(self, message: str, position: int = 0) -> ParseError:
        return ParseError(message, self.line_number, self.tokens[position][0], self.source)

    def ions(self, start: int, stop: int) -> tuple:
        ions = []
        for position in range(start, stop):
            text = self.tokens[position][1]
            if not _ION.match(text):
                raise self.error(f"ion index must be a positive integer, got '{text}'", position)
            if int(text) in ions:
                raise self.error(f"repeated ion index {text}", position)
            ions.append(int(text))
        return tuple(ions)

    def angle(self, position: int) -> float:
        try:
            return parse_angle(self.tokens[position][1])
        except ValueError as exc:
            raise self.error(str(exc), position) from exc


def _gate_from_line(line: _Line) -> GateSpec:
    mnemonic = line.tokens[0][1]
    count = len(line.tokens) - 1

    def expect(condition: bool, usage: str):
        if not condition:
            raise line.error(f"'{mnemonic}' expects {usage}, got {count} argument(s)")

    if mnemonic == "rot":
        expect(count == 3, "'rot <ion> <theta> <phi>'")
        return Rotation(line.ions(1, 2)[0], line.angle(2), line.angle(3))
    if mnemonic == "cnot":
        expect(count == 2, "'cnot <control> <target>'")
        control, target = line.ions(1, 3)
        return Cnot(control, target)
    if mnemonic == "ccnot":
        expect(count == 3, "'ccnot <control> <control> <target>'")
        *controls, target = line.ions(1, 4)
        return MultiCnot(tuple(controls), target)
    if mnemonic == "ncnot":
        expect(count >= 2, "'ncnot <control>... <target>'")
        *controls, target = line.ions(1, count + 1)
        return MultiCnot(tuple(controls), target)
    if mnemonic == "crot":
        expect(count >= 4, "'crot <control>... <target> <theta> <phi>'")
        *controls, target = line.ions(1, count - 1)
        return ControlledR(tuple(controls), target, line.angle(count - 1), line.angle(count))
    if mnemonic == "rcrot":
        expect(count >= 3, "'rcrot <control>... <target> <theta>'")
        *controls, target = line.ions(1, count)
        return ReducedControlledR(tuple(controls), target, line.angle(count))
    if mnemonic == "monroe":
        expect(count in (2, 3), "'monroe <ion> <p> [<control>]'")
        ion = line.ions(1, 2)[0]
        text = line.tokens[2][1]
        if not _ION.match(text):
            raise line.error(f"p must be a positive integer, got '{text}'", 2)
        control = None
        if count == 3:
            control = line.ions(3, 4)[0]
            if control == ion:
                raise line.error(f"repeated ion index {control}", 3)
        return MonroeCnot(ion, int(text), control)
    raise line.error(f"unknown gate '{mnemonic}'. Valid gates are {', '.join(MNEMONICS)}")


def parse_circuit(text: str, source: str | None = None) -> list:
    """ Parse circuit text, one gate per line.

    :param text: Circuit text; `#` starts a comment and blank lines are skipped.
    :param source: Optional file name for diagnostics.
    :return: The list of GateSpec objects in circuit order.
    """
    circuit = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        if not raw.split("#", 1)[0].strip():
            continue
        try:
            parsed = _CIRCUIT_LINE.parse_string(raw)
        except pp.ParseException as exc:
            raise ParseError(f"malformed line ({exc.msg})", line_number, exc.col, source) from exc
        tokens = [(start + 1, text_value) for start, (text_value,), _ in parsed["tokens"]]
        circuit.append(_gate_from_line(_Line(tokens, line_number, source)))
    logger.debug(f"Parsed {len(circuit)} gates from {source or 'text'}")
    return circuit


def format_circuit(circuit) -> str:
    return "".join(f"{gate.to_line()}\n" for gate in circuit)


def load_circuit(path) -> list:
    path = Path(path)
    return parse_circuit(path.read_text(encoding="utf-8"), source=str(path))
