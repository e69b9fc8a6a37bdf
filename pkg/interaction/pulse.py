import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import pyparsing as pp

from utils.exceptions import ParseError

logger = logging.getLogger(__name__)

TRANSITIONS = ("ge", "gr")
REGIMES = ("ideal_LD", "exact_laguerre", "full_offresonant")
REGIME_CODES = {"ld": "ideal_LD", "exact": "exact_laguerre", "full": "full_offresonant"}
_CODE_OF_REGIME = {regime: code for code, regime in REGIME_CODES.items()}
PULSE_FIELDS = ("ion", "k", "area", "phase", "transition", "regime")

_AREA = re.compile(r"^(?P<value>\d+(?:/\d+)?|\d*\.\d*(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)pi$")


def check_regime(regime: str) -> str:
    """ Accept a regime name or its file code and return the name. """
    regime = REGIME_CODES.get(regime, regime)
    if regime not in REGIMES:
        raise ValueError(f"Invalid regime: {regime}. Valid options are {', '.join(REGIMES)} "
                         f"(or {', '.join(REGIME_CODES)}).")
    return regime


def as_area(value) -> Fraction | float:
    """ Exact areas stay Fractions; anything else becomes a float. """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    value = float(value)
    return Fraction(int(value)) if value.is_integer() else value


def format_area(area: Fraction | float) -> str:
    if isinstance(area, Fraction):
        return f"{area}pi"
    return f"{area!r}pi"


def parse_area(text: str) -> Fraction | float:
    """ '2pi' and '1/2pi' give Fractions; '0.25pi' gives a float. """
    match = _AREA.match(text)
    if match is None:
        raise ValueError(f"malformed area '{text}', expected a non-negative multiple of pi like '1/2pi'")
    value = match.group("value")
    if re.fullmatch(r"\d+(?:/\d+)?", value):
        return Fraction(value)
    return as_area(float(value))


@dataclass(frozen=True)
class Pulse:
    """One laser pulse on one ion.

    Parameters
    ----------
    ion
        1-based ion index.
    sideband
        k = 0 for the carrier, negative for red and positive for blue sidebands; the laser is
        detuned by k nu.
    area
        The pulse area in multiples of pi, defined with the n = 0 Rabi frequency of the sideband.
    phase
        Laser phase in rad.
    transition
        - 'ge' - between |g> and |e></br>
        - 'gr' - between |g> and the auxiliary level |r></br>
    regime
        - 'ideal_LD' - Lamb-Dicke rates, no off-resonant terms</br>
        - 'exact_laguerre' - exact Laguerre rates, no off-resonant terms</br>
        - 'full_offresonant' - time integration including every off-resonant term</br>
    """

    ion: int
    sideband: int
    area: Fraction | float
    phase: float = 0.0
    transition: str = "ge"
    regime: str = "ideal_LD"

    def __post_init__(self):
        if self.ion < 1:
            raise ValueError(f"ion must be at least 1, got {self.ion}")
        object.__setattr__(self, "area", as_area(self.area))
        if self.area < 0:
            raise ValueError(f"area must be non-negative, got {self.area}")
        if self.transition not in TRANSITIONS:
            raise ValueError(f"Invalid transition: {self.transition}. Valid options are {', '.join(TRANSITIONS)}.")
        object.__setattr__(self, "regime", check_regime(self.regime))
        object.__setattr__(self, "phase", float(self.phase))

    @property
    def upper_level(self) -> int:
        """ Index of the excited level driven from |g>: 1 for |e>, 2 for |r>. """
        return 1 if self.transition == "ge" else 2

    def detuning(self, mode_frequency: float) -> float:
        return self.sideband * mode_frequency

    def to_line(self) -> str:
        return (f"pulse ion={self.ion} k={self.sideband} area={format_area(self.area)} "
                f"phase={self.phase!r} transition={self.transition} regime={_CODE_OF_REGIME[self.regime]}")


_FIELD = pp.Located(pp.Word(pp.alphas)("key") + pp.Suppress("=") + pp.Regex(r"[^\s#=]+")("value"))
_PULSE_LINE = pp.Keyword("pulse") + pp.ZeroOrMore(pp.Group(_FIELD))("fields") + pp.StringEnd()
_PULSE_LINE.ignore(pp.python_style_comment)


def _field_value(key: str, value: str):
    if key == "ion":
        if not re.fullmatch(r"[1-9]\d*", value):
            raise ValueError(f"ion must be a positive integer, got '{value}'")
        return int(value)
    if key == "k":
        if not re.fullmatch(r"[+-]?\d+", value):
            raise ValueError(f"k must be an integer, got '{value}'")
        return int(value)
    if key == "area":
        return parse_area(value)
    if key == "phase":
        try:
            return float(value)
        except ValueError:
            raise ValueError(f"malformed phase '{value}'") from None
    if key == "transition":
        if value not in TRANSITIONS:
            raise ValueError(f"invalid transition '{value}', valid options are {', '.join(TRANSITIONS)}")
        return value
    if value not in REGIME_CODES:
        raise ValueError(f"invalid regime '{value}', valid options are {', '.join(REGIME_CODES)}")
    return REGIME_CODES[value]


def parse_pulse_program(text: str, source: str | None = None) -> list:
    """ Parse a pulse program, one `pulse ion=.. k=.. area=..pi phase=.. transition=.. regime=..` per line.

    :param text: Program text; `#` starts a comment.
    :param source: Optional file name for diagnostics.
    :return: The list of Pulse objects in program order.
    """
    pulses = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        if not line.split("#", 1)[0].strip():
            continue
        try:
            parsed = _PULSE_LINE.parse_string(line)
        except pp.ParseException as exc:
            raise ParseError(f"expected 'pulse key=value ...' ({exc.msg})", line_number, exc.col, source) from exc

        values = {}
        for field in parsed["fields"]:
            start, (key, value), _ = field
            column = start + 1
            if key not in PULSE_FIELDS:
                raise ParseError(f"unknown field '{key}'. Valid fields are {', '.join(PULSE_FIELDS)}",
                                 line_number, column, source)
            if key in values:
                raise ParseError(f"duplicate field '{key}'", line_number, column, source)
            try:
                values[key] = _field_value(key, value)
            except ValueError as exc:
                raise ParseError(str(exc), line_number, column + len(key) + 1, source) from exc

        missing = [key for key in PULSE_FIELDS if key not in values]
        if missing:
            raise ParseError(f"missing field(s) {', '.join(missing)}", line_number, 1, source)
        pulses.append(Pulse(
            ion=values["ion"], sideband=values["k"], area=values["area"], phase=values["phase"],
            transition=values["transition"], regime=values["regime"],
        ))
    logger.debug(f"Parsed {len(pulses)} pulses from {source or 'text'}")
    return pulses


def format_pulse_program(pulses) -> str:
    return "".join(f"{pulse.to_line()}\n" for pulse in pulses)


def load_pulse_program(path) -> list:
    path = Path(path)
    return parse_pulse_program(path.read_text(encoding="utf-8"), source=str(path))
