import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg, special

from chain.equilibrium import IonChain
from chain.laser import GEOMETRIES, TRANSITION_KINDS, LaserConfig, lamb_dicke_parameters
from chain.modes import ModeSpectrum

logger = logging.getLogger(__name__)


def laguerre_factor(eta: float, n: int, k: int) -> float:
    """ sqrt(n! / (n+|k|)!) L_n^|k|(eta^2), the n-dependent part of every coupling.

    The Laguerre polynomial is evaluated by scipy's recurrence and the factorial ratio in log-space,
    so large n does not overflow.
    """
    if n < 0:
        raise ValueError(f"Phonon number must be non-negative, got {n}")
    order = abs(k)
    ratio = np.exp(0.5 * (special.gammaln(n + 1) - special.gammaln(n + order + 1)))
    return float(ratio * special.eval_genlaguerre(n, order, eta ** 2))


def laguerre_rabi(coupling: complex, eta: float, n: int, k: int) -> complex:
    """ Omega^{n,k} = lambda e^{-eta^2/2} (i eta)^|k| sqrt(n!/(n+|k|)!) L_n^|k|(eta^2). """
    return complex(coupling * np.exp(-eta ** 2 / 2) * (1j * eta) ** abs(k) * laguerre_factor(eta, n, k))


def lamb_dicke_rabi(coupling: complex, eta: float, n: int, k: int) -> complex:
    """ Lowest order in eta: lambda (i eta)^|k| sqrt((n+|k|)!/n!) / |k|!. """
    if n < 0:
        raise ValueError(f"Phonon number must be non-negative, got {n}")
    order = abs(k)
    ratio = np.exp(0.5 * (special.gammaln(n + order + 1) - special.gammaln(n + 1)) - special.gammaln(order + 1))
    return complex(coupling * (1j * eta) ** order * ratio)


def standing_rabi(coupling: complex, eta: float, n: int, k: int, position: float, kind: str,
                  lamb_dicke: bool = False) -> complex:
    """ Standing-wave coupling for an ion at standing-wave position `position` (0 at a node).

    The standing-wave coupling constant is 2i lambda for a dipole and 2 lambda for a quadrupole
    transition; the node factor is sin(chi + pi|k|/2) or cos(chi + pi|k|/2) respectively.
    """
    order = abs(k)
    if kind == "dipole":
        amplitude = 2j * coupling * np.sin(position + np.pi * order / 2)
    elif kind == "quadrupole":
        amplitude = 2 * coupling * np.cos(position + np.pi * order / 2)
    else:
        raise ValueError(f"Invalid transition kind: {kind}. Valid options are {', '.join(TRANSITION_KINDS)}.")

    if lamb_dicke:
        ratio = np.exp(0.5 * (special.gammaln(n + order + 1) - special.gammaln(n + 1)) - special.gammaln(order + 1))
        return complex(amplitude * eta ** order * ratio)
    return complex(amplitude * np.exp(-eta ** 2 / 2) * eta ** order * laguerre_factor(eta, n, k))


def displacement_elements(eta: float, n_max: int) -> np.ndarray:
    """ Exact matrix elements <m| exp(i eta (a + a^dag)) |n> for m, n <= n_max.

    The matrix is complex symmetric; the element for m >= n is
    e^{-eta^2/2} (i eta)^{m-n} sqrt(n!/m!) L_n^{m-n}(eta^2).
    """
    elements = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    for m in range(n_max + 1):
        for n in range(m + 1):
            value = np.exp(-eta ** 2 / 2) * (1j * eta) ** (m - n) * laguerre_factor(eta, n, m - n)
            elements[m, n] = elements[n, m] = value
    return elements


def displacement_matrix(eta: float, n_max: int) -> np.ndarray:
    """ Matrix exponential of i eta (a + a^dag) truncated to n_max; converges to the exact elements
    away from the cutoff. """
    lowering = np.diag(np.sqrt(np.arange(1, n_max + 1)), k=1)
    return linalg.expm(1j * eta * (lowering + lowering.T))


@dataclass(frozen=True)
class CouplingContext:
    """Laser coupling of every ion to the bus mode.

    Parameters
    ----------
    coupling
        Magnitude |lambda| in rad/s, common to all ions.
    lamb_dicke
        Lamb-Dicke parameter eta_j of each ion in the bus mode.
    mode_frequency
        Bus-mode frequency nu in rad/s.
    phase_offsets
        Travelling-wave phase kappa z_j picked up at each ion's position; zeros by default.
    geometry
        - 'travelling'</br>
        - 'standing' - uses `standing_positions`</br>
    standing_positions
        Position chi_j of each ion in the standing wave, in rad.
    transition_kind
        - 'dipole'</br>
        - 'quadrupole'</br>
    """

    coupling: float
    lamb_dicke: tuple
    mode_frequency: float
    phase_offsets: tuple | None = None
    geometry: str = "travelling"
    standing_positions: tuple | None = None
    transition_kind: str = "quadrupole"

    def __post_init__(self):
        if self.coupling < 0:
            raise ValueError(f"coupling must be non-negative, got {self.coupling}")
        if not self.mode_frequency > 0:
            raise ValueError(f"mode_frequency must be positive, got {self.mode_frequency}")
        object.__setattr__(self, "lamb_dicke", tuple(float(eta) for eta in self.lamb_dicke))
        if self.phase_offsets is None:
            object.__setattr__(self, "phase_offsets", (0.0,) * len(self.lamb_dicke))
        if len(self.phase_offsets) != len(self.lamb_dicke):
            raise ValueError("phase_offsets and lamb_dicke must have one entry per ion")
        if self.geometry not in GEOMETRIES:
            raise ValueError(f"Invalid geometry: {self.geometry}. Valid options are {', '.join(GEOMETRIES)}.")
        if self.transition_kind not in TRANSITION_KINDS:
            raise ValueError(f"Invalid transition kind: {self.transition_kind}. "
                             f"Valid options are {', '.join(TRANSITION_KINDS)}.")
        if self.geometry == "standing":
            if self.standing_positions is None or len(self.standing_positions) != len(self.lamb_dicke):
                raise ValueError("A standing-wave context needs one standing position per ion")

    @classmethod
    def uniform(cls, n_ions: int, coupling: float, eta: float, mode_frequency: float, **kwargs) -> "CouplingContext":
        """ Every ion with the same Lamb-Dicke parameter. """
        return cls(coupling=coupling, lamb_dicke=(eta,) * n_ions, mode_frequency=mode_frequency, **kwargs)

    @classmethod
    def from_chain(cls, chain: IonChain, spectrum: ModeSpectrum, laser: LaserConfig,
                   mode_index: int = 1) -> "CouplingContext":
        """ Couple a laser to mode `mode_index` (1-based; 1 is the centre-of-mass mode) of a solved chain. """
        etas = lamb_dicke_parameters(spectrum, laser, mode_index)
        return cls(
            coupling=laser.coupling,
            lamb_dicke=tuple(etas),
            mode_frequency=float(spectrum.frequencies[mode_index - 1]),
            phase_offsets=tuple(laser.wave_number * chain.physical_positions),
            geometry=laser.geometry,
            standing_positions=laser.standing_positions,
            transition_kind=laser.transition_kind,
        )

    @property
    def n_ions(self) -> int:
        return len(self.lamb_dicke)

    def eta(self, ion: int) -> float:
        self._check_ion(ion)
        return self.lamb_dicke[ion - 1]

    def laser_coupling(self, ion: int, phase: float = 0.0) -> complex:
        """ lambda_j = |lambda| exp(-i (phase - kappa z_j)) for laser phase `phase`. """
        self._check_ion(ion)
        return self.coupling * np.exp(-1j * (phase - self.phase_offsets[ion - 1]))

    def rabi_frequency(self, ion: int, n: int, k: int, phase: float = 0.0, lamb_dicke: bool = False) -> complex:
        return rabi_frequency(self, n, k, ion=ion, phase=phase, lamb_dicke=lamb_dicke)

    def _check_ion(self, ion: int):
        if not 1 <= ion <= self.n_ions:
            raise ValueError(f"Ion index must lie in 1..{self.n_ions}, got {ion}")


def rabi_frequency(ctx: CouplingContext, n: int, k: int, ion: int = 1, phase: float = 0.0,
                   lamb_dicke: bool = False) -> complex:
    """ Complex Rabi frequency Omega_j^{n,k} of ion `ion` for the transition between |n> and |n+|k|>.

    Parameters
    ----------
    ctx
        The coupling context; standing-wave contexts are dispatched to `standing_wave_rabi`.
    n
        Lower phonon number of the pair.
    k
        Sideband index (0 carrier, negative red, positive blue).
    ion
        1-based ion index.
    phase
        Laser phase in rad.
    lamb_dicke
        If True, use the lowest order in eta instead of the exact Laguerre form.
    """
    if ctx.geometry == "standing":
        return standing_wave_rabi(ctx, n, k, ion=ion, phase=phase, lamb_dicke=lamb_dicke)
    coupling = ctx.laser_coupling(ion, phase)
    eta = ctx.eta(ion)
    if lamb_dicke:
        return lamb_dicke_rabi(coupling, eta, n, k)
    return laguerre_rabi(coupling, eta, n, k)


def standing_wave_rabi(ctx: CouplingContext, n: int, k: int, ion: int = 1, phase: float = 0.0,
                       lamb_dicke: bool = False) -> complex:
    if ctx.geometry != "standing":
        raise ValueError("standing_wave_rabi needs a context with geometry 'standing'")
    return standing_rabi(ctx.laser_coupling(ion, phase), ctx.eta(ion), n, k, ctx.standing_positions[ion - 1],
                         ctx.transition_kind, lamb_dicke)
