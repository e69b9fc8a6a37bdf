import argparse
import json
import logging
import sys
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from budget.cooling import CoolingParams, cooling_limits
from budget.report import budget_report
from budget.timing import network_comparison, speed_table, timing_report
from chain.equilibrium import equilibrium_positions
from chain.laser import LaserConfig, lamb_dicke_parameters, mode_table
from chain.modes import normal_modes
from gates.compiler import compile, coupling_margins, schedule_program
from gates.simulate import simulate_schedule, truth_table
from gates.spec import parse_circuit
from interaction.coupling import CouplingContext
from interaction.pulse import check_regime, parse_pulse_program
from interaction.spectrum import absorption_lines, absorption_spectrum, thermal_distribution
from statespace.readout import sample_readout
from statespace.state import basis_state
from trap.config import IonSpecies, load_trap_config
from trap.paul_trap import linear_stability, require_stable, trap_characteristics
from utils.constants import (
    CALCIUM_40_MASS_AMU, DEFAULT_ANALYSIS_TIME, DEFAULT_AXIAL_FREQUENCY, DEFAULT_BEAM_ANGLE, DEFAULT_COUPLING,
    DEFAULT_WAVELENGTH, angular_to_hz, hz_to_angular,
)
from utils.exceptions import IonTrapError, ParseError, PhysicsValidityError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_PARSE_ERROR = 2
EXIT_PHYSICS_ERROR = 3

SUBCOMMANDS = ("trap", "chain", "modes", "compile", "run", "estimate", "spectrum")
SEED_BOUND = 2 ** 64


@dataclass(frozen=True)
class RunManifest:
    """What one invocation reads and where it writes.

    Parameters
    ----------
    subcommand
        One of `SUBCOMMANDS`.
    inputs
        Input file paths as given on the command line.
    seed
        64-bit seed; written into every output.
    output_dir
        Directory receiving `<stem>.*` files.
    stem
        Common file name stem of the outputs.
    regime
        Evolution regime used for compilation.
    """

    subcommand: str
    inputs: tuple
    seed: int
    output_dir: str
    stem: str
    regime: str = "ideal_LD"

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ValueError(f"Invalid subcommand: {self.subcommand}. Valid options are {', '.join(SUBCOMMANDS)}.")
        if not 0 <= self.seed < SEED_BOUND:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        object.__setattr__(self, "regime", check_regime(self.regime))

    def path(self, suffix: str) -> Path:
        return Path(self.output_dir) / f"{self.stem}{suffix}"

    def to_dict(self) -> dict:
        manifest = asdict(self)
        manifest["inputs"] = list(self.inputs)
        return manifest


def _jsonable(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Cannot serialise {type(value).__name__}")


def write_json(path: Path, content: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(content, indent=2, sort_keys=True, default=_jsonable) + "\n", encoding="utf-8")


def write_csv(path: Path, frame: pd.DataFrame, seed: int):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(f"# seed={seed}\n")
        frame.to_csv(handle, index=False, float_format="%.17g", lineterminator="\n")


def _messages(records) -> list:
    return [f"{record.category.__name__}: {record.message}" for record in records]


def _report(manifest: RunManifest, **content) -> dict:
    return {"manifest": manifest.to_dict(), "seed": manifest.seed, **content}


def _species(args) -> IonSpecies:
    return IonSpecies.from_amu(args.mass_amu, 1)


def _laser(args) -> LaserConfig:
    return LaserConfig(
        wavelength=args.wavelength_nm * 1e-9,
        beam_angle=np.radians(args.angle_deg),
        coupling=hz_to_angular(args.coupling_hz),
    )


def _chain_and_modes(args, n_ions: int):
    species = _species(args)
    omega_z = hz_to_angular(args.axial_hz)
    chain = equilibrium_positions(n_ions, species, omega_z)
    return chain, normal_modes(chain, species, omega_z)


def _context(args, n_ions: int) -> CouplingContext:
    """ Uniform Lamb-Dicke parameters when --eta is given, otherwise couple to mode --mode of the chain. """
    if args.eta is not None:
        return CouplingContext.uniform(n_ions, hz_to_angular(args.coupling_hz), args.eta, hz_to_angular(args.axial_hz))
    chain, spectrum = _chain_and_modes(args, n_ions)
    return CouplingContext.from_chain(chain, spectrum, _laser(args), mode_index=args.mode)


def _is_pulse_program(text: str) -> bool:
    for line in text.splitlines():
        content = line.split("#", 1)[0].strip()
        if content:
            return content.split()[0] == "pulse"
    return False


def _schedule(args, manifest: RunManifest, path: Path):
    text = path.read_text(encoding="utf-8")
    if _is_pulse_program(text):
        pulses = parse_pulse_program(text, source=str(path))
        n_ions = args.ions or max((pulse.ion for pulse in pulses), default=1)
        return schedule_program(pulses, _context(args, n_ions))
    circuit = parse_circuit(text, source=str(path))
    n_ions = args.ions or max((ion for gate in circuit for ion in gate.ions), default=1)
    return compile(circuit, _context(args, n_ions), regime=manifest.regime)


def _cmd_trap(args, manifest: RunManifest, records: list) -> int:
    cfg = load_trap_config(args.config)
    if args.strict:
        require_stable(cfg)
    summary = trap_characteristics(cfg)
    content = {"trap": summary.to_dict()}
    if args.ions:
        critical, linear = linear_stability(args.ions, summary.omega_z, summary.omega_r)
        content["linear_string"] = {"n_ions": args.ions, "critical_aspect_ratio": critical, "linear": linear}
    write_json(manifest.path(".report.json"), _report(manifest, warnings=_messages(records), **content))
    return EXIT_OK


def _cmd_chain(args, manifest: RunManifest, records: list) -> int:
    chain, _ = _chain_and_modes(args, args.ions or 2)
    frame = pd.DataFrame({
        "ion": np.arange(1, chain.n_ions + 1),
        "z": chain.positions,
        "z_m": chain.physical_positions,
    })
    write_csv(manifest.path(".chain.csv"), frame, manifest.seed)
    write_json(manifest.path(".report.json"), _report(manifest, warnings=_messages(records), chain={
        "n_ions": chain.n_ions,
        "length_scale_m": chain.length_scale,
        "min_spacing_m": chain.min_spacing,
        "fitted_min_spacing_m": chain.fitted_min_spacing,
        "residual": chain.residual,
    }))
    return EXIT_OK


def _cmd_modes(args, manifest: RunManifest, records: list) -> int:
    _, spectrum = _chain_and_modes(args, args.ions or 2)
    write_csv(manifest.path(".modes.csv"), mode_table(spectrum, _laser(args)), manifest.seed)
    return EXIT_OK


def _cmd_compile(args, manifest: RunManifest, records: list) -> int:
    schedule = _schedule(args, manifest, Path(args.program))
    path = manifest.path(".pulses")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(f"# seed={manifest.seed}\n" + schedule.to_program(), encoding="utf-8")
    write_csv(manifest.path(".ledger.csv"), schedule.ledger_frame(), manifest.seed)
    margins = {str(ion): coupling_margins(schedule.ctx, ion) for ion in range(1, schedule.ctx.n_ions + 1)}
    write_json(manifest.path(".report.json"),
               _report(manifest, timing=schedule.timing_report(), margins=margins, warnings=_messages(records)))
    return EXIT_OK


def _parse_qubits(text: str) -> tuple:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise ParseError(f"qubits must be comma-separated ion indices, got '{text}'", 1, 1, "--qubits") from None


def _cmd_run(args, manifest: RunManifest, records: list) -> int:
    schedule = _schedule(args, manifest, Path(args.program))
    n_ions = schedule.ctx.n_ions
    initial = args.initial or "g" * n_ions
    if len(initial) != n_ions:
        raise ValueError(f"--initial '{initial}' does not describe {n_ions} ions")
    final = simulate_schedule(schedule, basis_state(initial, args.phonons, args.n_max))
    Path(manifest.output_dir).mkdir(parents=True, exist_ok=True)
    final.to_csv(manifest.path(".state.csv"), seed=manifest.seed)

    content = {
        "n_pulses": len(schedule),
        "total_time_s": schedule.total_time,
        "bus_ground_population": final.bus_population(0),
        "top_level_population": final.top_level_population(),
    }
    if args.qubits:
        table = truth_table(schedule, _parse_qubits(args.qubits), include_bus=args.include_bus,
                            n_max=args.n_max, workers=args.workers)
        write_csv(manifest.path(".truth.csv"), table, manifest.seed)
        content["worst_leakage"] = float(table["leakage"].max())
    if args.shots:
        seeds = np.random.SeedSequence(manifest.seed).generate_state(n_ions, dtype=np.uint64)
        content["bright_fraction"] = {
            str(ion): float((sample_readout(final, ion, args.shots, seed=int(seed))["outcome"] == "bright").mean())
            for ion, seed in zip(range(1, n_ions + 1), seeds)
        }
    write_json(manifest.path(".report.json"), _report(manifest, run=content, warnings=_messages(records)))
    return EXIT_OK


def _cmd_estimate(args, manifest: RunManifest, records: list) -> int:
    laser = _laser(args)
    axial = hz_to_angular(args.axial_hz)
    analysis_time = args.analysis_time_us * 1e-6
    report = budget_report(
        n_ions=args.ions or 2, n_gate_ions=args.gate_ions, fidelity=args.fidelity,
        coupling=hz_to_angular(args.coupling_hz), phonons=args.phonons, laser=laser,
        axial_frequency=axial, analysis_time=analysis_time, eta=args.eta,
    )
    timing = timing_report(args.ions or 2, args.gate_ions, args.fidelity, laser=laser, axial_frequency=axial,
                           analysis_time=analysis_time)
    extra = {"manifest": manifest.to_dict(), "timing": timing.to_dict(),
             "stark_shift_hz": angular_to_hz(report.stark_shift)}
    if args.linewidth_hz:
        extra["cooling"] = cooling_limits(CoolingParams(hz_to_angular(args.linewidth_hz), axial)).to_dict()
    if args.table:
        kwargs = {"laser": laser, "axial_frequency": axial, "analysis_time": analysis_time}
        write_csv(manifest.path(".table.csv"), speed_table(**kwargs), manifest.seed)
        write_csv(manifest.path(".comparison.csv"), network_comparison(**kwargs), manifest.seed)
    extra["warnings"] = _messages(records)
    manifest.path(".report.json").parent.mkdir(parents=True, exist_ok=True)
    report.to_json(manifest.path(".report.json"), seed=manifest.seed, extra=extra)
    return EXIT_OK


def _cmd_spectrum(args, manifest: RunManifest, records: list) -> int:
    n_ions = args.ions or 2
    if not 1 <= args.ion <= n_ions:
        raise ValueError(f"--ion must lie in 1..{n_ions}, got {args.ion}")
    _, spectrum = _chain_and_modes(args, n_ions)
    laser = _laser(args)
    etas = [lamb_dicke_parameters(spectrum, laser, alpha)[args.ion - 1] for alpha in range(1, n_ions + 1)]
    distributions = [thermal_distribution(args.mean_phonons, args.n_max)] * n_ions
    frequencies = spectrum.frequencies

    lines = absorption_lines(distributions, etas, frequencies)
    lines.insert(1, "detuning_hz", lines["detuning"] / (2 * np.pi))
    write_csv(manifest.path(".lines.csv"), lines, manifest.seed)

    span = args.span_hz or 2.5 * angular_to_hz(frequencies.max())
    detunings_hz = np.linspace(-span, span, args.points)
    profile = absorption_spectrum(distributions, etas, frequencies, hz_to_angular(detunings_hz),
                                  hz_to_angular(args.linewidth_hz))
    write_csv(manifest.path(".spectrum.csv"), pd.DataFrame({"detuning_hz": detunings_hz, "intensity": profile}),
              manifest.seed)
    return EXIT_OK


COMMANDS = {
    "trap": _cmd_trap,
    "chain": _cmd_chain,
    "modes": _cmd_modes,
    "compile": _cmd_compile,
    "run": _cmd_run,
    "estimate": _cmd_estimate,
    "spectrum": _cmd_spectrum,
}


def _parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output-dir", type=Path, default=Path("."), help="directory for <stem>.* outputs")
    common.add_argument("--stem", help="output file stem; defaults to the input file stem or the subcommand")
    common.add_argument("--seed", type=int, help="64-bit seed recorded in every output; drawn when omitted")
    common.add_argument("--regime", default="ideal_LD", help="ideal_LD, exact_laguerre or full_offresonant")
    common.add_argument("--verbose", action="store_true", help="log at DEBUG level")

    physics = argparse.ArgumentParser(add_help=False)
    physics.add_argument("--ions", type=int, help="number of ions in the trap")
    physics.add_argument("--axial-hz", type=float, default=angular_to_hz(DEFAULT_AXIAL_FREQUENCY))
    physics.add_argument("--mass-amu", type=float, default=CALCIUM_40_MASS_AMU)
    physics.add_argument("--wavelength-nm", type=float, default=DEFAULT_WAVELENGTH * 1e9)
    physics.add_argument("--angle-deg", type=float, default=np.degrees(DEFAULT_BEAM_ANGLE),
                         help="angle between the beam and the trap axis")
    physics.add_argument("--coupling-hz", type=float, default=angular_to_hz(DEFAULT_COUPLING),
                         help="|lambda| / 2 pi")
    physics.add_argument("--eta", type=float, help="uniform Lamb-Dicke parameter instead of the chain modes")
    physics.add_argument("--mode", type=int, default=1, help="bus mode, 1 is the centre-of-mass mode")

    parser = argparse.ArgumentParser(
        prog="iontrap",
        description="Pulse-level simulation of a linear ion-trap processor. Angles in files are in rad, "
                    "frequencies on the command line in Hz.",
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    trap = subparsers.add_parser("trap", parents=[common], help="trap characteristics from a key=value file")
    trap.add_argument("config", type=Path)
    trap.add_argument("--ions", type=int, help="also check the linear-string condition for this many ions")
    trap.add_argument("--strict", action="store_true", help="fail outside the secular regime")

    subparsers.add_parser("chain", parents=[common, physics], help="equilibrium positions")
    subparsers.add_parser("modes", parents=[common, physics], help="axial normal modes and Lamb-Dicke parameters")

    compile_parser = subparsers.add_parser("compile", parents=[common, physics], help="compile a circuit")
    compile_parser.add_argument("program", type=Path, help="circuit or pulse program")

    run = subparsers.add_parser("run", parents=[common, physics], help="simulate a circuit or pulse program")
    run.add_argument("program", type=Path, help="circuit or pulse program")
    run.add_argument("--initial", help="initial g/e/r label of the ions, all g by default")
    run.add_argument("--phonons", type=int, default=0, help="initial bus occupation")
    run.add_argument("--n-max", type=int, default=4, help="Fock cutoff")
    run.add_argument("--qubits", help="comma-separated ions for a truth table, e.g. 1,2")
    run.add_argument("--include-bus", action="store_true", help="treat the bus as a qubit in the truth table")
    run.add_argument("--workers", type=int, help="threads for truth-table rows")
    run.add_argument("--shots", type=int, default=0, help="readout shots per ion")

    estimate = subparsers.add_parser("estimate", parents=[common, physics], help="error and timing budget")
    estimate.add_argument("--gate-ions", type=int, help="ions taking part in the gate, all by default")
    estimate.add_argument("--fidelity", type=float, default=0.99)
    estimate.add_argument("--phonons", type=int, default=1, help="bus occupation for the off-resonant budget")
    estimate.add_argument("--analysis-time-us", type=float, default=DEFAULT_ANALYSIS_TIME * 1e6)
    estimate.add_argument("--linewidth-hz", type=float, help="cooling-transition linewidth Gamma / 2 pi")
    estimate.add_argument("--table", action="store_true", help="also write the gate-time table")

    spectrum = subparsers.add_parser("spectrum", parents=[common, physics], help="absorption spectrum of one ion")
    spectrum.add_argument("--ion", type=int, default=1)
    spectrum.add_argument("--mean-phonons", type=float, default=0.0, help="thermal occupation of every mode")
    spectrum.add_argument("--n-max", type=int, default=10)
    spectrum.add_argument("--linewidth-hz", type=float, default=5e3)
    spectrum.add_argument("--span-hz", type=float, help="half width of the sampled detuning range")
    spectrum.add_argument("--points", type=int, default=2001)
    return parser.parse_args(argv)


def _manifest(args) -> RunManifest:
    inputs = tuple(str(getattr(args, name)) for name in ("config", "program") if getattr(args, name, None))
    seed = args.seed
    if seed is None:
        seed = int(np.random.SeedSequence().entropy % SEED_BOUND)
    stem = args.stem or (Path(inputs[0]).stem if inputs else args.subcommand)
    return RunManifest(args.subcommand, inputs, seed, str(args.output_dir), stem, args.regime)


def _install_logging(verbose: bool) -> logging.Handler:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger()
    root.addHandler(handler)
    root.setLevel(logging.DEBUG if verbose else logging.INFO)
    return handler


def run(argv: list[str] | None = None) -> int:
    """ Run one subcommand and return the exit code.

    0 on success, 1 on other failures, 2 on malformed input, 3 when a request is physically invalid.
    Data goes to files only; diagnostics go to the error stream.
    """
    args = _parse_args(argv)
    root_level = logging.getLogger().level
    handler = _install_logging(args.verbose)
    try:
        manifest = _manifest(args)
        with warnings.catch_warnings(record=True) as records:
            warnings.simplefilter("always")
            return COMMANDS[manifest.subcommand](args, manifest, records)
    except ParseError as exc:
        logger.error(str(exc))
        return EXIT_PARSE_ERROR
    except PhysicsValidityError as exc:
        logger.error(str(exc))
        return EXIT_PHYSICS_ERROR
    except (IonTrapError, ValueError, OSError) as exc:
        logger.error(str(exc))
        return EXIT_FAILURE
    finally:
        logging.getLogger().removeHandler(handler)
        logging.getLogger().setLevel(root_level)
