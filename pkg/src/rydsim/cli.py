"""Experiment harness: named subcommands, flat key=value config files,
seeded reproducibility, CSV emission.

Every run is fully determined by its configuration and seed; identical
config+seed gives byte-identical CSV.  Timestamps and wall time go to
stderr only.  Exit codes: 0 success, 1 runtime or statistical failure,
2 usage/configuration error.  The environment variable ``RYDSIM_WORKERS``
selects the trajectory worker count (default: machine parallelism).

Angles are accepted as multiples of pi ("pi", "pi/2", "0.25pi", "3pi/4")
or as raw radians.
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .cooling import (
    CoolingParams,
    equivalence_check,
    lindblad_reference_trace,
    syndrome_mc_run,
    trajectory_run,
)
from .fock import hubbard_matrix, spectrum
from .models import (
    HubbardSpec,
    ToricLattice,
    aux_pair_count,
    build_aux_hamiltonian,
    build_heisenberg,
    build_hubbard_jw,
    build_hubbard_local,
    build_toric,
    constrained_local_spectrum,
    grid_adjacency,
)
from .pauli import OperatorSum, PauliString, format_operator
from .statevec import StateVector
from .trotter import run as run_circuit
from .trotter import trotterize

WORKERS_ENV = "RYDSIM_WORKERS"


class ConfigError(Exception):
    """Invalid or missing configuration field."""


def parse_angle(text: str) -> float:
    """Radians from "pi", "pi/2", "0.25pi", "-3pi/4", or a raw float."""
    s = str(text).strip().lower().replace(" ", "").replace("*", "")
    if "pi" in s:
        m = re.fullmatch(r"([+-]?\d*\.?\d*)pi(?:/(\d*\.?\d+))?", s)
        if not m:
            raise ValueError(f"cannot parse angle {text!r}")
        coeff_text = m.group(1)
        coeff = float(coeff_text) if coeff_text not in ("", "+", "-") else float(
            coeff_text + "1"
        )
        denom = float(m.group(2)) if m.group(2) else 1.0
        return coeff * math.pi / denom
    return float(s)


def _parse_blockade(text: str) -> float:
    s = str(text).strip().lower()
    if s in ("inf", "infinite", "infinity"):
        return math.inf
    return float(s)


def _parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    s = str(text).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"cannot parse boolean {text!r}")


_PARSERS = {
    "int": int,
    "float": float,
    "str": str,
    "angle": parse_angle,
    "anglelist": lambda s: [parse_angle(v) for v in str(s).split(",") if v.strip()],
    "floatlist": lambda s: [float(v) for v in str(s).split(",") if v.strip()],
    "bool": _parse_bool,
    "blockade": _parse_blockade,
}


@dataclass(frozen=True)
class Param:
    name: str
    kind: str
    default: object = None
    required: bool = False
    choices: tuple = ()
    help: str = ""


_COMMON = (
    Param("seed", "int", default=0, help="master seed for all randomness"),
)

COMMANDS: dict[str, tuple[Param, ...]] = {
    "toric-cool": _COMMON + (
        Param("lx", "int", required=True, help="plaquette grid width"),
        Param("ly", "int", required=True, help="plaquette grid height"),
        Param("theta", "anglelist", required=True,
              help="pump angle(s), e.g. 'pi' or 'pi,pi/2,pi/4'"),
        Param("steps", "int", required=True, help="number of cooling sweeps"),
        Param("trajectories", "int", required=True),
        Param("q-init", "float", default=0.5,
              help="initial excitation probability per stabilizer"),
        Param("e0", "float", default=1.0),
        Param("engine", "str", default="syndrome",
              choices=("syndrome", "trajectory", "lindblad", "compare")),
    ),
    "toric-evolve": _COMMON + (
        Param("lx", "int", required=True),
        Param("ly", "int", required=True),
        Param("e0", "float", default=1.0),
        Param("tau", "float", required=True, help="Trotter time step"),
        Param("steps", "int", required=True),
        Param("order", "int", default=1, choices=(1, 2)),
        Param("init", "str", default="",
              help="initial basis bitstring (qubit 0 first; default all zeros)"),
        Param("observables", "str", default="",
              help="comma list of single-qubit observables, e.g. 'z0,x3'"),
    ),
    "heisenberg": _COMMON + (
        Param("lx", "int", required=True, help="chain/grid width"),
        Param("ly", "int", default=1, help="grid height (1 = chain)"),
        Param("jx", "float", default=1.0),
        Param("jy", "float", default=1.0),
        Param("jz", "float", default=1.0),
        Param("field", "float", default=0.0, help="z-field strength"),
        Param("tau", "float", required=True),
        Param("steps", "int", required=True),
        Param("order", "int", default=1, choices=(1, 2)),
        Param("init", "str", default=""),
        Param("observables", "str", default=""),
    ),
    "hubbard-spectrum": _COMMON + (
        Param("lx", "int", required=True),
        Param("ly", "int", required=True),
        Param("t", "float", default=1.0, help="hopping energy"),
        Param("u", "float", default=0.0, help="on-site energy"),
        Param("v-aux", "float", default=1.0, help="auxiliary coupling"),
        Param("spinful", "bool", default=False),
        Param("encoding", "str", default="both",
              choices=("jw", "fock", "both", "local")),
    ),
    "gate-fidelity": _COMMON + (
        Param("durations", "floatlist", required=True,
              help="comma list of pulse durations to sweep"),
        Param("x-max", "float", default=0.2, help="base envelope amplitude"),
        Param("omega-c", "float", default=2.0),
        Param("delta", "float", default=1.0),
        Param("blockade", "blockade", default=math.inf,
              help="Rydberg blockade shift; 'inf' for perfect blockade"),
        Param("area", "angle", default=math.pi, help="target Raman area"),
    ),
    "dump-hamiltonian": _COMMON + (
        Param("model", "str", required=True,
              choices=("toric", "heisenberg", "hubbard-jw", "hubbard-local", "aux")),
        Param("lx", "int", required=True),
        Param("ly", "int", required=True),
        Param("e0", "float", default=1.0),
        Param("jx", "float", default=1.0),
        Param("jy", "float", default=1.0),
        Param("jz", "float", default=1.0),
        Param("field", "float", default=0.0),
        Param("t", "float", default=1.0),
        Param("u", "float", default=0.0),
        Param("v-aux", "float", default=1.0),
        Param("spinful", "bool", default=False),
    ),
}


@dataclass
class ExperimentConfig:
    """A fully resolved run: subcommand plus typed parameter values."""

    command: str
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def to_text(self) -> str:
        lines = [f"command = {self.command}"]
        for key in sorted(self.values):
            lines.append(f"{key} = {_format_value(self.values[key])}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        raw = _parse_config_text(text)
        command = raw.pop("command", None)
        if command is None:
            raise ConfigError("config text is missing the 'command' field")
        if command not in COMMANDS:
            raise ConfigError(f"unknown command {command!r}")
        values = _resolve_values(command, raw, {})
        return cls(command, values)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ",".join(repr(float(v)) for v in value)
    return str(value)


def _parse_config_text(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _resolve_values(command: str, file_values: dict, flag_values: dict) -> dict:
    """Merge defaults < config file < flags, parsing and validating types."""
    params = {p.name: p for p in COMMANDS[command]}
    unknown = set(file_values) - set(params)
    if unknown:
        raise ConfigError(f"unknown config field {sorted(unknown)[0]!r}")
    values = {}
    for name, p in params.items():
        if flag_values.get(name) is not None:
            raw = flag_values[name]
        elif name in file_values:
            raw = file_values[name]
        elif p.required:
            raise ConfigError(f"missing required field {name!r}")
        else:
            values[name] = p.default
            continue
        try:
            value = _PARSERS[p.kind](raw) if isinstance(raw, str) else raw
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"invalid value for field {name!r}: {exc}") from None
        if p.choices and value not in p.choices:
            raise ConfigError(
                f"field {name!r} must be one of {list(p.choices)}, got {value!r}"
            )
        values[name] = value
    return values


# ---------------------------------------------------------------------
# runners: each returns (header, rows, key_result, exit_status)
# ---------------------------------------------------------------------

def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "")
    if raw.strip():
        return max(1, int(raw))
    return os.cpu_count() or 1


def _run_toric_cool(cfg: ExperimentConfig):
    lattice = ToricLattice.build(cfg["lx"], cfg["ly"])
    workers = _workers()
    status = 0
    if cfg["engine"] == "compare":
        header = ["step", "theta", "mean_syndrome", "stderr_syndrome",
                  "mean_trajectory", "stderr_trajectory", "z"]
        rows = []
        worst = 0.0
        for theta in cfg["theta"]:
            params = CoolingParams(theta, cfg["steps"], cfg["trajectories"],
                                   cfg["q-init"], cfg["seed"])
            rep = equivalence_check(lattice, params, cfg["e0"], workers)
            worst = max(worst, rep.max_z)
            if not rep.passed:
                status = 1
            for k in range(len(rep.mc.steps)):
                rows.append([rep.mc.steps[k], theta,
                             rep.mc.mean_energy[k], rep.mc.stderr[k],
                             rep.trajectory.mean_energy[k], rep.trajectory.stderr[k],
                             rep.z_scores[k]])
        result = f"max_z={worst:.3f} ({'ok' if status == 0 else '3-sigma failure'})"
        return header, rows, result, status
    header = ["step", "theta", "engine", "mean_energy", "stderr"]
    rows = []
    final = None
    for theta in cfg["theta"]:
        if cfg["engine"] == "lindblad":
            trace = lindblad_reference_trace(theta, cfg["steps"], cfg["q-init"],
                                             cfg["e0"])
        else:
            params = CoolingParams(theta, cfg["steps"], cfg["trajectories"],
                                   cfg["q-init"], cfg["seed"])
            runner = syndrome_mc_run if cfg["engine"] == "syndrome" else trajectory_run
            trace = runner(lattice, params, cfg["e0"], workers)
        for k in range(len(trace.steps)):
            rows.append([trace.steps[k], theta, trace.engine,
                         trace.mean_energy[k], trace.stderr[k]])
        final = trace.mean_energy[-1]
    return header, rows, f"final_mean_energy={final:.6f}", status


def _parse_observables(text: str, n_qubits: int):
    obs = []
    for token in str(text).split(","):
        token = token.strip().lower()
        if not token:
            continue
        m = re.fullmatch(r"([xyz])(\d+)", token)
        if not m:
            raise ConfigError(f"invalid observable {token!r} (use e.g. 'z0')")
        qubit = int(m.group(2))
        if qubit >= n_qubits:
            raise ConfigError(f"observable qubit {qubit} out of range")
        obs.append((token, PauliString.single(n_qubits, qubit, m.group(1).upper())))
    return obs


def _initial_state(init: str, n_qubits: int) -> StateVector:
    if not init:
        return StateVector.zero_state(n_qubits)
    if len(init) != n_qubits or set(init) - {"0", "1"}:
        raise ConfigError(f"init must be a {n_qubits}-bit string of 0/1")
    return StateVector.basis_state(n_qubits, init)


def _evolution_rows(h, n_qubits, cfg, extra_columns=()):
    circuit = trotterize(h, cfg["tau"], 1, cfg["order"])
    state = _initial_state(cfg["init"], n_qubits)
    obs = _parse_observables(cfg["observables"], n_qubits)
    header = ["step", "time", "energy"]
    header += [name for name, _ in extra_columns]
    header += [name for name, _ in obs]
    rows = []
    for step in range(cfg["steps"] + 1):
        if step:
            state = run_circuit(circuit, state)
        row = [step, step * cfg["tau"], state.expectation(h)]
        row += [state.expectation(op) for _, op in extra_columns]
        row += [float(state.expectation_string(p).real) for _, p in obs]
        rows.append(row)
    return header, rows, f"final_energy={rows[-1][2]:.6f}", 0


def _run_toric_evolve(cfg: ExperimentConfig):
    h, lattice = build_toric(cfg["lx"], cfg["ly"], cfg["e0"])
    return _evolution_rows(h, lattice.n_edges, cfg)


def _run_heisenberg(cfg: ExperimentConfig):
    n = cfg["lx"] * cfg["ly"]
    adjacency = grid_adjacency(cfg["lx"], cfg["ly"])
    h = build_heisenberg(adjacency, cfg["jx"], cfg["jy"], cfg["jz"],
                         cfg["field"], n_qubits=n)
    total_z = OperatorSum(
        [(1.0, PauliString.single(n, q, "Z")) for q in range(n)], n
    )
    return _evolution_rows(h, n, cfg, extra_columns=[("total_z", total_z)])


def _hubbard_spec(cfg: ExperimentConfig) -> HubbardSpec:
    return HubbardSpec(cfg["lx"], cfg["ly"], cfg["t"], cfg["u"],
                       cfg["v-aux"], cfg["spinful"])


def _sector_table(spec: HubbardSpec, matrix):
    """(sector label, eigenvalues) pairs in deterministic sector order."""
    out = []
    if spec.spinful:
        for n_up in range(spec.n_sites + 1):
            for n_down in range(spec.n_sites + 1):
                w = spectrum(spec, n_up=n_up, n_down=n_down, matrix=matrix)
                if len(w):
                    out.append((f"{n_up}u{n_down}d", w))
    else:
        for n_part in range(spec.n_modes + 1):
            w = spectrum(spec, n_particles=n_part, matrix=matrix)
            if len(w):
                out.append((str(n_part), w))
    return out


def _run_hubbard_spectrum(cfg: ExperimentConfig):
    spec = _hubbard_spec(cfg)
    encoding = cfg["encoding"]
    if encoding == "local":
        w_jw = np.sort(np.linalg.eigvalsh(build_hubbard_jw(spec).to_matrix()))
        w_local = constrained_local_spectrum(spec)
        if len(w_local) % len(w_jw):
            raise RuntimeError("constrained sector dimension mismatch")
        free = len(w_local) // len(w_jw)
        shift = -spec.v_aux * aux_pair_count(spec)
        dedup = w_local[::free]
        header = ["index", "eigenvalue_jw", "eigenvalue_local_shifted", "abs_delta"]
        rows = []
        worst = 0.0
        for k, (a, b) in enumerate(zip(w_jw, dedup - shift)):
            worst = max(worst, abs(a - b))
            rows.append([k, a, b, abs(a - b)])
        return header, rows, f"max_abs_delta={worst:.3e}", 0
    fock_mat = hubbard_matrix(spec)
    jw_mat = None
    if encoding in ("jw", "both"):
        jw_mat = build_hubbard_jw(spec).to_matrix().real
    if encoding == "fock":
        tables = {"fock": _sector_table(spec, fock_mat)}
        header = ["index", "sector", "eigenvalue_fock"]
    elif encoding == "jw":
        tables = {"jw": _sector_table(spec, jw_mat)}
        header = ["index", "sector", "eigenvalue_jw"]
    else:
        tables = {"jw": _sector_table(spec, jw_mat),
                  "fock": _sector_table(spec, fock_mat)}
        header = ["index", "sector", "eigenvalue_jw", "eigenvalue_fock", "abs_delta"]
    rows = []
    worst = 0.0
    index = 0
    first = next(iter(tables.values()))
    for block in range(len(first)):
        label = first[block][0]
        columns = [tables[k][block][1] for k in tables]
        for vals in zip(*columns):
            row = [index, label] + list(vals)
            if len(vals) == 2:
                delta = abs(vals[0] - vals[1])
                worst = max(worst, delta)
                row.append(delta)
            rows.append(row)
            index += 1
    result = f"max_abs_delta={worst:.3e}" if encoding == "both" else f"levels={index}"
    return header, rows, result, 0


def _run_gate_fidelity(cfg: ExperimentConfig):
    from .pulse import PulseProfile, calibrate_area, evolve_pulse, gate_fidelity

    header = ["T", "x_max", "V", "f_zero", "f_rydberg", "leak_R"]
    rows = []
    for duration in cfg["durations"]:
        profile = PulseProfile.sin2(
            x_max=cfg["x-max"], duration=duration,
            omega_c=cfg["omega-c"], delta=cfg["delta"], blockade=cfg["blockade"],
        )
        profile = calibrate_area(profile, cfg["area"])
        f_zero, f_rydberg = gate_fidelity(profile)
        leak = evolve_pulse(profile, "zero").leak_r
        rows.append([duration, profile.x_max, profile.blockade,
                     f_zero, f_rydberg, leak])
    return header, rows, f"f_zero_last={rows[-1][3]:.6f}", 0


def _run_dump_hamiltonian(cfg: ExperimentConfig):
    model = cfg["model"]
    if model == "toric":
        h, _ = build_toric(cfg["lx"], cfg["ly"], cfg["e0"])
    elif model == "heisenberg":
        n = cfg["lx"] * cfg["ly"]
        h = build_heisenberg(grid_adjacency(cfg["lx"], cfg["ly"]),
                             cfg["jx"], cfg["jy"], cfg["jz"], cfg["field"],
                             n_qubits=n)
    elif model == "hubbard-jw":
        h = build_hubbard_jw(_hubbard_spec(cfg))
    elif model == "hubbard-local":
        h = build_hubbard_local(_hubbard_spec(cfg))
    else:
        h = build_aux_hamiltonian(_hubbard_spec(cfg))
    text = format_operator(h)
    n_terms = len(h.normalized())
    return None, text, f"terms={n_terms}", 0


_RUNNERS = {
    "toric-cool": _run_toric_cool,
    "toric-evolve": _run_toric_evolve,
    "heisenberg": _run_heisenberg,
    "hubbard-spectrum": _run_hubbard_spectrum,
    "gate-fidelity": _run_gate_fidelity,
    "dump-hamiltonian": _run_dump_hamiltonian,
}


def _format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_output(header, rows, path: str):
    if header is None:
        text = rows  # pre-formatted text artifact (operator dump)
    else:
        lines = [",".join(header)]
        lines += [",".join(_format_cell(v) for v in row) for row in rows]
        text = "\n".join(lines) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rydsim",
        description="Digital simulation experiments: Trotterized lattice models, "
                    "pulse-level gate sweeps, and dissipative toric-code cooling.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    for command, params in COMMANDS.items():
        p = sub.add_parser(command, help=f"run the {command} experiment")
        p.add_argument("--config", default=None,
                       help="key = value file; flags override file values")
        p.add_argument("--out", default="-", help="output path ('-' = stdout)")
        for param in params:
            p.add_argument(f"--{param.name}", default=None, dest=param.name,
                           help=param.help or param.name, metavar=param.kind.upper())
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        file_values = {}
        if args.config:
            with open(args.config) as fh:
                file_values = _parse_config_text(fh.read())
            file_values.pop("command", None)
        flags = {p.name: getattr(args, p.name) for p in COMMANDS[args.command]}
        cfg = ExperimentConfig(
            args.command, _resolve_values(args.command, file_values, flags)
        )
    except (ConfigError, OSError) as exc:
        print(f"rydsim: error: {exc}", file=sys.stderr)
        return 2
    start = time.perf_counter()
    try:
        header, rows, result, status = _RUNNERS[cfg.command](cfg)
        _write_output(header, rows, args.out)
    except Exception as exc:  # runtime failure -> exit 1 with a diagnostic
        print(f"rydsim: {cfg.command} failed: {exc}", file=sys.stderr)
        return 1
    wall = time.perf_counter() - start
    print(
        f"[rydsim] {cfg.command}: {wall:.2f}s seed={cfg.values.get('seed')} {result}",
        file=sys.stderr,
    )
    return status


if __name__ == "__main__":
    sys.exit(main())
