import math

import numpy as np
import pytest

from rydsim.cli import ConfigError, ExperimentConfig, main, parse_angle
from rydsim.pauli import parse_operator
from rydsim.models import build_toric


# -- angle parsing -------------------------------------------------------------

@pytest.mark.parametrize(
    "text,value",
    [
        ("pi", math.pi),
        ("pi/2", math.pi / 2),
        ("0.25pi", math.pi / 4),
        ("3pi/4", 3 * math.pi / 4),
        ("-pi/2", -math.pi / 2),
        ("2*pi", 2 * math.pi),
    ],
)
def test_parse_angle(text, value):
    assert parse_angle(text) == pytest.approx(value)


def test_parse_angle_raw_radians():
    assert parse_angle("1.25") == pytest.approx(1.25)


def test_parse_angle_rejects_garbage():
    with pytest.raises(ValueError):
        parse_angle("pie")


# -- config handling -------------------------------------------------------------

def test_config_round_trip_lossless():
    text = (
        "command = toric-cool\nlx = 4\nly = 4\ntheta = pi,pi/2\n"
        "steps = 40\ntrajectories = 1000\nseed = 7\n"
    )
    cfg = ExperimentConfig.from_text(text)
    again = ExperimentConfig.from_text(cfg.to_text())
    assert cfg.command == again.command
    assert cfg.values == again.values


def test_config_missing_field():
    with pytest.raises(ConfigError, match="lx"):
        ExperimentConfig.from_text("command = toric-cool\n")


def test_config_unknown_field():
    with pytest.raises(ConfigError, match="bogus"):
        ExperimentConfig.from_text(
            "command = toric-cool\nbogus = 3\nlx = 2\nly = 2\n"
            "theta = pi\nsteps = 1\ntrajectories = 1\n"
        )


def test_empty_config_file_usage_error(tmp_path, capsys):
    cfg = tmp_path / "empty.cfg"
    cfg.write_text("")
    status = main(["toric-cool", "--config", str(cfg)])
    assert status == 2
    assert "missing required field" in capsys.readouterr().err


def test_no_command_usage_error(capsys):
    assert main([]) == 2


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "lx = 2\nly = 2\ntheta = pi\nsteps = 2\ntrajectories = 4\nseed = 1\n"
    )
    out = tmp_path / "a.csv"
    assert main(["toric-cool", "--config", str(cfg), "--steps", "3",
                 "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "step,theta,engine,mean_energy,stderr"
    assert len(lines) == 1 + 4  # steps 0..3


# -- experiment runs ----------------------------------------------------------------

def test_toric_cool_deterministic_output(tmp_path):
    args = ["toric-cool", "--lx", "3", "--ly", "3", "--theta", "pi/2",
            "--steps", "4", "--trajectories", "16", "--seed", "5"]
    out1, out2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_toric_cool_multi_theta_rows(tmp_path):
    out = tmp_path / "multi.csv"
    assert main(["toric-cool", "--lx", "2", "--ly", "2", "--theta", "pi,pi/2",
                 "--steps", "2", "--trajectories", "4", "--seed", "0",
                 "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 1 + 2 * 3
    thetas = {line.split(",")[1] for line in lines[1:]}
    assert len(thetas) == 2


def test_toric_cool_trajectory_engine(tmp_path):
    out = tmp_path / "traj.csv"
    assert main(["toric-cool", "--lx", "2", "--ly", "2", "--theta", "pi",
                 "--steps", "2", "--trajectories", "3", "--seed", "2",
                 "--engine", "trajectory", "--q-init", "0", "--out", str(out)]) == 0
    rows = [line.split(",") for line in out.read_text().splitlines()[1:]]
    assert all(abs(float(r[3]) + 8.0) < 1e-9 for r in rows)


def test_toric_cool_lindblad_engine(tmp_path):
    out = tmp_path / "lb.csv"
    assert main(["toric-cool", "--lx", "2", "--ly", "2", "--theta", "0.4",
                 "--steps", "3", "--trajectories", "1", "--seed", "0",
                 "--engine", "lindblad", "--out", str(out)]) == 0
    rows = [line.split(",") for line in out.read_text().splitlines()[1:]]
    energies = [float(r[3]) for r in rows]
    gamma = math.sin(0.2) ** 2
    want = [-1.0 + math.exp(-gamma * k) for k in range(4)]
    assert np.allclose(energies, want, atol=1e-6)


def test_toric_cool_compare_engine(tmp_path):
    out = tmp_path / "cmp.csv"
    status = main(["toric-cool", "--lx", "2", "--ly", "2", "--theta", "pi",
                   "--steps", "3", "--trajectories", "30", "--seed", "7",
                   "--engine", "compare", "--out", str(out)])
    assert status == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("step,theta,mean_syndrome")
    assert len(lines) == 1 + 4


def test_toric_evolve_energy_conserved(tmp_path):
    out = tmp_path / "ev.csv"
    assert main(["toric-evolve", "--lx", "2", "--ly", "2", "--tau", "0.3",
                 "--steps", "4", "--observables", "z0,x3", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "step,time,energy,z0,x3"
    energies = [float(line.split(",")[2]) for line in lines[1:]]
    assert np.allclose(energies, energies[0], atol=1e-10)


def test_heisenberg_run(tmp_path):
    out = tmp_path / "h.csv"
    assert main(["heisenberg", "--lx", "3", "--tau", "0.05", "--steps", "3",
                 "--init", "100", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "step,time,energy,total_z"


def test_hubbard_spectrum_both(tmp_path):
    out = tmp_path / "sp.csv"
    assert main(["hubbard-spectrum", "--lx", "2", "--ly", "2", "--t", "1",
                 "--u", "4", "--encoding", "both", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "index,sector,eigenvalue_jw,eigenvalue_fock,abs_delta"
    deltas = [float(line.split(",")[-1]) for line in lines[1:]]
    assert max(deltas) < 1e-8
    assert len(deltas) == 16


def test_hubbard_spectrum_local(tmp_path):
    out = tmp_path / "lp.csv"
    assert main(["hubbard-spectrum", "--lx", "2", "--ly", "2",
                 "--encoding", "local", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    deltas = [float(line.split(",")[-1]) for line in lines[1:]]
    assert max(deltas) < 1e-8


def test_gate_fidelity_sweep(tmp_path):
    out = tmp_path / "gf.csv"
    assert main(["gate-fidelity", "--durations", "30,60", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "T,x_max,V,f_zero,f_rydberg,leak_R"
    assert len(lines) == 3
    f_ryd = [float(line.split(",")[4]) for line in lines[1:]]
    assert all(f > 0.999 for f in f_ryd)


def test_dump_hamiltonian_round_trip(tmp_path):
    out = tmp_path / "toric.txt"
    assert main(["dump-hamiltonian", "--model", "toric", "--lx", "2", "--ly", "2",
                 "--out", str(out)]) == 0
    parsed = parse_operator(out.read_text())
    h, _ = build_toric(2, 2)
    assert parsed.approx_equal(h)


def test_runtime_failure_exit_code(tmp_path, capsys):
    # degenerate lattice dims are a runtime error, not a usage error
    status = main(["toric-cool", "--lx", "1", "--ly", "4", "--theta", "pi",
                   "--steps", "1", "--trajectories", "1", "--out", "-"])
    assert status == 1
    assert "failed" in capsys.readouterr().err


def test_invalid_angle_flag(tmp_path, capsys):
    status = main(["toric-cool", "--lx", "2", "--ly", "2", "--theta", "tau",
                   "--steps", "1", "--trajectories", "1"])
    assert status == 2
    assert "theta" in capsys.readouterr().err


def test_invalid_observable(tmp_path, capsys):
    status = main(["toric-evolve", "--lx", "2", "--ly", "2", "--tau", "0.1",
                   "--steps", "1", "--observables", "q9"])
    assert status == 1
