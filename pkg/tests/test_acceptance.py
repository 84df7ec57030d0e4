"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v -s`` for the per-criterion report.
All tolerances are pinned here.
"""

import math
import time

import numpy as np
import pytest

from rydsim.cooling import (
    CoolingParams,
    cooling_cycle_trajectory,
    equivalence_check,
    lindblad_integrate,
    syndrome_mc_run,
)
from rydsim.fock import hubbard_matrix, spectrum
from rydsim.gates import (
    GateSpec,
    controlled_flip,
    faulty_gate,
    plaquette_step,
    syndrome_map_S,
)
from rydsim.models import (
    HubbardSpec,
    ToricLattice,
    aux_pair_count,
    build_heisenberg,
    build_hubbard_jw,
    build_hubbard_local,
    build_toric,
    chain_adjacency,
    constrained_local_spectrum,
    toric_ground_state,
)
from rydsim.pauli import OperatorSum, PauliString
from rydsim.statevec import DensityMatrix, StateVector, exact_propagator
from rydsim.trotter import Circuit, Gate, circuit_matrix, run, trotterize

from oracles import expm_hermitian, label_matrix, random_label


def report(number: int, description: str, ok: bool, detail: str, started: float):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {number:02d} {status} {description} "
          f"[{detail}] ({time.perf_counter() - started:.2f}s)")
    assert ok, f"criterion {number}: {description}: {detail}"


def gate_matrix(apply_fn, n):
    dim = 1 << n
    mat = np.empty((dim, dim), dtype=complex)
    for col in range(dim):
        state = StateVector.basis_state(n, col)
        apply_fn(state)
        mat[:, col] = state.amps
    return mat


def test_criterion_01_plaquette_decomposition_identity():
    started = time.perf_counter()
    rng = np.random.default_rng(101)
    a_p = label_matrix("XXXX")
    worst = 0.0
    for phi in rng.uniform(0.0, 2.0 * np.pi, 20):
        got = gate_matrix(lambda s: plaquette_step(s, (0, 1, 2, 3), phi), 4)
        want = expm_hermitian(a_p, 1j * phi)
        worst = max(worst, np.linalg.norm(got - want, 2))
    report(1, "gate-framed plaquette step equals exp(i phi XXXX)",
           worst < 1e-10, f"max 2-norm defect {worst:.2e}", started)


def test_criterion_02_toric_evolution_exact():
    started = time.perf_counter()
    h, _ = build_toric(2, 2)
    rng = np.random.default_rng(102)
    worst = 0.0
    for tau in (0.1, 1.0, 10.0):
        circuit = trotterize(h, tau, 1)
        u_exact = exact_propagator(h, tau)
        for _ in range(20):
            state = StateVector.random_state(8, rng)
            digital = run(circuit, state)
            worst = max(worst, float(np.linalg.norm(digital.amps - u_exact @ state.amps)))
    report(2, "2x2 toric digital evolution matches the exact propagator",
           worst < 1e-9, f"max state distance {worst:.2e}", started)


def test_criterion_03_heisenberg_step_and_trotter_exponents():
    started = time.perf_counter()
    rng = np.random.default_rng(103)
    xx = label_matrix("XX")
    worst = 0.0
    for theta in rng.uniform(-2 * np.pi, 2 * np.pi, 10):
        got = circuit_matrix(Circuit(2, (Gate("xx", (0, 1), theta),)))
        worst = max(worst, np.linalg.norm(got - expm_hermitian(xx, 0.5j * theta), 2))
    h = build_heisenberg(chain_adjacency(4), 1.0, 0.8, 0.6, 0.3, n_qubits=4)
    taus = [0.2, 0.1, 0.05, 0.025]
    slopes = {}
    for order in (1, 2):
        errs = [
            np.linalg.norm(
                circuit_matrix(trotterize(h, tau, 1, order)) - exact_propagator(h, tau),
                2,
            )
            for tau in taus
        ]
        slopes[order] = float(np.polyfit(np.log(taus), np.log(errs), 1)[0])
    ok = worst < 1e-10 and abs(slopes[1] - 2.0) < 0.2 and abs(slopes[2] - 3.0) < 0.3
    report(3, "Heisenberg step exact; per-step Trotter exponents 2 and 3",
           ok, f"defect {worst:.2e}, slopes {slopes[1]:.2f}/{slopes[2]:.2f}", started)


def test_criterion_04_jordan_wigner_certification():
    started = time.perf_counter()
    from rydsim.pauli import jw_annihilator, jw_creator, to_matrix

    n = 6
    cs = [to_matrix(jw_annihilator(i, n)) for i in range(1, n + 1)]
    cds = [to_matrix(jw_creator(i, n)) for i in range(1, n + 1)]
    eye = np.eye(1 << n)
    car_defect = 0.0
    for i in range(n):
        for j in range(n):
            car_defect = max(
                car_defect,
                float(np.max(np.abs(cs[i] @ cds[j] + cds[j] @ cs[i]
                                    - (eye if i == j else 0.0)))),
                float(np.max(np.abs(cs[i] @ cs[j] + cs[j] @ cs[i]))),
            )
    spec_a = HubbardSpec(2, 1, t_hop=1.0, u=4.0, spinful=True)
    spec_b = HubbardSpec(2, 2, t_hop=1.0)
    worst_spec = 0.0
    for spec in (spec_a, spec_b):
        jw_mat = build_hubbard_jw(spec).to_matrix().real
        fock_mat = hubbard_matrix(spec)
        if spec.spinful:
            sectors = [
                dict(n_up=u, n_down=d)
                for u in range(spec.n_sites + 1)
                for d in range(spec.n_sites + 1)
            ]
        else:
            sectors = [dict(n_particles=k) for k in range(spec.n_modes + 1)]
        for sector in sectors:
            w_spin = spectrum(spec, matrix=jw_mat, **sector)
            w_fock = spectrum(spec, matrix=fock_mat, **sector)
            if len(w_spin):
                worst_spec = max(worst_spec, float(np.max(np.abs(w_spin - w_fock))))
    ok = car_defect < 1e-12 and worst_spec < 1e-8
    report(4, "JW anticommutators exact; spin spectra match the Fock oracle",
           ok, f"CAR defect {car_defect:.2e}, sector delta {worst_spec:.2e}", started)


def test_criterion_05_local_encoding_equivalence():
    started = time.perf_counter()
    spec = HubbardSpec(2, 2, t_hop=1.0, u=0.0, v_aux=1.0)
    h_local = build_hubbard_local(spec)
    max_weight = h_local.max_weight()
    w_jw = np.sort(np.linalg.eigvalsh(build_hubbard_jw(spec).to_matrix()))
    w_local = constrained_local_spectrum(spec)
    shift = -spec.v_aux * aux_pair_count(spec)
    free = len(w_local) // len(w_jw)
    expected = np.sort(np.repeat(w_jw + shift, free))
    delta = float(np.max(np.abs(w_local - expected)))
    ok = max_weight == 6 and free * len(w_jw) == len(w_local) and delta < 1e-8
    report(5, "local encoding six-body cap and constrained-sector spectrum",
           ok, f"max weight {max_weight}, sector delta {delta:.2e}", started)


def test_criterion_06_gate_error_model_scaling():
    started = time.perf_counter()
    rng = np.random.default_rng(106)
    a_p = label_matrix("XXXX")
    p0_control = 0.5 * (np.eye(16) + label_matrix("ZIII"))
    slopes = []
    for _ in range(5):
        terms = [
            (rng.normal(), PauliString.from_label(random_label(rng, 3)))
            for _ in range(4)
        ]
        q3 = OperatorSum(terms, 3)
        q3 = (0.5 * (q3 + q3.adjoint())).normalized()
        q_full = OperatorSum(
            [
                (c, PauliString.from_sites(
                    4, {k + 1: s.letter(k) for k in range(3) if s.letter(k) != "I"},
                    s.phase))
                for c, s in q3.normalized()
            ],
            4,
        ).to_matrix()
        phis = np.logspace(-3, -1, 7)
        errs = []
        for phi in phis:
            spec = GateSpec(0, (1, 2, 3), "faulty", q3, float(phi))
            g = gate_matrix(lambda s: faulty_gate(s, spec), 4)
            u_x = np.cos(phi) * np.eye(16) + 1j * np.sin(phi) * label_matrix("XIII")
            residual = g @ u_x @ g - (
                np.eye(16) + 2j * phi * (q_full @ p0_control) + 1j * phi * a_p
            )
            errs.append(np.linalg.norm(residual, 2))
        slopes.append(float(np.polyfit(np.log(phis), np.log(errs), 1)[0]))
    ok = all(abs(s - 2.0) < 0.1 for s in slopes)
    report(6, "faulty-gate first-order residual scales as phi^2",
           ok, "slopes " + "/".join(f"{s:.2f}" for s in slopes), started)


def test_criterion_07_cooling_fixed_points_and_rate():
    started = time.perf_counter()
    lattice = ToricLattice.build(2, 2)
    rng = np.random.default_rng(107)

    # (a) every cooling cycle leaves ground states exactly invariant
    gs = toric_ground_state(lattice, 9)
    loop = PauliString.from_sites(
        9, {lattice.plaquettes[0][0]: "X", lattice.plaquettes[1][0]: "X"}
    )  # non-contractible X loop along row 0: a second ground state
    gs2 = gs.copy().apply_string(loop)
    defect = 0.0
    for state0 in (gs, gs2):
        for kind, cells in (("plaquette", lattice.plaquettes), ("star", lattice.stars)):
            for cell in cells:
                state = state0.copy()
                _, flipped = cooling_cycle_trajectory(
                    state, cell, np.pi / 2, rng, kind=kind, ancilla=8
                )
                defect = max(defect, 1.0 - abs(state.inner(state0)), float(flipped))

    # (b) single-plaquette decay rate from the deterministic cycle channel
    a_p = PauliString.from_label("XXXX")
    proj_minus = 0.5 * (np.eye(16) - a_p.to_matrix())
    rates = []
    thetas = [0.05, 0.1, 0.2]
    for theta in thetas:
        def premeasure_cycle(state, th=theta):
            syndrome_map_S(state, 4, (0, 1, 2, 3))
            controlled_flip(state, 4, 0, th, "z")
            syndrome_map_S(state, 4, (0, 1, 2, 3))

        # Kraus blocks of the cycle: ancilla |0> in, ancilla 0/1 out + pump
        mat = gate_matrix(premeasure_cycle, 5)
        k0, k1 = mat[:16, :16], mat[16:, :16]
        rho = proj_minus / 8.0
        pops = []
        for _ in range(30):
            pops.append(float(np.trace(proj_minus @ rho).real))
            rho = k0 @ rho @ k0.conj().T + k1 @ rho @ k1.conj().T
        rate = -float(np.polyfit(range(30), np.log(pops), 1)[0])
        rates.append(rate)
    slope = float(np.polyfit(np.log(thetas), np.log(rates), 1)[0])

    # (c) master equation reproduces the closed-form decay
    pump = OperatorSum.from_string(PauliString.single(4, 0, "Z"))
    interrogate = OperatorSum.identity(4) - OperatorSum.from_string(a_p)
    jump = (0.5 * (pump @ interrogate)).normalized()
    rho0 = DensityMatrix(proj_minus / 8.0, copy=False)
    gamma = 0.9
    lindblad_err = 0.0
    for t in (0.5, 2.0):
        rho_t = lindblad_integrate([jump], gamma, rho0, t)
        pop = rho_t.expectation_matrix(proj_minus)
        lindblad_err = max(lindblad_err, abs(pop - math.exp(-gamma * t)))

    ok = defect < 1e-10 and abs(slope - 2.0) < 0.2 and lindblad_err < 1e-6
    report(7, "ground states are dark; cycle rate ~ theta^2; Lindblad closed form",
           ok,
           f"defect {defect:.2e}, rate slope {slope:.2f}, lindblad {lindblad_err:.2e}",
           started)


def test_criterion_08_fig5_style_cooling():
    started = time.perf_counter()
    lattice = ToricLattice.build(4, 4)
    traces = {}
    for theta in (np.pi, np.pi / 2, np.pi / 4):
        params = CoolingParams(theta=theta, n_steps=40, n_trajectories=1000,
                               q_init=0.5, seed=7)
        traces[theta] = syndrome_mc_run(lattice, params, workers=1)
    final = traces[np.pi].mean_energy[40]
    asymptote_ok = abs(final - (-32.0)) < 0.5
    m = {t: traces[t].mean_energy[10] for t in traces}
    se = {t: traces[t].stderr[10] for t in traces}
    z_12 = (m[np.pi / 2] - m[np.pi]) / math.hypot(se[np.pi], se[np.pi / 2])
    z_24 = (m[np.pi / 4] - m[np.pi / 2]) / math.hypot(se[np.pi / 2], se[np.pi / 4])
    ordering_ok = z_12 > 3.0 and z_24 > 3.0
    report(8, "4x4 cooling reaches -32 E0; theta ordering at step 10",
           asymptote_ok and ordering_ok,
           f"E(40)={final:.3f}, separations {z_12:.1f}/{z_24:.1f} sigma", started)


def test_criterion_09_cross_engine_equivalence():
    started = time.perf_counter()
    lattice = ToricLattice.build(2, 2)
    worst = 0.0
    for theta in (np.pi, np.pi / 2):
        params = CoolingParams(theta=theta, n_steps=20, n_trajectories=500,
                               q_init=0.5, seed=7)
        rep = equivalence_check(lattice, params, workers=4)
        worst = max(worst, rep.max_z)
        assert len(rep.z_scores) == 21
    report(9, "syndrome MC agrees with quantum trajectories at 3 sigma",
           worst <= 3.0, f"max z {worst:.2f} over 2x21 steps", started)


def test_criterion_10_pulse_level_gate():
    started = time.perf_counter()
    from rydsim.pulse import PulseProfile, calibrate_area, calibrate_duration, gate_fidelity

    base = calibrate_duration(PulseProfile.sin2(x_max=0.2, duration=10.0), math.pi)
    f_zero_adiabatic, f_ryd = gate_fidelity(base)
    f_zeros = []
    for k in range(5):
        prof = calibrate_area(
            PulseProfile.sin2(x_max=0.2, duration=base.duration / 2**k), math.pi
        )
        f_zeros.append(gate_fidelity(prof)[0])
    monotone = all(f_zeros[k] > f_zeros[k + 1] for k in range(4))
    ok = f_ryd >= 0.999 and f_zero_adiabatic >= 0.99 and monotone
    report(10, "calibrated pulse: conditional transfer and transparency",
           ok,
           f"f_ryd {f_ryd:.6f}, f_zero {f_zero_adiabatic:.6f}, "
           f"sweep {'/'.join(f'{f:.4f}' for f in f_zeros)}",
           started)
