"""Dissipative ground-state cooling of the toric code at three levels.

* :func:`lindblad_integrate`: exact master-equation integration for tiny
  systems (density-matrix cap of six qubits).
* :func:`trajectory_run`: full circuit-level quantum trajectories with one
  reused ancilla that is projectively measured and reset each cycle, which
  reproduces the statistics of optical pumping.
* :func:`syndrome_mc_run`: classical Monte Carlo on stabilizer eigenvalues,
  valid at any lattice size.  For syndrome-definite initial states the
  quantum trajectories reduce exactly to this process, which
  :func:`equivalence_check` certifies statistically.

One cooling cycle flips a violated stabilizer with probability
sin^2(theta/2) and leaves the ground sector exactly invariant.  A sweep is
all plaquettes then all stars, each in freshly shuffled order.  Trajectory
k of a run with seed s draws from the generator seeded by
``SeedSequence(entropy=s, spawn_key=(tag, k))``, so results do not depend
on how trajectories are distributed over workers.
"""

from __future__ import annotations

import sys
from concurrent.futures import ProcessPoolExecutor
from concurrent.futures.process import BrokenProcessPool
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import CapExceededError, IntegrationError
from .gates import controlled_flip, flip_probability, syndrome_map
from .models import ToricLattice, build_toric, toric_ground_state
from .pauli import OperatorSum, PauliString
from .statevec import DensityMatrix, StateVector, measure_projector

#: density-matrix integration cap
LINDBLAD_QUBIT_CAP = 6

#: trajectory engine cap: system qubits + 1 ancilla as a dense vector
TRAJECTORY_QUBIT_CAP = 12


@dataclass(frozen=True)
class CoolingParams:
    """Knobs of one cooling experiment."""

    theta: float
    n_steps: int
    n_trajectories: int
    q_init: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.theta <= np.pi:
            raise ValueError("theta must lie in (0, pi]")
        if not 0.0 <= self.q_init <= 1.0:
            raise ValueError("q_init must lie in [0, 1]")
        if self.n_steps < 0 or self.n_trajectories < 1:
            raise ValueError("need n_steps >= 0 and n_trajectories >= 1")


@dataclass
class Trace:
    """Per-step mean energy over trajectories (step 0 is the initial state)."""

    steps: np.ndarray
    mean_energy: np.ndarray
    stderr: np.ndarray
    n_trajectories: int
    theta: float
    engine: str


@dataclass
class EquivalenceReport:
    """Per-step comparison of the two cooling engines."""

    mc: Trace
    trajectory: Trace
    z_scores: np.ndarray
    z_threshold: float

    @property
    def max_z(self) -> float:
        return float(np.max(self.z_scores))

    @property
    def passed(self) -> bool:
        return bool(np.all(self.z_scores <= self.z_threshold))


def _stream(seed: int, tag: int, index: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(tag, index))
    )


# ---------------------------------------------------------------------
# jump operators and the master equation
# ---------------------------------------------------------------------

def jump_operator_plaquette(lattice: ToricLattice, p: int, edge: int) -> OperatorSum:
    """c_p = Z_edge (1 - A_p) / 2: interrogation projector then pump flip.

    Annihilates every A_p = +1 state and maps each excited state directly
    to its partner in the ground sector.
    """
    if edge not in lattice.plaquettes[p]:
        raise ValueError(f"edge {edge} is not on plaquette {p}")
    n = lattice.n_edges
    pump = OperatorSum.from_string(PauliString.single(n, edge, "Z"))
    interrogate = OperatorSum.identity(n) - OperatorSum.from_string(
        lattice.plaquette_string(p)
    )
    return (0.5 * (pump @ interrogate)).normalized()


def jump_operator_star(lattice: ToricLattice, s: int, edge: int) -> OperatorSum:
    """c_s = X_edge (1 - B_s) / 2, the star-sector analogue."""
    if edge not in lattice.stars[s]:
        raise ValueError(f"edge {edge} is not on star {s}")
    n = lattice.n_edges
    pump = OperatorSum.from_string(PauliString.single(n, edge, "X"))
    interrogate = OperatorSum.identity(n) - OperatorSum.from_string(
        lattice.star_string(s)
    )
    return (0.5 * (pump @ interrogate)).normalized()


def lindblad_integrate(
    jumps,
    gamma: float,
    rho0: DensityMatrix,
    t: float,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> DensityMatrix:
    """Integrate d rho/dt = gamma sum_k (c rho c+ - {c+c, rho}/2), H = 0.

    Trace and Hermiticity are preserved to integrator tolerance; every
    ground-sector state is a fixed point.
    """
    if rho0.n_qubits > LINDBLAD_QUBIT_CAP:
        raise CapExceededError(
            f"density-matrix integration capped at {LINDBLAD_QUBIT_CAP} qubits"
        )
    if gamma < 0.0:
        raise ValueError("gamma must be non-negative")
    if gamma == 0.0 or t == 0.0 or not list(jumps):
        return rho0.copy()
    dim = 1 << rho0.n_qubits
    cs = [op.to_matrix(rho0.n_qubits) for op in jumps]
    cdags = [c.conj().T for c in cs]
    anti = sum(cd @ c for c, cd in zip(cs, cdags))

    def rhs(_t, y):
        rho = y.reshape(dim, dim)
        drho = sum(c @ rho @ cd for c, cd in zip(cs, cdags))
        drho -= 0.5 * (anti @ rho + rho @ anti)
        return (gamma * drho).ravel()

    sol = solve_ivp(
        rhs,
        (0.0, t),
        rho0.matrix.ravel().astype(complex),
        method="DOP853",
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise IntegrationError(f"master-equation integration failed: {sol.message}")
    out = sol.y[:, -1].reshape(dim, dim)
    out = 0.5 * (out + out.conj().T)  # remove integrator's Hermiticity drift
    return DensityMatrix(out, validate=True, copy=False)


# ---------------------------------------------------------------------
# classical syndrome configurations
# ---------------------------------------------------------------------

@dataclass
class SyndromeConfig:
    """Classical +-1 assignment per plaquette and per star.

    On the torus both products are constrained to +1 (anyons come in
    pairs); every Monte Carlo move preserves the constraint exactly.
    """

    lattice: ToricLattice
    plaquette_bits: np.ndarray
    star_bits: np.ndarray

    def energy(self, e0: float = 1.0) -> float:
        return -e0 * float(self.plaquette_bits.sum() + self.star_bits.sum())

    def parity_ok(self) -> bool:
        return (
            int(np.prod(self.plaquette_bits)) == 1
            and int(np.prod(self.star_bits)) == 1
        )

    def copy(self) -> "SyndromeConfig":
        return SyndromeConfig(
            self.lattice, self.plaquette_bits.copy(), self.star_bits.copy()
        )


def sample_syndrome_config(
    lattice: ToricLattice, q_init: float, rng: np.random.Generator
) -> SyndromeConfig:
    """Stabilizer bits i.i.d. excited with probability q_init, then parity
    repaired by flipping one uniformly chosen bit per violated product."""

    def sample(count):
        bits = np.where(rng.random(count) < q_init, -1, 1).astype(np.int8)
        if int(np.prod(bits)) == -1:
            k = rng.integers(count)
            bits[k] = -bits[k]
        return bits

    return SyndromeConfig(
        lattice, sample(lattice.n_plaquettes), sample(lattice.n_stars)
    )


def _incidence_arrays(lattice: ToricLattice):
    return (
        np.asarray(lattice.plaquettes, dtype=np.int64),
        np.asarray(lattice.edge_plaquettes, dtype=np.int64),
        np.asarray(lattice.stars, dtype=np.int64),
        np.asarray(lattice.edge_stars, dtype=np.int64),
    )


def _sweep(pbits, sbits, arrays, prob, rng):
    p_edges, edge_pl, s_edges, edge_st = arrays
    for bits, cells, edge_cells in ((pbits, p_edges, edge_pl), (sbits, s_edges, edge_st)):
        count = len(bits)
        order = rng.permutation(count)
        u = rng.random(count)
        pick = rng.integers(0, 4, count)
        for k in range(count):
            cell = order[k]
            if bits[cell] < 0 and u[k] < prob:
                e = cells[cell, pick[k]]
                a, b = edge_cells[e]
                bits[a] = -bits[a]
                bits[b] = -bits[b]


def syndrome_mc_step(
    config: SyndromeConfig, theta: float, rng: np.random.Generator
) -> SyndromeConfig:
    """One sweep: every excited plaquette (then star), visited in random
    order, flips one uniformly random incident edge with probability
    sin^2(theta/2), toggling the two cells sharing that edge."""
    out = config.copy()
    _sweep(
        out.plaquette_bits,
        out.star_bits,
        _incidence_arrays(config.lattice),
        flip_probability(theta),
        rng,
    )
    return out


def _mc_energies(lattice, params, indices, e0=1.0, tag=0):
    arrays = _incidence_arrays(lattice)
    prob = flip_probability(params.theta)
    out = np.empty((len(indices), params.n_steps + 1))
    for row, k in enumerate(indices):
        rng = _stream(params.seed, tag, int(k))
        config = sample_syndrome_config(lattice, params.q_init, rng)
        pbits, sbits = config.plaquette_bits, config.star_bits
        out[row, 0] = -e0 * (pbits.sum() + sbits.sum())
        for step in range(1, params.n_steps + 1):
            _sweep(pbits, sbits, arrays, prob, rng)
            out[row, step] = -e0 * (pbits.sum() + sbits.sum())
    return out


# ---------------------------------------------------------------------
# circuit-level quantum trajectories
# ---------------------------------------------------------------------

def _chain_edges(lattice: ToricLattice, kind: str, i: int, j: int) -> list[int]:
    """Edges of a lattice path connecting two cells (used to imprint a
    chosen excitation pattern on the ground state)."""
    xi, yi = lattice.plaquette_xy(i)
    xj, yj = lattice.plaquette_xy(j)
    edges = []
    x, y = xi, yi
    for _ in range((xj - xi) % lattice.lx):
        nxt_x = (x + 1) % lattice.lx
        edges.append(
            lattice.shared_edge(
                kind, lattice.plaquette_index(x, y), lattice.plaquette_index(nxt_x, y)
            )
        )
        x = nxt_x
    for _ in range((yj - yi) % lattice.ly):
        nxt_y = (y + 1) % lattice.ly
        edges.append(
            lattice.shared_edge(
                kind, lattice.plaquette_index(x, y), lattice.plaquette_index(x, nxt_y)
            )
        )
        y = nxt_y
    return edges


def state_from_config(
    config: SyndromeConfig, n_qubits: int | None = None
) -> StateVector:
    """A stabilizer eigenstate with exactly the requested syndromes.

    Excited cells are paired up and connected by operator chains (Z chains
    move plaquette violations, X chains star violations) applied to the
    ground state; chain overlaps cancel modulo two.
    """
    lattice = config.lattice
    n = n_qubits or lattice.n_edges
    state = toric_ground_state(lattice, n)
    for kind, bits, letter in (
        ("plaquette", config.plaquette_bits, "Z"),
        ("star", config.star_bits, "X"),
    ):
        excited = [int(c) for c in np.flatnonzero(bits < 0)]
        if len(excited) % 2:
            raise ValueError("syndrome parity violated; cannot realize state")
        chain: set[int] = set()
        for a, b in zip(excited[::2], excited[1::2]):
            chain ^= set(_chain_edges(lattice, kind, a, b))
        if chain:
            state.apply_string(
                PauliString.from_sites(n, {e: letter for e in chain})
            )
    return state


def cooling_cycle_trajectory(
    state: StateVector,
    stabilizer_qubits,
    theta: float,
    rng: np.random.Generator,
    kind: str = "plaquette",
    ancilla: int | None = None,
    pump_qubit: int | None = None,
):
    """One ancilla-mediated cooling cycle on a four-spin stabilizer.

    Sequence: map the stabilizer eigenvalue onto the (|0>-prepared)
    ancilla, apply the controlled pump flip on one of the four spins
    (uniformly random unless given), unmap, measure the ancilla and pump it
    back to |0>.  Ground-sector states are exact fixed points; a violated
    stabilizer flips with probability sin^2(theta/2).

    Returns ``(state, flipped)``.
    """
    qubits = tuple(stabilizer_qubits)
    if len(qubits) != 4:
        raise ValueError("stabilizer acts on four spins")
    if ancilla is None:
        ancilla = state.n_qubits - 1
    if ancilla in qubits:
        raise ValueError("ancilla overlaps the stabilizer")
    letter, axis = ("X", "z") if kind == "plaquette" else ("Z", "x")
    if pump_qubit is None:
        pump_qubit = qubits[rng.integers(4)]
    elif pump_qubit not in qubits:
        raise ValueError("pump qubit must be one of the stabilizer spins")
    stab = PauliString.from_sites(state.n_qubits, {q: letter for q in qubits})
    syndrome_map(state, ancilla, stab)
    controlled_flip(state, ancilla, pump_qubit, theta, axis=axis)
    syndrome_map(state, ancilla, stab)
    outcome, _, _ = measure_projector(
        state, PauliString.single(state.n_qubits, ancilla, "Z"), rng
    )
    flipped = outcome == -1
    if flipped:  # optical pumping back to |0>
        state.apply_string(PauliString.single(state.n_qubits, ancilla, "X"))
    return state, flipped


def _toric_hamiltonian_padded(lattice: ToricLattice, n_qubits: int, e0: float):
    h, _ = build_toric(lattice.lx, lattice.ly, e0)
    return h.padded(n_qubits)


def _initial_trajectory_state(lattice, params, rng, n_total, init_mode):
    n_sys = lattice.n_edges
    if init_mode == "sample":
        config = sample_syndrome_config(lattice, params.q_init, rng)
        sys_state = state_from_config(config)
    elif init_mode == "basis":
        bits = rng.integers(0, 2, n_sys)
        index = int(sum(int(b) << k for k, b in enumerate(bits)))
        sys_state = StateVector.basis_state(n_sys, index)
        for p in range(lattice.n_plaquettes):
            measure_projector(sys_state, lattice.plaquette_string(p), rng)
    else:
        raise ValueError(f"unknown init_mode {init_mode!r}")
    amps = np.zeros(1 << n_total, dtype=complex)
    amps[: 1 << n_sys] = sys_state.amps  # ancilla (top qubit) starts in |0>
    return StateVector(amps, copy=False)


def _trajectory_energies(lattice, params, indices, e0=1.0, tag=1, init_mode="sample"):
    n_sys = lattice.n_edges
    n_total = n_sys + 1
    if n_total > TRAJECTORY_QUBIT_CAP:
        raise CapExceededError(
            f"trajectory engine needs {n_total} qubits, cap is {TRAJECTORY_QUBIT_CAP}"
        )
    h = _toric_hamiltonian_padded(lattice, n_total, e0)
    ancilla = n_sys
    out = np.empty((len(indices), params.n_steps + 1))
    for row, k in enumerate(indices):
        rng = _stream(params.seed, tag, int(k))
        state = _initial_trajectory_state(lattice, params, rng, n_total, init_mode)
        out[row, 0] = state.expectation(h)
        for step in range(1, params.n_steps + 1):
            for p in rng.permutation(lattice.n_plaquettes):
                cooling_cycle_trajectory(
                    state, lattice.plaquettes[p], params.theta, rng,
                    kind="plaquette", ancilla=ancilla,
                )
            for s in rng.permutation(lattice.n_stars):
                cooling_cycle_trajectory(
                    state, lattice.stars[s], params.theta, rng,
                    kind="star", ancilla=ancilla,
                )
            out[row, step] = state.expectation(h)
    return out


# ---------------------------------------------------------------------
# runs, parallel fan-out, engine comparison
# ---------------------------------------------------------------------

def _worker(payload):
    engine, lattice, params, indices, e0, tag, init_mode = payload
    if engine == "syndrome":
        return _mc_energies(lattice, params, indices, e0, tag)
    return _trajectory_energies(lattice, params, indices, e0, tag, init_mode)


def _fan_out(engine, lattice, params, e0, tag, init_mode, workers):
    indices = np.arange(params.n_trajectories)
    if workers <= 1 or params.n_trajectories < 4 * workers:
        return _worker((engine, lattice, params, indices, e0, tag, init_mode))
    chunks = np.array_split(indices, workers)
    payloads = [
        (engine, lattice, params, chunk, e0, tag, init_mode)
        for chunk in chunks
        if len(chunk)
    ]
    try:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_worker, payloads))
    except (OSError, PermissionError, BrokenProcessPool) as exc:
        # sandboxed environments may forbid subprocesses; fall back serially
        print(f"[rydsim] process pool unavailable ({exc}); running serially",
              file=sys.stderr)
        parts = [_worker(p) for p in payloads]
    return np.vstack(parts)


def _trace_from_energies(energies, params, engine) -> Trace:
    n = energies.shape[0]
    mean = energies.mean(axis=0)
    if n > 1:
        stderr = energies.std(axis=0, ddof=1) / np.sqrt(n)
    else:
        stderr = np.zeros_like(mean)
    return Trace(
        steps=np.arange(energies.shape[1]),
        mean_energy=mean,
        stderr=stderr,
        n_trajectories=n,
        theta=params.theta,
        engine=engine,
    )


def syndrome_mc_run(
    lattice: ToricLattice,
    params: CoolingParams,
    e0: float = 1.0,
    workers: int = 1,
) -> Trace:
    """Mean energy trace of the classical syndrome Monte Carlo."""
    energies = _fan_out("syndrome", lattice, params, e0, 0, "sample", workers)
    return _trace_from_energies(energies, params, "syndrome")


def trajectory_run(
    lattice: ToricLattice,
    params: CoolingParams,
    e0: float = 1.0,
    workers: int = 1,
    init_mode: str = "sample",
) -> Trace:
    """Mean energy trace of the circuit-level quantum trajectories.

    The lattice must fit in a dense state vector with one ancilla (the 2x2
    torus: 8 system qubits + 1 reused ancilla).
    """
    energies = _fan_out("trajectory", lattice, params, e0, 1, init_mode, workers)
    return _trace_from_energies(energies, params, "trajectory")


def equivalence_check(
    lattice: ToricLattice,
    params: CoolingParams,
    e0: float = 1.0,
    workers: int = 1,
    z_threshold: float = 3.0,
) -> EquivalenceReport:
    """Certify the syndrome Monte Carlo against the quantum trajectories.

    Both engines start from the same initial syndrome distribution (at
    q_init = 1/2 the quantum side uses a uniformly random computational
    basis state followed by one projective readout of all plaquettes) and
    their mean energy traces must agree within the combined z threshold at
    every step.
    """
    mc = syndrome_mc_run(lattice, params, e0, workers)
    if params.q_init == 0.0:
        init_mode = "sample"  # ground sector exactly; chains are empty
    elif abs(params.q_init - 0.5) < 1e-12:
        init_mode = "basis"
    else:
        init_mode = "sample"
    qt = trajectory_run(lattice, params, e0, workers, init_mode=init_mode)
    diff = np.abs(mc.mean_energy - qt.mean_energy)
    sigma = np.sqrt(mc.stderr**2 + qt.stderr**2)
    z = np.where(diff <= 1e-9, 0.0, diff / np.maximum(sigma, 1e-300))
    return EquivalenceReport(mc=mc, trajectory=qt, z_scores=z, z_threshold=z_threshold)


def lindblad_reference_trace(
    theta: float,
    n_steps: int,
    q_init: float = 0.5,
    e0: float = 1.0,
) -> Trace:
    """Master-equation trace for the single-plaquette reference system.

    Four spins, one jump operator (pump on the first plaquette edge), rate
    sin^2(theta/2) per unit time so the small-theta limit matches one
    cooling sweep per time unit.  The excited population decays as
    exp(-gamma t) in closed form.
    """
    lattice = ToricLattice.build(2, 2)
    plaq = lattice.plaquettes[0]
    # standalone plaquette: relabel its four edges to qubits 0..3
    relabel = {e: k for k, e in enumerate(plaq)}
    a_p = PauliString.from_sites(4, {relabel[e]: "X" for e in plaq})
    pump = OperatorSum.from_string(PauliString.single(4, 0, "Z"))
    interrogate = OperatorSum.identity(4) - OperatorSum.from_string(a_p)
    jump = (0.5 * (pump @ interrogate)).normalized()
    h_local = OperatorSum.from_string(a_p, -e0)

    a_mat = a_p.to_matrix()
    proj_minus = 0.5 * (np.eye(16) - a_mat)
    proj_plus = 0.5 * (np.eye(16) + a_mat)
    rho0 = DensityMatrix(
        q_init * proj_minus / 8.0 + (1.0 - q_init) * proj_plus / 8.0, copy=False
    )
    gamma = flip_probability(theta)
    energies = np.empty(n_steps + 1)
    rho = rho0
    energies[0] = rho.expectation(h_local)
    for step in range(1, n_steps + 1):
        rho = lindblad_integrate([jump], gamma, rho, 1.0)
        energies[step] = rho.expectation(h_local)
    return Trace(
        steps=np.arange(n_steps + 1),
        mean_energy=energies,
        stderr=np.zeros(n_steps + 1),
        n_trajectories=1,
        theta=theta,
        engine="lindblad",
    )
