"""Suzuki-Trotter compilation of operator sums into gate-level circuits.

Each Hamiltonian term exp(-i tau c P) is mapped to the gate primitive that
realizes it: four-body X/Z terms become plaquette/star steps (gate-framed
control rotations), two-body XX/YY/ZZ terms become Heisenberg steps,
three-body hopping terms become the Hadamard-framed gate sequence, and
anything else falls back to a generic Pauli exponential.  Gates inside a
step are emitted in a fixed deterministic order and carry a greedy
sublattice coloring as metadata (execution is sequential).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gates as _g
from .errors import CapExceededError, UnmappedTermError
from .pauli import OperatorSum, PauliString
from .statevec import StateVector

_KIND_RANK = {
    "plaquette": 0,
    "star": 1,
    "xx": 2,
    "yy": 3,
    "zz": 4,
    "hop_xxz": 5,
    "hop_yyz": 6,
    "exp_pauli": 7,
}


@dataclass(frozen=True)
class Gate:
    """One gate application; ``param`` is the primitive's own angle."""

    kind: str
    qubits: tuple[int, ...]
    param: float
    string: PauliString | None = None
    origin: str = ""
    color: int = 0


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...]

    def __len__(self):
        return len(self.gates)


def _term_to_gate(coeff: complex, string: PauliString, tau: float) -> Gate:
    """Gate realizing exp(-i tau coeff P) for one normalized term."""
    if abs(coeff.imag) > 1e-12 * (1.0 + abs(coeff)):
        raise UnmappedTermError(
            f"term {string.to_label()} has non-real coefficient {coeff}"
        )
    c = coeff.real
    support = string.support()
    letters = "".join(string.letter(q) for q in support)
    origin = f"{string.to_label()}"
    if letters == "XXXX":
        return Gate("plaquette", support, -tau * c, origin=origin)
    if letters == "ZZZZ":
        return Gate("star", support, -tau * c, origin=origin)
    if letters in ("XX", "YY", "ZZ"):
        return Gate(letters.lower(), support, -2.0 * tau * c, origin=origin)
    if len(letters) == 3 and sorted(letters) in (["X", "X", "Z"], ["Y", "Y", "Z"]):
        z_site = support[letters.index("Z")]
        hop = tuple(q for q in support if q != z_site)
        kind = "hop_xxz" if "X" in letters else "hop_yyz"
        return Gate(kind, (*hop, z_site), -tau * c, origin=origin)
    return Gate("exp_pauli", support, -tau * c, string=string, origin=origin)


def _color_gates(step_gates: list[Gate]) -> list[Gate]:
    """Greedy sublattice coloring: gates of one color act on disjoint qubits."""
    used: list[set[int]] = []
    colored = []
    for g in step_gates:
        qubits = set(g.qubits)
        for color, occupied in enumerate(used):
            if not occupied & qubits:
                occupied |= qubits
                break
        else:
            color = len(used)
            used.append(set(qubits))
        colored.append(Gate(g.kind, g.qubits, g.param, g.string, g.origin, color))
    return colored


def trotterize(h: OperatorSum, tau: float, n_steps: int, order: int = 1) -> Circuit:
    """Compile exp(-i H tau) per step, repeated n_steps times.

    Order 1 emits the product of per-term exponentials; order 2 emits the
    symmetrized palindrome of half-steps.  Exact whenever all terms
    commute.  Deterministic: identical inputs give identical circuits.
    """
    if order not in (1, 2):
        raise ValueError("only orders 1 and 2 are supported")
    if n_steps < 0:
        raise ValueError("n_steps must be non-negative")
    terms = [
        (c, s) for c, s in h.normalized() if not s.is_identity()
    ]  # a global phase is not observable; identity terms are dropped
    if order == 1:
        step = [_term_to_gate(c, s, tau) for c, s in terms]
        step.sort(key=lambda g: (_KIND_RANK[g.kind], g.qubits))
        step = _color_gates(step)
    else:
        half = [_term_to_gate(c, s, tau / 2.0) for c, s in terms]
        half.sort(key=lambda g: (_KIND_RANK[g.kind], g.qubits))
        step = _color_gates(half + half[::-1])
    return Circuit(h.n_qubits, tuple(step) * n_steps)


_DISPATCH = {
    "plaquette": lambda st, g: _g.plaquette_step(st, g.qubits, g.param),
    "star": lambda st, g: _g.star_step(st, g.qubits, g.param),
    "xx": lambda st, g: _g.heisenberg_xx_step(st, *g.qubits, g.param),
    "yy": lambda st, g: _g.heisenberg_yy_step(st, *g.qubits, g.param),
    "zz": lambda st, g: _g.heisenberg_zz_step(st, *g.qubits, g.param),
    "hop_xxz": lambda st, g: _g.hopping_step(st, *g.qubits, g.param, basis="x"),
    "hop_yyz": lambda st, g: _g.hopping_step(st, *g.qubits, g.param, basis="y"),
    "exp_pauli": lambda st, g: st.apply_exp_pauli(g.string, g.param),
}


def run(circuit: Circuit, initial: StateVector) -> StateVector:
    """Apply the circuit to a copy of the initial state."""
    if initial.n_qubits != circuit.n_qubits:
        raise ValueError("circuit and state sizes differ")
    state = initial.copy()
    for gate in circuit.gates:
        _DISPATCH[gate.kind](state, gate)
    return state


def compile_hopping_term(
    i: int, j: int, string_site: int, t_hop: float, tau: float
) -> Circuit:
    """Circuit for one fermion hopping term split into its XXZ and YYZ parts.

    Realizes exp(i phi X_i X_j Z_k) exp(i phi Y_i Y_j Z_k) with phi =
    t_hop * tau; the two factors commute, so their order is irrelevant.
    """
    if len({i, j, string_site}) != 3:
        raise ValueError("hopping term needs three distinct qubits")
    n = max(i, j, string_site) + 1
    phi = t_hop * tau
    gates = (
        Gate("hop_xxz", (i, j, string_site), phi, origin="hopping XX part"),
        Gate("hop_yyz", (i, j, string_site), phi, origin="hopping YY part"),
    )
    return Circuit(n, gates)


def circuit_matrix(circuit: Circuit) -> np.ndarray:
    """Dense unitary of a circuit (oracle helper, n <= 10)."""
    if circuit.n_qubits > 10:
        raise CapExceededError("circuit_matrix capped at 10 qubits")
    dim = 1 << circuit.n_qubits
    mat = np.empty((dim, dim), dtype=complex)
    for col in range(dim):
        mat[:, col] = run(circuit, StateVector.basis_state(circuit.n_qubits, col)).amps
    return mat
