"""Circuit-level mesoscopic Rydberg gate and the composite sequences built
from it: the many-target controlled flip, the plaquette/star phase steps,
the two-qubit Heisenberg step, the syndrome map and the controlled pump
flips used by the cooling protocol, plus the coherent gate-error model.

Rotation conventions: ``rot_x(state, q, phi)`` applies exp(i phi X_q) (and
analogously for Y/Z); ``controlled_flip`` applies exp(i theta P/2) on the
|1> branch of the control, so a full cooling cycle flips a violated
stabilizer with probability sin^2(theta/2).  All gate functions mutate the
state in place and return it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pauli import OperatorSum, PauliString
from .statevec import StateVector

_P0 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
_P1 = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)
_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / math.sqrt(2.0)


@dataclass(frozen=True)
class GateSpec:
    """Geometry and error model of one mesoscopic gate application.

    ``fault_generator`` is the Hermitian generator acting on the targets
    only (the control is excluded); it may be given either on the full
    register with support inside the targets, or directly on
    ``len(targets)`` qubits ordered like ``targets``.
    """

    control: int
    targets: tuple[int, ...]
    kind: str = "ideal"
    fault_generator: OperatorSum | None = None
    fault_phase: float = 0.0

    def __post_init__(self):
        targets = tuple(self.targets)
        object.__setattr__(self, "targets", targets)
        if not targets:
            raise ValueError("gate needs at least one target")
        if len(set(targets)) != len(targets):
            raise ValueError("duplicate target qubit")
        if self.control in targets:
            raise ValueError("control qubit cannot also be a target")
        if self.kind not in ("ideal", "faulty"):
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind == "faulty":
            if self.fault_generator is None:
                raise ValueError("faulty gate requires a fault generator")
            if not self.fault_generator.is_hermitian():
                raise ValueError("fault generator must be Hermitian")


def _local_matrix(op: OperatorSum, qubits: tuple[int, ...]) -> np.ndarray:
    """Dense matrix of an operator restricted to the listed qubits.

    ``qubits[0]`` becomes the most-significant bit of the local index,
    matching :meth:`StateVector.apply_operator`.
    """
    k = len(qubits)
    if op.n_qubits == k:
        local = op
    else:
        pos = {q: j for j, q in enumerate(qubits)}
        terms = []
        for c, s in op.normalized():
            x = z = 0
            for q in range(op.n_qubits):
                xb = (s.x_mask >> q) & 1
                zb = (s.z_mask >> q) & 1
                if not (xb or zb):
                    continue
                if q not in pos:
                    raise ValueError(
                        f"operator has support on qubit {q} outside the targets"
                    )
                x |= xb << pos[q]
                z |= zb << pos[q]
            terms.append((c * s.phase, PauliString(k, x, z)))
        local = OperatorSum(terms, k)
    mat = local.to_matrix()
    # local qubit j sits on bit j; flip to qubits[0] = most significant
    perm = np.zeros(1 << k, dtype=np.int64)
    for i in range(1 << k):
        rev = 0
        for j in range(k):
            rev |= ((i >> j) & 1) << (k - 1 - j)
        perm[i] = rev
    return mat[np.ix_(perm, perm)]


def cnot_n(state: StateVector, control: int, targets) -> StateVector:
    """Controlled-NOT^N: X on every target when the control is |1>."""
    targets = tuple(targets)
    GateSpec(control, targets)  # geometry validation
    n = state.n_qubits
    for q in (control, *targets):
        if not 0 <= q < n:
            raise IndexError(f"qubit {q} out of range")
    tmask = 0
    for q in targets:
        tmask |= 1 << q
    idx = np.arange(1 << n, dtype=np.int64)
    perm = idx ^ (tmask * ((idx >> control) & 1))
    state.amps = state.amps[perm]
    return state


def faulty_gate(state: StateVector, spec: GateSpec) -> StateVector:
    """Mesoscopic gate with a coherent error on the |0> branch.

    Applies ``|0><0|_c (x) exp(i phi Q) + |1><1|_c (x) X^N``; reduces to the
    ideal gate when the generator vanishes or the phase is zero.
    """
    if spec.kind != "faulty":
        raise ValueError("faulty_gate requires a spec with kind='faulty'")
    q_local = _local_matrix(spec.fault_generator, spec.targets)
    w, v = np.linalg.eigh(q_local)
    u0 = (v * np.exp(1j * spec.fault_phase * w)) @ v.conj().T
    k = len(spec.targets)
    xn = np.eye(1 << k, dtype=complex)[::-1]  # X^(x)k is the anti-identity
    gate = np.kron(_P0, u0) + np.kron(_P1, xn)
    return state.apply_operator(gate, (spec.control, *spec.targets))


def rot_x(state: StateVector, qubit: int, phi: float) -> StateVector:
    """exp(i phi X_q); the single-qubit rotation sandwiched between gates."""
    return state.apply_exp_pauli(PauliString.single(state.n_qubits, qubit, "X"), phi)


def rot_y(state: StateVector, qubit: int, phi: float) -> StateVector:
    return state.apply_exp_pauli(PauliString.single(state.n_qubits, qubit, "Y"), phi)


def rot_z(state: StateVector, qubit: int, phi: float) -> StateVector:
    return state.apply_exp_pauli(PauliString.single(state.n_qubits, qubit, "Z"), phi)


def hadamard(state: StateVector, qubit: int) -> StateVector:
    return state.apply_operator(_HADAMARD, (qubit,))


def plaquette_step(state: StateVector, plaquette, phi: float) -> StateVector:
    """exp(i phi XXXX) on four spins, as gate-conjugated control rotation.

    The first listed spin takes the role of the control; the sequence
    G . exp(i phi X_c) . G realizes the four-body phase exactly.
    """
    plaquette = tuple(plaquette)
    if len(plaquette) != 4 or len(set(plaquette)) != 4:
        raise ValueError("plaquette must list four distinct qubits")
    control, targets = plaquette[0], plaquette[1:]
    cnot_n(state, control, targets)
    rot_x(state, control, phi)
    cnot_n(state, control, targets)
    return state


def star_step(state: StateVector, star, phi: float) -> StateVector:
    """exp(i phi ZZZZ), via Hadamard conjugation of the plaquette step."""
    star = tuple(star)
    if len(star) != 4 or len(set(star)) != 4:
        raise ValueError("star must list four distinct qubits")
    for q in star:
        hadamard(state, q)
    plaquette_step(state, star, phi)
    for q in star:
        hadamard(state, q)
    return state


def _controlled_1q(state, control, target, u_on_one):
    gate = np.kron(_P0, np.eye(2, dtype=complex)) + np.kron(_P1, u_on_one)
    return state.apply_operator(gate, (control, target))


def heisenberg_xx_step(state: StateVector, i: int, j: int, theta: float) -> StateVector:
    """exp(i theta X_i X_j / 2) from rotations and a controlled partial flip.

    Sequence (right to left): Ry_i(pi/2), controlled partial flip of atom j
    on the |1> branch of atom i, X rotation on j, inverse Ry on i.
    """
    if i == j:
        raise ValueError("Heisenberg step needs two distinct qubits")
    rot_y(state, i, math.pi / 4.0)
    # |0><0| (x) 1 + |1><1| (x) exp(-i theta X_j): full flip at theta = pi
    flip = math.cos(theta) * np.eye(2) - 1j * math.sin(theta) * np.array(
        [[0.0, 1.0], [1.0, 0.0]]
    )
    _controlled_1q(state, i, j, flip.astype(complex))
    rot_x(state, j, theta / 2.0)
    rot_y(state, i, -math.pi / 4.0)
    return state


def heisenberg_yy_step(state: StateVector, i: int, j: int, theta: float) -> StateVector:
    """exp(i theta Y_i Y_j / 2); Z-rotation conjugation of the XX step."""
    for q in (i, j):
        rot_z(state, q, math.pi / 4.0)
    heisenberg_xx_step(state, i, j, theta)
    for q in (i, j):
        rot_z(state, q, -math.pi / 4.0)
    return state


def heisenberg_zz_step(state: StateVector, i: int, j: int, theta: float) -> StateVector:
    """exp(i theta Z_i Z_j / 2); Y-rotation conjugation of the XX step."""
    for q in (i, j):
        rot_y(state, q, math.pi / 4.0)
    heisenberg_xx_step(state, i, j, theta)
    for q in (i, j):
        rot_y(state, q, -math.pi / 4.0)
    return state


def hopping_step(
    state: StateVector, i: int, j: int, string_site: int, phi: float, basis: str = "x"
) -> StateVector:
    """exp(i phi X_i X_j Z_k) (basis "x") or exp(i phi Y_i Y_j Z_k) ("y").

    Realized as U^H_k G U^x_c(phi) G U^H_k with the first hop site as the
    control of the three-atom gate; the "y" variant conjugates the hop
    sites with Z rotations that swap X and Y.
    """
    if len({i, j, string_site}) != 3:
        raise ValueError("hopping step needs three distinct qubits")
    if basis not in ("x", "y"):
        raise ValueError("basis must be 'x' or 'y'")
    if basis == "y":
        for q in (i, j):
            rot_z(state, q, math.pi / 4.0)
    hadamard(state, string_site)
    cnot_n(state, i, (j, string_site))
    rot_x(state, i, phi)
    cnot_n(state, i, (j, string_site))
    hadamard(state, string_site)
    if basis == "y":
        for q in (i, j):
            rot_z(state, q, -math.pi / 4.0)
    return state


def controlled_string(state: StateVector, control: int, p: PauliString) -> StateVector:
    """|0><0|_c (x) 1 + |1><1|_c (x) P for a Hermitian string P.

    A pure-X string is exactly the mesoscopic gate and takes the fast
    permutation path; anything else goes through a dense controlled block.
    """
    if not p.is_hermitian():
        raise ValueError("controlled string must be Hermitian")
    support = p.support()
    if control in support:
        raise ValueError("control overlaps the string support")
    if p.z_mask == 0 and p.phase_exp == 0:
        return cnot_n(state, control, support)
    local = _local_matrix(OperatorSum.from_string(p), tuple(support))
    gate = np.kron(_P0, np.eye(1 << len(support), dtype=complex)) + np.kron(_P1, local)
    return state.apply_operator(gate, (control, *support))


def syndrome_map(state: StateVector, control: int, stabilizer: PauliString) -> StateVector:
    """Map a +-1 stabilizer eigenvalue onto the control atom.

    Ry_c(pi/2)^-1 . (controlled stabilizer) . Ry_c(pi/2): eigenvalue +1
    leaves the control in |0>, eigenvalue -1 flips it to |1>.  Involutive.
    """
    rot_y(state, control, -math.pi / 4.0)
    controlled_string(state, control, stabilizer)
    rot_y(state, control, math.pi / 4.0)
    return state


def syndrome_map_S(state: StateVector, control: int, plaquette) -> StateVector:
    """Plaquette (XXXX) specialization of :func:`syndrome_map`, built on G."""
    plaquette = tuple(plaquette)
    if len(plaquette) != 4 or len(set(plaquette)) != 4:
        raise ValueError("plaquette must list four distinct qubits")
    stab = PauliString.from_sites(state.n_qubits, {q: "X" for q in plaquette})
    return syndrome_map(state, control, stab)


def controlled_flip(
    state: StateVector, control: int, target: int, theta: float, axis: str = "z"
) -> StateVector:
    """exp(i theta sigma^axis_target / 2) on the |1> branch of the control."""
    if control == target:
        raise ValueError("control and target must differ")
    if axis == "z":
        u1 = np.diag([np.exp(0.5j * theta), np.exp(-0.5j * theta)])
    elif axis == "x":
        u1 = math.cos(theta / 2.0) * np.eye(2) + 1j * math.sin(theta / 2.0) * np.array(
            [[0.0, 1.0], [1.0, 0.0]]
        )
    else:
        raise ValueError("axis must be 'z' or 'x'")
    return _controlled_1q(state, control, target, u1.astype(complex))


def controlled_zflip(state: StateVector, control: int, target: int, theta: float) -> StateVector:
    return controlled_flip(state, control, target, theta, axis="z")


def flip_probability(theta: float) -> float:
    """Probability that one cooling cycle flips a violated stabilizer.

    sin^2(theta/2): unity at theta = pi, theta^2/4 for small angles.
    """
    return math.sin(theta / 2.0) ** 2
