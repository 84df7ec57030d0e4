"""Dense state-vector backend and density-matrix support.

States are complex amplitude arrays over 2^n basis indices with qubit k on
bit k of the index.  Operations mutate the state buffer in place and return
the instance; use :meth:`StateVector.copy` to branch.  Every stochastic
operation takes an explicit ``numpy.random.Generator`` so identical seeds
give identical trajectories.

Units: hbar = 1 and the toric coupling E0 = 1, so times are in hbar/E0.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import CapExceededError, DimensionMismatchError
from .pauli import OperatorSum, PauliString

#: exact-propagator dense cap
PROPAGATOR_QUBIT_CAP = 10


@lru_cache(maxsize=256)
def _xor_index(n_qubits: int, x_mask: int) -> np.ndarray:
    idx = np.arange(1 << n_qubits, dtype=np.int64) ^ x_mask
    idx.setflags(write=False)
    return idx


@lru_cache(maxsize=256)
def _sign_vector(n_qubits: int, z_mask: int) -> np.ndarray:
    """(-1)**parity(z_mask & index) over all basis indices."""
    v = np.arange(1 << n_qubits, dtype=np.int64) & z_mask
    for shift in (32, 16, 8, 4, 2, 1):
        v ^= v >> shift
    signs = 1.0 - 2.0 * (v & 1)
    signs.setflags(write=False)
    return signs


def _string_image(amps: np.ndarray, n: int, p: PauliString) -> np.ndarray:
    """Return P|psi> as a fresh array."""
    coef = 1j ** ((p.phase_exp + 3 * (p.x_mask & p.z_mask).bit_count()) % 4)
    out = amps[_xor_index(n, p.x_mask)] if p.x_mask else amps.copy()
    if p.z_mask:
        out *= _sign_vector(n, p.z_mask)
    if coef != 1:
        out *= coef
    return out


class StateVector:
    """Normalized dense amplitude vector over 2^n basis states."""

    __slots__ = ("n_qubits", "amps")

    def __init__(self, amplitudes, copy: bool = True):
        amps = (np.array(amplitudes, dtype=complex) if copy
                else np.asarray(amplitudes, dtype=complex))
        if amps.ndim != 1 or amps.size & (amps.size - 1):
            raise ValueError("amplitude array length must be a power of two")
        self.n_qubits = int(amps.size.bit_length() - 1)
        self.amps = amps

    # -- constructors -------------------------------------------------

    @classmethod
    def zero_state(cls, n_qubits: int) -> "StateVector":
        return cls.basis_state(n_qubits, 0)

    @classmethod
    def basis_state(cls, n_qubits: int, bits) -> "StateVector":
        """|bits>.  Accepts an integer index or a string read as qubit 0, 1, ...."""
        if isinstance(bits, str):
            if len(bits) != n_qubits:
                raise ValueError("bitstring length != n_qubits")
            index = sum(1 << k for k, b in enumerate(bits) if b == "1")
        else:
            index = int(bits)
        if not 0 <= index < (1 << n_qubits):
            raise ValueError(f"basis index {index} out of range")
        amps = np.zeros(1 << n_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(amps, copy=False)

    @classmethod
    def random_state(cls, n_qubits: int, rng: np.random.Generator) -> "StateVector":
        amps = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
        amps /= np.linalg.norm(amps)
        return cls(amps, copy=False)

    # -- inspection ---------------------------------------------------

    def copy(self) -> "StateVector":
        return StateVector(self.amps, copy=True)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalize(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize a zero state")
        self.amps /= n
        return self

    def inner(self, other: "StateVector") -> complex:
        self._check(other.n_qubits)
        return complex(np.vdot(self.amps, other.amps))

    def fidelity(self, other: "StateVector") -> float:
        return abs(self.inner(other))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def _check(self, n: int):
        if n != self.n_qubits:
            raise DimensionMismatchError(
                f"operator on {n} qubits applied to {self.n_qubits}-qubit state"
            )

    # -- operations ---------------------------------------------------

    def apply_string(self, p: PauliString) -> "StateVector":
        """|psi> -> P|psi> (norm preserving; involutive up to phase^2)."""
        self._check(p.n_qubits)
        self.amps = _string_image(self.amps, self.n_qubits, p)
        return self

    def apply_exp_pauli(self, p: PauliString, theta: float) -> "StateVector":
        """|psi> -> exp(i theta P)|psi> = (cos(theta) + i sin(theta) P)|psi>.

        Requires a Hermitian string (phase +-1), for which P^2 = 1.
        """
        self._check(p.n_qubits)
        if not p.is_hermitian():
            raise ValueError("exp_pauli requires a Hermitian string (phase +-1)")
        image = _string_image(self.amps, self.n_qubits, p)
        self.amps = np.cos(theta) * self.amps + (1j * np.sin(theta)) * image
        return self

    def apply_operator(self, matrix: np.ndarray, qubits) -> "StateVector":
        """Apply a dense 2^k x 2^k operator to the listed qubits.

        ``qubits[0]`` corresponds to the most-significant bit of the matrix
        index, i.e. ``matrix = kron(op_on_qubits[0], op_on_qubits[1], ...)``.
        """
        qubits = list(qubits)
        k = len(qubits)
        if len(set(qubits)) != k:
            raise ValueError("duplicate qubit in operator application")
        for q in qubits:
            if not 0 <= q < self.n_qubits:
                raise IndexError(f"qubit {q} out of range")
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape != (1 << k, 1 << k):
            raise ValueError("operator matrix shape does not match qubit count")
        n = self.n_qubits
        psi = self.amps.reshape((2,) * n)
        axes = [n - 1 - q for q in qubits]
        moved = np.moveaxis(psi, axes, range(k))
        shape = moved.shape
        block = moved.reshape(1 << k, -1)
        block = matrix @ block
        moved = block.reshape(shape)
        psi = np.moveaxis(moved, range(k), axes)
        self.amps = np.ascontiguousarray(psi).reshape(1 << n)
        return self

    def expectation_string(self, p: PauliString) -> complex:
        self._check(p.n_qubits)
        return complex(np.vdot(self.amps, _string_image(self.amps, self.n_qubits, p)))

    def expectation(self, h: OperatorSum) -> float:
        """<psi|H|psi> for Hermitian H; bounded by sum |coefficients|."""
        self._check(h.n_qubits)
        if not h.is_hermitian():
            raise ValueError("expectation requires a Hermitian operator sum")
        value = sum(c * self.expectation_string(s) for c, s in h.normalized())
        return float(value.real)

    def __repr__(self):
        return f"StateVector(n={self.n_qubits}, norm={self.norm():.6f})"


def measure_projector(state: StateVector, p: PauliString, rng: np.random.Generator):
    """Projective +-1 measurement of a Hermitian Pauli string.

    Samples the outcome with Born probabilities, collapses and renormalizes
    the state in place.  Returns ``(outcome, state, probability)`` where
    probability is that of the sampled outcome; a branch of zero weight is
    never selected.
    """
    if not p.is_hermitian():
        raise ValueError("measurement requires a Hermitian string")
    image = _string_image(state.amps, state.n_qubits, p)
    p_plus = 0.5 * (1.0 + float(np.vdot(state.amps, image).real))
    p_plus = min(1.0, max(0.0, p_plus))
    if rng.random() < p_plus:
        outcome, prob = +1, p_plus
        state.amps = (state.amps + image) * (0.5 / np.sqrt(p_plus))
    else:
        outcome, prob = -1, 1.0 - p_plus
        state.amps = (state.amps - image) * (0.5 / np.sqrt(1.0 - p_plus))
    return outcome, state, prob


def exact_propagator(h: OperatorSum, t: float, n_qubits: int | None = None) -> np.ndarray:
    """exp(-i H t) via Hermitian eigendecomposition (oracle path, n <= 10)."""
    if n_qubits is None:
        n_qubits = h.n_qubits
    if n_qubits > PROPAGATOR_QUBIT_CAP:
        raise CapExceededError(
            f"exact propagator capped at {PROPAGATOR_QUBIT_CAP} qubits"
        )
    if not h.is_hermitian():
        raise ValueError("propagator requires a Hermitian Hamiltonian")
    w, v = np.linalg.eigh(h.to_matrix(n_qubits))
    return (v * np.exp(-1j * w * t)) @ v.conj().T


class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite 2^n x 2^n operator."""

    __slots__ = ("n_qubits", "matrix")

    HERMITICITY_TOL = 1e-10
    TRACE_TOL = 1e-8
    POSITIVITY_TOL = -1e-8

    def __init__(self, matrix, validate: bool = True, copy: bool = True):
        mat = (np.array(matrix, dtype=complex) if copy
               else np.asarray(matrix, dtype=complex))
        dim = mat.shape[0]
        if mat.ndim != 2 or mat.shape != (dim, dim) or dim & (dim - 1):
            raise ValueError("density matrix must be square with 2^n rows")
        self.n_qubits = int(dim.bit_length() - 1)
        self.matrix = mat
        if validate:
            self.validate()

    def validate(self):
        if np.max(np.abs(self.matrix - self.matrix.conj().T)) > self.HERMITICITY_TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(self.trace() - 1.0) > self.TRACE_TOL:
            raise ValueError(f"density matrix trace {self.trace()} != 1")
        if float(np.linalg.eigvalsh(self.matrix)[0]) < self.POSITIVITY_TOL:
            raise ValueError("density matrix has a significantly negative eigenvalue")

    @classmethod
    def from_state(cls, state: StateVector) -> "DensityMatrix":
        return cls(np.outer(state.amps, state.amps.conj()), validate=False)

    @classmethod
    def from_mixture(cls, pairs) -> "DensityMatrix":
        """Mixture of (weight, StateVector) pairs; weights must sum to 1."""
        pairs = list(pairs)
        mat = sum(w * np.outer(s.amps, s.amps.conj()) for w, s in pairs)
        return cls(mat, validate=True, copy=False)

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def expectation(self, h: OperatorSum) -> float:
        if not h.is_hermitian():
            raise ValueError("expectation requires a Hermitian operator sum")
        return float(np.trace(h.to_matrix(self.n_qubits) @ self.matrix).real)

    def expectation_matrix(self, mat: np.ndarray) -> float:
        return float(np.trace(mat @ self.matrix).real)

    def copy(self) -> "DensityMatrix":
        return DensityMatrix(self.matrix, validate=False, copy=True)

    def __repr__(self):
        return f"DensityMatrix(n={self.n_qubits}, trace={self.trace():.6f})"
