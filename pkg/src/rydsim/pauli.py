"""Exact algebra of Pauli strings and their weighted sums.

A Pauli string is ``phase * (P_{n-1} x ... x P_1 x P_0)`` with each factor in
{I, X, Y, Z}.  Site content is stored as two bitmasks: bit k of ``x_mask`` /
``z_mask`` is set when the qubit-k factor contains an X / Z component, and
both bits set means Y.  The phase is stored exactly as a power of the
imaginary unit, so every group identity (products, commutators, adjoints)
is computed on integers and holds bit-exactly.  Floating point enters only
through the coefficients of :class:`OperatorSum`.

Conventions used throughout the package:

* qubit k corresponds to bit k of a computational basis index,
* string labels such as ``"IXYZ"`` read left to right as qubit 0, 1, 2, ...
* dense matrices are ``kron(P_{n-1}, ..., P_1, P_0)``, which makes the two
  conventions consistent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapExceededError, DimensionMismatchError

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}
_PHASE_VALUES = (1 + 0j, 1j, -1 + 0j, -1j)
_PHASE_LABELS = ("+", "+i", "-", "-i")

_PAULI_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1j], [1j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}

#: dense realizations are capped at this many qubits (4096-dimensional)
MATRIX_QUBIT_CAP = 12

#: coefficients below this magnitude are dropped during normalization
COEFF_EPS = 1e-12


def _phase_to_exp(phase) -> int:
    """Map a unit phase value {1, i, -1, -i} to its exponent of i."""
    value = complex(phase)
    for k, ref in enumerate(_PHASE_VALUES):
        if value == ref:
            return k
    raise ValueError(f"phase must be one of 1, i, -1, -i, got {phase!r}")


@dataclass(frozen=True)
class PauliString:
    """A signed/phased tensor product of single-site Pauli operators.

    The represented operator is ``i**phase_exp * C(x_mask, z_mask)`` where C
    is the phase-free convention with Y at every site that has both mask
    bits set.  Instances are immutable and hashable.
    """

    n_qubits: int
    x_mask: int
    z_mask: int
    phase_exp: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        full = (1 << self.n_qubits) - 1
        if self.x_mask & ~full or self.z_mask & ~full:
            raise ValueError("mask has bits outside the qubit register")
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    # -- constructors -------------------------------------------------

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits, 0, 0)

    @classmethod
    def from_label(cls, label: str, phase=1) -> "PauliString":
        """Build from a word like ``"IXYZ"`` (leftmost letter = qubit 0)."""
        x = z = 0
        for k, letter in enumerate(label):
            try:
                xb, zb = _LETTER_BITS[letter.upper()]
            except KeyError:
                raise ValueError(f"invalid Pauli letter {letter!r}") from None
            x |= xb << k
            z |= zb << k
        return cls(len(label), x, z, _phase_to_exp(phase))

    @classmethod
    def from_sites(cls, n_qubits: int, sites, phase=1) -> "PauliString":
        """Build from a ``{qubit: letter}`` mapping; unlisted qubits are I."""
        x = z = 0
        for q, letter in dict(sites).items():
            if not 0 <= q < n_qubits:
                raise IndexError(f"qubit {q} outside register of {n_qubits}")
            xb, zb = _LETTER_BITS[letter.upper()]
            x |= xb << q
            z |= zb << q
        return cls(n_qubits, x, z, _phase_to_exp(phase))

    @classmethod
    def single(cls, n_qubits: int, qubit: int, letter: str, phase=1) -> "PauliString":
        return cls.from_sites(n_qubits, {qubit: letter}, phase)

    # -- inspection ---------------------------------------------------

    @property
    def phase(self) -> complex:
        return _PHASE_VALUES[self.phase_exp]

    def letter(self, qubit: int) -> str:
        return _BITS_LETTER[(self.x_mask >> qubit) & 1, (self.z_mask >> qubit) & 1]

    def to_label(self) -> str:
        return "".join(self.letter(k) for k in range(self.n_qubits))

    @property
    def weight(self) -> int:
        return (self.x_mask | self.z_mask).bit_count()

    def support(self) -> tuple[int, ...]:
        mask = self.x_mask | self.z_mask
        return tuple(k for k in range(self.n_qubits) if (mask >> k) & 1)

    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0 and self.phase_exp == 0

    def is_hermitian(self) -> bool:
        return self.phase_exp % 2 == 0

    # -- algebra ------------------------------------------------------

    def __mul__(self, other):
        if not isinstance(other, PauliString):
            return NotImplemented
        return pauli_mul(self, other)

    def adjoint(self) -> "PauliString":
        return PauliString(self.n_qubits, self.x_mask, self.z_mask, -self.phase_exp)

    def commutes(self, other: "PauliString") -> bool:
        return commutes(self, other)

    def with_phase(self, phase) -> "PauliString":
        return PauliString(self.n_qubits, self.x_mask, self.z_mask, _phase_to_exp(phase))

    def padded(self, n_qubits: int) -> "PauliString":
        """Same operator on a larger register (identity on the new qubits)."""
        if n_qubits < self.n_qubits:
            raise ValueError("cannot shrink a Pauli string")
        return PauliString(n_qubits, self.x_mask, self.z_mask, self.phase_exp)

    def to_matrix(self) -> np.ndarray:
        if self.n_qubits > MATRIX_QUBIT_CAP:
            raise CapExceededError(
                f"dense matrix for {self.n_qubits} qubits exceeds the "
                f"{MATRIX_QUBIT_CAP}-qubit cap"
            )
        mat = np.array([[self.phase]], dtype=complex)
        for k in range(self.n_qubits - 1, -1, -1):
            mat = np.kron(mat, _PAULI_MATS[self.letter(k)])
        return mat

    def __repr__(self):
        return f"PauliString({_PHASE_LABELS[self.phase_exp]}{self.to_label()})"


def _check_sizes(a: PauliString, b: PauliString):
    if a.n_qubits != b.n_qubits:
        raise DimensionMismatchError(
            f"size mismatch: {a.n_qubits} vs {b.n_qubits} qubits"
        )


def pauli_mul(a: PauliString, b: PauliString) -> PauliString:
    """Exact product a*b.  Associative, closed up to a power of i."""
    _check_sizes(a, b)
    x = a.x_mask ^ b.x_mask
    z = a.z_mask ^ b.z_mask
    exp = (
        a.phase_exp
        + b.phase_exp
        + (a.x_mask & a.z_mask).bit_count()
        + (b.x_mask & b.z_mask).bit_count()
        + 2 * (a.z_mask & b.x_mask).bit_count()
        - (x & z).bit_count()
    )
    return PauliString(a.n_qubits, x, z, exp)


def commutes(a: PauliString, b: PauliString) -> bool:
    """True iff ab == ba, from the symplectic overlap parity (no matrices)."""
    _check_sizes(a, b)
    overlap = (a.x_mask & b.z_mask).bit_count() + (a.z_mask & b.x_mask).bit_count()
    return overlap % 2 == 0


class OperatorSum:
    """A weighted list of Pauli strings (Hamiltonians, jump operators, ...).

    Terms are stored exactly as given; :meth:`normalized` folds string
    phases into the coefficients, merges like strings, drops coefficients
    below ``COEFF_EPS`` and orders terms deterministically.  All arithmetic
    returns normalized sums.  Instances are treated as immutable.
    """

    __slots__ = ("_n_qubits", "_terms", "_normalized", "_hermitian")

    def __init__(self, terms, n_qubits: int | None = None):
        terms = [(complex(c), s) for c, s in terms]
        if n_qubits is None:
            if not terms:
                raise ValueError("n_qubits required for an empty sum")
            n_qubits = terms[0][1].n_qubits
        for _, s in terms:
            if s.n_qubits != n_qubits:
                raise DimensionMismatchError(
                    f"term on {s.n_qubits} qubits in a {n_qubits}-qubit sum"
                )
        self._n_qubits = n_qubits
        self._terms = tuple(terms)
        self._normalized = None
        self._hermitian = None

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, n_qubits: int) -> "OperatorSum":
        return cls([], n_qubits)

    @classmethod
    def identity(cls, n_qubits: int, coeff=1.0) -> "OperatorSum":
        return cls([(coeff, PauliString.identity(n_qubits))])

    @classmethod
    def from_string(cls, string: PauliString, coeff=1.0) -> "OperatorSum":
        return cls([(coeff, string)])

    # -- inspection ---------------------------------------------------

    @property
    def n_qubits(self) -> int:
        return self._n_qubits

    @property
    def terms(self) -> tuple:
        return self._terms

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def normalized(self) -> "OperatorSum":
        if self._normalized is not None:
            return self._normalized
        acc: dict[tuple[int, int], complex] = {}
        for c, s in self._terms:
            key = (s.x_mask, s.z_mask)
            acc[key] = acc.get(key, 0j) + c * s.phase
        terms = [
            (c, PauliString(self._n_qubits, x, z))
            for (x, z), c in sorted(acc.items())
            if abs(c) >= COEFF_EPS
        ]
        result = OperatorSum(terms, self._n_qubits)
        result._normalized = result
        self._normalized = result
        return result

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        """Term-by-term check: all normalized coefficients real within tol."""
        if tol == 1e-10 and self._hermitian is not None:
            return self._hermitian
        result = all(abs(c.imag) <= tol for c, _ in self.normalized())
        if tol == 1e-10:
            self._hermitian = result
        return result

    def max_weight(self) -> int:
        return max((s.weight for _, s in self.normalized()), default=0)

    def coeff_norm(self) -> float:
        """Sum of |coefficients|; an operator-norm upper bound."""
        return float(sum(abs(c) for c, _ in self.normalized()))

    # -- algebra ------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, OperatorSum):
            return NotImplemented
        if other.n_qubits != self._n_qubits:
            raise DimensionMismatchError("adding sums of different sizes")
        return OperatorSum(self._terms + other._terms, self._n_qubits).normalized()

    def __sub__(self, other):
        if not isinstance(other, OperatorSum):
            return NotImplemented
        return self + (-1.0) * other

    def __neg__(self):
        return (-1.0) * self

    def __mul__(self, scalar):
        if isinstance(scalar, OperatorSum):
            return NotImplemented
        c = complex(scalar)
        return OperatorSum(
            [(c * coeff, s) for coeff, s in self._terms], self._n_qubits
        ).normalized()

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, PauliString):
            other = OperatorSum.from_string(other)
        if not isinstance(other, OperatorSum):
            return NotImplemented
        if other.n_qubits != self._n_qubits:
            raise DimensionMismatchError("multiplying sums of different sizes")
        prods = [
            (ca * cb, sa * sb)
            for ca, sa in self._terms
            for cb, sb in other._terms
        ]
        return OperatorSum(prods, self._n_qubits).normalized()

    def adjoint(self) -> "OperatorSum":
        return OperatorSum(
            [(c.conjugate(), s.adjoint()) for c, s in self._terms], self._n_qubits
        ).normalized()

    def padded(self, n_qubits: int) -> "OperatorSum":
        return OperatorSum(
            [(c, s.padded(n_qubits)) for c, s in self._terms], n_qubits
        )

    def approx_equal(self, other: "OperatorSum", tol: float = 1e-10) -> bool:
        diff = self - other
        return all(abs(c) <= tol for c, _ in diff.normalized())

    def to_matrix(self, n_qubits: int | None = None) -> np.ndarray:
        return to_matrix(self, n_qubits)

    def single_string(self) -> PauliString:
        """Collapse a sum that is exactly one unit-coefficient string.

        Used where an algebraic product is known to close on a single signed
        string (e.g. stabilizer products); raises if that is not the case.
        """
        norm = self.normalized()
        if len(norm) != 1:
            raise ValueError(f"sum has {len(norm)} strings, expected exactly 1")
        c, s = norm.terms[0]
        for k, ref in enumerate(_PHASE_VALUES):
            if abs(c - ref) <= 1e-9:
                return PauliString(s.n_qubits, s.x_mask, s.z_mask, k)
        raise ValueError(f"coefficient {c} is not a unit phase")

    def __repr__(self):
        norm = self.normalized()
        parts = [f"({c:.6g})*{s.to_label()}" for c, s in norm.terms[:4]]
        if len(norm) > 4:
            parts.append(f"... [{len(norm)} terms]")
        return f"OperatorSum({' + '.join(parts) or '0'}, n={self._n_qubits})"


def to_matrix(op: OperatorSum, n_qubits: int | None = None) -> np.ndarray:
    """Dense 2^n x 2^n realization of an operator sum (n capped at 12)."""
    if n_qubits is None:
        n_qubits = op.n_qubits
    if n_qubits != op.n_qubits:
        op = op.padded(n_qubits)
    if n_qubits > MATRIX_QUBIT_CAP:
        raise CapExceededError(
            f"dense matrix for {n_qubits} qubits exceeds the "
            f"{MATRIX_QUBIT_CAP}-qubit cap"
        )
    dim = 1 << n_qubits
    mat = np.zeros((dim, dim), dtype=complex)
    for c, s in op.normalized():
        mat += c * s.to_matrix()
    return mat


# -- Jordan-Wigner images ---------------------------------------------

def _jw_site_strings(i: int, n: int):
    if not 1 <= i <= n:
        raise IndexError(f"site index {i} outside 1..{n}")
    q = i - 1
    tail = (1 << q) - 1  # Z on every earlier site
    x_str = PauliString(n, 1 << q, tail)
    y_str = PauliString(n, 1 << q, tail | (1 << q))
    return x_str, y_str


def jw_annihilator(i: int, n: int) -> OperatorSum:
    """Fermionic annihilator for mode i (1-based) on an n-mode chain.

    Returns the two-string image ``(Z_1...Z_{i-1}) (X_i + iY_i)/2``, which
    maps the occupied state |1> to the empty state |0>.
    """
    x_str, y_str = _jw_site_strings(i, n)
    return OperatorSum([(0.5, x_str), (0.5j, y_str)], n)


def jw_creator(i: int, n: int) -> OperatorSum:
    return jw_annihilator(i, n).adjoint()


def jw_number(i: int, n: int) -> OperatorSum:
    """Occupation-number image (1 - Z_i)/2 for mode i (1-based)."""
    if not 1 <= i <= n:
        raise IndexError(f"site index {i} outside 1..{n}")
    return OperatorSum(
        [(0.5, PauliString.identity(n)), (-0.5, PauliString.single(n, i - 1, "Z"))], n
    )


# -- textual round-trip format ----------------------------------------

def format_operator(op: OperatorSum) -> str:
    """One term per line: ``<re> <im> <pauli-word>`` (normalized form)."""
    lines = [
        f"{c.real:.17g} {c.imag:.17g} {s.to_label()}"
        for c, s in op.normalized()
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def parse_operator(text: str, n_qubits: int | None = None) -> OperatorSum:
    """Inverse of :func:`format_operator`."""
    terms = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 3:
            raise ValueError(f"line {lineno}: expected '<re> <im> <word>'")
        re_part, im_part, word = fields
        string = PauliString.from_label(word)
        if n_qubits is None:
            n_qubits = string.n_qubits
        elif string.n_qubits != n_qubits:
            raise DimensionMismatchError(f"line {lineno}: word length mismatch")
        terms.append((complex(float(re_part), float(im_part)), string))
    if n_qubits is None:
        raise ValueError("empty operator text and no n_qubits given")
    return OperatorSum(terms, n_qubits).normalized()
