"""Builders for the target lattice models.

* Toric code on an Lx x Ly torus: qubits on edges, X-type plaquette
  operators on faces and Z-type star operators on vertices, all mutually
  commuting.
* Heisenberg model on an arbitrary simple graph.
* Fermi-Hubbard model, both as the direct Jordan-Wigner spin image (snake
  site enumeration; horizontal bonds 2-local, vertical bonds carry strings)
  and in the auxiliary-fermion local form that trades the strings for
  at-most-six-body terms (Verstraete-Cirac construction).

Site enumeration lives here: fermionic modes are numbered along the snake,
and :mod:`rydsim.fock` reuses the same numbering so spectra compare sector
by sector.  Jordan-Wigner site indices are 1-based (mode m occupies qubit
m-1); qubit indices everywhere else are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import UnsupportedGeometryError
from .pauli import OperatorSum, PauliString, jw_annihilator, jw_creator, jw_number
from .statevec import StateVector


def snake_ordering(lx: int, ly: int) -> list[tuple[int, int]]:
    """Boustrophedon site enumeration: row 0 left to right, row 1 reversed...

    Horizontal neighbours are adjacent in the ordering on every row, so
    their Jordan-Wigner strings cancel.
    """
    if lx < 1 or ly < 1:
        raise ValueError("lattice dimensions must be positive")
    sites = []
    for y in range(ly):
        xs = range(lx) if y % 2 == 0 else range(lx - 1, -1, -1)
        sites.extend((x, y) for x in xs)
    return sites


# ---------------------------------------------------------------------
# toric code
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class ToricLattice:
    """Lx x Ly torus with qubits on the 2*Lx*Ly edges.

    Horizontal edge (x, y) points right from vertex (x, y) and has index
    y*Lx + x; vertical edge (x, y) points up and follows in a second block.
    Plaquette (x, y) is the face with lower-left vertex (x, y); star (x, y)
    is the vertex itself.  Every edge belongs to exactly two plaquettes and
    two stars.
    """

    lx: int
    ly: int
    plaquettes: tuple[tuple[int, int, int, int], ...]
    stars: tuple[tuple[int, int, int, int], ...]
    edge_plaquettes: tuple[tuple[int, int], ...]
    edge_stars: tuple[tuple[int, int], ...]

    @property
    def n_edges(self) -> int:
        return 2 * self.lx * self.ly

    @property
    def n_plaquettes(self) -> int:
        return self.lx * self.ly

    @property
    def n_stars(self) -> int:
        return self.lx * self.ly

    @classmethod
    def build(cls, lx: int, ly: int) -> "ToricLattice":
        if lx < 2 or ly < 2:
            raise UnsupportedGeometryError(
                "torus needs lx, ly >= 2 (smaller wraps duplicate edges)"
            )

        def h_edge(x, y):
            return (y % ly) * lx + (x % lx)

        def v_edge(x, y):
            return lx * ly + (y % ly) * lx + (x % lx)

        plaquettes = []
        stars = []
        for y in range(ly):
            for x in range(lx):
                plaquettes.append(
                    (h_edge(x, y), h_edge(x, y + 1), v_edge(x, y), v_edge(x + 1, y))
                )
                stars.append(
                    (h_edge(x, y), h_edge(x - 1, y), v_edge(x, y), v_edge(x, y - 1))
                )
        n_edges = 2 * lx * ly
        edge_pl = [[] for _ in range(n_edges)]
        edge_st = [[] for _ in range(n_edges)]
        for p, edges in enumerate(plaquettes):
            for e in edges:
                edge_pl[e].append(p)
        for s, edges in enumerate(stars):
            for e in edges:
                edge_st[e].append(s)
        if any(len(v) != 2 for v in edge_pl) or any(len(v) != 2 for v in edge_st):
            raise AssertionError("torus incidence is broken")
        return cls(
            lx,
            ly,
            tuple(tuple(p) for p in plaquettes),
            tuple(tuple(s) for s in stars),
            tuple(tuple(v) for v in edge_pl),
            tuple(tuple(v) for v in edge_st),
        )

    def plaquette_index(self, x: int, y: int) -> int:
        return (y % self.ly) * self.lx + (x % self.lx)

    star_index = plaquette_index

    def plaquette_xy(self, p: int) -> tuple[int, int]:
        return p % self.lx, p // self.lx

    star_xy = plaquette_xy

    def plaquette_string(self, p: int, n_qubits: int | None = None) -> PauliString:
        n = n_qubits or self.n_edges
        return PauliString.from_sites(n, {e: "X" for e in self.plaquettes[p]})

    def star_string(self, s: int, n_qubits: int | None = None) -> PauliString:
        n = n_qubits or self.n_edges
        return PauliString.from_sites(n, {e: "Z" for e in self.stars[s]})

    def shared_edge(self, kind: str, i: int, j: int) -> int:
        """Lowest-index edge shared by two adjacent plaquettes or stars."""
        cells = self.plaquettes if kind == "plaquette" else self.stars
        common = set(cells[i]) & set(cells[j])
        if not common:
            raise ValueError(f"{kind}s {i} and {j} share no edge")
        return min(common)


def build_toric(lx: int, ly: int, e0: float = 1.0):
    """Toric Hamiltonian -E0 (sum A_p + sum B_s) and its lattice.

    All terms commute pairwise; the stabilizer products over the torus are
    identities, leaving 2*Lx*Ly - 2 independent stabilizers and a four-fold
    degenerate ground space at energy -2*Lx*Ly*E0.
    """
    lattice = ToricLattice.build(lx, ly)
    n = lattice.n_edges
    terms = [(-e0, lattice.plaquette_string(p)) for p in range(lattice.n_plaquettes)]
    terms += [(-e0, lattice.star_string(s)) for s in range(lattice.n_stars)]
    return OperatorSum(terms, n).normalized(), lattice


def toric_ground_state(lattice: ToricLattice, n_qubits: int | None = None) -> StateVector:
    """One toric ground state: project |0...0> onto all A_p = +1 sectors."""
    n = n_qubits or lattice.n_edges
    state = StateVector.zero_state(n)
    for p in range(lattice.n_plaquettes):
        image = state.copy().apply_string(lattice.plaquette_string(p, n))
        state.amps = 0.5 * (state.amps + image.amps)
    return state.normalize()


# ---------------------------------------------------------------------
# Heisenberg model
# ---------------------------------------------------------------------

def build_heisenberg(adjacency, jx: float, jy: float, jz: float, h: float,
                     n_qubits: int | None = None) -> OperatorSum:
    """-1/2 sum_<ij> (Jx XX + Jy YY + Jz ZZ) + h sum_i Z_i."""
    edges = [tuple(e) for e in adjacency]
    for i, j in edges:
        if i == j:
            raise ValueError(f"self-loop on site {i}")
    if n_qubits is None:
        n_qubits = max((max(e) for e in edges), default=-1) + 1
    terms = []
    for i, j in edges:
        for coupling, letter in ((jx, "X"), (jy, "Y"), (jz, "Z")):
            if coupling != 0.0:
                terms.append(
                    (-0.5 * coupling,
                     PauliString.from_sites(n_qubits, {i: letter, j: letter}))
                )
    if h != 0.0:
        terms += [(h, PauliString.single(n_qubits, i, "Z")) for i in range(n_qubits)]
    return OperatorSum(terms, n_qubits).normalized()


def chain_adjacency(n_sites: int) -> list[tuple[int, int]]:
    return [(i, i + 1) for i in range(n_sites - 1)]


def grid_adjacency(lx: int, ly: int) -> list[tuple[int, int]]:
    """Open-boundary square grid, sites numbered along the snake."""
    pos = {xy: k for k, xy in enumerate(snake_ordering(lx, ly))}
    edges = []
    for (x, y), k in pos.items():
        if x + 1 < lx:
            edges.append(tuple(sorted((k, pos[(x + 1, y)]))))
        if y + 1 < ly:
            edges.append(tuple(sorted((k, pos[(x, y + 1)]))))
    return sorted(set(edges))


# ---------------------------------------------------------------------
# Fermi-Hubbard model
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class HubbardSpec:
    """Single-band Hubbard model on an open Lx x Ly grid.

    ``v_aux`` only enters the auxiliary-fermion local construction, where
    it sets the energy of the stabilized sector.
    """

    lx: int
    ly: int
    t_hop: float = 1.0
    u: float = 0.0
    v_aux: float = 1.0
    spinful: bool = False

    def __post_init__(self):
        if self.lx < 1 or self.ly < 1:
            raise ValueError("lattice dimensions must be positive")

    @property
    def n_sites(self) -> int:
        return self.lx * self.ly

    @property
    def n_modes(self) -> int:
        return self.n_sites * (2 if self.spinful else 1)

    @property
    def spins(self) -> tuple:
        return ("up", "down") if self.spinful else (None,)


@lru_cache(maxsize=64)
def _snake_positions(lx: int, ly: int) -> dict:
    return {xy: k for k, xy in enumerate(snake_ordering(lx, ly))}


def hubbard_mode(spec: HubbardSpec, x: int, y: int, spin=None) -> int:
    """0-based fermionic mode index of a site in the direct encoding.

    Each spin species gets its own contiguous snake-ordered block, so the
    hopping strings of one species never leave its block.
    """
    pos = _snake_positions(spec.lx, spec.ly)[(x, y)]
    if not spec.spinful:
        return pos
    return pos + (0 if spin == "up" else spec.n_sites)


def hubbard_bonds(spec: HubbardSpec):
    """Hopping bonds as mode pairs plus on-site interaction mode pairs.

    Returns ``(hops, pairs)`` where hops is a list of
    ``(mode_a, mode_b, kind)`` with kind "h"/"v" and pairs lists the
    (up, down) mode tuples carrying the U term.
    """
    hops = []
    for spin in spec.spins:
        for y in range(spec.ly):
            for x in range(spec.lx):
                if x + 1 < spec.lx:
                    hops.append(
                        (hubbard_mode(spec, x, y, spin),
                         hubbard_mode(spec, x + 1, y, spin), "h")
                    )
                if y + 1 < spec.ly:
                    hops.append(
                        (hubbard_mode(spec, x, y, spin),
                         hubbard_mode(spec, x, y + 1, spin), "v")
                    )
    pairs = []
    if spec.spinful:
        pairs = [
            (hubbard_mode(spec, x, y, "up"), hubbard_mode(spec, x, y, "down"))
            for y in range(spec.ly)
            for x in range(spec.lx)
        ]
    return hops, pairs


def _hop_image(a: int, b: int, n: int) -> OperatorSum:
    """Spin image of c^dag_a c_b + c^dag_b c_a (modes 0-based)."""
    return (jw_creator(a + 1, n) @ jw_annihilator(b + 1, n)) + (
        jw_creator(b + 1, n) @ jw_annihilator(a + 1, n)
    )


def build_hubbard_jw(spec: HubbardSpec) -> OperatorSum:
    """Direct Jordan-Wigner image of the Hubbard Hamiltonian.

    Horizontal bonds are 2-local; vertical bonds carry a Z string across
    one snake row.  The spectrum equals the Fock-space spectrum exactly.
    """
    n = spec.n_modes
    hops, pairs = hubbard_bonds(spec)
    h = OperatorSum.zero(n)
    for a, b, _ in hops:
        h = h + (-spec.t_hop) * _hop_image(a, b, n)
    for up, down in pairs:
        h = h + spec.u * (jw_number(up + 1, n) @ jw_number(down + 1, n))
    return h.normalized()


# -- auxiliary-fermion local form --------------------------------------

def _check_vc_geometry(spec: HubbardSpec):
    if spec.lx < 2 or spec.ly < 2 or spec.lx % 2 or spec.ly % 2:
        raise UnsupportedGeometryError(
            "auxiliary-layer construction requires even lx, ly >= 2"
        )


def vc_n_qubits(spec: HubbardSpec) -> int:
    return 2 * spec.n_modes


def _vc_mode(spec: HubbardSpec, x: int, y: int, layer: str, spin=None) -> int:
    """Mode index in the enlarged chain: system and auxiliary modes of each
    site interleave along the snake, one block per spin species."""
    pos = _snake_positions(spec.lx, spec.ly)[(x, y)]
    base = 2 * pos + (0 if layer == "s" else 1)
    if not spec.spinful:
        return base
    return base + (0 if spin == "up" else 2 * spec.n_sites)


def _vc_arrows(spec: HubbardSpec, spin=None):
    """Directed pairing of auxiliary sites: one arrow per vertical bond,
    columns oriented alternately so each Majorana is used exactly once."""
    arrows = {}
    for x in range(spec.lx):
        for y in range(spec.ly - 1):
            tail, head = ((x, y), (x, y + 1)) if x % 2 == 0 else ((x, y + 1), (x, y))
            arrows[(x, y)] = (
                _vc_mode(spec, *tail, "a", spin),
                _vc_mode(spec, *head, "a", spin),
            )
    return arrows


def _arrow_operator(spec: HubbardSpec, tail: int, head: int) -> OperatorSum:
    n = vc_n_qubits(spec)
    alpha = jw_annihilator(tail + 1, n) + jw_creator(tail + 1, n)
    beta = jw_annihilator(head + 1, n) - jw_creator(head + 1, n)
    return alpha @ beta


def aux_stabilizers(spec: HubbardSpec) -> list[PauliString]:
    """The commuting +-1 operators whose joint +1 eigenspace carries the
    physical sector of the local encoding; one per vertical bond and spin."""
    _check_vc_geometry(spec)
    stabs = []
    for spin in spec.spins:
        arrows = _vc_arrows(spec, spin)
        for x in range(spec.lx):
            for y in range(spec.ly - 1):
                tail, head = arrows[(x, y)]
                stabs.append(_arrow_operator(spec, tail, head).single_string())
    return stabs


def aux_pair_count(spec: HubbardSpec) -> int:
    """Number of stabilizer pair terms in the auxiliary Hamiltonian."""
    _check_vc_geometry(spec)
    per_species = (spec.lx // 2) * (spec.ly - 1)
    return per_species * len(spec.spins)


def build_aux_hamiltonian(spec: HubbardSpec) -> OperatorSum:
    """-V sum of products of stabilizers on horizontally adjacent columns.

    Every term is the product of two arrow operators, so it is a six-body
    spin operator; the all-+1 stabilizer sector is a ground sector with
    energy -V * aux_pair_count(spec).
    """
    _check_vc_geometry(spec)
    n = vc_n_qubits(spec)
    h = OperatorSum.zero(n)
    for spin in spec.spins:
        arrows = _vc_arrows(spec, spin)
        for x in range(0, spec.lx - 1, 2):
            for y in range(spec.ly - 1):
                pa = _arrow_operator(spec, *arrows[(x, y)])
                pb = _arrow_operator(spec, *arrows[(x + 1, y)])
                h = h + (-spec.v_aux) * (pa @ pb)
    return h.normalized()


def build_hubbard_local(spec: HubbardSpec) -> OperatorSum:
    """Hubbard Hamiltonian in the auxiliary-fermion local encoding.

    Vertical hoppings are multiplied by the arrow operator of their bond,
    which cancels the Jordan-Wigner strings; every term then acts on at
    most six qubits.  Restricted to the joint +1 eigenspace of
    :func:`aux_stabilizers`, the spectrum equals :func:`build_hubbard_jw`
    shifted by the constant -V * aux_pair_count(spec).
    """
    _check_vc_geometry(spec)
    n = vc_n_qubits(spec)
    h = OperatorSum.zero(n)
    for spin in spec.spins:
        arrows = _vc_arrows(spec, spin)
        for y in range(spec.ly):
            for x in range(spec.lx):
                if x + 1 < spec.lx:
                    a = _vc_mode(spec, x, y, "s", spin)
                    b = _vc_mode(spec, x + 1, y, "s", spin)
                    h = h + (-spec.t_hop) * _hop_image(a, b, n)
                if y + 1 < spec.ly:
                    a = _vc_mode(spec, x, y, "s", spin)
                    b = _vc_mode(spec, x, y + 1, "s", spin)
                    p_arrow = _arrow_operator(spec, *arrows[(x, y)])
                    h = h + (-spec.t_hop) * (_hop_image(a, b, n) @ p_arrow)
    if spec.spinful:
        for y in range(spec.ly):
            for x in range(spec.lx):
                up = _vc_mode(spec, x, y, "s", "up")
                down = _vc_mode(spec, x, y, "s", "down")
                h = h + spec.u * (jw_number(up + 1, n) @ jw_number(down + 1, n))
    return (h + build_aux_hamiltonian(spec)).normalized()


def constrained_local_spectrum(spec: HubbardSpec) -> np.ndarray:
    """Spectrum of the local encoding inside the all-+1 stabilizer sector.

    Sorted eigenvalues; each direct-encoding eigenvalue appears with
    multiplicity 2**(n_aux_modes - n_stabilizers), shifted by the constant
    -V * aux_pair_count(spec).  Dense: capped by the matrix qubit limit.
    """
    h = build_hubbard_local(spec)
    dim = 1 << h.n_qubits
    mat = h.to_matrix()
    proj = np.eye(dim)
    for s in aux_stabilizers(spec):
        proj = proj @ (np.eye(dim) + s.to_matrix()) / 2.0
    w, v = np.linalg.eigh(proj)
    sector = v[:, w > 0.5]
    return np.sort(np.linalg.eigvalsh(sector.conj().T @ mat @ sector))
