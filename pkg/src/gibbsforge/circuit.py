"""X-program circuits: diagonal-monomial lists with an optional CNOT prefix.

An X-program on n qubits is the circuit H^n . D . H^n . B applied to |0^n>,
where D is a product of commuting diagonal rotations e^{i k pi/8 Z_S} (one
monomial per entry, S the support set) and B an optional CNOT network applied
before everything else.  Angles are stored as the integer k.

Generators produce the two lattice families used throughout: a 3D
cluster-state cell complex (qubits on edges and faces of a cubic grid, gates
on face-edge incidences) and a 2D square-lattice brickwork.  Both carry an
edge-coloring witness in meta["layers"] partitioning the two-qubit monomials
into at most four matchings, which is the circuit-depth certificate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .caps import check_dense
from .errors import GibbsforgeError, InputError
from .kernels import fwht_inplace

FAMILIES = ("raussendorf3d", "brickwork2d")

Monomial = tuple[tuple[int, ...], int]


@dataclass(frozen=True)
class XProgram:
    n: int
    monomials: tuple[Monomial, ...]
    cnot_prefix: tuple[tuple[int, int], ...] = ()
    meta: dict | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InputError(f"need at least one qubit, got n = {self.n}")
        monomials = tuple((tuple(q), int(k)) for q, k in self.monomials)
        for qubits, _k in monomials:
            if not qubits:
                raise InputError("monomial support must be nonempty")
            if list(qubits) != sorted(set(qubits)):
                raise InputError(f"monomial support {qubits} must be sorted and duplicate-free")
            if qubits[0] < 0 or qubits[-1] >= self.n:
                raise InputError(f"monomial support {qubits} out of range for n = {self.n}")
        prefix = tuple((int(c), int(t)) for c, t in self.cnot_prefix)
        for c, t in prefix:
            if c == t:
                raise InputError("CNOT control and target must differ")
            if not (0 <= c < self.n and 0 <= t < self.n):
                raise InputError(f"CNOT ({c}, {t}) out of range for n = {self.n}")
        object.__setattr__(self, "monomials", monomials)
        object.__setattr__(self, "cnot_prefix", prefix)

    def support_masks(self) -> list[int]:
        return [_mask_of(qubits) for qubits, _ in self.monomials]

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "monomials": [{"qubits": list(q), "k": k} for q, k in self.monomials],
            "cnot_prefix": [[c, t] for c, t in self.cnot_prefix],
            "meta": dict(self.meta) if self.meta else {},
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "XProgram":
        try:
            n = int(data["n"])
            monomials = tuple(
                (tuple(int(q) for q in m["qubits"]), int(m["k"])) for m in data["monomials"]
            )
            prefix = tuple((int(c), int(t)) for c, t in data.get("cnot_prefix", []))
            meta = data.get("meta") or None
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed XProgram JSON: {exc}") from exc
        return cls(n, monomials, prefix, meta)


@dataclass(frozen=True)
class LatticeSpec:
    family: str
    L: int
    phase_pattern: Mapping[int, int] | None = None

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise InputError(f"unknown family {self.family!r}, expected one of {FAMILIES}")
        if self.L < 1:
            raise InputError(f"linear size must be >= 1, got {self.L}")


def _mask_of(qubits: Iterable[int]) -> int:
    mask = 0
    for q in qubits:
        mask |= 1 << q
    return mask


# --- lattice geometry -------------------------------------------------------


def raussendorf_sites(L: int) -> list[tuple[int, int, int]]:
    """Cell-complex sites: points of [0, 2L]^3 with one or two odd coordinates.

    One odd coordinate is an edge midpoint of the cubic lattice, two odd
    coordinates a face center.  Sorted lexicographically; the list index is
    the qubit index.
    """
    side = range(2 * L + 1)
    sites = [
        p for p in itertools.product(side, side, side)
        if sum(c & 1 for c in p) in (1, 2)
    ]
    return sites


def _raussendorf_graph(L: int) -> tuple[list[tuple[int, int, int]], list[tuple[int, int]]]:
    sites = raussendorf_sites(L)
    index = {p: i for i, p in enumerate(sites)}
    edges = []
    for p in sites:
        if sum(c & 1 for c in p) != 2:
            continue
        # a face center touches the 4 edge midpoints reached by stepping one
        # of its odd coordinates up or down; all stay inside [0, 2L]
        for axis in range(3):
            if p[axis] & 1:
                for step in (-1, 1):
                    q = list(p)
                    q[axis] += step
                    edges.append((index[p], index[tuple(q)]))
    canon = sorted(tuple(sorted(e)) for e in edges)
    return sites, canon


def _brickwork_graph(L: int) -> tuple[int, list[tuple[int, int]]]:
    def idx(x: int, y: int) -> int:
        return x + L * y

    edges = []
    for y in range(L):
        for x in range(L):
            if x + 1 < L:
                edges.append((idx(x, y), idx(x + 1, y)))
            if y + 1 < L:
                edges.append((idx(x, y), idx(x, y + 1)))
    return L * L, sorted(tuple(sorted(e)) for e in edges)


def _bipartite_edge_coloring(edges: Sequence[tuple[int, int]], num_colors: int) -> list[int]:
    """Proper edge coloring of a bipartite graph with Delta colors.

    Alternating-path recoloring: take the first free color at each endpoint;
    if they differ, swap colors along the maximal two-color path from the
    first endpoint, freeing the second endpoint's color there.
    """
    at: dict[int, dict[int, int]] = {}
    color: list[int] = [-1] * len(edges)

    def free(v: int) -> int:
        # an endpoint of a yet-uncolored edge has at most num_colors - 1
        # colored edges, so a free color always exists for Delta colors
        have = at.setdefault(v, {})
        for c in range(num_colors):
            if c not in have:
                return c
        raise GibbsforgeError("edge coloring ran out of colors")

    for ei, (u, v) in enumerate(edges):
        a = free(u)
        b = free(v)
        if a != b:
            # walk from u along edges alternately colored b, a and swap them
            path = []
            w, col = u, b
            while col in at.setdefault(w, {}):
                e2 = at[w][col]
                path.append(e2)
                x, y = edges[e2]
                w = y if x == w else x
                col = a if col == b else b
            for e2 in path:
                c_old = color[e2]
                c_new = a if c_old == b else b
                color[e2] = c_new
                x, y = edges[e2]
                for t in (x, y):
                    if at[t].get(c_old) == e2:
                        del at[t][c_old]
                for t in (x, y):
                    at[t][c_new] = e2
            a = b
        color[ei] = a
        at.setdefault(u, {})[a] = ei
        at.setdefault(v, {})[a] = ei
    return color


def _check_coloring(edges: Sequence[tuple[int, int]], color: Sequence[int], limit: int) -> None:
    used: dict[tuple[int, int], tuple[int, int]] = {}
    for ei, (u, v) in enumerate(edges):
        c = color[ei]
        if c < 0 or c >= limit:
            raise GibbsforgeError(f"edge coloring exceeded {limit} colors")
        for t in (u, v):
            if (t, c) in used:
                raise GibbsforgeError("edge coloring produced a clashing matching")
            used[(t, c)] = (ei, c)


def generate_family(spec: LatticeSpec) -> XProgram:
    """Build a lattice family instance with its layer (matching) witness."""
    if spec.family == "raussendorf3d":
        sites, edges = _raussendorf_graph(spec.L)
        n = len(sites)
    else:
        n, edges = _brickwork_graph(spec.L)

    degree: dict[int, int] = {}
    for u, v in edges:
        degree[u] = degree.get(u, 0) + 1
        degree[v] = degree.get(v, 0) + 1
    max_degree = max(degree.values(), default=0)

    color = _bipartite_edge_coloring(edges, max_degree) if edges else []
    _check_coloring(edges, color, max(max_degree, 1))

    if spec.phase_pattern is None:
        singles: dict[int, int] = {q: 1 for q in range(n)}
    else:
        singles = {}
        for q, k in spec.phase_pattern.items():
            if not 0 <= int(q) < n:
                raise InputError(f"phase_pattern qubit {q} out of range for n = {n}")
            if int(k) not in (1, 2):
                raise InputError(f"phase_pattern angle k must be 1 or 2, got {k}")
            singles[int(q)] = int(k)

    monomials: list[Monomial] = [((q,), k) for q, k in sorted(singles.items())]
    monomials += [((u, v), 2) for u, v in edges]
    monomials.sort()
    where = {m: i for i, m in enumerate(monomials)}

    layers = [
        sorted(where[((u, v), 2)] for ei, (u, v) in enumerate(edges) if color[ei] == c)
        for c in range(max(color, default=-1) + 1)
    ]
    meta = {"family": spec.family, "L": spec.L, "layers": layers}
    return XProgram(n, tuple(monomials), (), meta)


def two_qubit_depth(program: XProgram) -> int:
    """Number of layers in the matching witness (falls back to a fresh coloring)."""
    if program.meta and "layers" in program.meta:
        return len([layer for layer in program.meta["layers"] if layer])
    pairs = [(q[0], q[1]) for q, _ in program.monomials if len(q) == 2]
    if not pairs:
        return 0
    degree: dict[int, int] = {}
    for u, v in pairs:
        degree[u] = degree.get(u, 0) + 1
        degree[v] = degree.get(v, 0) + 1
    color = _bipartite_edge_coloring(pairs, max(degree.values()))
    return max(color) + 1


# --- repetition encodings ---------------------------------------------------


def _check_encodable(program: XProgram, r: int) -> None:
    if r < 1:
        raise InputError(f"repetition factor must be >= 1, got {r}")
    if program.cnot_prefix:
        raise InputError("encoding expects a program without a CNOT prefix")


def _encoded_meta(program: XProgram, form: str, r: int) -> dict:
    meta = {k: v for k, v in (program.meta or {}).items() if k != "layers"}
    meta["encoding"] = {"form": form, "r": r, "base_n": program.n}
    return meta


def encode_bms(program: XProgram, r: int) -> XProgram:
    """Block-monomial encoding: each support qubit becomes its whole r-block.

    A monomial on S at angle k becomes one monomial on union_i {i*r .. i*r+r-1}
    for i in S, same angle, on n*r qubits.  No CNOT prefix.
    """
    _check_encodable(program, r)
    monomials = [
        (tuple(sorted(i * r + j for i in qubits for j in range(r))), k)
        for qubits, k in program.monomials
    ]
    monomials.sort()
    return XProgram(program.n * r, tuple(monomials), (), _encoded_meta(program, "bms", r))


def encode_cnot(program: XProgram, r: int) -> XProgram:
    """CNOT-network encoding: diagonal part transversal on block leaders.

    Block i occupies qubits i*r .. i*r+r-1 with leader i*r.  The prefix fans
    each leader out to its block (block-major, then target order) and the
    original monomials act on leaders only.
    """
    _check_encodable(program, r)
    monomials = [
        (tuple(sorted(i * r for i in qubits)), k) for qubits, k in program.monomials
    ]
    monomials.sort()
    prefix = tuple(
        (i * r, i * r + j) for i in range(program.n) for j in range(1, r)
    )
    return XProgram(program.n * r, tuple(monomials), prefix, _encoded_meta(program, "cnot", r))


def restrict(program: XProgram, qubits: Sequence[int]) -> XProgram:
    """Induced subprogram on a qubit subset.

    Keeps monomials fully inside the subset and CNOT pairs with both ends
    inside, relabeling to 0..len(qubits)-1 in sorted order.
    """
    kept = sorted(set(int(q) for q in qubits))
    if not kept:
        raise InputError("restriction needs a nonempty qubit subset")
    if kept[0] < 0 or kept[-1] >= program.n:
        raise InputError(f"restriction qubits out of range for n = {program.n}")
    relabel = {q: i for i, q in enumerate(kept)}
    keep = set(kept)
    monomials = tuple(
        (tuple(relabel[q] for q in support), k)
        for support, k in program.monomials
        if all(q in keep for q in support)
    )
    prefix = tuple(
        (relabel[c], relabel[t])
        for c, t in program.cnot_prefix
        if c in keep and t in keep
    )
    meta = {k: v for k, v in (program.meta or {}).items() if k != "layers"}
    meta["restricted"] = {"from_n": program.n, "kept": kept}
    return XProgram(len(kept), monomials, prefix, meta)


# --- dense / vector forms ---------------------------------------------------


def apply_prefix_to_masks(
    prefix: Sequence[tuple[int, int]], masks: np.ndarray
) -> np.ndarray:
    """Classical action of the CNOT network on basis indices (target ^= control)."""
    out = masks.astype(np.uint64, copy=True)
    one = np.uint64(1)
    for c, t in prefix:
        bits = (out >> np.uint64(c)) & one
        out ^= bits << np.uint64(t)
    return out


def diagonal_phase_vector(program: XProgram) -> np.ndarray:
    """exp(i * phi(y)) for all y, with phi(y) = sum_S (k pi/8) (-1)^|y & S|."""
    dim = 1 << program.n
    y = np.arange(dim, dtype=np.uint64)
    phi = np.zeros(dim, dtype=np.float64)
    for qubits, k in program.monomials:
        mask = np.uint64(_mask_of(qubits))
        signs = 1.0 - 2.0 * (np.bitwise_count(y & mask) & np.uint64(1)).astype(np.float64)
        phi += (k * np.pi / 8.0) * signs
    return np.exp(1j * phi)


def unitary_of(program: XProgram, cap: int | None = None) -> np.ndarray:
    """Dense unitary H^n diag(phases) H^n B, columns indexed by input state."""
    check_dense(program.n, cap, "unitary_of")
    n = program.n
    dim = 1 << n
    phases = diagonal_phase_vector(program)
    perm = apply_prefix_to_masks(program.cnot_prefix, np.arange(dim, dtype=np.uint64))
    y = np.arange(dim, dtype=np.uint64)
    # rows indexed by input x: A[x, :] = phases * (+-1)^{y . Bx}
    signs = 1.0 - 2.0 * (np.bitwise_count(y[None, :] & perm[:, None]) & np.uint64(1)).astype(
        np.float64
    )
    a = phases[None, :] * signs
    fwht_inplace(a)
    return a.T / dim
