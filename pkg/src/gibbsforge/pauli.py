"""Phased Pauli strings and Hermitian Pauli sums on n qubits.

Masks are little endian: bit j of x_mask/z_mask refers to qubit j, and basis
index i holds qubit j in state (i >> j) & 1.  A term with masks (a, b) is
phase * X^a Z^b, where X^a is the product of X over the set bits of a.  Dense
matrices put qubit 0 on the least significant axis, so for n = 2 the basis
order is |q1 q0> = 00, 01, 10, 11.

PauliSum stores real coefficients against the Hermitian basis
sigma_(a,b) = i^popcount(a & b) * X^a Z^b, i.e. the operator that is X, Y or Z
on each active qubit.  Hermiticity of the sum is then exactly "all
coefficients real", which is what the conjugation engine checks and enforces.

Supported conjugations are the gate set needed for parent Hamiltonians:
Hadamard layers, CNOT, and diagonal rotations e^{i theta Z_S}.  Rotation
angles that are integer multiples of pi/8 use exact cos/sin table values
(0, +-1, +-1/sqrt2), so coefficients stay in the ring generated by 1/sqrt2
instead of accumulating float drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

import numpy as np

from .caps import check_dense
from .errors import InputError, VerificationError

PRUNE_TOL = 1e-12

# i^k for k mod 4; all arithmetic on these units is exact in IEEE doubles.
_I_POW = (1 + 0j, 1j, -1 + 0j, -1j)

_SQRT_HALF = math.sqrt(0.5)
# cos/sin of k*pi/4, k = 0..7, with the representable values exact.
_COS_QUARTER = (1.0, _SQRT_HALF, 0.0, -_SQRT_HALF, -1.0, -_SQRT_HALF, 0.0, _SQRT_HALF)
_SIN_QUARTER = (0.0, _SQRT_HALF, 1.0, _SQRT_HALF, 0.0, -_SQRT_HALF, -1.0, -_SQRT_HALF)


def _check_mask(n: int, mask: int, name: str) -> None:
    if not 0 <= mask < (1 << n):
        raise InputError(f"{name} 0x{mask:x} does not fit in {n} qubits")


def _qubits_to_mask(n: int, qubits: Iterable[int], what: str) -> int:
    mask = 0
    for q in qubits:
        if not 0 <= q < n:
            raise InputError(f"{what} qubit {q} out of range for n = {n}")
        mask |= 1 << q
    return mask


@dataclass(frozen=True)
class PauliTerm:
    """A single phased Pauli string: phase * X^x_mask Z^z_mask."""

    n: int
    x_mask: int
    z_mask: int
    phase: complex = 1 + 0j

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InputError(f"need at least one qubit, got n = {self.n}")
        _check_mask(self.n, self.x_mask, "x_mask")
        _check_mask(self.n, self.z_mask, "z_mask")
        phase = complex(self.phase)
        if phase not in _I_POW:
            raise InputError(f"phase must be one of +1, -1, +i, -i, got {phase}")
        object.__setattr__(self, "phase", phase)

    def dagger(self) -> "PauliTerm":
        """Hermitian adjoint: conjugate phase times the reorder sign of Z^b X^a."""
        sign = -1.0 if (self.x_mask & self.z_mask).bit_count() & 1 else 1.0
        return PauliTerm(self.n, self.x_mask, self.z_mask, sign * self.phase.conjugate())

    def to_dense(self, cap: int | None = None) -> np.ndarray:
        check_dense(self.n, cap, "PauliTerm.to_dense")
        return _dense_string(self.n, self.x_mask, self.z_mask, self.phase)


def multiply(a: PauliTerm, b: PauliTerm) -> PauliTerm:
    """Exact product of two Pauli terms.

    (p1 X^a1 Z^b1)(p2 X^a2 Z^b2) = p1 p2 (-1)^popcount(b1 & a2)
    X^(a1^a2) Z^(b1^b2), the sign coming from moving Z^b1 past X^a2.
    """
    if a.n != b.n:
        raise InputError(f"qubit counts differ: {a.n} vs {b.n}")
    sign = -1.0 if (a.z_mask & b.x_mask).bit_count() & 1 else 1.0
    return PauliTerm(a.n, a.x_mask ^ b.x_mask, a.z_mask ^ b.z_mask, sign * a.phase * b.phase)


def _dense_string(n: int, x_mask: int, z_mask: int, scale: complex) -> np.ndarray:
    # X^a Z^b |col> = (-1)^popcount(b & col) |col ^ a>: one entry per column.
    dim = 1 << n
    cols = np.arange(dim, dtype=np.uint64)
    rows = cols ^ np.uint64(x_mask)
    signs = 1.0 - 2.0 * (np.bitwise_count(cols & np.uint64(z_mask)) & 1).astype(np.float64)
    mat = np.zeros((dim, dim), dtype=np.complex128)
    mat[rows, cols] = scale * signs
    return mat


class PauliSum:
    """Hermitian operator as a real-coefficient combination of sigma_(x,z)."""

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms: Mapping[tuple[int, int], float] | Iterable[tuple[tuple[int, int], float]] = ()):
        if n < 1:
            raise InputError(f"need at least one qubit, got n = {n}")
        self.n = n
        merged: dict[tuple[int, int], float] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for (x, z), coeff in items:
            _check_mask(n, x, "x_mask")
            _check_mask(n, z, "z_mask")
            coeff = float(coeff)
            if not math.isfinite(coeff):
                raise InputError(f"coefficient for ({x:#x}, {z:#x}) is not finite")
            merged[(x, z)] = merged.get((x, z), 0.0) + coeff
        self._terms = {key: c for key, c in merged.items() if abs(c) > PRUNE_TOL}

    @property
    def terms(self) -> Mapping[tuple[int, int], float]:
        return MappingProxyType(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[tuple[tuple[int, int], float]]:
        return iter(sorted(self._terms.items()))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PauliSum) and self.n == other.n and self._terms == other._terms

    def __repr__(self) -> str:
        return f"PauliSum(n={self.n}, terms={len(self._terms)})"

    def coefficient(self, x_mask: int, z_mask: int) -> float:
        return self._terms.get((x_mask, z_mask), 0.0)

    def support(self) -> frozenset[int]:
        """Qubits touched by any surviving term."""
        mask = 0
        for x, z in self._terms:
            mask |= x | z
        return frozenset(j for j in range(self.n) if mask >> j & 1)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if not isinstance(other, PauliSum):
            return NotImplemented
        if self.n != other.n:
            raise InputError(f"qubit counts differ: {self.n} vs {other.n}")
        out = dict(self._terms)
        for key, c in other._terms.items():
            out[key] = out.get(key, 0.0) + c
        return PauliSum(self.n, out)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self + (-1.0) * other

    def __mul__(self, scalar: float) -> "PauliSum":
        if isinstance(scalar, (int, float)):
            return PauliSum(self.n, {k: c * scalar for k, c in self._terms.items()})
        return NotImplemented

    __rmul__ = __mul__

    def to_dense(self, cap: int | None = None) -> np.ndarray:
        check_dense(self.n, cap, "PauliSum.to_dense")
        dim = 1 << self.n
        mat = np.zeros((dim, dim), dtype=np.complex128)
        for (x, z), coeff in sorted(self._terms.items()):
            mat += _dense_string(self.n, x, z, coeff * _I_POW[(x & z).bit_count() % 4])
        return mat

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "terms": [
                {"x": hex(x), "z": hex(z), "coeff": coeff}
                for (x, z), coeff in sorted(self._terms.items())
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "PauliSum":
        try:
            n = int(data["n"])
            terms = [((int(t["x"], 16), int(t["z"], 16)), float(t["coeff"])) for t in data["terms"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed PauliSum JSON: {exc}") from exc
        return cls(n, terms)


def identity_sum(n: int, scale: float = 1.0) -> PauliSum:
    return PauliSum(n, {(0, 0): scale})


def sigma_term(sum_n: int, x_mask: int, z_mask: int) -> PauliTerm:
    """The Hermitian basis element sigma_(x,z) as a phased term."""
    return PauliTerm(sum_n, x_mask, z_mask, _I_POW[(x_mask & z_mask).bit_count() % 4])


# --- conjugation engine -----------------------------------------------------
#
# Internally a sum is expanded to "raw" form, a dict keyed by (x, z) whose
# complex value multiplies the bare product X^x Z^z (the sigma phase folded
# in).  Every gate rule below is exact on raw coefficients; converting back
# divides out the sigma phase and checks that imaginary residue cancelled.


def _to_raw(op: PauliSum) -> dict[tuple[int, int], complex]:
    return {
        (x, z): coeff * _I_POW[(x & z).bit_count() % 4]
        for (x, z), coeff in op._terms.items()
    }


def _from_raw(raw: Mapping[tuple[int, int], complex], n: int) -> PauliSum:
    terms: dict[tuple[int, int], float] = {}
    for (x, z), value in raw.items():
        coeff = value * _I_POW[(-((x & z).bit_count())) % 4]
        if abs(coeff.imag) > PRUNE_TOL:
            raise VerificationError(
                f"non-Hermitian residue {coeff.imag:.3e} on term ({x:#x}, {z:#x})"
            )
        if abs(coeff.real) > PRUNE_TOL:
            terms[(x, z)] = coeff.real
    return PauliSum(n, terms)


def conjugate_by_hadamard_layer(op: PauliSum, qubits: Iterable[int]) -> PauliSum:
    """H on each listed qubit: swaps that qubit's X and Z bits, Y flips sign."""
    mask = _qubits_to_mask(op.n, qubits, "hadamard layer")
    raw = _to_raw(op)
    out: dict[tuple[int, int], complex] = {}
    for (x, z), value in raw.items():
        sign = -1.0 if (x & z & mask).bit_count() & 1 else 1.0
        nx = (x & ~mask) | (z & mask)
        nz = (z & ~mask) | (x & mask)
        out[(nx, nz)] = out.get((nx, nz), 0j) + sign * value
    return _from_raw(out, op.n)


def conjugate_by_cnot(op: PauliSum, control: int, target: int) -> PauliSum:
    """CNOT propagation: X_c -> X_c X_t and Z_t -> Z_c Z_t, no phase."""
    n = op.n
    if control == target:
        raise InputError("control and target must differ")
    for q in (control, target):
        if not 0 <= q < n:
            raise InputError(f"qubit {q} out of range for n = {n}")
    cbit = 1 << control
    tbit = 1 << target
    out: dict[tuple[int, int], complex] = {}
    for (x, z), value in _to_raw(op).items():
        nx = x ^ tbit if x & cbit else x
        nz = z ^ cbit if z & tbit else z
        out[(nx, nz)] = out.get((nx, nz), 0j) + value
    return _from_raw(out, n)


def _cos_sin_2theta(theta: float) -> tuple[float, float]:
    # Exact table whenever theta is an integer multiple of pi/8.
    k = round(theta / (math.pi / 8))
    if abs(theta - k * (math.pi / 8)) < 1e-12:
        return _COS_QUARTER[k % 8], _SIN_QUARTER[k % 8]
    return math.cos(2.0 * theta), math.sin(2.0 * theta)


def conjugate_by_phase_gate(op: PauliSum, support: Iterable[int], theta: float) -> PauliSum:
    """Conjugate by e^{i theta Z_S}.

    Terms commuting with Z_S pass through.  A term P anticommuting with Z_S
    (odd overlap of its X part with S) maps to
    cos(2 theta) P + i sin(2 theta) Z_S P.
    """
    s_mask = _qubits_to_mask(op.n, support, "phase gate")
    if s_mask == 0:
        raise InputError("phase gate support must be nonempty")
    cos2, sin2 = _cos_sin_2theta(theta)
    out: dict[tuple[int, int], complex] = {}
    for (x, z), value in _to_raw(op).items():
        if (x & s_mask).bit_count() & 1 == 0:
            out[(x, z)] = out.get((x, z), 0j) + value
            continue
        if cos2 != 0.0:
            out[(x, z)] = out.get((x, z), 0j) + cos2 * value
        if sin2 != 0.0:
            # i sin(2t) Z_S X^x Z^z = -i sin(2t) X^x Z^(z^S) for odd overlap.
            key = (x, z ^ s_mask)
            out[key] = out.get(key, 0j) + (-1j) * sin2 * value
    return _from_raw(out, op.n)


def multiply_sums(a: PauliSum, b: PauliSum) -> PauliSum:
    """Operator product of two sums (used e.g. for projector checks).

    The product of two Hermitian operators need not be Hermitian; callers are
    expected to form products that are (term * term for a projector check,
    symmetrized combinations, ...), and the residue check enforces it.
    """
    if a.n != b.n:
        raise InputError(f"qubit counts differ: {a.n} vs {b.n}")
    out: dict[tuple[int, int], complex] = {}
    for (x1, z1), v1 in _to_raw(a).items():
        for (x2, z2), v2 in _to_raw(b).items():
            sign = -1.0 if (z1 & x2).bit_count() & 1 else 1.0
            key = (x1 ^ x2, z1 ^ z2)
            out[key] = out.get(key, 0j) + sign * v1 * v2
    return _from_raw(out, a.n)
