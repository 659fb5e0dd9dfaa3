"""Parent Hamiltonians of X-program circuits.

The number operator sum H = sum_i (1 - Z_i)/2 counts excited qubits; its
eigenvalue on |x> is the Hamming weight of x.  Conjugating each projector
(1 - Z_i)/2 through a circuit C gives the parent Hamiltonian C H C^dagger,
whose eigenstates are the circuit columns C|x> with unchanged energies.  The
conjugation runs symbolically through the Pauli engine, so it scales with the
interaction neighborhood of each qubit rather than with 2^n, and full lattice
instances stay cheap.

Terms are kept one per origin qubit: locality and degree are properties of
the term list, not of the summed operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import pauli
from .circuit import XProgram
from .errors import InputError
from .pauli import PauliSum

ANGLE_UNIT = math.pi / 8.0


@dataclass(frozen=True)
class ParentHamiltonian:
    n: int
    terms: tuple[tuple[int, PauliSum], ...]  # (origin qubit, conjugated projector)

    def total(self) -> PauliSum:
        out = PauliSum(self.n)
        for _origin, term in self.terms:
            out = out + term
        return out

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "terms": [
                {"origin": origin, "pauli_sum": term.to_json_dict()}
                for origin, term in self.terms
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ParentHamiltonian":
        try:
            n = int(data["n"])
            terms = tuple(
                (int(t["origin"]), PauliSum.from_json_dict(t["pauli_sum"]))
                for t in data["terms"]
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed ParentHamiltonian JSON: {exc}") from exc
        return cls(n, terms)


@dataclass(frozen=True)
class InteractionProfile:
    """Locality and degree of a term list.

    degree_delta counts, for the worst qubit, every term whose support
    contains it; degree_delta_excluding_origin drops the qubit's own term
    from that count, which is the other convention in circulation.
    """

    locality_k: int
    degree_delta: int
    degree_delta_excluding_origin: int
    per_term_supports: tuple[tuple[int, ...], ...]

    def to_json_dict(self) -> dict:
        return {
            "k": self.locality_k,
            "delta": self.degree_delta,
            "delta_excluding_origin": self.degree_delta_excluding_origin,
            "supports": [list(s) for s in self.per_term_supports],
        }


def number_projector(n: int, qubit: int) -> PauliSum:
    """(1 - Z_qubit) / 2, the excitation projector for one qubit."""
    if not 0 <= qubit < n:
        raise InputError(f"qubit {qubit} out of range for n = {n}")
    return PauliSum(n, {(0, 0): 0.5, (0, 1 << qubit): -0.5})


def noninteracting_hamiltonian(n: int) -> PauliSum:
    out = PauliSum(n)
    for i in range(n):
        out = out + number_projector(n, i)
    return out


def conjugate_through_program(op: PauliSum, program: XProgram) -> PauliSum:
    """C op C^dagger for C = H^n D H^n B, applied innermost gate first."""
    if op.n != program.n:
        raise InputError(f"operator has n = {op.n}, program has n = {program.n}")
    out = op
    for control, target in program.cnot_prefix:
        out = pauli.conjugate_by_cnot(out, control, target)
    layer = range(program.n)
    out = pauli.conjugate_by_hadamard_layer(out, layer)
    for qubits, k in program.monomials:
        out = pauli.conjugate_by_phase_gate(out, qubits, k * ANGLE_UNIT)
    out = pauli.conjugate_by_hadamard_layer(out, layer)
    return out


def conjugate_by_prefix(op: PauliSum, program: XProgram) -> PauliSum:
    """B op B^dagger only (the CNOT network stage of the full conjugation)."""
    out = op
    for control, target in program.cnot_prefix:
        out = pauli.conjugate_by_cnot(out, control, target)
    return out


def build_parent(program: XProgram) -> ParentHamiltonian:
    """One conjugated projector per input qubit."""
    terms = tuple(
        (i, conjugate_through_program(number_projector(program.n, i), program))
        for i in range(program.n)
    )
    return ParentHamiltonian(program.n, terms)


def analyze(h: ParentHamiltonian) -> InteractionProfile:
    supports = tuple(tuple(sorted(term.support())) for _origin, term in h.terms)
    locality = max((len(s) for s in supports), default=0)
    incident: dict[int, int] = {}
    incident_other: dict[int, int] = {}
    for (origin, _term), support in zip(h.terms, supports):
        for q in support:
            incident[q] = incident.get(q, 0) + 1
            if q != origin:
                incident_other[q] = incident_other.get(q, 0) + 1
    degree = max(incident.values(), default=0)
    degree_other = max(incident_other.values(), default=0)
    return InteractionProfile(locality, degree, degree_other, supports)


def partition_function(n: int, beta: float) -> float:
    """(1 + e^-beta)^n, exact for every parent Hamiltonian of n qubits.

    Conjugation is spectrum-preserving, so the trace of e^{-beta H_C} only
    sees the Hamming-weight eigenvalues of the base Hamiltonian.
    """
    if n < 1:
        raise InputError(f"need at least one qubit, got n = {n}")
    if math.isnan(beta):
        raise InputError("beta must not be NaN")
    if math.isinf(beta):
        if beta > 0:
            return 1.0
        raise InputError("beta = -inf has no finite partition function")
    return (1.0 + math.exp(-beta)) ** n
