"""Classical side of the repetition encoding: XOR unfold and majority decode.

A block-encoded circuit emits nr bits per shot.  For block-monomial samples
the r bits of a block are the logical bit XOR iid flips, so a raw per-block
majority vote recovers it.  For CNOT-network samples the same holds after
xor_unfold, which replays the network on the classical outcome (slot bit
XOR= leader bit); unfolding is an involution, and an unfolded CNOT-form
sample is distributed exactly like a block-monomial sample.

The decoded distribution equals the unencoded circuit under an effective
bit-flip rate: the binomial majority-failure tail, plus tie mass at even r
weighted by the tie rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .simulate import Distribution, bitstring_of, index_of_bitstring

_FORMS = ("bms", "cnot")


@dataclass(frozen=True)
class BlockLayout:
    """n_logical blocks of r physical qubits; qubit i*r + j is slot j of block i.

    Slot 0 is the block leader (the CNOT-network control and the transversal
    circuit's carrier).
    """

    n_logical: int
    r: int

    def __post_init__(self) -> None:
        if self.n_logical < 1:
            raise InputError(f"need at least one block, got {self.n_logical}")
        if self.r < 1:
            raise InputError(f"repetition count must be >= 1, got {self.r}")

    @property
    def n_physical(self) -> int:
        return self.n_logical * self.r

    def block_mask(self, i: int) -> int:
        return ((1 << self.r) - 1) << (i * self.r)

    def leader_bit(self, i: int) -> int:
        return 1 << (i * self.r)


@dataclass(frozen=True)
class DecodeReport:
    logical_bits: str
    per_block_votes: tuple[tuple[int, int], ...]  # (zeros, ones) per block
    tie_count: int

    @property
    def logical_index(self) -> int:
        return index_of_bitstring(self.logical_bits)


def _as_index(sample: "int | str", layout: BlockLayout) -> tuple[int, bool]:
    if isinstance(sample, str):
        if len(sample) != layout.n_physical:
            raise InputError(
                f"sample length {len(sample)} does not match layout n*r = {layout.n_physical}"
            )
        return index_of_bitstring(sample), True
    sample = int(sample)
    if not 0 <= sample < (1 << layout.n_physical):
        raise InputError(f"sample index {sample} out of range for {layout.n_physical} bits")
    return sample, False


def xor_unfold(sample: "int | str", layout: BlockLayout) -> "int | str":
    """Replay the copy network on a measured outcome: slot bit XOR= leader bit.

    Self-inverse; maps CNOT-form samples to block-monomial form and back.
    """
    idx, was_str = _as_index(sample, layout)
    for i in range(layout.n_logical):
        if idx >> (i * layout.r) & 1:
            idx ^= layout.block_mask(i) ^ layout.leader_bit(i)
    return bitstring_of(idx, layout.n_physical) if was_str else idx


def xor_unfold_indices(indices: np.ndarray, layout: BlockLayout) -> np.ndarray:
    """Vectorized xor_unfold over an array of sample indices."""
    out = indices.astype(np.uint64, copy=True)
    for i in range(layout.n_logical):
        leader = (out >> np.uint64(i * layout.r)) & np.uint64(1)
        slots = np.uint64(layout.block_mask(i) ^ layout.leader_bit(i))
        out ^= leader * slots
    return out


def _decode_index(idx: int, layout: BlockLayout, tie_rule: str) -> tuple[int, list, int]:
    r = layout.r
    logical = 0
    votes = []
    ties = 0
    for i in range(layout.n_logical):
        ones = ((idx >> (i * r)) & ((1 << r) - 1)).bit_count()
        votes.append((r - ones, ones))
        if 2 * ones > r:
            bit = 1
        elif 2 * ones < r:
            bit = 0
        else:
            ties += 1
            bit = 0 if tie_rule == "zero" else idx >> (i * r) & 1
        logical |= bit << i
    return logical, votes, ties


def decode_majority(
    sample: "int | str", layout: BlockLayout, tie_rule: str = "zero", form: str = "bms"
) -> DecodeReport:
    """Per-block majority vote; pass form="cnot" to xor_unfold first.

    tie_rule applies only at even r with a split block: "zero" decodes the
    block to 0, "leader" takes the leader bit of the (unfolded) sample.
    """
    if tie_rule not in ("zero", "leader"):
        raise InputError(f"tie_rule must be 'zero' or 'leader', got {tie_rule!r}")
    if form not in _FORMS:
        raise InputError(f"form must be one of {_FORMS}, got {form!r}")
    idx, _ = _as_index(sample, layout)
    if form == "cnot":
        idx = xor_unfold(idx, layout)
    logical, votes, ties = _decode_index(idx, layout, tie_rule)
    return DecodeReport(
        logical_bits=bitstring_of(logical, layout.n_logical),
        per_block_votes=tuple(votes),
        tie_count=ties,
    )


def _decoded_index_table(layout: BlockLayout, tie_rule: str) -> np.ndarray:
    """Decoded logical index for every physical index (block-monomial form)."""
    r = layout.r
    dim = 1 << layout.n_physical
    idx = np.arange(dim, dtype=np.uint64)
    logical = np.zeros(dim, dtype=np.uint64)
    full = np.uint64((1 << r) - 1)
    for i in range(layout.n_logical):
        block = (idx >> np.uint64(i * r)) & full
        ones = np.bitwise_count(block).astype(np.int64)
        bit = (2 * ones > r).astype(np.uint64)
        if r % 2 == 0:
            tie = 2 * ones == r
            if tie_rule == "leader":
                bit = np.where(tie, block & np.uint64(1), bit)
            # tie_rule "zero" keeps bit = 0 on ties
        logical |= bit << np.uint64(i)
    return logical


def decode_distribution(
    dist: Distribution, layout: BlockLayout, tie_rule: str = "zero", form: str = "bms"
) -> Distribution:
    """Push a physical output distribution through the majority decoder."""
    if tie_rule not in ("zero", "leader"):
        raise InputError(f"tie_rule must be 'zero' or 'leader', got {tie_rule!r}")
    if form not in _FORMS:
        raise InputError(f"form must be one of {_FORMS}, got {form!r}")
    if dist.n != layout.n_physical:
        raise InputError(f"distribution is over {dist.n} bits, layout needs {layout.n_physical}")
    if dist.kind == "empirical":
        counts: dict[int, int] = {}
        for idx, count in dist.counts.items():
            if form == "cnot":
                idx = xor_unfold(idx, layout)
            logical, _, _ = _decode_index(idx, layout, tie_rule)
            counts[logical] = counts.get(logical, 0) + count
        return Distribution.empirical(layout.n_logical, counts)
    table = _decoded_index_table(layout, tie_rule)
    if form == "cnot":
        table = table[xor_unfold_indices(np.arange(1 << layout.n_physical, dtype=np.uint64), layout)]
    probs = np.zeros(1 << layout.n_logical, dtype=np.float64)
    np.add.at(probs, table, dist.probs)
    return Distribution.exact(layout.n_logical, probs)


def failure_rate_exact(q: float, r: int, tie_rule: str = "zero") -> float:
    """Per-block probability that majority decoding flips the logical bit.

    Binomial tail over r iid flips at rate q, plus the even-r tie mass: the
    "leader" rule errs on half the tie mass (a symmetric channel), while
    "zero" errs on all of it when the logical bit is 1. The returned rate is
    that worst-case direction, so for even r with "zero" the decoded channel
    is asymmetric and this value is its larger arm.
    """
    if not (math.isfinite(q) and 0.0 <= q <= 1.0):
        raise InputError(f"rate must lie in [0, 1], got {q}")
    if r < 1:
        raise InputError(f"repetition count must be >= 1, got {r}")
    if tie_rule not in ("zero", "leader"):
        raise InputError(f"tie_rule must be 'zero' or 'leader', got {tie_rule!r}")
    total = 0.0
    for k in range(r // 2 + 1, r + 1):
        total += math.comb(r, k) * q**k * (1.0 - q) ** (r - k)
    if r % 2 == 0:
        tie = math.comb(r, r // 2) * (q * (1.0 - q)) ** (r // 2)
        total += tie if tie_rule == "zero" else 0.5 * tie
    return total


def failure_rate_bound(q: float, r: int) -> float:
    """(4q(1-q))^(r/2), the Chernoff bound on the majority failure."""
    if not (math.isfinite(q) and 0.0 <= q <= 1.0):
        raise InputError(f"rate must lie in [0, 1], got {q}")
    if r < 1:
        raise InputError(f"repetition count must be >= 1, got {r}")
    return (4.0 * q * (1.0 - q)) ** (r / 2.0)
