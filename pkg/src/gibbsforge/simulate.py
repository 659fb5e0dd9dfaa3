"""Exact and Monte Carlo distributions of noisy X-program circuits.

Two exact routes to the same diagonal ensemble:

* gibbs_diagonal_spectral mixes circuit columns with thermal weights
  e^{-beta h} / (1 + e^{-beta})^n, h the Hamming weight of the input.
* noisy_circuit_exact mixes the same columns with binomial input-noise
  weights q^h (1 - q)^{n - h}.

At q = e^{-beta} / (1 + e^{-beta}) the weight vectors are equal, so the two
distributions agree; the independent third route, gibbs_diagonal_dense,
exponentiates the dense parent Hamiltonian and reads off its diagonal.

The sampler draws one row of uniforms per shot from a counter-based Philox
stream at a fixed per-shot offset, so output is bitwise reproducible under
any chunking or thread schedule.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import kernels
from .caps import MC_CAP, PARENT_DENSE_CAP, check_dense
from .circuit import XProgram, apply_prefix_to_masks, diagonal_phase_vector
from .errors import InputError, ResourceCapError, VerificationError
from .hamiltonian import ParentHamiltonian

_SUM_TOL = 1e-10
_NEG_TOL = 1e-12
_DEGENERACY_TOL = 1e-8


@dataclass(frozen=True)
class NoiseSpec:
    """Independent per-qubit bit-flip rate."""

    q: float

    def __post_init__(self) -> None:
        q = float(self.q)
        if not (math.isfinite(q) and 0.0 <= q <= 1.0):
            raise InputError(f"bit-flip rate must lie in [0, 1], got {self.q}")
        object.__setattr__(self, "q", q)


def _rate(noise: "NoiseSpec | float") -> float:
    if isinstance(noise, NoiseSpec):
        return noise.q
    return NoiseSpec(float(noise)).q


@dataclass(frozen=True, eq=False)
class Distribution:
    """Exact probability table or empirical counts over n-bit strings."""

    n: int
    kind: str  # "exact" | "empirical"
    probs: np.ndarray | None = None
    counts: Mapping[int, int] | None = None
    shots: int | None = None

    @classmethod
    def exact(cls, n: int, probs: np.ndarray) -> "Distribution":
        probs = np.asarray(probs, dtype=np.float64)
        if probs.shape != (1 << n,):
            raise InputError(f"expected {1 << n} entries for n = {n}, got {probs.shape}")
        low = probs.min()
        if low < -_NEG_TOL:
            raise InputError(f"probability {low} below zero")
        probs = np.clip(probs, 0.0, None)
        total = float(probs.sum())
        if abs(total - 1.0) > _SUM_TOL:
            raise InputError(f"probabilities sum to {total}, expected 1")
        return cls(n=n, kind="exact", probs=probs)

    @classmethod
    def empirical(cls, n: int, counts: Mapping[int, int]) -> "Distribution":
        clean: dict[int, int] = {}
        total = 0
        for idx, count in counts.items():
            idx = int(idx)
            count = int(count)
            if not 0 <= idx < (1 << n):
                raise InputError(f"outcome {idx} out of range for n = {n}")
            if count <= 0:
                raise InputError(f"count for outcome {idx} must be positive, got {count}")
            clean[idx] = clean.get(idx, 0) + count
            total += count
        if total <= 0:
            raise InputError("empirical distribution needs at least one shot")
        return cls(n=n, kind="empirical", counts=clean, shots=total)

    def as_probs(self) -> np.ndarray:
        if self.kind == "exact":
            return self.probs
        if self.n > 26:
            raise ResourceCapError(f"dense table over {self.n} bits is too large")
        dense = np.zeros(1 << self.n, dtype=np.float64)
        for idx, count in self.counts.items():
            dense[idx] = count / self.shots
        return dense

    def l1_distance(self, other: "Distribution") -> float:
        """Sum_x |P(x) - Q(x)| (no 1/2 factor)."""
        if self.n != other.n:
            raise InputError(f"bit lengths differ: {self.n} vs {other.n}")
        return float(np.abs(self.as_probs() - other.as_probs()).sum())


# --- exact paths ------------------------------------------------------------


def _mixed_input_distribution(program: XProgram, weights: np.ndarray, cap: int | None) -> np.ndarray:
    """sum_x weights[x] |<s|C|x>|^2 for all s, by per-input-column transform."""
    check_dense(program.n, cap, "exact distribution")
    n = program.n
    dim = 1 << n
    phases = diagonal_phase_vector(program)
    perm = apply_prefix_to_masks(program.cnot_prefix, np.arange(dim, dtype=np.uint64))
    y = np.arange(dim, dtype=np.uint64)
    acc = np.zeros(dim, dtype=np.float64)
    chunk = max(1, (1 << 22) // dim)  # bound scratch at a few million entries
    for start in range(0, dim, chunk):
        bx = perm[start : start + chunk]
        signs = 1.0 - 2.0 * (np.bitwise_count(y[None, :] & bx[:, None]) & np.uint64(1)).astype(
            np.float64
        )
        block = phases[None, :] * signs
        kernels.fwht_inplace(block)
        acc += weights[start : start + chunk] @ (block.real**2 + block.imag**2)
    return acc / float(dim) ** 2


def hamming_weights(n: int) -> np.ndarray:
    return np.bitwise_count(np.arange(1 << n, dtype=np.uint64)).astype(np.int64)


def input_noise_weights(n: int, q: float) -> np.ndarray:
    """q^h (1-q)^(n-h) per input; the power form is exact at q = 0 and 1."""
    h = hamming_weights(n).astype(np.float64)
    return q**h * (1.0 - q) ** (float(n) - h)


def gibbs_weights(n: int, beta: float) -> np.ndarray:
    """e^{-beta h} / (1 + e^{-beta})^n per input, h the Hamming weight."""
    if math.isnan(beta):
        raise InputError("beta must not be NaN")
    if math.isinf(beta):
        if beta < 0:
            raise InputError("beta = -inf does not define a Gibbs state")
        return input_noise_weights(n, 0.0)  # infinite beta is the noiseless path
    h = hamming_weights(n).astype(np.float64)
    z = (1.0 + math.exp(-beta)) ** n
    return np.exp(-beta * h) / z


def gibbs_diagonal_spectral(program: XProgram, beta: float, cap: int | None = None) -> Distribution:
    """Thermal diagonal via circuit columns: (1/Z) sum_x e^{-beta HW(x)} |<s|C|x>|^2."""
    weights = gibbs_weights(program.n, beta)
    return Distribution.exact(program.n, _mixed_input_distribution(program, weights, cap))


def noisy_circuit_exact(program: XProgram, noise: NoiseSpec | float, cap: int | None = None) -> Distribution:
    """Output distribution under iid input bit-flips at rate q."""
    q = _rate(noise)
    weights = input_noise_weights(program.n, q)
    return Distribution.exact(program.n, _mixed_input_distribution(program, weights, cap))


def gibbs_diagonal_dense(h: ParentHamiltonian, beta: float) -> Distribution:
    """Diagonal of e^{-beta H} / tr from a dense eigendecomposition.

    Independent oracle for the spectral route; capped at 10 qubits.
    """
    if math.isnan(beta):
        raise InputError("beta must not be NaN")
    check_dense(h.n, PARENT_DENSE_CAP, "dense Gibbs diagonal")
    dense = h.total().to_dense(cap=PARENT_DENSE_CAP)
    evals, vecs = np.linalg.eigh(dense)
    shifted = evals - evals.min()
    if math.isinf(beta):
        if beta < 0:
            raise InputError("beta = -inf does not define a Gibbs state")
        factors = (shifted < _DEGENERACY_TOL).astype(np.float64)
    else:
        factors = np.exp(-beta * shifted)
    weights = factors / factors.sum()
    diag = (np.abs(vecs) ** 2) @ weights
    return Distribution.exact(h.n, diag)


def dense_partition_function(h: ParentHamiltonian, beta: float) -> float:
    """tr e^{-beta H} from dense eigenvalues (no spectrum shift)."""
    check_dense(h.n, PARENT_DENSE_CAP, "dense partition function")
    evals = np.linalg.eigvalsh(h.total().to_dense(cap=PARENT_DENSE_CAP))
    return float(np.exp(-beta * evals).sum())


# --- rate maps --------------------------------------------------------------


def compose_bitflip(p: float, q: float) -> float:
    """Rate of the composition of two bit-flip channels: p(1-q) + q(1-p)."""
    for name, value in (("p", p), ("q", q)):
        if not (math.isfinite(value) and 0.0 <= value <= 1.0):
            raise InputError(f"rate {name} must lie in [0, 1], got {value}")
    return p * (1.0 - q) + q * (1.0 - p)


def q_of_beta(beta: float) -> float:
    """e^{-beta} / (1 + e^{-beta}); beta = inf maps to the noiseless rate 0."""
    if math.isnan(beta) or beta < 0:
        raise InputError(f"beta must be >= 0, got {beta}")
    e = math.exp(-beta)
    return e / (1.0 + e)


def beta_of_q(q: float) -> float:
    """ln((1-q)/q) for q in (0, 1/2]."""
    if not (isinstance(q, (int, float)) and 0.0 < q <= 0.5):
        raise InputError(f"rate must lie in (0, 1/2], got {q}")
    return math.log((1.0 - q) / q)


def apply_bitflip_to_probs(probs: np.ndarray, q: float) -> np.ndarray:
    """Push a distribution through independent per-bit flips at rate q."""
    if not (math.isfinite(q) and 0.0 <= q <= 1.0):
        raise InputError(f"rate must lie in [0, 1], got {q}")
    dim = probs.shape[0]
    n = dim.bit_length() - 1
    idx = np.arange(dim)
    out = probs.astype(np.float64, copy=True)
    for j in range(n):
        out = (1.0 - q) * out + q * out[idx ^ (1 << j)]
    return out


def measured_gibbs_equivalence(
    program: XProgram, beta: float, q_meas: float, cap: int | None = None
) -> tuple[float, Distribution]:
    """Measurement bit-flips on a thermal diagonal re-thermalize it.

    Returns beta' with q' = compose_bitflip(q(beta), q_meas) and the exact
    flipped distribution, then checks it equals the thermal diagonal at
    beta'.  Only valid for programs without a CNOT prefix: the prefix
    correlates output bits, and a correlated ensemble is not a product
    Bernoulli mixture at any single rate.
    """
    if program.cnot_prefix:
        raise InputError(
            "measurement-noise absorption needs a prefix-free program; "
            "the CNOT network correlates the input mixture"
        )
    q_prime = compose_bitflip(q_of_beta(beta), float(q_meas))
    if q_prime > 0.5:
        raise InputError(f"composed rate {q_prime} exceeds 1/2, beta' undefined")
    beta_prime = beta_of_q(q_prime) if q_prime > 0.0 else math.inf
    base = gibbs_diagonal_spectral(program, beta, cap)
    flipped = Distribution.exact(program.n, apply_bitflip_to_probs(base.probs, q_meas))
    reference = gibbs_diagonal_spectral(program, beta_prime, cap)
    gap = flipped.l1_distance(reference)
    if gap > 1e-10:
        raise VerificationError(
            f"flipped thermal diagonal missed the beta' = {beta_prime} diagonal by L1 = {gap:.3e}"
        )
    return beta_prime, flipped


# --- Monte Carlo ------------------------------------------------------------


def _stream_row_width(n: int) -> int:
    # n threshold draws + 1 selection draw, padded to the Philox tick of 4
    return ((n + 1 + 3) // 4) * 4


def _sample_range(
    program_phases: np.ndarray,
    prefix: tuple[tuple[int, int], ...],
    n: int,
    q: float,
    seed: int,
    lo: int,
    hi: int,
    out: np.ndarray,
) -> None:
    row = _stream_row_width(n)
    bitgen = np.random.Philox(key=seed)
    bitgen.advance(lo * row // 4)
    u = np.random.Generator(bitgen).random((hi - lo, row))
    bits = (u[:, :n] < q).astype(np.uint64)
    masks = (bits << np.arange(n, dtype=np.uint64)).sum(axis=1, dtype=np.uint64)
    bx = apply_prefix_to_masks(prefix, masks)
    u_sel = np.ascontiguousarray(u[:, n])
    kernels.sample_block(program_phases, bx, u_sel, out[lo:hi])


def sample_indices(
    program: XProgram,
    noise: NoiseSpec | float,
    shots: int,
    seed: int,
    threads: int = 1,
    chunk_shots: int | None = None,
) -> np.ndarray:
    """Per-shot sampled output indices, bitwise-deterministic for a seed.

    Shot s consumes a fixed window of the Philox stream regardless of chunk
    size or thread count, so any schedule yields the identical array.
    """
    if shots < 1:
        raise InputError(f"need at least one shot, got {shots}")
    if program.n > MC_CAP:
        raise ResourceCapError(f"sampler needs n <= {MC_CAP}, got n = {program.n}")
    q = _rate(noise)
    phases = diagonal_phase_vector(program)
    if chunk_shots is None:
        chunk_shots = int(max(1, min(1 << 14, (1 << 22) // phases.shape[0])))
    if chunk_shots < 1:
        raise InputError(f"chunk_shots must be >= 1, got {chunk_shots}")
    spans = [(lo, min(lo + chunk_shots, shots)) for lo in range(0, shots, chunk_shots)]
    out = np.empty(shots, dtype=np.uint64)
    if threads <= 1 or len(spans) == 1:
        for lo, hi in spans:
            _sample_range(phases, program.cnot_prefix, program.n, q, seed, lo, hi, out)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(
                    _sample_range, phases, program.cnot_prefix, program.n, q, seed, lo, hi, out
                )
                for lo, hi in spans
            ]
            for future in futures:
                future.result()
    return out


def noisy_circuit_sample(
    program: XProgram,
    noise: NoiseSpec | float,
    shots: int,
    seed: int,
    threads: int = 1,
    chunk_shots: int | None = None,
) -> Distribution:
    """Empirical output distribution from the per-shot sampler."""
    indices = sample_indices(program, noise, shots, seed, threads, chunk_shots)
    values, counts = np.unique(indices, return_counts=True)
    return Distribution.empirical(
        program.n, {int(v): int(c) for v, c in zip(values, counts)}
    )


# --- serialization ----------------------------------------------------------


def bitstring_of(index: int, n: int) -> str:
    """Qubit-0-first string: character j is bit j of the index."""
    return "".join("1" if index >> j & 1 else "0" for j in range(n))


def index_of_bitstring(s: str) -> int:
    if not s or any(c not in "01" for c in s):
        raise InputError(f"malformed bitstring {s!r}")
    return sum(1 << j for j, c in enumerate(s) if c == "1")


def write_exact_csv(dist: Distribution, path: str) -> None:
    if dist.kind != "exact":
        raise InputError("CSV output is for exact distributions")
    rows = sorted(
        (bitstring_of(idx, dist.n), float(dist.probs[idx])) for idx in range(1 << dist.n)
    )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("bitstring,probability\n")
        for bits, p in rows:
            fh.write(f"{bits},{p!r}\n")


def read_exact_csv(path: str) -> Distribution:
    probs = None
    n = None
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "bitstring,probability":
            raise InputError(f"unexpected CSV header {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            bits, _, value = line.partition(",")
            if n is None:
                n = len(bits)
                probs = np.zeros(1 << n, dtype=np.float64)
            if len(bits) != n:
                raise InputError("inconsistent bitstring lengths in CSV")
            probs[index_of_bitstring(bits)] = float(value)
    if probs is None:
        raise InputError("empty distribution CSV")
    return Distribution.exact(n, probs)


def write_samples_jsonl(dist: Distribution, path: str, seed: int, q: float) -> None:
    if dist.kind != "empirical":
        raise InputError("JSONL sample output is for empirical distributions")
    rows = sorted((bitstring_of(idx, dist.n), count) for idx, count in dist.counts.items())
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"shots": dist.shots, "seed": seed, "q": q}) + "\n")
        for bits, count in rows:
            fh.write(json.dumps({"s": bits, "count": count}) + "\n")


def read_samples_jsonl(path: str) -> tuple[Distribution, dict]:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            header = json.loads(fh.readline())
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed JSONL header: {exc}") from exc
        counts: dict[int, int] = {}
        n = None
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
                bits, count = row["s"], int(row["count"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise InputError(f"malformed JSONL row {line!r}: {exc}") from exc
            if n is None:
                n = len(bits)
            elif len(bits) != n:
                raise InputError("inconsistent bitstring lengths in JSONL")
            counts[index_of_bitstring(bits)] = count
    if n is None:
        raise InputError("sample JSONL has no rows")
    return Distribution.empirical(n, counts), header
