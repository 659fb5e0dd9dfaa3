"""Pure-numpy sampling kernels.

Fallback used when the compiled extension is unavailable.  Both backends must
produce bitwise-identical output, so every floating-point step here mirrors
the compiled loop exactly: the same butterfly order in the transform, probs
as re^2 + im^2, a sequential running sum for the CDF (numpy's cumsum adds
sequentially, which the test suite pins), and first-index-above-target
selection with a fall-through to the last index.
"""

from __future__ import annotations

import numpy as np


def fwht_inplace(a: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis, in place.

    Butterfly (x, y) -> (x + y, x - y) with stride doubling; length must be a
    power of two.
    """
    dim = a.shape[-1]
    if dim & (dim - 1):
        raise ValueError(f"length {dim} is not a power of two")
    flat = a.reshape(-1, dim)
    h = 1
    while h < dim:
        view = flat.reshape(flat.shape[0], dim // (2 * h), 2, h)
        x = view[:, :, 0, :].copy()
        y = view[:, :, 1, :]
        view[:, :, 0, :] = x + y
        view[:, :, 1, :] = x - y
        h *= 2
    return a


def sample_block(
    phases: np.ndarray,
    bx_masks: np.ndarray,
    u_sel: np.ndarray,
    out: np.ndarray,
) -> None:
    """Sample one output index per shot from an IQP statevector.

    For each shot s with pre-permuted input mask bx_masks[s]: modulate the
    diagonal phase vector by (-1)^popcount(y & bx), Walsh-Hadamard transform,
    then inverse-CDF select an index using u_sel[s] against the unnormalized
    probabilities |amp|^2.

    Args:
        phases: complex128[dim] diagonal phases, dim a power of two.
        bx_masks: uint64[m] input basis states (CNOT prefix already applied).
        u_sel: float64[m] uniforms for the selection draw.
        out: uint64[m], filled with the sampled indices.
    """
    dim = phases.shape[0]
    m = bx_masks.shape[0]
    y_idx = np.arange(dim, dtype=np.uint64)
    # All math below is row-local, so slicing over shots only bounds memory.
    step = max(1, (1 << 22) // dim)
    for lo in range(0, m, step):
        bx = bx_masks[lo : lo + step]
        parity = (np.bitwise_count(y_idx[None, :] & bx[:, None]) & 1).astype(np.float64)
        v = phases[None, :] * (1.0 - 2.0 * parity)
        fwht_inplace(v)
        probs = v.real**2 + v.imag**2
        cdf = np.cumsum(probs, axis=1)
        target = u_sel[lo : lo + step] * cdf[:, -1]
        idx = (cdf > target[:, None]).argmax(axis=1).astype(np.uint64)
        # u close enough to 1 that no prefix exceeds the target: take the last bin.
        idx[cdf[:, -1] <= target] = dim - 1
        out[lo : lo + step] = idx
