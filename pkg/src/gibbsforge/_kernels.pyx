# Compiled sampling kernel.  Must stay bitwise-equivalent to _kernels_py:
# same butterfly order, probs as re^2 + im^2, sequential CDF accumulation,
# first-index-above-target selection with last-index fall-through.

import numpy as np

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef void _fwht(double complex* v, Py_ssize_t dim) noexcept nogil:
    cdef Py_ssize_t h = 1, i, j
    cdef double complex x, y
    while h < dim:
        i = 0
        while i < dim:
            for j in range(i, i + h):
                x = v[j]
                y = v[j + h]
                v[j] = x + y
                v[j + h] = x - y
            i += 2 * h
        h *= 2


def sample_block(
    double complex[::1] phases,
    unsigned long long[::1] bx_masks,
    double[::1] u_sel,
    unsigned long long[::1] out,
):
    """Per-shot modulate + Walsh-Hadamard + inverse-CDF index selection."""
    cdef Py_ssize_t dim = phases.shape[0]
    cdef Py_ssize_t m = bx_masks.shape[0]
    scratch = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] sview = scratch
    cdef double complex* v = &sview[0]
    cdef double complex* ph = &phases[0]
    cdef unsigned long long bx
    cdef Py_ssize_t s, y, idx
    cdef double total, running, target, p
    with nogil:
        for s in range(m):
            bx = bx_masks[s]
            for y in range(dim):
                if __builtin_popcountll((<unsigned long long> y) & bx) & 1:
                    v[y] = -ph[y]
                else:
                    v[y] = ph[y]
            _fwht(v, dim)
            total = 0.0
            for y in range(dim):
                p = v[y].real * v[y].real + v[y].imag * v[y].imag
                total += p
            target = u_sel[s] * total
            running = 0.0
            idx = dim - 1
            for y in range(dim):
                p = v[y].real * v[y].real + v[y].imag * v[y].imag
                running += p
                if running > target:
                    idx = y
                    break
            out[s] = <unsigned long long> idx
