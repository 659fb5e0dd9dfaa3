"""Timing comparison of the compiled and pure-numpy sampling kernels.

Run as a script:  python benchmarks/bench_kernels.py
Outputs a table of per-shot cost for both backends and verifies that their
sampled indices are bitwise identical on every configuration.
"""

import time

import numpy as np

from gibbsforge import _kernels_py
from gibbsforge.circuit import XProgram, diagonal_phase_vector
from gibbsforge.simulate import _stream_row_width

try:
    from gibbsforge import _kernels

    HAVE_COMPILED = True
except ImportError:
    _kernels = None
    HAVE_COMPILED = False


def random_program(rng, n):
    monomials = []
    seen = set()
    for _ in range(2 * n):
        size = int(rng.integers(1, min(3, n) + 1))
        support = tuple(sorted(rng.choice(n, size=size, replace=False).tolist()))
        if support in seen:
            continue
        seen.add(support)
        monomials.append((support, int(rng.integers(1, 8))))
    return XProgram(n, tuple(sorted(monomials)))


def draw_inputs(rng, n, shots, q=0.25):
    row = _stream_row_width(n)
    u = rng.random((shots, row))
    bits = (u[:, :n] < q).astype(np.uint64)
    masks = (bits << np.arange(n, dtype=np.uint64)).sum(axis=1, dtype=np.uint64)
    return masks, np.ascontiguousarray(u[:, n])


def run_backend(module, phases, masks, u_sel):
    out = np.empty(masks.shape[0], dtype=np.uint64)
    t0 = time.perf_counter()
    module.sample_block(phases, masks, u_sel, out)
    return time.perf_counter() - t0, out


def main():
    rng = np.random.default_rng(2024)
    configs = [(4, 200_000), (8, 100_000), (12, 20_000), (16, 2_000), (20, 200)]
    print(f"compiled extension available: {HAVE_COMPILED}")
    header = f"{'n':>3} {'shots':>8} {'python':>12} {'cython':>12} {'speedup':>8}  identical"
    print(header)
    print("-" * len(header))
    for n, shots in configs:
        program = random_program(rng, n)
        phases = diagonal_phase_vector(program)
        masks, u_sel = draw_inputs(rng, n, shots)
        t_py, out_py = run_backend(_kernels_py, phases, masks.copy(), u_sel.copy())
        if HAVE_COMPILED:
            t_cy, out_cy = run_backend(_kernels, phases, masks.copy(), u_sel.copy())
            same = bool(np.array_equal(out_py, out_cy))
            print(
                f"{n:>3} {shots:>8} {t_py/shots*1e6:>10.2f}us {t_cy/shots*1e6:>10.2f}us"
                f" {t_py/t_cy:>7.1f}x  {same}"
            )
            if not same:
                raise SystemExit("backend outputs differ")
        else:
            print(f"{n:>3} {shots:>8} {t_py/shots*1e6:>10.2f}us {'-':>12} {'-':>8}  -")


if __name__ == "__main__":
    main()
