import numpy as np
import pytest

from gibbsforge import _kernels_py, kernels

try:
    from gibbsforge import _kernels

    HAVE_COMPILED = True
except ImportError:
    HAVE_COMPILED = False


class TestStreamPins:
    """The sampler's reproducibility contract rests on these exact semantics.

    If either pin fails after a numpy upgrade, the per-shot stream layout in
    simulate.sample_indices must be revisited.
    """

    def test_philox_advance_counts_ticks_of_four_doubles(self):
        full = np.random.Generator(np.random.Philox(key=123)).random(40)
        for ticks in (1, 3, 7):
            bg = np.random.Philox(key=123)
            bg.advance(ticks)
            skipped = np.random.Generator(bg).random(40 - 4 * ticks)
            assert np.array_equal(skipped, full[4 * ticks :])

    def test_cumsum_is_sequential_running_sum(self, rng):
        v = rng.random(257)
        running = np.empty_like(v)
        acc = 0.0
        for i, x in enumerate(v):
            acc += x
            running[i] = acc
        assert np.array_equal(np.cumsum(v), running)

    def test_cumsum_rows_match_1d(self, rng):
        m = rng.random((5, 64))
        rowwise = np.cumsum(m, axis=1)
        for i in range(5):
            assert np.array_equal(rowwise[i], np.cumsum(m[i]))


class TestFwht:
    def test_matches_definition(self, rng):
        for n in (1, 2, 3, 5):
            dim = 1 << n
            v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
            had = np.array(
                [
                    [(-1.0) ** bin(x & y).count("1") for y in range(dim)]
                    for x in range(dim)
                ]
            )
            got = v.copy()
            kernels.fwht_inplace(got)
            assert np.allclose(got, had @ v, atol=1e-10)

    def test_involution_up_to_dim(self, rng):
        v = rng.standard_normal(16) + 0j
        w = v.copy()
        kernels.fwht_inplace(w)
        kernels.fwht_inplace(w)
        assert np.allclose(w, 16 * v)

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError):
            _kernels_py.fwht_inplace(np.zeros(6, dtype=complex))


def _random_phases(rng, dim):
    angles = rng.integers(0, 16, size=dim) * np.pi / 8.0
    return np.exp(1j * angles).astype(np.complex128)


class TestSampleBlock:
    def test_empirical_matches_bruteforce_distribution(self, rng):
        dim = 16
        phases = _random_phases(rng, dim)
        bx = np.zeros(50_000, dtype=np.uint64)
        u = rng.random(50_000)
        out = np.empty(50_000, dtype=np.uint64)
        _kernels_py.sample_block(phases, bx, u, out)
        v = phases.copy()
        kernels.fwht_inplace(v)
        probs = np.abs(v) ** 2
        probs /= probs.sum()
        freq = np.bincount(out.astype(int), minlength=dim) / out.shape[0]
        assert np.abs(freq - probs).sum() < 0.02

    def test_modulation_shifts_distribution(self, rng):
        # sampling with input mask bx is sampling the XOR-shifted distribution
        dim = 8
        phases = _random_phases(rng, dim)
        shots = 40_000
        u = rng.random(shots)
        out0 = np.empty(shots, dtype=np.uint64)
        out5 = np.empty(shots, dtype=np.uint64)
        _kernels_py.sample_block(phases, np.zeros(shots, dtype=np.uint64), u.copy(), out0)
        _kernels_py.sample_block(phases, np.full(shots, 5, dtype=np.uint64), u.copy(), out5)
        f0 = np.bincount(out0.astype(int), minlength=dim) / shots
        f5 = np.bincount(out5.astype(int), minlength=dim) / shots
        assert np.abs(f0[np.arange(dim) ^ 5] - f5).sum() < 0.02

    def test_selection_edges(self):
        # uniform phases: amplitude concentrates on index 0
        phases = np.ones(8, dtype=np.complex128)
        bx = np.zeros(3, dtype=np.uint64)
        out = np.empty(3, dtype=np.uint64)
        _kernels_py.sample_block(phases, bx, np.array([0.0, 0.5, 0.999999]), out)
        assert out.tolist() == [0, 0, 0]

    def test_target_at_or_above_total_takes_last_bin(self, monkeypatch):
        # u = 1.0 cannot occur from random(), but the kernel must stay in range
        phases = np.ones(4, dtype=np.complex128)
        bx = np.zeros(1, dtype=np.uint64)
        out = np.empty(1, dtype=np.uint64)
        _kernels_py.sample_block(phases, bx, np.array([1.0]), out)
        assert out[0] == 3
        if HAVE_COMPILED:
            _kernels.sample_block(phases, bx, np.array([1.0]), out)
            assert out[0] == 3

    def test_python_kernel_chunking_invariance(self, rng):
        # internal memory slicing must not change any output value
        dim = 1 << 10
        phases = _random_phases(rng, dim)
        shots = 4_223  # not a multiple of the internal slice
        bx = rng.integers(0, dim, size=shots).astype(np.uint64)
        u = rng.random(shots)
        whole = np.empty(shots, dtype=np.uint64)
        _kernels_py.sample_block(phases, bx, u.copy(), whole)
        pieces = np.empty(shots, dtype=np.uint64)
        for lo in range(0, shots, 617):
            hi = min(lo + 617, shots)
            _kernels_py.sample_block(phases, bx[lo:hi], u[lo:hi].copy(), pieces[lo:hi])
        assert np.array_equal(whole, pieces)


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled extension not built")
class TestBackendParity:
    def test_bitwise_identical_indices(self, rng):
        for n in (1, 3, 6, 10):
            dim = 1 << n
            phases = _random_phases(rng, dim)
            shots = 2_000
            bx = rng.integers(0, dim, size=shots).astype(np.uint64)
            u = rng.random(shots)
            out_py = np.empty(shots, dtype=np.uint64)
            out_cy = np.empty(shots, dtype=np.uint64)
            _kernels_py.sample_block(phases, bx, u.copy(), out_py)
            _kernels.sample_block(phases, bx, u.copy(), out_cy)
            assert np.array_equal(out_py, out_cy)

    def test_backend_env_selection(self):
        assert kernels.backend_name in ("cython", "python")


class TestBackendDispatch:
    def test_invalid_env_rejected(self, monkeypatch):
        import importlib

        from gibbsforge import errors

        monkeypatch.setenv("GIBBSFORGE_BACKEND", "fortran")
        import gibbsforge.kernels as km

        with pytest.raises(errors.InputError):
            importlib.reload(km)
        monkeypatch.undo()
        importlib.reload(km)
