import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from gibbsforge.circuit import XProgram


@pytest.fixture
def rng():
    return np.random.default_rng(90210)


def random_xprogram(rng, n, max_support=3, allow_prefix=False):
    monomials = []
    seen = set()
    for _ in range(int(rng.integers(n, 2 * n + 3))):
        size = int(rng.integers(1, min(max_support, n) + 1))
        support = tuple(sorted(rng.choice(n, size=size, replace=False).tolist()))
        if support in seen:
            continue
        seen.add(support)
        monomials.append((support, int(rng.integers(1, 8))))
    if not monomials:
        monomials = [((0,), 1)]
    prefix = ()
    if allow_prefix and n >= 2 and rng.random() < 0.5:
        pairs = []
        for _ in range(int(rng.integers(1, n))):
            c, t = rng.choice(n, size=2, replace=False)
            pairs.append((int(c), int(t)))
        prefix = tuple(pairs)
    return XProgram(n, tuple(sorted(monomials)), prefix)
