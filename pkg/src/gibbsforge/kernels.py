"""Backend dispatch for the sampling kernel.

The compiled extension (gibbsforge._kernels) is preferred when importable;
otherwise the pure-numpy fallback runs.  GIBBSFORGE_BACKEND=python or =cython
forces a choice (forcing cython fails loudly if the extension is missing).
Both backends are bitwise-identical by contract and the test suite compares
them sample for sample.
"""

from __future__ import annotations

import os

from . import _kernels_py
from .errors import InputError

_requested = os.environ.get("GIBBSFORGE_BACKEND", "").strip().lower()
if _requested not in ("", "cython", "python"):
    raise InputError(
        f"GIBBSFORGE_BACKEND must be 'cython' or 'python', got {_requested!r}"
    )

backend_name = "python"
_impl = _kernels_py
if _requested != "python":
    try:
        from . import _kernels as _impl_c

        _impl = _impl_c
        backend_name = "cython"
    except ImportError:
        if _requested == "cython":
            raise InputError(
                "GIBBSFORGE_BACKEND=cython but the compiled extension is not built"
            ) from None

fwht_inplace = _kernels_py.fwht_inplace


def sample_block(phases, bx_masks, u_sel, out) -> None:
    """Dispatch to the selected backend (see _kernels_py.sample_block)."""
    _impl.sample_block(phases, bx_masks, u_sel, out)
