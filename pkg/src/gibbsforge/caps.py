"""Size caps for dense and Monte Carlo paths.

Dense objects grow as 4^n, so the library refuses oversized requests instead
of thrashing.  GIBBSFORGE_CAP_N overrides the default dense cap of 12 (the
parent-Hamiltonian dense oracle keeps its own cap of 10, and the Monte Carlo
sampler its statevector cap of 24).
"""

import os

from .errors import InputError, ResourceCapError

DENSE_CAP_DEFAULT = 12
PARENT_DENSE_CAP = 10
MC_CAP = 24

_ENV_VAR = "GIBBSFORGE_CAP_N"
_ENV_CEILING = 26  # guard: beyond this even index arrays stop fitting in RAM


def resolve_dense_cap() -> int:
    """Dense cap, honoring the GIBBSFORGE_CAP_N override."""
    raw = os.environ.get(_ENV_VAR)
    if raw is None:
        return DENSE_CAP_DEFAULT
    try:
        cap = int(raw)
    except ValueError as exc:
        raise InputError(f"{_ENV_VAR} must be an integer, got {raw!r}") from exc
    if not 1 <= cap <= _ENV_CEILING:
        raise InputError(f"{_ENV_VAR} must be in [1, {_ENV_CEILING}], got {cap}")
    return cap


def check_dense(n: int, cap: int | None = None, what: str = "dense operation") -> None:
    """Raise ResourceCapError if n qubits exceed the dense cap."""
    limit = resolve_dense_cap() if cap is None else cap
    if n > limit:
        raise ResourceCapError(f"{what} needs n <= {limit}, got n = {n}")
