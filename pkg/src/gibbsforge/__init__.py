"""IQP circuit families, parent Hamiltonians, and the thermal-noise correspondence."""

__version__ = "0.1.0"

from .errors import GibbsforgeError, InputError, ResourceCapError, VerificationError
from .pauli import PauliSum, PauliTerm

__all__ = [
    "GibbsforgeError",
    "InputError",
    "PauliSum",
    "PauliTerm",
    "ResourceCapError",
    "VerificationError",
    "__version__",
]
