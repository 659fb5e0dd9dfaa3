"""Exception types shared across the package.

The CLI maps these onto process exit codes: InputError -> 2,
VerificationError -> 1, ResourceCapError -> 3.
"""


class GibbsforgeError(Exception):
    """Base class for all errors raised by this package."""


class InputError(GibbsforgeError):
    """Malformed or out-of-domain input (CLI exit code 2)."""


class VerificationError(GibbsforgeError):
    """A checked identity or inequality failed (CLI exit code 1)."""


class ResourceCapError(GibbsforgeError):
    """Requested size exceeds a configured dense/simulation cap (exit code 3)."""
