"""Kernel backend selection.

The compiled extension is preferred; the pure-Python fallback is used when
it is missing or when ``SERVOFRICTION_PURE=1`` is set in the environment.
Both expose the same functions with bit-identical results.
"""

import os

if os.environ.get("SERVOFRICTION_PURE", "") == "1":
    from . import _purepy as impl
else:
    try:
        from . import _kernel as impl  # type: ignore[no-redef]
    except ImportError:
        from . import _purepy as impl  # type: ignore[no-redef]


def backend_name() -> str:
    """Name of the active kernel backend ("compiled" or "pure")."""
    return impl.BACKEND
