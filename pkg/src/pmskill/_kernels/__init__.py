"""Kernel backend selection.

The compiled Cython kernels are preferred when built; the pure NumPy
fallbacks are used otherwise. ``PMSKILL_BACKEND=pure`` or ``=compiled``
forces a backend (the latter raises if the extension is missing).
"""

import os

_requested = os.environ.get("PMSKILL_BACKEND", "").strip().lower()

if _requested == "pure":
    from ._pure import arma_filter, grow_tree
    BACKEND = "pure"
elif _requested in ("", "compiled"):
    try:
        from ._core import arma_filter, grow_tree  # type: ignore[attr-defined]
        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        from ._pure import arma_filter, grow_tree
        BACKEND = "pure"
else:
    raise ImportError(
        f"PMSKILL_BACKEND={_requested!r} not recognized (use 'pure' or 'compiled')"
    )

__all__ = ["arma_filter", "grow_tree", "BACKEND"]
