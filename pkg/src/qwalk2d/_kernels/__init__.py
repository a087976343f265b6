"""Kernel backend selection for in-place plate application.

Two interchangeable implementations exist: a compiled Cython extension
(`_walk_cy`, built by setup.py when Cython and a C compiler are available)
and a pure-numpy fallback (`_walk_np`).  Both expose

    apply_plates(grid, kinds, cvals, svals, guard_tol) -> int

operating in place on a C-contiguous complex128 grid of shape (ny, nx, 2)
and returning -1 on success or the index of the first plate whose moved
branch would carry magnitude above guard_tol across the lattice edge.

The env var QWALK2D_KERNEL picks the backend: "auto" (default, compiled if
importable), "cython" (required, ImportError otherwise), or "numpy".
"""
from __future__ import annotations

import os


def _load_backend():
    choice = os.environ.get("QWALK2D_KERNEL", "auto").lower()
    if choice not in {"auto", "cython", "numpy"}:
        raise ValueError(
            f"QWALK2D_KERNEL must be auto, cython, or numpy, got {choice!r}"
        )
    if choice in ("auto", "cython"):
        try:
            from . import _walk_cy

            return _walk_cy, "cython"
        except ImportError:
            if choice == "cython":
                raise
    from . import _walk_np

    return _walk_np, "numpy"


_backend, BACKEND_NAME = _load_backend()
apply_plates = _backend.apply_plates


def backend_name() -> str:
    """Name of the kernel backend selected at import: 'cython' or 'numpy'."""
    return BACKEND_NAME
