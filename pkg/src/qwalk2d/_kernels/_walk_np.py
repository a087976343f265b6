"""Pure-numpy plate application; the fallback when the compiled kernel is absent."""
from __future__ import annotations

import numpy as np

KIND_COIN = 0
KIND_SHIFT_X = 1
KIND_SHIFT_Y = 2


def apply_plates(grid, kinds, cvals, svals, guard_tol):
    """Apply a plate sequence in place to a (ny, nx, 2) complex amplitude grid.

    ``cvals[p]``/``svals[p]`` are the precomputed branch weights of plate p
    (cos/sin of the full angle for coins, of the half angle for shifts).
    Returns -1 on success, or the index of the first plate whose moved branch
    would carry magnitude above ``guard_tol`` across the lattice edge; the
    grid is left partially evolved in that case and callers treat it as an
    error.
    """
    for p in range(kinds.shape[0]):
        kind = int(kinds[p])
        c = float(cvals[p])
        s = float(svals[p])
        if c == 1.0 and s == 0.0:
            continue
        if kind == KIND_COIN:
            up = grid[:, :, 0].copy()
            grid[:, :, 0] = c * up + (1j * s) * grid[:, :, 1]
            grid[:, :, 1] = (1j * s) * up + c * grid[:, :, 1]
            continue
        axis = 1 if kind == KIND_SHIFT_X else 0
        # Up moves +1 along the axis, Down moves -1; the cells that would
        # wrap live on the trailing/leading edge respectively.
        if s != 0.0:
            if axis == 1:
                edge = max(np.abs(grid[:, -1, 0]).max(), np.abs(grid[:, 0, 1]).max())
            else:
                edge = max(np.abs(grid[-1, :, 0]).max(), np.abs(grid[0, :, 1]).max())
            if edge * s > guard_tol:
                return p
        up = grid[:, :, 0].copy()
        down = grid[:, :, 1].copy()
        grid[:, :, 0] = c * up + (1j * s) * np.roll(down, -1, axis=axis)
        grid[:, :, 1] = c * down + (1j * s) * np.roll(up, 1, axis=axis)
    return -1
