# cython: language_level=3
"""Compiled plate application; operation-for-operation mirror of _walk_np."""
import numpy as np

cimport cython
cimport numpy as cnp

cnp.import_array()

KIND_COIN = 0
KIND_SHIFT_X = 1
KIND_SHIFT_Y = 2


@cython.boundscheck(False)
@cython.wraparound(False)
def apply_plates(double complex[:, :, ::1] grid,
                 int[::1] kinds,
                 double[::1] cvals,
                 double[::1] svals,
                 double guard_tol):
    """Apply a plate sequence in place to a (ny, nx, 2) complex amplitude grid.

    Same contract as the numpy backend: returns -1 on success or the index
    of the first plate whose moved branch would carry magnitude above
    ``guard_tol`` across the lattice edge.
    """
    cdef Py_ssize_t ny = grid.shape[0]
    cdef Py_ssize_t nx = grid.shape[1]
    cdef Py_ssize_t nplates = kinds.shape[0]
    cdef Py_ssize_t p, i, j
    cdef int kind
    cdef double c, s, edge_sq, guard, mag
    cdef double complex up, down, imag_s
    cdef double complex[::1] buf_up, buf_down

    buf_up = np.empty(max(nx, ny), dtype=np.complex128)
    buf_down = np.empty(max(nx, ny), dtype=np.complex128)

    for p in range(nplates):
        kind = kinds[p]
        c = cvals[p]
        s = svals[p]
        if c == 1.0 and s == 0.0:
            continue
        imag_s = s * 1j

        if kind == 0:  # coin rotation
            for i in range(ny):
                for j in range(nx):
                    up = grid[i, j, 0]
                    down = grid[i, j, 1]
                    grid[i, j, 0] = c * up + imag_s * down
                    grid[i, j, 1] = imag_s * up + c * down
            continue

        if s != 0.0:
            # Up wraps off the trailing edge, Down off the leading edge.
            edge_sq = 0.0
            if kind == 1:
                for i in range(ny):
                    mag = (grid[i, nx - 1, 0].real * grid[i, nx - 1, 0].real
                           + grid[i, nx - 1, 0].imag * grid[i, nx - 1, 0].imag)
                    if mag > edge_sq:
                        edge_sq = mag
                    mag = (grid[i, 0, 1].real * grid[i, 0, 1].real
                           + grid[i, 0, 1].imag * grid[i, 0, 1].imag)
                    if mag > edge_sq:
                        edge_sq = mag
            else:
                for j in range(nx):
                    mag = (grid[ny - 1, j, 0].real * grid[ny - 1, j, 0].real
                           + grid[ny - 1, j, 0].imag * grid[ny - 1, j, 0].imag)
                    if mag > edge_sq:
                        edge_sq = mag
                    mag = (grid[0, j, 1].real * grid[0, j, 1].real
                           + grid[0, j, 1].imag * grid[0, j, 1].imag)
                    if mag > edge_sq:
                        edge_sq = mag
            guard = guard_tol / s
            if edge_sq > guard * guard:
                return p

        if kind == 1:  # x translation, row by row
            for i in range(ny):
                for j in range(nx):
                    buf_up[j] = grid[i, j, 0]
                    buf_down[j] = grid[i, j, 1]
                for j in range(nx):
                    grid[i, j, 0] = c * buf_up[j] + imag_s * buf_down[j + 1 if j + 1 < nx else 0]
                    grid[i, j, 1] = c * buf_down[j] + imag_s * buf_up[j - 1 if j > 0 else nx - 1]
        else:  # y translation, column by column
            for j in range(nx):
                for i in range(ny):
                    buf_up[i] = grid[i, j, 0]
                    buf_down[i] = grid[i, j, 1]
                for i in range(ny):
                    grid[i, j, 0] = c * buf_up[i] + imag_s * buf_down[i + 1 if i + 1 < ny else 0]
                    grid[i, j, 1] = c * buf_down[i] + imag_s * buf_up[i - 1 if i > 0 else ny - 1]
    return -1
