"""Lattice, coin, and plate algebra for a coined walk on a 2D synthetic lattice.

The walker lives on integer sites (m, n) with a two-level coin attached to
each site.  Plates come in three kinds: a coin rotation mixing the two coin
levels in place, and coin-conditioned translations along x or y.  Everything
downstream (single- and two-photon simulation, distributions, the CLI) is
built from the pieces defined here.

Conventions fixed once and used everywhere:

* coin basis order is (Up, Down); Up is the left-circular component,
  Down the right-circular one;
* a translation moves the Up component by +1 along its axis and the Down
  component by -1, flipping the coin on the moved branch;
* mode linearization is coin-fastest, then m, then n.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import _kernels

__all__ = [
    "BOUNDARY_TOL",
    "NORM_TOL",
    "CoinState",
    "ExtentOverflowError",
    "LatticeExtent",
    "ModeIndex",
    "PlateKind",
    "PlateOp",
    "Protocol",
    "StepUnitary",
    "WalkState",
    "angle_components",
    "apply_plate_sequence",
    "auto_extent",
    "balanced_protocol",
    "canonical_angle",
    "coin_operator",
    "compose_step",
    "evolve",
    "half_angle_components",
    "shift_operator",
]

TWO_PI = 2.0 * math.pi

# Amplitude magnitude above which an attempted boundary crossing is an error.
BOUNDARY_TOL = 1e-14

# Allowed drift of a state's squared norm from 1.
NORM_TOL = 1e-10

# cos/sin magnitudes below this snap to exact 0.0, making delta=pi a bit-exact
# full conversion and omega=pi/2 a bit-exact coin swap (IEEE cos(pi/2)~6e-17).
_SNAP = 1e-15

# Refuse extents whose dense amplitude vector would not fit in memory.
_MAX_MODES = 1 << 26


class ExtentOverflowError(RuntimeError):
    """Amplitude with magnitude above BOUNDARY_TOL tried to leave the lattice."""


class CoinState(enum.IntEnum):
    """Two-level coin; UP is the left-circular component, DOWN the right."""

    UP = 0
    DOWN = 1


class PlateKind(enum.IntEnum):
    """The three plate families: coin rotation, x translation, y translation."""

    COIN = 0
    SHIFT_X = 1
    SHIFT_Y = 2


def canonical_angle(theta: float) -> float:
    """Reduce an angle to the half-open range [0, 2*pi).

    Negative inputs within one rounding step of 0 would reduce to a value
    that rounds back up to 2*pi, so anything landing on 2*pi folds to 0.0.
    """
    theta = float(theta)
    if not math.isfinite(theta):
        raise ValueError(f"angle must be finite, got {theta!r}")
    reduced = math.fmod(theta, TWO_PI)
    if reduced < 0.0:
        reduced += TWO_PI
    if reduced >= TWO_PI:
        reduced = 0.0
    return reduced


def angle_components(theta: float) -> tuple[float, float]:
    """(cos theta, sin theta) with magnitudes below 1e-15 snapped to 0.0."""
    c = math.cos(theta)
    s = math.sin(theta)
    if abs(c) < _SNAP:
        c = 0.0
    if abs(s) < _SNAP:
        s = 0.0
    return c, s


def half_angle_components(delta: float) -> tuple[float, float]:
    """(cos delta/2, sin delta/2) with the same zero snapping."""
    return angle_components(0.5 * delta)


@dataclass(frozen=True)
class PlateOp:
    """One plate: a coin rotation C(omega) or a translation TX/TY(delta).

    The angle is reduced to [0, 2*pi) at construction; retardations outside
    [0, pi] are accepted since every formula is 2*pi-periodic.
    """

    kind: PlateKind
    angle: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", PlateKind(self.kind))
        object.__setattr__(self, "angle", canonical_angle(self.angle))

    def components(self) -> tuple[float, float]:
        """The (cos, sin) weights of the plate's two branches.

        Coin rotations split on the full angle, translations on the half
        angle (identity branch cos(delta/2), moved branch sin(delta/2)).
        """
        if self.kind is PlateKind.COIN:
            return angle_components(self.angle)
        return half_angle_components(self.angle)


@dataclass(frozen=True)
class Protocol:
    """Ordered plate sequence with markers delimiting time steps.

    ``step_marks[t]`` is the total plate count at the end of step ``t``.
    Marks are strictly increasing; a final mark at ``len(plates)`` is added
    when missing, so an unmarked sequence acts as a single step.
    """

    plates: tuple[PlateOp, ...] = ()
    step_marks: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        plates = tuple(self.plates)
        for plate in plates:
            if not isinstance(plate, PlateOp):
                raise TypeError(f"expected PlateOp, got {type(plate).__name__}")
        marks = tuple(int(b) for b in self.step_marks)
        previous = 0
        for mark in marks:
            if mark <= previous:
                raise ValueError(
                    f"step marks must be positive and strictly increasing, got {marks}"
                )
            previous = mark
        if marks and marks[-1] > len(plates):
            raise ValueError(
                f"step mark {marks[-1]} beyond the {len(plates)}-plate sequence"
            )
        if plates and (not marks or marks[-1] < len(plates)):
            marks = marks + (len(plates),)
        object.__setattr__(self, "plates", plates)
        object.__setattr__(self, "step_marks", marks)

    @property
    def n_steps(self) -> int:
        return len(self.step_marks)

    def step_plates(self, t: int) -> tuple[PlateOp, ...]:
        """Plates belonging to recorded step ``t`` (0-based)."""
        if not 0 <= t < self.n_steps:
            raise IndexError(f"step {t} out of range for {self.n_steps} recorded steps")
        start = self.step_marks[t - 1] if t else 0
        return self.plates[start : self.step_marks[t]]

    def plates_for_steps(self, steps: int) -> tuple[PlateOp, ...]:
        """Plate sequence realizing ``steps`` walk steps.

        Protocols cycle: asking for more steps than recorded wraps around to
        the beginning, so a one-step program run for t steps applies its
        plates t times.  The result for ``steps`` is always a prefix of the
        result for ``steps + 1``.
        """
        if steps < 0:
            raise ValueError("steps must be >= 0")
        if steps == 0 or not self.plates:
            return ()
        out: list[PlateOp] = []
        for t in range(steps):
            out.extend(self.step_plates(t % self.n_steps))
        return tuple(out)


def balanced_protocol(steps: int = 1) -> Protocol:
    """The equal-branching step C(pi/4) TX(pi) C(pi/4) TY(pi), repeated."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    step = (
        PlateOp(PlateKind.COIN, math.pi / 4),
        PlateOp(PlateKind.SHIFT_X, math.pi),
        PlateOp(PlateKind.COIN, math.pi / 4),
        PlateOp(PlateKind.SHIFT_Y, math.pi),
    )
    return Protocol(step * steps, tuple(4 * (t + 1) for t in range(steps)))


@dataclass(frozen=True)
class LatticeExtent:
    """Inclusive rectangular window [m_min, m_max] x [n_min, n_max] of sites."""

    m_min: int
    m_max: int
    n_min: int
    n_max: int

    def __post_init__(self) -> None:
        for name in ("m_min", "m_max", "n_min", "n_max"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise TypeError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.m_min > self.m_max or self.n_min > self.n_max:
            raise ValueError(f"empty extent {self}")
        if self.n_modes > _MAX_MODES:
            raise ValueError(f"extent with {self.n_modes} modes is too large to address")

    @property
    def nx(self) -> int:
        return self.m_max - self.m_min + 1

    @property
    def ny(self) -> int:
        return self.n_max - self.n_min + 1

    @property
    def n_sites(self) -> int:
        return self.nx * self.ny

    @property
    def n_modes(self) -> int:
        return 2 * self.n_sites

    def contains(self, m: int, n: int) -> bool:
        return self.m_min <= m <= self.m_max and self.n_min <= n <= self.n_max

    def site_index(self, m: int, n: int) -> int:
        """Linear site index; m varies fastest, then n."""
        if not self.contains(m, n):
            raise ValueError(f"site ({m}, {n}) outside {self}")
        return (n - self.n_min) * self.nx + (m - self.m_min)

    def index(self, m: int, n: int, coin: CoinState) -> int:
        """Linear mode index; coin varies fastest, then m, then n."""
        return 2 * self.site_index(m, n) + int(CoinState(coin))

    def site_at(self, site_index: int) -> tuple[int, int]:
        if not 0 <= site_index < self.n_sites:
            raise ValueError(f"site index {site_index} out of range")
        n, m = divmod(site_index, self.nx)
        return (m + self.m_min, n + self.n_min)

    def mode_at(self, index: int) -> "ModeIndex":
        if not 0 <= index < self.n_modes:
            raise ValueError(f"mode index {index} out of range")
        m, n = self.site_at(index // 2)
        return ModeIndex(m, n, CoinState(index % 2), index)

    def sites(self) -> Iterator[tuple[int, int]]:
        """All sites in linear (n-major, then m) order."""
        for n in range(self.n_min, self.n_max + 1):
            for m in range(self.m_min, self.m_max + 1):
                yield (m, n)


@dataclass(frozen=True)
class ModeIndex:
    """One basis mode |m, n, coin> together with its linear index."""

    m: int
    n: int
    coin: CoinState
    index: int


@dataclass(frozen=True)
class WalkState:
    """Normalized amplitude vector over an extent's modes (read-only)."""

    extent: LatticeExtent
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=np.complex128, copy=True).reshape(-1)
        if amps.shape != (self.extent.n_modes,):
            raise ValueError(
                f"expected {self.extent.n_modes} amplitudes, got {amps.shape[0]}"
            )
        norm_sq = float(np.vdot(amps, amps).real)
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValueError(f"squared norm {norm_sq!r} must be 1 within {NORM_TOL:g}")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    def grid(self) -> np.ndarray:
        """Read-only (ny, nx, 2) view: axis order n, m, coin."""
        return self.amplitudes.reshape(self.extent.ny, self.extent.nx, 2)

    def amplitude(self, m: int, n: int, coin: CoinState) -> complex:
        return complex(self.amplitudes[self.extent.index(m, n, coin)])

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def overlap(self, other: "WalkState") -> complex:
        if self.extent != other.extent:
            raise ValueError("states live on different extents")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class StepUnitary:
    """Dense matrix of a plate sequence over an extent's modes.

    Translations are completed cyclically inside the matrix so that every
    constructed operator is exactly unitary regardless of extent; guarded
    state evolution (`evolve`) errors out before the wrap can ever move
    amplitude, so the cyclic completion is unobservable there.
    """

    extent: LatticeExtent
    matrix: np.ndarray

    def __post_init__(self) -> None:
        n = self.extent.n_modes
        matrix = np.array(self.matrix, dtype=np.complex128, copy=True)
        if matrix.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} matrix, got {matrix.shape}")
        matrix.flags.writeable = False
        object.__setattr__(self, "matrix", matrix)

    def unitarity_defect(self) -> float:
        """max |U^dagger U - I|, the testable deviation from unitarity."""
        gram = self.matrix.conj().T @ self.matrix
        np.fill_diagonal(gram, gram.diagonal() - 1.0)
        return float(np.abs(gram).max())

    def apply(self, state: WalkState) -> WalkState:
        if state.extent != self.extent:
            raise ValueError("state and unitary live on different extents")
        return WalkState(self.extent, self.matrix @ state.amplitudes)


def _plate_arrays(plates: Sequence[PlateOp]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    kinds = np.array([int(p.kind) for p in plates], dtype=np.int32)
    comps = [p.components() for p in plates]
    cvals = np.array([c for c, _ in comps], dtype=np.float64)
    svals = np.array([s for _, s in comps], dtype=np.float64)
    return kinds, cvals, svals


def _apply_plates_batch(grid: np.ndarray, plates: Sequence[PlateOp]) -> np.ndarray:
    """Apply plates to a batched grid (ny, nx, 2, ...) with cyclic wrap.

    Used to realize dense matrices; state-level evolution goes through the
    guarded kernels instead.
    """
    for plate in plates:
        c, s = plate.components()
        if c == 1.0 and s == 0.0:
            continue
        if plate.kind is PlateKind.COIN:
            up = grid[:, :, 0].copy()
            down = grid[:, :, 1]
            grid[:, :, 0] = c * up + (1j * s) * down
            grid[:, :, 1] = (1j * s) * up + c * down
        else:
            axis = 1 if plate.kind is PlateKind.SHIFT_X else 0
            up = grid[:, :, 0].copy()
            down = grid[:, :, 1].copy()
            grid[:, :, 0] = c * up + (1j * s) * np.roll(down, -1, axis=axis)
            grid[:, :, 1] = c * down + (1j * s) * np.roll(up, 1, axis=axis)
    return grid


def _matrix_for(plates: Sequence[PlateOp], extent: LatticeExtent) -> np.ndarray:
    n = extent.n_modes
    columns = np.eye(n, dtype=np.complex128).reshape(extent.ny, extent.nx, 2, n)
    _apply_plates_batch(columns, plates)
    return columns.reshape(n, n)


def coin_operator(omega: float, extent: LatticeExtent) -> StepUnitary:
    """Coin rotation [[cos w, i sin w], [i sin w, cos w]] applied at every site."""
    return StepUnitary(extent, _matrix_for([PlateOp(PlateKind.COIN, omega)], extent))


def shift_operator(axis: str, delta: float, extent: LatticeExtent) -> StepUnitary:
    """Translation T_axis(delta) = cos(delta/2) I + i sin(delta/2) S_axis.

    The moved branch takes Up components one site up the axis (flipping them
    to Down) and Down components one site down (flipping to Up).
    """
    kinds = {"x": PlateKind.SHIFT_X, "y": PlateKind.SHIFT_Y}
    try:
        kind = kinds[axis]
    except KeyError:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}") from None
    return StepUnitary(extent, _matrix_for([PlateOp(kind, delta)], extent))


def compose_step(protocol: Protocol, extent: LatticeExtent) -> StepUnitary:
    """Product of the protocol's plate unitaries, rightmost applied first."""
    if not protocol.plates:
        raise ValueError("cannot compose an empty protocol")
    return StepUnitary(extent, _matrix_for(protocol.plates, extent))


def apply_plate_sequence(state: WalkState, plates: Sequence[PlateOp]) -> WalkState:
    """Apply plates to a state with the boundary guard (no wrap-around).

    Raises ExtentOverflowError if any translation would move amplitude with
    magnitude above BOUNDARY_TOL across the lattice edge.
    """
    if not plates:
        return state
    grid = np.array(state.grid(), copy=True)
    kinds, cvals, svals = _plate_arrays(plates)
    bad = _kernels.apply_plates(grid, kinds, cvals, svals, BOUNDARY_TOL)
    if bad >= 0:
        plate = plates[bad]
        raise ExtentOverflowError(
            f"plate {bad} ({plate.kind.name}({plate.angle:.6g})) would move "
            f"amplitude with magnitude above {BOUNDARY_TOL:g} across the lattice "
            f"edge; enlarge the extent (see auto_extent)"
        )
    return WalkState(state.extent, grid.reshape(-1))


def evolve(state: WalkState, protocol: Protocol, steps: int) -> WalkState:
    """Run the protocol for ``steps`` walk steps (cycling past its marks)."""
    return apply_plate_sequence(state, protocol.plates_for_steps(steps))


def auto_extent(
    protocol: Protocol, steps: int, inputs: Iterable[tuple[int, int]]
) -> LatticeExtent:
    """Extent whose padding guarantees evolve() never hits the boundary.

    Pads the bounding box of the input sites by the number of x / y
    translation plates actually applied over ``steps`` steps; each plate
    moves amplitude by at most one site along its axis.
    """
    sites = [(int(m), int(n)) for m, n in inputs]
    if not sites:
        raise ValueError("inputs must be non-empty")
    plates = protocol.plates_for_steps(steps)
    pad_x = sum(1 for p in plates if p.kind is PlateKind.SHIFT_X)
    pad_y = sum(1 for p in plates if p.kind is PlateKind.SHIFT_Y)
    ms = [m for m, _ in sites]
    ns = [n for _, n in sites]
    return LatticeExtent(min(ms) - pad_x, max(ms) + pad_x, min(ns) - pad_y, max(ns) + pad_y)
