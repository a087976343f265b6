"""Input-state preparation and site-probability distributions for one photon."""
from __future__ import annotations

import math
import types
from dataclasses import dataclass

import numpy as np

from .core import (
    CoinState,
    LatticeExtent,
    Protocol,
    WalkState,
    apply_plate_sequence,
    auto_extent,
)

__all__ = [
    "AMPLITUDE_NORM_TOL",
    "DISTRIBUTION_NORM_TOL",
    "POLARIZATIONS",
    "InitialStateSpec",
    "PositionDistribution",
    "alpha_spec",
    "localized_state",
    "polarization_spec",
    "position_distribution",
    "step_series",
]

AMPLITUDE_NORM_TOL = 1e-9
DISTRIBUTION_NORM_TOL = 1e-10

_SQRT2 = math.sqrt(2.0)

# Coin-basis amplitudes (a_up, a_down) for the named polarizations, in the
# circular dictionary H = (L+R)/sqrt2, V = -i(L-R)/sqrt2; Up carries the
# left-circular component.  This phase convention is part of the package
# contract (the diagonal pair comes out as D = ((1-i)L + (1+i)R)/2 and
# A = ((1+i)L + (1-i)R)/2).
POLARIZATIONS: dict[str, tuple[complex, complex]] = {
    "L": (1.0 + 0.0j, 0.0j),
    "R": (0.0j, 1.0 + 0.0j),
    "H": (1.0 / _SQRT2 + 0.0j, 1.0 / _SQRT2 + 0.0j),
    "V": (-1.0j / _SQRT2, 1.0j / _SQRT2),
    "D": ((1.0 - 1.0j) / 2.0, (1.0 + 1.0j) / 2.0),
    "A": ((1.0 + 1.0j) / 2.0, (1.0 - 1.0j) / 2.0),
}


@dataclass(frozen=True)
class InitialStateSpec:
    """One photon localized at ``site`` with coin amplitudes (a_up, a_down).

    Amplitudes must be normalized within 1e-9; accepted ones are divided by
    their exact norm so the stored pair is unit-norm to machine precision.
    """

    site: tuple[int, int]
    a_up: complex
    a_down: complex

    def __post_init__(self) -> None:
        site = (int(self.site[0]), int(self.site[1]))
        a_up = complex(self.a_up)
        a_down = complex(self.a_down)
        parts = (a_up.real, a_up.imag, a_down.real, a_down.imag)
        if not all(math.isfinite(x) for x in parts):
            raise ValueError("coin amplitudes must be finite")
        norm_sq = abs(a_up) ** 2 + abs(a_down) ** 2
        if abs(norm_sq - 1.0) > AMPLITUDE_NORM_TOL:
            raise ValueError(
                f"|a_up|^2 + |a_down|^2 = {norm_sq!r}, must be 1 within "
                f"{AMPLITUDE_NORM_TOL:g}"
            )
        norm = math.sqrt(norm_sq)
        object.__setattr__(self, "site", site)
        object.__setattr__(self, "a_up", a_up / norm)
        object.__setattr__(self, "a_down", a_down / norm)


def alpha_spec(alpha: float, site: tuple[int, int] = (1, 0)) -> InitialStateSpec:
    """The one-parameter input family cos(a/2)|Up> + i sin(a/2)|Down>."""
    if not math.isfinite(alpha):
        raise ValueError(f"alpha must be finite, got {alpha!r}")
    return InitialStateSpec(site, math.cos(alpha / 2.0), 1j * math.sin(alpha / 2.0))


def polarization_spec(name: str, site: tuple[int, int]) -> InitialStateSpec:
    """An InitialStateSpec for one of the named polarizations L R H V D A."""
    try:
        a_up, a_down = POLARIZATIONS[name.upper()]
    except KeyError:
        known = " ".join(sorted(POLARIZATIONS))
        raise ValueError(f"unknown polarization {name!r} (known: {known})") from None
    return InitialStateSpec(site, a_up, a_down)


def localized_state(spec: InitialStateSpec, extent: LatticeExtent) -> WalkState:
    """The delta-localized state with spec's coin amplitudes at its site."""
    m, n = spec.site
    if not extent.contains(m, n):
        raise ValueError(f"input site ({m}, {n}) outside {extent}")
    amplitudes = np.zeros(extent.n_modes, dtype=np.complex128)
    amplitudes[extent.index(m, n, CoinState.UP)] = spec.a_up
    amplitudes[extent.index(m, n, CoinState.DOWN)] = spec.a_down
    return WalkState(extent, amplitudes)


@dataclass(frozen=True)
class PositionDistribution:
    """Coin-traced site probabilities over a full extent (zeros included)."""

    extent: LatticeExtent
    values: np.ndarray  # (ny, nx) float array, axis order n, m

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.shape != (self.extent.ny, self.extent.nx):
            raise ValueError(
                f"expected shape {(self.extent.ny, self.extent.nx)}, got {values.shape}"
            )
        if values.min() < -1e-12:
            raise ValueError(f"negative probability {values.min()!r}")
        np.clip(values, 0.0, None, out=values)
        total = float(values.sum())
        if abs(total - 1.0) > DISTRIBUTION_NORM_TOL:
            raise ValueError(
                f"probabilities sum to {total!r}, must be 1 within {DISTRIBUTION_NORM_TOL:g}"
            )
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def from_mapping(cls, extent: LatticeExtent, mapping) -> "PositionDistribution":
        """Build from a (m, n) -> probability mapping; missing sites are 0."""
        values = np.zeros((extent.ny, extent.nx))
        for (m, n), p in mapping.items():
            values[n - extent.n_min, m - extent.m_min] = p
        return cls(extent, values)

    @property
    def probabilities(self) -> types.MappingProxyType:
        """Read-only (m, n) -> probability map in (n, m)-major order."""
        out = {site: float(self.values[site[1] - self.extent.n_min, site[0] - self.extent.m_min])
               for site in self.extent.sites()}
        return types.MappingProxyType(out)

    def probability(self, m: int, n: int) -> float:
        if not self.extent.contains(m, n):
            raise ValueError(f"site ({m}, {n}) outside {self.extent}")
        return float(self.values[n - self.extent.n_min, m - self.extent.m_min])

    def as_array(self) -> np.ndarray:
        return self.values

    def items(self):
        """Yield ((m, n), p) over the full extent in (n, m)-major order."""
        for site in self.extent.sites():
            yield site, self.probability(*site)

    def support(self, tol: float = 1e-14) -> list[tuple[int, int]]:
        """Sites with probability above ``tol``."""
        return [site for site, p in self.items() if p > tol]


def position_distribution(state: WalkState) -> PositionDistribution:
    """Coin-traced site probabilities of a state; sums to 1 within 1e-10."""
    grid = state.grid()
    values = (grid.real**2 + grid.imag**2).sum(axis=2)
    return PositionDistribution(state.extent, values)


def step_series(
    spec: InitialStateSpec, protocol: Protocol, t_max: int
) -> list[PositionDistribution]:
    """Distributions after 0..t_max steps; element 0 is the input delta.

    All elements share one auto-sized extent, so files emitted from a series
    have a stable schema across steps.
    """
    if t_max < 0:
        raise ValueError("t_max must be >= 0")
    extent = auto_extent(protocol, t_max, [spec.site])
    state = localized_state(spec, extent)
    series = [position_distribution(state)]
    for t in range(1, t_max + 1):
        if protocol.plates:
            plates = protocol.step_plates((t - 1) % protocol.n_steps)
            state = apply_plate_sequence(state, plates)
        series.append(position_distribution(state))
    return series
