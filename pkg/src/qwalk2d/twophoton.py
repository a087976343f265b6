"""Two-photon output statistics: distinguishable, indistinguishable, and mixed.

A pair of photons is injected in two (possibly overlapping) single-photon
states, each evolved independently by the same protocol.  The joint output
distribution interpolates between bosonic pair statistics (weight c0) and
the classical product of the two single-photon distributions (weight 1-c0).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .core import (
    CoinState,
    LatticeExtent,
    PlateKind,
    PlateOp,
    Protocol,
    WalkState,
    auto_extent,
    evolve,
    half_angle_components,
)
from .single import InitialStateSpec, localized_state

__all__ = [
    "PAIR_NORM_TOL",
    "HOM_INPUT_LEFT",
    "HOM_INPUT_RIGHT",
    "HomScanResult",
    "IndistinguishabilityModel",
    "PositionPairDistribution",
    "TwoPhotonDistribution",
    "bosonic_normalization",
    "bunching_probability",
    "hom_bunching",
    "hom_bunching_closed_form",
    "hom_bunching_exact",
    "hom_protocol",
    "hom_scan",
    "hom_surface",
    "position_pair_distribution",
    "two_photon_distribution",
]

PAIR_NORM_TOL = 1e-10

# HOM test geometry: one photon enters Down (right-circular) one site to the
# right of center, the other Up (left-circular) one site to the left.
HOM_INPUT_RIGHT = (1, 0)
HOM_INPUT_LEFT = (-1, 0)


@dataclass(frozen=True)
class IndistinguishabilityModel:
    """Mixture weight c0 between bosonic (1) and distinguishable (0) pairs."""

    c0: float

    def __post_init__(self) -> None:
        c0 = float(self.c0)
        if not 0.0 <= c0 <= 1.0:
            raise ValueError(f"c0 must be in [0, 1], got {c0!r}")
        object.__setattr__(self, "c0", c0)


def _check_pair_matrix(matrix: np.ndarray, size: int) -> np.ndarray:
    matrix = np.array(matrix, dtype=np.float64, copy=True)
    if matrix.shape != (size, size):
        raise ValueError(f"expected a {size}x{size} matrix, got {matrix.shape}")
    if matrix.min() < -1e-12:
        raise ValueError(f"negative pair probability {matrix.min()!r}")
    np.clip(matrix, 0.0, None, out=matrix)
    total = float(matrix.sum())
    if abs(total - 1.0) > PAIR_NORM_TOL:
        raise ValueError(f"pair probabilities sum to {total!r}, must be 1 within {PAIR_NORM_TOL:g}")
    matrix.flags.writeable = False
    return matrix


@dataclass(frozen=True)
class TwoPhotonDistribution:
    """Unordered mode-pair probabilities at coin resolution.

    Stored as a symmetric (N, N) array whose off-diagonal entries each hold
    half the unordered pair probability (so the array sums to 1) and whose
    diagonal holds the bunched probabilities directly.
    """

    extent: LatticeExtent
    matrix: np.ndarray
    c0: float

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "matrix", _check_pair_matrix(self.matrix, self.extent.n_modes)
        )

    def pair_probability(self, k1: int, k2: int) -> float:
        """Probability of the unordered mode pair {k1, k2}."""
        if k1 == k2:
            return float(self.matrix[k1, k1])
        return float(2.0 * self.matrix[k1, k2])

    def same_site_opposite_coin(self, m: int, n: int) -> float:
        """Probability that both photons sit at (m, n) with opposite coins."""
        k_up = self.extent.index(m, n, CoinState.UP)
        return float(2.0 * self.matrix[k_up, k_up + 1])

    def items(self) -> Iterator[tuple[tuple[int, int], float]]:
        """Yield ((k1, k2), p) over unordered mode pairs, k1 <= k2."""
        n = self.extent.n_modes
        for k1 in range(n):
            for k2 in range(k1, n):
                yield (k1, k2), self.pair_probability(k1, k2)


@dataclass(frozen=True)
class PositionPairDistribution:
    """Unordered site-pair probabilities, coin degrees traced out.

    Same storage convention as TwoPhotonDistribution, over sites instead of
    modes.
    """

    extent: LatticeExtent
    matrix: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "matrix", _check_pair_matrix(self.matrix, self.extent.n_sites)
        )

    @classmethod
    def from_pairs(cls, extent: LatticeExtent, pairs) -> "PositionPairDistribution":
        """Build from a {(site1, site2): probability} mapping over unordered pairs."""
        size = extent.n_sites
        matrix = np.zeros((size, size))
        for (r1, r2), p in pairs.items():
            i = extent.site_index(*r1)
            j = extent.site_index(*r2)
            if i == j:
                matrix[i, i] += p
            else:
                matrix[i, j] += 0.5 * p
                matrix[j, i] += 0.5 * p
        return cls(extent, matrix)

    def probability(self, r1: tuple[int, int], r2: tuple[int, int]) -> float:
        """Probability of the unordered site pair {r1, r2}."""
        i = self.extent.site_index(*r1)
        j = self.extent.site_index(*r2)
        if i == j:
            return float(self.matrix[i, i])
        return float(2.0 * self.matrix[i, j])

    def items(self) -> Iterator[tuple[tuple[tuple[int, int], tuple[int, int]], float]]:
        """Yield ((site1, site2), p) over unordered pairs, site1 <= site2 linearly."""
        sites = list(self.extent.sites())
        for i, r1 in enumerate(sites):
            for j in range(i, len(sites)):
                yield (r1, sites[j]), self.probability(r1, sites[j])

    def marginal(self) -> np.ndarray:
        """Single-photon site marginal (averaged over the two photons); sums to 1."""
        return self.matrix.sum(axis=1)


def two_photon_distribution(
    psi_a: WalkState, psi_b: WalkState, model: IndistinguishabilityModel
) -> TwoPhotonDistribution:
    """Joint mode-pair distribution of a photon pair evolved to psi_a, psi_b.

    For unordered modes k1 != k2 the bosonic term is |a1 b2 + a2 b1|^2 and
    the distinguishable one |a1|^2|b2|^2 + |a2|^2|b1|^2; at k1 = k2 = k they
    are 2|a_k b_k|^2 and |a_k|^2|b_k|^2.  The bosonic block is divided by
    its total (1 + |<psi_a|psi_b>|^2, exactly 1 for orthogonal inputs) so
    the mixture c0 * bosonic + (1 - c0) * distinguishable is normalized.
    """
    if psi_a.extent != psi_b.extent:
        raise ValueError("photon states live on different extents")
    a = psi_a.amplitudes
    b = psi_b.amplitudes
    sym = np.outer(a, b)
    sym = sym + sym.T
    w_ind = 0.5 * (sym.real**2 + sym.imag**2)
    z_ind = float(w_ind.sum())
    pa = a.real**2 + a.imag**2
    pb = b.real**2 + b.imag**2
    prod = np.outer(pa, pb)
    w_dis = 0.5 * (prod + prod.T)
    c0 = model.c0
    matrix = c0 * (w_ind / z_ind) + (1.0 - c0) * w_dis
    return TwoPhotonDistribution(psi_a.extent, matrix, c0)


def bosonic_normalization(psi_a: WalkState, psi_b: WalkState) -> float:
    """Total of the unnormalized bosonic pair terms; 1 + |<psi_a|psi_b>|^2."""
    if psi_a.extent != psi_b.extent:
        raise ValueError("photon states live on different extents")
    sym = np.outer(psi_a.amplitudes, psi_b.amplitudes)
    sym = sym + sym.T
    return float((0.5 * (sym.real**2 + sym.imag**2)).sum())


def position_pair_distribution(gamma: TwoPhotonDistribution) -> PositionPairDistribution:
    """Trace the coins out of a mode-pair distribution; normalization preserved."""
    n_sites = gamma.extent.n_sites
    site_matrix = gamma.matrix.reshape(n_sites, 2, n_sites, 2).sum(axis=(1, 3))
    return PositionPairDistribution(gamma.extent, site_matrix)


def bunching_probability(
    pairs: PositionPairDistribution, r1: tuple[int, int], r2: tuple[int, int]
) -> float:
    """P(both photons at r1) + P(both photons at r2)."""
    for site in (r1, r2):
        if not pairs.extent.contains(*site):
            raise ValueError(f"site {site} outside {pairs.extent}")
    return pairs.probability(r1, r1) + pairs.probability(r2, r2)


def hom_protocol(delta1: float, delta2: float) -> Protocol:
    """The two-translation interferometer TX(delta1) C(pi/4) TX(delta2)."""
    return Protocol(
        (
            PlateOp(PlateKind.SHIFT_X, delta1),
            PlateOp(PlateKind.COIN, math.pi / 4.0),
            PlateOp(PlateKind.SHIFT_X, delta2),
        )
    )


def hom_bunching(delta1: float, delta2: float) -> float:
    """Bunching probability of the interferometer, via the full pair pipeline.

    Photons enter Down at (+1, 0) and Up at (-1, 0), fully indistinguishable
    (c0 = 1); the returned value is P(both at +1) + P(both at -1).
    """
    protocol = hom_protocol(delta1, delta2)
    extent = auto_extent(protocol, 1, [HOM_INPUT_RIGHT, HOM_INPUT_LEFT])
    psi_a = localized_state(InitialStateSpec(HOM_INPUT_RIGHT, 0.0, 1.0), extent)
    psi_b = localized_state(InitialStateSpec(HOM_INPUT_LEFT, 1.0, 0.0), extent)
    psi_a = evolve(psi_a, protocol, 1)
    psi_b = evolve(psi_b, protocol, 1)
    gamma = two_photon_distribution(psi_a, psi_b, IndistinguishabilityModel(1.0))
    pairs = position_pair_distribution(gamma)
    return bunching_probability(pairs, HOM_INPUT_RIGHT, HOM_INPUT_LEFT)


def hom_surface(delta1_grid: Sequence[float], delta2_grid: Sequence[float]) -> np.ndarray:
    """hom_bunching evaluated on the outer grid of retardations.

    Entry [i, j] is the bunching probability at (delta1_grid[i],
    delta2_grid[j]).
    """
    d1s = [float(d) for d in delta1_grid]
    d2s = [float(d) for d in delta2_grid]
    if not d1s or not d2s:
        raise ValueError("grids must be non-empty")
    surface = np.empty((len(d1s), len(d2s)))
    for i, d1 in enumerate(d1s):
        for j, d2 in enumerate(d2s):
            surface[i, j] = hom_bunching(d1, d2)
    return surface


def hom_bunching_closed_form(delta1: float, delta2: float) -> float:
    """Closed-form reference surface (c1 c2 s1 s2)^2 + (s1 s2)^2.

    c_i = cos(delta_i/2), s_i = sin(delta_i/2).  This is the fixed target
    the acceptance suite compares the simulated surface against; it agrees
    with the simulation at the anchor cells (any delta with sin = 0 gives 0;
    (pi, pi) gives 1) and departs from it elsewhere -- see
    hom_bunching_exact for the surface the pipeline actually produces.
    """
    c1, s1 = half_angle_components(delta1)
    c2, s2 = half_angle_components(delta2)
    return (c1 * c2 * s1 * s2) ** 2 + (s1 * s2) ** 2


def hom_bunching_exact(delta1: float, delta2: float) -> float:
    """Analytic bunching probability of the interferometer.

    Propagating the two inputs through TX(delta1) C(pi/4) TX(delta2) by hand
    and summing the bunched pair terms gives, with u = c1 c2 and v = s1 s2,

        P_b = v^2 (u - v)^2 + u^2 v^2 / 2.

    The simulated surface matches this expression to machine precision.
    """
    c1, s1 = half_angle_components(delta1)
    c2, s2 = half_angle_components(delta2)
    u = c1 * c2
    v = s1 * s2
    return v * v * (u - v) ** 2 + 0.5 * u * u * v * v


@dataclass(frozen=True)
class HomScanResult:
    """Normalized coincidence rate of the bunched output versus pair delay."""

    delays: tuple[float, ...]
    rates: tuple[float, ...]
    visibility: float


def hom_scan(
    delays: Sequence[float], coherence_sigma: float, c0_max: float
) -> HomScanResult:
    """Delay scan under a Gaussian overlap model c0(tau) = c0_max e^{-tau^2/2s^2}.

    The bunched-output coincidence rate is proportional to 1 + c0(tau)
    (bosonic pairs bunch at twice the distinguishable rate), normalized to a
    far-delay baseline of 1.  Visibility is (peak - baseline)/baseline,
    which this model makes exactly c0_max.
    """
    sigma = float(coherence_sigma)
    if not (math.isfinite(sigma) and sigma > 0.0):
        raise ValueError(f"coherence_sigma must be positive, got {coherence_sigma!r}")
    c0_max = float(c0_max)
    if not 0.0 <= c0_max <= 1.0:
        raise ValueError(f"c0_max must be in [0, 1], got {c0_max!r}")
    taus = []
    for tau in delays:
        tau = float(tau)
        if not math.isfinite(tau):
            raise ValueError(f"delays must be finite, got {tau!r}")
        taus.append(tau)
    rates = tuple(1.0 + c0_max * math.exp(-0.5 * (tau / sigma) ** 2) for tau in taus)
    return HomScanResult(tuple(taus), rates, c0_max)
