"""Distribution comparison, non-classicality witnesses, and error estimation.

Similarity is the squared Bhattacharyya coefficient between two normalized
distributions.  The violation witness V certifies quantum interference:
classical (distinguishable) light always gives V <= 0, so any significantly
positive value rules out a classical model.  Bootstrap errors come from
Poisson-resampling raw counts.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Union

import numpy as np

from .single import PositionDistribution
from .twophoton import PositionPairDistribution, TwoPhotonDistribution

__all__ = [
    "DISPLAY_RANGE",
    "DISPLAY_STRIDE",
    "ELIGIBILITY_TOL",
    "SimilarityResult",
    "ViolationEntry",
    "ViolationResult",
    "bootstrap_errors",
    "linearize_site",
    "similarity_1p",
    "similarity_2p",
    "thread_count",
    "violation_map",
]

# Display window of the linearized site map (m, n) -> m + 7 n.
DISPLAY_RANGE = (-3, 3)
DISPLAY_STRIDE = 7

# A site pair enters the violation test only where the theoretical
# same-site opposite-coin correlations vanish.
ELIGIBILITY_TOL = 1e-12


@dataclass(frozen=True)
class SimilarityResult:
    value: float
    std_error: Optional[float] = None

    def __post_init__(self) -> None:
        value = float(self.value)
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"similarity must be in [0, 1], got {value!r}")
        object.__setattr__(self, "value", value)
        if self.std_error is not None:
            err = float(self.std_error)
            if not (math.isfinite(err) and err >= 0.0):
                raise ValueError(f"std_error must be nonnegative, got {self.std_error!r}")
            object.__setattr__(self, "std_error", err)


def similarity_1p(p: PositionDistribution, q: PositionDistribution) -> SimilarityResult:
    """Squared Bhattacharyya coefficient (sum_r sqrt(P(r) Q(r)))^2."""
    if p.extent != q.extent:
        raise ValueError("distributions live on different extents")
    value = float(np.sqrt(p.values * q.values).sum()) ** 2
    return SimilarityResult(min(value, 1.0))


def similarity_2p(
    p: PositionPairDistribution, q: PositionPairDistribution
) -> SimilarityResult:
    """Squared Bhattacharyya coefficient over unordered site pairs.

    Evaluated on the full stored matrices: each off-diagonal unordered pair
    contributes its two half entries, which is exactly sqrt of the unordered
    probabilities' product.
    """
    if p.extent != q.extent:
        raise ValueError("distributions live on different extents")
    value = float(np.sqrt(p.matrix * q.matrix).sum()) ** 2
    return SimilarityResult(min(value, 1.0))


@dataclass(frozen=True)
class ViolationEntry:
    """Witness value at one unordered site pair, or the reason it was skipped."""

    r1: tuple[int, int]
    r2: tuple[int, int]
    value: Optional[float]
    sigma: Optional[float]
    eligible: bool


@dataclass(frozen=True)
class ViolationResult:
    entries: tuple[ViolationEntry, ...]

    def eligible_entries(self) -> tuple[ViolationEntry, ...]:
        return tuple(e for e in self.entries if e.eligible)

    def max_violation(self) -> Optional[ViolationEntry]:
        """The eligible pair with the largest witness value, if any."""
        best = None
        for entry in self.entries:
            if entry.value is None:
                continue
            if best is None or entry.value > best.value:
                best = entry
        return best


def violation_map(
    pair_dist: PositionPairDistribution,
    coin_level: TwoPhotonDistribution,
    *,
    eligibility_tol: float = ELIGIBILITY_TOL,
    form: str = "reduced",
) -> ViolationResult:
    """Evaluate the witness V at every eligible unordered site pair.

    V(r1, r2) = (2/3) sqrt(G11 G22) - G12 with G11, G22 the bunched
    probabilities and G12 the cross coincidence.  A pair is eligible when
    the coin-level distribution puts (numerically) zero weight on both
    photons sharing either site with opposite coins; ineligible pairs are
    flagged and left unevaluated.  form="full" keeps the opposite-coin
    subtraction terms inside the square root (radicand clamped at zero);
    at eligible pairs the two forms agree.
    """
    if form not in ("reduced", "full"):
        raise ValueError(f"form must be 'reduced' or 'full', got {form!r}")
    if pair_dist.extent != coin_level.extent:
        raise ValueError("pair distribution and coin-level distribution extents differ")
    extent = pair_dist.extent
    sites = list(extent.sites())
    gamma_ud = [coin_level.same_site_opposite_coin(m, n) for m, n in sites]
    ws = pair_dist.matrix
    entries = []
    for i, r1 in enumerate(sites):
        for j in range(i + 1, len(sites)):
            r2 = sites[j]
            if gamma_ud[i] >= eligibility_tol or gamma_ud[j] >= eligibility_tol:
                entries.append(ViolationEntry(r1, r2, None, None, False))
                continue
            g11 = float(ws[i, i])
            g22 = float(ws[j, j])
            g12 = float(2.0 * ws[i, j])
            radicand = g11 * g22
            if form == "full":
                radicand -= 2.0 * g22 * gamma_ud[i] + 2.0 * g11 * gamma_ud[j]
                radicand = max(radicand, 0.0)
            value = (2.0 / 3.0) * math.sqrt(radicand) - g12
            entries.append(ViolationEntry(r1, r2, value, None, True))
    return ViolationResult(tuple(entries))


def thread_count() -> int:
    """Worker count from QWALK_THREADS; 1 (serial) when unset or empty."""
    raw = os.environ.get("QWALK_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"QWALK_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


def _counts_vector(counts, total_events) -> np.ndarray:
    if isinstance(counts, PositionPairDistribution):
        if total_events is None:
            raise ValueError("total_events is required when resampling a distribution")
        m = float(total_events)
        if not (math.isfinite(m) and m > 0.0):
            raise ValueError(f"total_events must be positive, got {total_events!r}")
        return np.array([p * m for _, p in counts.items()], dtype=np.float64)
    if hasattr(counts, "coincidences"):
        pairs = sorted(counts.coincidences)
        return np.array([counts.coincidences[k] for k in pairs], dtype=np.float64)
    if isinstance(counts, Mapping):
        return np.array([counts[k] for k in sorted(counts)], dtype=np.float64)
    return np.asarray(counts, dtype=np.float64)


def bootstrap_errors(
    counts,
    statistic: Callable[[np.ndarray], Union[float, np.ndarray]],
    *,
    n_boot: int = 1000,
    seed=None,
    total_events: Optional[float] = None,
) -> Union[float, np.ndarray]:
    """Standard error of a statistic under Poisson resampling of raw counts.

    Each count cell is redrawn as Poisson with mean equal to its observed
    value, the statistic is recomputed per replica, and the sample standard
    deviation across replicas is returned (elementwise for vector-valued
    statistics).  counts may be an array, a mapping (cells ordered by sorted
    key), a counts record (coincidence cells, sorted), or a pair
    distribution together with total_events.  Replica seeds are derived from
    the given seed in a fixed order, so results are identical whatever
    thread_count() says.
    """
    n_boot = int(n_boot)
    if n_boot < 100:
        raise ValueError(f"n_boot must be at least 100, got {n_boot}")
    vec = _counts_vector(counts, total_events)
    if vec.size == 0:
        raise ValueError("no counts to resample")
    if not np.all(np.isfinite(vec)) or float(vec.min()) < 0.0:
        raise ValueError("counts must be finite and nonnegative")
    if float(vec.sum()) <= 0.0:
        raise ValueError("total counts must be positive")

    probe = np.asarray(statistic(vec.copy()), dtype=np.float64)
    out = np.empty((n_boot,) + probe.shape)
    seeds = np.random.SeedSequence(seed).spawn(n_boot)

    def replica(i: int) -> None:
        rng = np.random.default_rng(seeds[i])
        out[i] = statistic(rng.poisson(vec).astype(np.float64))

    workers = thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(replica, range(n_boot)))
    else:
        for i in range(n_boot):
            replica(i)
    std = out.std(axis=0, ddof=1)
    if probe.ndim == 0:
        return float(std)
    return std


def linearize_site(m: int, n: int) -> int:
    """Map a site in the display window to the linear index m + 7 n."""
    lo, hi = DISPLAY_RANGE
    for name, value in (("m", m), ("n", n)):
        if not lo <= value <= hi:
            raise ValueError(f"{name}={value} outside display range [{lo}, {hi}]")
    return int(m) + DISPLAY_STRIDE * int(n)
