"""From raw coincidence counts to corrected position-pair distributions.

The pipeline mirrors how the measured data are processed: estimate the
accidental background of each coincidence cell from the singles rates,
keep the cells that stand sufficiently above it, subtract, correct for
coupling efficiencies (and for the fiber beamsplitter that splits bunched
pairs), normalize, and attach bootstrap error bars.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .analysis import SimilarityResult, ViolationEntry, ViolationResult, bootstrap_errors, similarity_2p
from .core import LatticeExtent
from .twophoton import PositionPairDistribution

__all__ = [
    "CountsRecord",
    "EmptyCountsError",
    "accidentals",
    "compare_to_theory",
    "correct_counts",
    "experimental_violations",
    "normalize_pair",
    "synthesize_counts",
]

Site = tuple[int, int]
SitePair = tuple[Site, Site]


class EmptyCountsError(ValueError):
    """No coincidence cell survives accidental subtraction and selection."""


def _as_site(site) -> Site:
    m, n = site
    return (int(m), int(n))


def normalize_pair(site1, site2) -> SitePair:
    """Canonical unordered pair key: lower site first in (n, then m) order."""
    s1 = _as_site(site1)
    s2 = _as_site(site2)
    if (s2[1], s2[0]) < (s1[1], s1[0]):
        s1, s2 = s2, s1
    return (s1, s2)


@dataclass(frozen=True)
class CountsRecord:
    """Raw measurement record for one walk configuration.

    singles maps a site to its singles rate in Hz, coincidences maps an
    unordered site pair to raw two-fold counts, efficiencies maps a site to
    its coupling efficiency in (0, 1], and fbs_transmissivity is the fiber
    beamsplitter transmissivity used to detect bunched pairs (a pair at one
    site splits to two detectors with probability p = 2 t (1 - t)).
    """

    singles: Mapping[Site, float]
    coincidences: Mapping[SitePair, float]
    acquisition_time: float
    window: float
    efficiencies: Mapping[Site, float]
    fbs_transmissivity: float = 0.5

    def __post_init__(self) -> None:
        t_acq = float(self.acquisition_time)
        if not (math.isfinite(t_acq) and t_acq > 0.0):
            raise ValueError(f"acquisition_time must be positive, got {self.acquisition_time!r}")
        object.__setattr__(self, "acquisition_time", t_acq)
        w = float(self.window)
        if not (math.isfinite(w) and 0.0 < w < t_acq):
            raise ValueError(f"window must satisfy 0 < w < acquisition_time, got {self.window!r}")
        object.__setattr__(self, "window", w)
        t = float(self.fbs_transmissivity)
        if not (math.isfinite(t) and 0.0 < t < 1.0):
            raise ValueError(f"fbs_transmissivity must be in (0, 1), got {self.fbs_transmissivity!r}")
        object.__setattr__(self, "fbs_transmissivity", t)

        singles = {}
        for site, rate in self.singles.items():
            rate = float(rate)
            if not (math.isfinite(rate) and rate >= 0.0):
                raise ValueError(f"singles rate at {site} must be nonnegative, got {rate!r}")
            singles[_as_site(site)] = rate
        object.__setattr__(self, "singles", singles)

        coincidences = {}
        for pair, count in self.coincidences.items():
            count = float(count)
            if not (math.isfinite(count) and count >= 0.0):
                raise ValueError(f"coincidence count at {pair} must be nonnegative, got {count!r}")
            key = normalize_pair(*pair)
            coincidences[key] = coincidences.get(key, 0.0) + count
        object.__setattr__(self, "coincidences", coincidences)

        efficiencies = {}
        for site, eta in self.efficiencies.items():
            eta = float(eta)
            if not (math.isfinite(eta) and 0.0 < eta <= 1.0):
                raise ValueError(f"efficiency at {site} must be in (0, 1], got {eta!r}")
            efficiencies[_as_site(site)] = eta
        object.__setattr__(self, "efficiencies", efficiencies)

    def singles_rate(self, site) -> float:
        """Singles rate at a site, 0 Hz when unmeasured."""
        return self.singles.get(_as_site(site), 0.0)

    def efficiency(self, site) -> float:
        site = _as_site(site)
        try:
            return self.efficiencies[site]
        except KeyError:
            raise ValueError(f"no coupling efficiency recorded for site {site}") from None

    def bunching_split_probability(self) -> float:
        """p = 2 t (1 - t), the chance a bunched pair fires both detectors."""
        t = self.fbs_transmissivity
        return 2.0 * t * (1.0 - t)

    def total_coincidences(self) -> float:
        return float(sum(self.coincidences.values()))


def accidentals(s_i: float, s_j: float, t_acq: float, window: float) -> float:
    """Expected accidental coincidences, 2 S_i S_j T w."""
    for name, value in (("s_i", s_i), ("s_j", s_j), ("t_acq", t_acq), ("window", window)):
        if not (math.isfinite(value) and value >= 0.0):
            raise ValueError(f"{name} must be nonnegative, got {value!r}")
    return 2.0 * s_i * s_j * t_acq * window


@dataclass(frozen=True)
class _Pipeline:
    """Selected coincidence cells and their per-cell correction factors."""

    pairs: tuple[SitePair, ...]
    raw: np.ndarray
    acc: np.ndarray
    divisor: np.ndarray
    extent: LatticeExtent

    def corrected_probabilities(self, raw: np.ndarray) -> np.ndarray:
        """Subtract, clamp, divide, normalize; all-zero replicas give zeros."""
        corrected = np.clip(raw - self.acc, 0.0, None) / self.divisor
        total = float(corrected.sum())
        if total <= 0.0:
            return np.zeros_like(corrected)
        return corrected / total

    def distribution(self, probs: np.ndarray) -> PositionPairDistribution:
        return PositionPairDistribution.from_pairs(
            self.extent, dict(zip(self.pairs, probs.tolist()))
        )


def _build_pipeline(
    record: CountsRecord,
    selection_factor: float,
    extent: Optional[LatticeExtent],
) -> _Pipeline:
    if not (math.isfinite(selection_factor) and selection_factor >= 0.0):
        raise ValueError(f"selection_factor must be nonnegative, got {selection_factor!r}")
    pairs = []
    raw = []
    acc = []
    divisor = []
    for pair in sorted(record.coincidences, key=lambda p: (p[0][1], p[0][0], p[1][1], p[1][0])):
        count = record.coincidences[pair]
        r1, r2 = pair
        background = accidentals(
            record.singles_rate(r1), record.singles_rate(r2), record.acquisition_time, record.window
        )
        if count <= selection_factor * background:
            continue
        div = record.efficiency(r1) * record.efficiency(r2)
        if r1 == r2:
            div *= record.bunching_split_probability()
        pairs.append(pair)
        raw.append(count)
        acc.append(background)
        divisor.append(div)
    if not pairs:
        raise EmptyCountsError("no coincidence cell exceeds the accidental threshold")
    if extent is None:
        ms = [m for pair in pairs for m, _ in pair]
        ns = [n for pair in pairs for _, n in pair]
        extent = LatticeExtent(min(ms), max(ms), min(ns), max(ns))
    return _Pipeline(
        tuple(pairs),
        np.array(raw, dtype=np.float64),
        np.array(acc, dtype=np.float64),
        np.array(divisor, dtype=np.float64),
        extent,
    )


def correct_counts(
    record: CountsRecord,
    *,
    extent: Optional[LatticeExtent] = None,
    selection_factor: float = 5.0,
    n_boot: int = 1000,
    seed=None,
) -> tuple[PositionPairDistribution, dict[SitePair, float]]:
    """Corrected position-pair distribution with per-cell bootstrap errors.

    Cells whose raw counts do not exceed selection_factor times their
    accidental estimate are dropped; the rest are background-subtracted,
    clamped at zero, divided by the efficiency product (and by the
    beamsplitter split probability on bunched cells), and normalized.
    Errors are standard deviations of each cell's probability under Poisson
    resampling of the raw counts, conditional on the selected cell set.
    """
    pipeline = _build_pipeline(record, selection_factor, extent)
    probs = pipeline.corrected_probabilities(pipeline.raw)
    if float(probs.sum()) <= 0.0:
        raise EmptyCountsError("all corrected counts are zero")
    dist = pipeline.distribution(probs)
    stds = bootstrap_errors(
        pipeline.raw, pipeline.corrected_probabilities, n_boot=n_boot, seed=seed
    )
    return dist, dict(zip(pipeline.pairs, np.asarray(stds).tolist()))


def compare_to_theory(
    exp: PositionPairDistribution,
    theory: PositionPairDistribution,
    *,
    record: Optional[CountsRecord] = None,
    selection_factor: float = 5.0,
    n_boot: int = 1000,
    seed=None,
) -> SimilarityResult:
    """Similarity of a corrected distribution against a theory distribution.

    When the raw record the experimental distribution came from is supplied,
    the similarity's standard error is bootstrapped by re-running the
    correction on Poisson-resampled counts; otherwise only the value is
    returned.
    """
    base = similarity_2p(exp, theory)
    if record is None:
        return base
    pipeline = _build_pipeline(record, selection_factor, theory.extent)
    theory_at = np.array([theory.probability(*pair) for pair in pipeline.pairs])

    def stat(raw: np.ndarray) -> float:
        probs = pipeline.corrected_probabilities(raw)
        value = float(np.sqrt(probs * theory_at).sum()) ** 2
        return min(value, 1.0)

    std = bootstrap_errors(pipeline.raw, stat, n_boot=n_boot, seed=seed)
    return SimilarityResult(base.value, std)


def experimental_violations(
    record: CountsRecord,
    eligible_pairs: Sequence[SitePair],
    *,
    extent: Optional[LatticeExtent] = None,
    selection_factor: float = 5.0,
    n_boot: int = 1000,
    seed=None,
) -> ViolationResult:
    """Witness values with bootstrap sigmas at externally supplied pairs.

    Raw counts cannot resolve the coin, so eligibility must come from the
    theory of the same configuration; pass the pairs its violation map
    marks eligible.
    """
    targets = []
    for pair in eligible_pairs:
        key = normalize_pair(*pair)
        if key[0] == key[1]:
            raise ValueError(f"violation pairs need two distinct sites, got {key}")
        if key not in targets:
            targets.append(key)
    if not targets:
        raise ValueError("no eligible pairs supplied")
    pipeline = _build_pipeline(record, selection_factor, extent)
    cell_of = {pair: k for k, pair in enumerate(pipeline.pairs)}

    def witness(probs: np.ndarray) -> np.ndarray:
        out = np.empty(len(targets))
        for k, (r1, r2) in enumerate(targets):
            g11 = probs[cell_of[(r1, r1)]] if (r1, r1) in cell_of else 0.0
            g22 = probs[cell_of[(r2, r2)]] if (r2, r2) in cell_of else 0.0
            g12 = probs[cell_of[(r1, r2)]] if (r1, r2) in cell_of else 0.0
            out[k] = (2.0 / 3.0) * math.sqrt(g11 * g22) - g12
        return out

    values = witness(pipeline.corrected_probabilities(pipeline.raw))
    sigmas = bootstrap_errors(
        pipeline.raw,
        lambda raw: witness(pipeline.corrected_probabilities(raw)),
        n_boot=n_boot,
        seed=seed,
    )
    sigmas = np.asarray(sigmas)
    entries = tuple(
        ViolationEntry(r1, r2, float(values[k]), float(sigmas[k]), True)
        for k, (r1, r2) in enumerate(targets)
    )
    return ViolationResult(entries)


def synthesize_counts(
    theory: PositionPairDistribution,
    total_events: float,
    *,
    efficiencies: Union[float, Mapping[Site, float]],
    singles_hz: Union[float, Mapping[Site, float]],
    acquisition_time: float,
    window: float,
    fbs_transmissivity: float = 0.5,
    seed=None,
) -> CountsRecord:
    """Draw a synthetic raw record from a theory distribution.

    Each unordered pair cell receives Poisson counts with mean
    p * total_events * eta_i * eta_j (times the beamsplitter split
    probability on bunched cells) plus its accidental background, which is
    what an ideal apparatus with those imperfections would record.
    """
    m_events = float(total_events)
    if not (math.isfinite(m_events) and m_events > 0.0):
        raise ValueError(f"total_events must be positive, got {total_events!r}")
    extent = theory.extent
    sites = list(extent.sites())
    if isinstance(efficiencies, Mapping):
        eff = {_as_site(site): float(eta) for site, eta in efficiencies.items()}
    else:
        eff = {site: float(efficiencies) for site in sites}
    if isinstance(singles_hz, Mapping):
        singles = {_as_site(site): float(rate) for site, rate in singles_hz.items()}
    else:
        singles = {site: float(singles_hz) for site in sites}

    rng = np.random.default_rng(seed)
    t = float(fbs_transmissivity)
    split = 2.0 * t * (1.0 - t)
    coincidences = {}
    for i, r1 in enumerate(sites):
        for r2 in sites[i:]:
            p = theory.probability(r1, r2)
            mean = p * m_events * eff.get(r1, 0.0) * eff.get(r2, 0.0)
            if r1 == r2:
                mean *= split
            mean += accidentals(
                singles.get(r1, 0.0), singles.get(r2, 0.0), acquisition_time, window
            )
            if mean > 0.0:
                coincidences[(r1, r2)] = float(rng.poisson(mean))
    return CountsRecord(
        singles=singles,
        coincidences=coincidences,
        acquisition_time=acquisition_time,
        window=window,
        efficiencies=eff,
        fbs_transmissivity=fbs_transmissivity,
    )
