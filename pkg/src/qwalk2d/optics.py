"""Gaussian-beam geometry of the experimental layout.

All lengths are in meters and all angles in radians.  The chain is: an
input telescope demagnifies the beam waist and pair separation, a long
collimation lens turns the separation into a launch angle and sets the
far-field waist, the plates deflect in multiples of the angular lattice
unit, and an output telescope maps angles onto a fiber-array pitch.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple

__all__ = [
    "CATALOG_BEAM",
    "CATALOG_LAYOUT",
    "PITCH_TARGET",
    "AngularUnit",
    "BeamSpec",
    "CollimationResult",
    "LayoutSpec",
    "LossBudget",
    "LossReport",
    "OutputMapping",
    "ParaxialApproximationWarning",
    "TelescopeResult",
    "angular_unit",
    "collimate",
    "loss_budget",
    "output_mapping",
    "pitch_check",
    "rayleigh_range",
    "telescope",
]


class ParaxialApproximationWarning(UserWarning):
    """The far-field approximation behind a formula is getting marginal."""


def _require_positive(**values: float) -> None:
    for name, value in values.items():
        if not (math.isfinite(value) and value > 0.0):
            raise ValueError(f"{name} must be positive, got {value!r}")


@dataclass(frozen=True)
class BeamSpec:
    """A Gaussian beam: 1/e^2 waist radius and wavelength, in meters."""

    waist: float
    wavelength: float

    def __post_init__(self) -> None:
        _require_positive(waist=self.waist, wavelength=self.wavelength)


@dataclass(frozen=True)
class LayoutSpec:
    """Focal lengths of the six lenses, input pair separation, grating period.

    The default separation d0 = 3.14 mm is the value self-consistent with a
    launch angle of one angular lattice unit (1.57e-4 rad) through the
    f1/f2/f3 chain below; the grating period enters only through
    angular_unit and is a configuration input, not a physical constant.
    """

    f1: float
    f2: float
    f3: float
    f4: float
    f5: float
    f6: float
    d0: float
    grating_period: float

    def __post_init__(self) -> None:
        for name in ("f1", "f2", "f3", "f4", "f5", "f6"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value != 0.0):
                raise ValueError(f"{name} must be a nonzero length, got {value!r}")
        if not (math.isfinite(self.d0) and self.d0 >= 0.0):
            raise ValueError(f"d0 must be nonnegative, got {self.d0!r}")
        _require_positive(grating_period=self.grating_period)


CATALOG_LAYOUT = LayoutSpec(
    f1=0.300,
    f2=0.030,
    f3=2.000,
    f4=0.200,
    f5=0.050,
    f6=0.400,
    d0=3.14e-3,
    grating_period=5.0e-3,
)
CATALOG_BEAM = BeamSpec(waist=1.0e-3, wavelength=785e-9)

PITCH_TARGET = 250e-6


class TelescopeResult(NamedTuple):
    waist: float
    separation: float


class CollimationResult(NamedTuple):
    waist: float
    angle: float


class AngularUnit(NamedTuple):
    theta: float
    k_perp: float


class OutputMapping(NamedTuple):
    pitch: float
    waist: float
    inverted: bool


def rayleigh_range(waist: float, wavelength: float) -> float:
    """pi W^2 / lambda, the collimation length of a Gaussian beam."""
    _require_positive(waist=waist, wavelength=wavelength)
    return math.pi * waist * waist / wavelength


def telescope(w0: float, d0: float, f1: float, f2: float) -> TelescopeResult:
    """Image a waist and a pair separation through a two-lens telescope.

    Both scale by f2/f1.
    """
    _require_positive(f1=f1, f2=f2)
    if w0 < 0.0 or d0 < 0.0:
        raise ValueError("waist and separation must be nonnegative")
    scale = f2 / f1
    return TelescopeResult(scale * w0, scale * d0)


def collimate(w1: float, d1: float, f3: float, wavelength: float) -> CollimationResult:
    """Far-field waist and launch angle after the collimation lens.

    W2 = lambda f3 / (pi W1) and theta2 = d1 / f3, valid when the Rayleigh
    range of the focused beam is short against f3; a warning is emitted when
    that ratio exceeds 0.1.
    """
    _require_positive(w1=w1, f3=f3, wavelength=wavelength)
    if d1 < 0.0:
        raise ValueError(f"d1 must be nonnegative, got {d1!r}")
    z1 = rayleigh_range(w1, wavelength)
    if z1 / f3 > 0.1:
        warnings.warn(
            f"Rayleigh range {z1:.3g} m is not small against f3 = {f3:.3g} m "
            f"(ratio {z1 / f3:.2f}); far-field formulas are approximate",
            ParaxialApproximationWarning,
            stacklevel=2,
        )
    return CollimationResult(wavelength * f3 / (math.pi * w1), d1 / f3)


def angular_unit(wavelength: float, grating_period: float) -> AngularUnit:
    """Deflection per lattice unit: theta = lambda / Lambda, k_perp = 2 pi / Lambda."""
    _require_positive(wavelength=wavelength, grating_period=grating_period)
    return AngularUnit(
        wavelength / grating_period, 2.0 * math.pi / grating_period
    )


def output_mapping(
    delta_theta: float,
    w2: float,
    f4: float,
    f5: float,
    f6: float,
    wavelength: float,
) -> OutputMapping:
    """Fiber-array pitch and spot waist produced by the output telescope.

    The imaging chain gives d3 = -delta_theta f4 f6 / f5 (the sign is an
    image inversion, reported as a flag) and W3 = lambda/(pi W2) * f4 f6/f5.
    """
    _require_positive(w2=w2, f4=f4, f5=f5, f6=f6, wavelength=wavelength)
    if delta_theta < 0.0:
        raise ValueError(f"delta_theta must be nonnegative, got {delta_theta!r}")
    magnification = f4 * f6 / f5
    d3 = -delta_theta * magnification
    w3 = wavelength / (math.pi * w2) * magnification
    return OutputMapping(abs(d3), w3, d3 < 0.0)


def pitch_check(pitch: float, target: float = PITCH_TARGET, tol: float = 0.05) -> bool:
    """Whether a pitch lands within a relative tolerance of the array target."""
    _require_positive(pitch=pitch, target=target, tol=tol)
    return abs(pitch - target) <= tol * target


@dataclass(frozen=True)
class LossBudget:
    """Multiplicative transmission model: per-plate factor plus named extras."""

    per_plate_transmission: float
    n_plates: int
    extra_factors: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        t = float(self.per_plate_transmission)
        if not (math.isfinite(t) and 0.0 < t <= 1.0):
            raise ValueError(f"per_plate_transmission must be in (0, 1], got {t!r}")
        object.__setattr__(self, "per_plate_transmission", t)
        n = int(self.n_plates)
        if n < 0:
            raise ValueError(f"n_plates must be nonnegative, got {n}")
        object.__setattr__(self, "n_plates", n)
        extras = {}
        for name, factor in self.extra_factors.items():
            factor = float(factor)
            if not (math.isfinite(factor) and 0.0 < factor <= 1.0):
                raise ValueError(f"factor {name!r} must be in (0, 1], got {factor!r}")
            extras[str(name)] = factor
        object.__setattr__(self, "extra_factors", extras)


@dataclass(frozen=True)
class LossReport:
    overall: float
    stages: tuple[tuple[str, float], ...]


def loss_budget(budget: LossBudget) -> LossReport:
    """Overall transmission efficiency with the per-stage breakdown."""
    plates = budget.per_plate_transmission**budget.n_plates
    stages = [(f"plates (x{budget.n_plates})", plates)]
    overall = plates
    for name in sorted(budget.extra_factors):
        factor = budget.extra_factors[name]
        stages.append((name, factor))
        overall *= factor
    return LossReport(overall, tuple(stages))
