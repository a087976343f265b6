"""Discrete-time quantum walks of one and two photons on a 2D synthetic lattice.

The walk alternates coin rotations of the photon's circular polarization
with polarization-dependent translations along the two lattice axes.  The
package simulates one- and two-photon output distributions, interference
and non-classicality tests, the Gaussian-beam geometry of the apparatus,
and the processing of raw coincidence counts.
"""

__version__ = "0.1.0"

from .analysis import (
    DISPLAY_RANGE,
    SimilarityResult,
    ViolationEntry,
    ViolationResult,
    bootstrap_errors,
    linearize_site,
    similarity_1p,
    similarity_2p,
    thread_count,
    violation_map,
)
from .core import (
    BOUNDARY_TOL,
    CoinState,
    ExtentOverflowError,
    LatticeExtent,
    ModeIndex,
    PlateKind,
    PlateOp,
    Protocol,
    StepUnitary,
    WalkState,
    apply_plate_sequence,
    auto_extent,
    balanced_protocol,
    coin_operator,
    compose_step,
    evolve,
    shift_operator,
)
from .counts import (
    CountsRecord,
    EmptyCountsError,
    accidentals,
    compare_to_theory,
    correct_counts,
    experimental_violations,
    synthesize_counts,
)
from .optics import (
    CATALOG_BEAM,
    CATALOG_LAYOUT,
    PITCH_TARGET,
    AngularUnit,
    BeamSpec,
    CollimationResult,
    LayoutSpec,
    LossBudget,
    LossReport,
    OutputMapping,
    ParaxialApproximationWarning,
    TelescopeResult,
    angular_unit,
    collimate,
    loss_budget,
    output_mapping,
    pitch_check,
    rayleigh_range,
    telescope,
)
from .parser import ParseDiagnostic, ProtocolParseError, format_protocol, parse_protocol
from .single import (
    POLARIZATIONS,
    InitialStateSpec,
    PositionDistribution,
    alpha_spec,
    localized_state,
    polarization_spec,
    position_distribution,
    step_series,
)
from .twophoton import (
    HOM_INPUT_LEFT,
    HOM_INPUT_RIGHT,
    HomScanResult,
    IndistinguishabilityModel,
    PositionPairDistribution,
    TwoPhotonDistribution,
    bosonic_normalization,
    bunching_probability,
    hom_bunching,
    hom_bunching_closed_form,
    hom_bunching_exact,
    hom_protocol,
    hom_scan,
    hom_surface,
    position_pair_distribution,
    two_photon_distribution,
)

__all__ = [
    "BOUNDARY_TOL",
    "CATALOG_BEAM",
    "CATALOG_LAYOUT",
    "DISPLAY_RANGE",
    "HOM_INPUT_LEFT",
    "HOM_INPUT_RIGHT",
    "PITCH_TARGET",
    "POLARIZATIONS",
    "AngularUnit",
    "BeamSpec",
    "CoinState",
    "CollimationResult",
    "CountsRecord",
    "EmptyCountsError",
    "ExtentOverflowError",
    "HomScanResult",
    "IndistinguishabilityModel",
    "InitialStateSpec",
    "LatticeExtent",
    "LayoutSpec",
    "LossBudget",
    "LossReport",
    "ModeIndex",
    "OutputMapping",
    "ParaxialApproximationWarning",
    "ParseDiagnostic",
    "PlateKind",
    "PlateOp",
    "PositionDistribution",
    "PositionPairDistribution",
    "Protocol",
    "ProtocolParseError",
    "SimilarityResult",
    "StepUnitary",
    "TelescopeResult",
    "TwoPhotonDistribution",
    "ViolationEntry",
    "ViolationResult",
    "WalkState",
    "accidentals",
    "alpha_spec",
    "angular_unit",
    "apply_plate_sequence",
    "auto_extent",
    "balanced_protocol",
    "bootstrap_errors",
    "bosonic_normalization",
    "bunching_probability",
    "coin_operator",
    "collimate",
    "compare_to_theory",
    "compose_step",
    "correct_counts",
    "evolve",
    "experimental_violations",
    "format_protocol",
    "hom_bunching",
    "hom_bunching_closed_form",
    "hom_bunching_exact",
    "hom_protocol",
    "hom_scan",
    "hom_surface",
    "linearize_site",
    "localized_state",
    "loss_budget",
    "output_mapping",
    "parse_protocol",
    "pitch_check",
    "polarization_spec",
    "rayleigh_range",
    "position_distribution",
    "position_pair_distribution",
    "shift_operator",
    "similarity_1p",
    "similarity_2p",
    "thread_count",
    "step_series",
    "synthesize_counts",
    "telescope",
    "two_photon_distribution",
    "violation_map",
]
