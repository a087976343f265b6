"""Command-line interface: simulate walks, scan interference, process counts.

Every subcommand writes machine-readable CSV/JSON files into --out-dir plus
a run.json summary; with a fixed --seed the files are byte-identical across
runs and thread counts.  Exit codes: 0 ok, 2 configuration or parse error,
3 numeric or extent error, 4 I/O error.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import violation_map
from .core import (
    ExtentOverflowError,
    auto_extent,
    balanced_protocol,
    evolve,
)
from .counts import (
    EmptyCountsError,
    compare_to_theory,
    correct_counts,
    experimental_violations,
)
from .io import (
    read_counts_record,
    read_eligible_pairs,
    read_layout_json,
    read_pair_distribution_json,
    write_distribution_csv,
    write_distribution_json,
    write_geometry_json,
    write_hom_scan_csv,
    write_hom_scan_json,
    write_hom_surface_csv,
    write_hom_surface_json,
    write_json,
    write_linearized_csv,
    write_linearized_json,
    write_pair_csv,
    write_pair_json,
    write_similarity_json,
    write_violation_json,
)
from .optics import (
    CATALOG_BEAM,
    CATALOG_LAYOUT,
    LossBudget,
    angular_unit,
    collimate,
    loss_budget,
    output_mapping,
    pitch_check,
    telescope,
)
from .parser import ProtocolParseError, format_protocol, parse_protocol
from .single import InitialStateSpec, localized_state, polarization_spec, step_series
from .twophoton import (
    IndistinguishabilityModel,
    hom_scan,
    hom_surface,
    position_pair_distribution,
    two_photon_distribution,
)

__all__ = ["main"]


def _load_protocol(source):
    """Protocol from a file path, inline program text, or the balanced default."""
    if source is None:
        return balanced_protocol()
    if os.path.exists(source):
        return parse_protocol(Path(source).read_text(encoding="utf-8"))
    return parse_protocol(source)


def _parse_photon(text: str) -> InitialStateSpec:
    """Photon spec 'm,n:NAME' (named polarization) or 'm,n:a_up,a_down'."""
    site_text, sep, amp_text = text.partition(":")
    if not sep:
        raise ValueError(
            f"photon spec {text!r} must look like 'm,n:D' or 'm,n:a_up,a_down'"
        )
    parts = site_text.split(",")
    if len(parts) != 2:
        raise ValueError(f"photon spec {text!r}: site must be 'm,n'")
    try:
        site = (int(parts[0]), int(parts[1]))
    except ValueError:
        raise ValueError(f"photon spec {text!r}: site coordinates must be integers") from None
    amp_text = amp_text.strip()
    if "," in amp_text:
        up_text, down_text = amp_text.split(",", 1)
        try:
            a_up = complex(up_text.strip())
            a_down = complex(down_text.strip())
        except ValueError:
            raise ValueError(
                f"photon spec {text!r}: amplitudes must be complex literals"
            ) from None
        return InitialStateSpec(site, a_up, a_down)
    return polarization_spec(amp_text, site)


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _finish(out: Path, command: str, config: dict, outputs: list[str]) -> int:
    write_json(
        out / "run.json",
        {
            "kind": "run_summary",
            "command": command,
            "config": config,
            "outputs": sorted(outputs),
            "version": __version__,
        },
    )
    for name in sorted(outputs) + ["run.json"]:
        print(name)
    return 0


def cmd_simulate(args) -> int:
    protocol = _load_protocol(args.protocol)
    spec = _parse_photon(args.input)
    series = step_series(spec, protocol, args.steps)
    out = _out_dir(args)
    outputs = []
    for t, dist in enumerate(series):
        base = f"step_{t:03d}"
        write_distribution_csv(dist, out / f"{base}.csv")
        write_distribution_json(dist, out / f"{base}.json", step=t)
        outputs += [f"{base}.csv", f"{base}.json"]
    config = {
        "protocol": format_protocol(protocol),
        "steps": int(args.steps),
        "input": args.input,
        "seed": args.seed,
    }
    return _finish(out, "simulate", config, outputs)


def _two_photon_pipeline(args):
    protocol = _load_protocol(args.protocol)
    inputs = args.input if args.input else ["-1,0:A", "1,0:D"]
    if len(inputs) != 2:
        raise ValueError(f"exactly two --input photons are required, got {len(inputs)}")
    spec_a = _parse_photon(inputs[0])
    spec_b = _parse_photon(inputs[1])
    extent = auto_extent(protocol, args.steps, [spec_a.site, spec_b.site])
    psi_a = evolve(localized_state(spec_a, extent), protocol, args.steps)
    psi_b = evolve(localized_state(spec_b, extent), protocol, args.steps)
    gamma = two_photon_distribution(psi_a, psi_b, IndistinguishabilityModel(args.c0))
    pairs = position_pair_distribution(gamma)
    config = {
        "protocol": format_protocol(protocol),
        "steps": int(args.steps),
        "inputs": list(inputs),
        "c0": float(args.c0),
        "form": args.form,
        "seed": args.seed,
    }
    return gamma, pairs, config


def cmd_two_photon(args) -> int:
    gamma, pairs, config = _two_photon_pipeline(args)
    out = _out_dir(args)
    write_pair_csv(pairs, out / "pairs.csv")
    write_pair_json(pairs, out / "pairs.json", step=args.steps, c0=args.c0)
    write_linearized_csv(pairs, out / "linearized.csv")
    write_linearized_json(pairs, out / "linearized.json")
    result = violation_map(pairs, gamma, form=args.form)
    write_violation_json(result, out / "violation.json")
    outputs = [
        "pairs.csv",
        "pairs.json",
        "linearized.csv",
        "linearized.json",
        "violation.json",
    ]
    return _finish(out, "two-photon", config, outputs)


def cmd_violation(args) -> int:
    gamma, pairs, config = _two_photon_pipeline(args)
    out = _out_dir(args)
    result = violation_map(pairs, gamma, form=args.form)
    write_violation_json(result, out / "violation.json")
    return _finish(out, "violation", config, ["violation.json"])


def cmd_hom(args) -> int:
    if args.grid_points < 2:
        raise ValueError("--grid-points must be at least 2")
    if args.delay_points < 2:
        raise ValueError("--delay-points must be at least 2")
    if not (math.isfinite(args.delay_max) and args.delay_max > 0.0):
        raise ValueError("--delay-max must be positive")
    grid = np.linspace(0.0, 2.0 * math.pi, args.grid_points)
    surface = hom_surface(grid, grid)
    delays = np.linspace(-args.delay_max, args.delay_max, args.delay_points)
    scan = hom_scan(delays, args.sigma, args.c0_max)
    out = _out_dir(args)
    write_hom_surface_csv(grid, grid, surface, out / "hom_surface.csv")
    write_hom_surface_json(grid, grid, surface, out / "hom_surface.json")
    write_hom_scan_csv(scan, out / "hom_scan.csv")
    write_hom_scan_json(scan, out / "hom_scan.json")
    config = {
        "grid_points": int(args.grid_points),
        "delay_max": float(args.delay_max),
        "delay_points": int(args.delay_points),
        "sigma": float(args.sigma),
        "c0_max": float(args.c0_max),
        "seed": args.seed,
    }
    outputs = ["hom_surface.csv", "hom_surface.json", "hom_scan.csv", "hom_scan.json"]
    return _finish(out, "hom", config, outputs)


def _format_length(x: float) -> str:
    if x >= 1e-3:
        return f"{x * 1e3:.4g} mm"
    return f"{x * 1e6:.4g} um"


def cmd_geometry(args) -> int:
    if args.layout:
        layout, beam = read_layout_json(args.layout)
    else:
        layout, beam = CATALOG_LAYOUT, CATALOG_BEAM
    extras = {}
    for item in args.extra_factor or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"--extra-factor needs NAME=VALUE, got {item!r}")
        extras[name.strip()] = float(value)

    tele = telescope(beam.waist, layout.d0, layout.f1, layout.f2)
    coll = collimate(tele.waist, tele.separation, layout.f3, beam.wavelength)
    unit = angular_unit(beam.wavelength, layout.grating_period)
    mapping = output_mapping(
        unit.theta, coll.waist, layout.f4, layout.f5, layout.f6, beam.wavelength
    )
    ok = pitch_check(mapping.pitch)
    report = loss_budget(
        LossBudget(args.per_plate_transmission, args.n_plates, extras)
    )

    rows = [
        ("input waist W0", _format_length(beam.waist)),
        ("input separation d0", _format_length(layout.d0)),
        ("telescope waist W1", _format_length(tele.waist)),
        ("telescope separation d1", _format_length(tele.separation)),
        ("collimated waist W2", _format_length(coll.waist)),
        ("launch angle theta2", f"{coll.angle:.4g} rad"),
        ("angular unit", f"{unit.theta:.4g} rad"),
        ("transverse kick k_perp", f"{unit.k_perp:.6g} rad/m"),
        (
            "fiber pitch |d3|",
            f"{_format_length(mapping.pitch)} "
            + ("PASS" if ok else "FAIL")
            + f" (target {_format_length(250e-6)} within 5%)",
        ),
        ("spot waist W3", _format_length(mapping.waist)),
        ("overall transmission", f"{report.overall:.4f}"),
    ]
    for name, value in rows:
        print(f"{name:<24} {value}")

    payload = {
        "kind": "geometry_report",
        "inputs": {
            "f1": layout.f1,
            "f2": layout.f2,
            "f3": layout.f3,
            "f4": layout.f4,
            "f5": layout.f5,
            "f6": layout.f6,
            "d0": layout.d0,
            "grating_period": layout.grating_period,
            "wavelength": beam.wavelength,
            "waist": beam.waist,
        },
        "telescope": {"waist": tele.waist, "separation": tele.separation},
        "collimation": {"waist": coll.waist, "angle": coll.angle},
        "angular_unit": {"theta": unit.theta, "k_perp": unit.k_perp},
        "output": {
            "pitch": mapping.pitch,
            "waist": mapping.waist,
            "inverted": mapping.inverted,
        },
        "pitch_target": 250e-6,
        "pitch_ok": ok,
        "loss": {
            "overall": report.overall,
            "stages": [[name, value] for name, value in report.stages],
        },
    }
    out = _out_dir(args)
    write_geometry_json(payload, out / "geometry.json")
    config = {
        "layout": Path(args.layout).name if args.layout else None,
        "per_plate_transmission": float(args.per_plate_transmission),
        "n_plates": int(args.n_plates),
        "extra_factors": extras,
        "seed": args.seed,
    }
    return _finish(out, "geometry", config, ["geometry.json"])


def cmd_process_counts(args) -> int:
    record = read_counts_record(args.coincidences, args.modes, args.meta)
    theory = read_pair_distribution_json(args.theory) if args.theory else None
    extent = theory.extent if theory is not None else None
    dist, errors = correct_counts(
        record,
        extent=extent,
        selection_factor=args.selection_factor,
        n_boot=args.n_boot,
        seed=args.seed,
    )
    out = _out_dir(args)
    write_pair_csv(dist, out / "corrected.csv")
    write_pair_json(dist, out / "corrected.json")
    cells = [
        {
            "m1": int(r1[0]),
            "n1": int(r1[1]),
            "m2": int(r2[0]),
            "n2": int(r2[1]),
            "p": float(dist.probability(r1, r2)),
            "sigma": float(sigma),
        }
        for (r1, r2), sigma in sorted(
            errors.items(), key=lambda kv: (kv[0][0][1], kv[0][0][0], kv[0][1][1], kv[0][1][0])
        )
    ]
    write_json(out / "errors.json", {"kind": "cell_errors", "cells": cells})
    outputs = ["corrected.csv", "corrected.json", "errors.json"]
    if theory is not None:
        similarity = compare_to_theory(
            dist,
            theory,
            record=record,
            selection_factor=args.selection_factor,
            n_boot=args.n_boot,
            seed=args.seed,
        )
        write_similarity_json(similarity, out / "similarity.json")
        outputs.append("similarity.json")
    if args.eligibility:
        pairs = read_eligible_pairs(args.eligibility)
        result = experimental_violations(
            record,
            pairs,
            extent=extent,
            selection_factor=args.selection_factor,
            n_boot=args.n_boot,
            seed=args.seed,
        )
        write_violation_json(result, out / "violation.json")
        outputs.append("violation.json")
    config = {
        "coincidences": Path(args.coincidences).name,
        "modes": Path(args.modes).name,
        "meta": Path(args.meta).name,
        "theory": Path(args.theory).name if args.theory else None,
        "eligibility": Path(args.eligibility).name if args.eligibility else None,
        "selection_factor": float(args.selection_factor),
        "n_boot": int(args.n_boot),
        "seed": args.seed,
    }
    return _finish(out, "process-counts", config, outputs)


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--out-dir", default=".", help="directory for output files")
    sub.add_argument("--seed", type=int, default=None, help="seed for any randomized step")


def _add_walk_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--protocol",
        default=None,
        help="protocol file or inline program text; default is the balanced step",
    )
    sub.add_argument("--steps", type=int, default=3, help="number of walk steps")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qwalk2d",
        description="Quantum walks of one and two photons on a 2D synthetic lattice.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    p = subparsers.add_parser("simulate", help="single-photon walk, one file pair per step")
    _add_walk_options(p)
    p.add_argument("--input", default="1,0:D", help="photon spec, e.g. '1,0:D' or '0,0:1,0'")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    for name, func, help_text in (
        ("two-photon", cmd_two_photon, "two-photon pair distribution and violation map"),
        ("violation", cmd_violation, "non-classicality witness map only"),
    ):
        p = subparsers.add_parser(name, help=help_text)
        _add_walk_options(p)
        p.add_argument(
            "--input",
            action="append",
            help="photon spec, give twice; default '-1,0:A' '1,0:D'",
        )
        p.add_argument("--c0", type=float, default=0.95, help="indistinguishability weight")
        p.add_argument(
            "--form",
            choices=("reduced", "full"),
            default="reduced",
            help="witness expression variant",
        )
        _add_common(p)
        p.set_defaults(func=func)

    p = subparsers.add_parser("hom", help="two-plate interferometer surface and delay scan")
    p.add_argument("--grid-points", type=int, default=33, dest="grid_points")
    p.add_argument("--delay-max", type=float, default=3.0, dest="delay_max")
    p.add_argument("--delay-points", type=int, default=61, dest="delay_points")
    p.add_argument("--sigma", type=float, default=1.0, help="coherence width of the overlap model")
    p.add_argument("--c0-max", type=float, default=0.95, dest="c0_max")
    _add_common(p)
    p.set_defaults(func=cmd_hom)

    p = subparsers.add_parser("geometry", help="beam geometry, pitch check, loss budget")
    p.add_argument("--layout", default=None, help="layout JSON; default uses catalog values")
    p.add_argument(
        "--per-plate-transmission",
        type=float,
        default=0.85,
        dest="per_plate_transmission",
    )
    p.add_argument("--n-plates", type=int, default=12, dest="n_plates")
    p.add_argument(
        "--extra-factor",
        action="append",
        dest="extra_factor",
        help="extra efficiency NAME=VALUE, repeatable",
    )
    _add_common(p)
    p.set_defaults(func=cmd_geometry)

    p = subparsers.add_parser("process-counts", help="correct raw counts and compare to theory")
    p.add_argument("--coincidences", required=True, help="CSV m1,n1,m2,n2,counts")
    p.add_argument("--modes", required=True, help="CSV m,n,singles_hz,efficiency")
    p.add_argument("--meta", required=True, help="JSON with acquisition_time, window, fbs_transmissivity")
    p.add_argument("--theory", default=None, help="pair distribution JSON to compare against")
    p.add_argument("--eligibility", default=None, help="violation report JSON naming eligible pairs")
    p.add_argument("--selection-factor", type=float, default=5.0, dest="selection_factor")
    p.add_argument("--n-boot", type=int, default=1000, dest="n_boot")
    _add_common(p)
    p.set_defaults(func=cmd_process_counts)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ProtocolParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ExtentOverflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except EmptyCountsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
