"""File formats: plot-ready CSV tables and schema-validated JSON documents.

Every writer is byte-deterministic: rows follow the lattice linear order,
JSON objects are written with sorted keys and two-space indentation, floats
use their shortest round-trip representation, and newlines are always \\n.
"""
from __future__ import annotations

import csv
import json
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .analysis import DISPLAY_RANGE, SimilarityResult, ViolationResult, linearize_site
from .core import LatticeExtent
from .counts import CountsRecord
from .optics import BeamSpec, LayoutSpec
from .single import PositionDistribution
from .twophoton import HomScanResult, PositionPairDistribution

__all__ = [
    "load_schema",
    "read_counts_record",
    "read_eligible_pairs",
    "read_layout_json",
    "read_pair_distribution_json",
    "schema_names",
    "schema_path",
    "write_counts_record",
    "write_distribution_csv",
    "write_distribution_json",
    "write_geometry_json",
    "write_hom_scan_csv",
    "write_hom_scan_json",
    "write_hom_surface_csv",
    "write_hom_surface_json",
    "write_json",
    "write_linearized_csv",
    "write_linearized_json",
    "write_pair_csv",
    "write_pair_json",
    "write_similarity_json",
    "write_violation_json",
]

PathLike = Union[str, Path]


def _write_text(path: PathLike, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def write_json(path: PathLike, payload) -> None:
    """Canonical JSON: sorted keys, indent 2, trailing newline."""
    _write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _num(x) -> float:
    return float(x)


def _extent_payload(extent: LatticeExtent) -> dict:
    return {
        "m_min": int(extent.m_min),
        "m_max": int(extent.m_max),
        "n_min": int(extent.n_min),
        "n_max": int(extent.n_max),
    }


def _extent_from_payload(payload: dict) -> LatticeExtent:
    return LatticeExtent(
        payload["m_min"], payload["m_max"], payload["n_min"], payload["n_max"]
    )


# ---------------------------------------------------------------------------
# single-photon distributions

def write_distribution_csv(dist: PositionDistribution, path: PathLike) -> None:
    lines = ["m,n,p"]
    for (m, n), p in dist.items():
        lines.append(f"{m},{n},{_num(p)!r}")
    _write_text(path, "\n".join(lines) + "\n")


def write_distribution_json(
    dist: PositionDistribution, path: PathLike, *, step: Optional[int] = None
) -> None:
    payload = {
        "kind": "position_distribution",
        "extent": _extent_payload(dist.extent),
        "cells": [
            {"m": int(m), "n": int(n), "p": _num(p)} for (m, n), p in dist.items()
        ],
    }
    if step is not None:
        payload["step"] = int(step)
    write_json(path, payload)


# ---------------------------------------------------------------------------
# pair distributions

def write_pair_csv(dist: PositionPairDistribution, path: PathLike) -> None:
    """Unordered pair probabilities, zero cells omitted."""
    lines = ["m1,n1,m2,n2,p"]
    for ((m1, n1), (m2, n2)), p in dist.items():
        if p > 0.0:
            lines.append(f"{m1},{n1},{m2},{n2},{_num(p)!r}")
    _write_text(path, "\n".join(lines) + "\n")


def write_pair_json(
    dist: PositionPairDistribution,
    path: PathLike,
    *,
    step: Optional[int] = None,
    c0: Optional[float] = None,
) -> None:
    cells = []
    for ((m1, n1), (m2, n2)), p in dist.items():
        if p > 0.0:
            cells.append(
                {"m1": int(m1), "n1": int(n1), "m2": int(m2), "n2": int(n2), "p": _num(p)}
            )
    payload = {
        "kind": "pair_distribution",
        "extent": _extent_payload(dist.extent),
        "cells": cells,
    }
    if step is not None:
        payload["step"] = int(step)
    if c0 is not None:
        payload["c0"] = _num(c0)
    write_json(path, payload)


def read_pair_distribution_json(path: PathLike) -> PositionPairDistribution:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("kind") != "pair_distribution":
        raise ValueError(f"{path}: not a pair distribution file")
    extent = _extent_from_payload(payload["extent"])
    pairs = {}
    for cell in payload["cells"]:
        key = ((cell["m1"], cell["n1"]), (cell["m2"], cell["n2"]))
        pairs[key] = pairs.get(key, 0.0) + float(cell["p"])
    return PositionPairDistribution.from_pairs(extent, pairs)


# ---------------------------------------------------------------------------
# linearized display view

def _display_sites(extent: LatticeExtent) -> list[tuple[int, int]]:
    lo, hi = DISPLAY_RANGE
    sites = [
        (m, n)
        for m, n in extent.sites()
        if lo <= m <= hi and lo <= n <= hi
    ]
    sites.sort(key=lambda site: linearize_site(*site))
    return sites


def _linearized_matrix(dist: PositionPairDistribution) -> tuple[list[int], np.ndarray]:
    sites = _display_sites(dist.extent)
    indices = [linearize_site(m, n) for m, n in sites]
    matrix = np.empty((len(sites), len(sites)))
    for a, r1 in enumerate(sites):
        for b, r2 in enumerate(sites):
            matrix[a, b] = dist.probability(r1, r2)
    return indices, matrix


def write_linearized_csv(dist: PositionPairDistribution, path: PathLike) -> None:
    """Pair probabilities over the display window, sites mapped to m + 7 n."""
    indices, matrix = _linearized_matrix(dist)
    lines = ["i1,i2,p"]
    for a, i1 in enumerate(indices):
        for b in range(a, len(indices)):
            lines.append(f"{i1},{indices[b]},{_num(matrix[a, b])!r}")
    _write_text(path, "\n".join(lines) + "\n")


def write_linearized_json(dist: PositionPairDistribution, path: PathLike) -> None:
    """Symmetric matrix of unordered pair probabilities over the display window.

    Sites outside the window are dropped, so the matrix may total less
    than 1; it is a display view, not the distribution of record.
    """
    indices, matrix = _linearized_matrix(dist)
    payload = {
        "kind": "linearized_pair_view",
        "stride": 7,
        "indices": [int(i) for i in indices],
        "matrix": [[_num(x) for x in row] for row in matrix],
    }
    write_json(path, payload)


# ---------------------------------------------------------------------------
# analysis reports

def write_violation_json(result: ViolationResult, path: PathLike) -> None:
    """List of witness entries; V over sigma included where both exist."""
    entries = []
    for e in result.entries:
        ratio = None
        if e.value is not None and e.sigma is not None and e.sigma > 0.0:
            ratio = _num(e.value / e.sigma)
        entries.append(
            {
                "r1": [int(e.r1[0]), int(e.r1[1])],
                "r2": [int(e.r2[0]), int(e.r2[1])],
                "V": None if e.value is None else _num(e.value),
                "sigma": None if e.sigma is None else _num(e.sigma),
                "V_over_sigma": ratio,
                "eligible": bool(e.eligible),
            }
        )
    write_json(path, entries)


def read_eligible_pairs(path: PathLike) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Site pairs marked eligible in a violation report."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(payload, list):
        raise ValueError(f"{path}: not a violation report")
    pairs = []
    for entry in payload:
        if entry.get("eligible"):
            r1 = entry["r1"]
            r2 = entry["r2"]
            pairs.append(((int(r1[0]), int(r1[1])), (int(r2[0]), int(r2[1]))))
    return pairs


def write_similarity_json(
    result: SimilarityResult, path: PathLike, *, step: Optional[int] = None
) -> None:
    payload = {
        "step": None if step is None else int(step),
        "value": _num(result.value),
        "std_error": None if result.std_error is None else _num(result.std_error),
    }
    write_json(path, payload)


# ---------------------------------------------------------------------------
# interferometer outputs

def write_hom_surface_csv(
    delta1: Sequence[float], delta2: Sequence[float], surface: np.ndarray, path: PathLike
) -> None:
    lines = ["delta1,delta2,p_bunch"]
    for i, d1 in enumerate(delta1):
        for j, d2 in enumerate(delta2):
            lines.append(f"{_num(d1)!r},{_num(d2)!r},{_num(surface[i, j])!r}")
    _write_text(path, "\n".join(lines) + "\n")


def write_hom_surface_json(
    delta1: Sequence[float], delta2: Sequence[float], surface: np.ndarray, path: PathLike
) -> None:
    payload = {
        "kind": "hom_surface",
        "delta1": [_num(d) for d in delta1],
        "delta2": [_num(d) for d in delta2],
        "bunching": [[_num(x) for x in row] for row in np.asarray(surface)],
    }
    write_json(path, payload)


def write_hom_scan_csv(scan: HomScanResult, path: PathLike) -> None:
    lines = ["delay,rate"]
    for tau, rate in zip(scan.delays, scan.rates):
        lines.append(f"{_num(tau)!r},{_num(rate)!r}")
    _write_text(path, "\n".join(lines) + "\n")


def write_hom_scan_json(scan: HomScanResult, path: PathLike) -> None:
    payload = {
        "kind": "hom_scan",
        "delays": [_num(t) for t in scan.delays],
        "rates": [_num(r) for r in scan.rates],
        "visibility": _num(scan.visibility),
    }
    write_json(path, payload)


# ---------------------------------------------------------------------------
# geometry

def write_geometry_json(report: dict, path: PathLike) -> None:
    write_json(path, report)


def read_layout_json(path: PathLike) -> tuple[LayoutSpec, BeamSpec]:
    """Layout plus input beam from one JSON file.

    Expected keys: f1..f6, d0, grating_period, wavelength, waist (meters).
    """
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        layout = LayoutSpec(
            f1=float(payload["f1"]),
            f2=float(payload["f2"]),
            f3=float(payload["f3"]),
            f4=float(payload["f4"]),
            f5=float(payload["f5"]),
            f6=float(payload["f6"]),
            d0=float(payload["d0"]),
            grating_period=float(payload["grating_period"]),
        )
        beam = BeamSpec(
            waist=float(payload["waist"]), wavelength=float(payload["wavelength"])
        )
    except KeyError as exc:
        raise ValueError(f"{path}: missing layout key {exc.args[0]!r}") from None
    return layout, beam


# ---------------------------------------------------------------------------
# counts records

def write_counts_record(
    record: CountsRecord,
    coincidences_path: PathLike,
    modes_path: PathLike,
    meta_path: PathLike,
) -> None:
    pair_lines = ["m1,n1,m2,n2,counts"]
    for (r1, r2) in sorted(
        record.coincidences, key=lambda p: (p[0][1], p[0][0], p[1][1], p[1][0])
    ):
        count = record.coincidences[(r1, r2)]
        pair_lines.append(f"{r1[0]},{r1[1]},{r2[0]},{r2[1]},{_num(count)!r}")
    _write_text(coincidences_path, "\n".join(pair_lines) + "\n")

    sites = sorted(set(record.singles) | set(record.efficiencies), key=lambda s: (s[1], s[0]))
    mode_lines = ["m,n,singles_hz,efficiency"]
    for site in sites:
        rate = record.singles.get(site, 0.0)
        eta = record.efficiencies.get(site, 1.0)
        mode_lines.append(f"{site[0]},{site[1]},{_num(rate)!r},{_num(eta)!r}")
    _write_text(modes_path, "\n".join(mode_lines) + "\n")

    write_json(
        meta_path,
        {
            "acquisition_time": _num(record.acquisition_time),
            "window": _num(record.window),
            "fbs_transmissivity": _num(record.fbs_transmissivity),
        },
    )


def _read_csv_rows(path: PathLike, header: list[str]) -> list[list[str]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row]
    if not rows or [cell.strip() for cell in rows[0]] != header:
        raise ValueError(f"{path}: expected header {','.join(header)!r}")
    for k, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValueError(f"{path}: row {k} has {len(row)} fields, expected {len(header)}")
    return rows[1:]


def read_counts_record(
    coincidences_path: PathLike, modes_path: PathLike, meta_path: PathLike
) -> CountsRecord:
    """Assemble a CountsRecord from the two CSV tables and the metadata JSON."""
    coincidences = {}
    for row in _read_csv_rows(coincidences_path, ["m1", "n1", "m2", "n2", "counts"]):
        key = ((int(row[0]), int(row[1])), (int(row[2]), int(row[3])))
        coincidences[key] = coincidences.get(key, 0.0) + float(row[4])
    singles = {}
    efficiencies = {}
    for row in _read_csv_rows(modes_path, ["m", "n", "singles_hz", "efficiency"]):
        site = (int(row[0]), int(row[1]))
        singles[site] = float(row[2])
        efficiencies[site] = float(row[3])
    meta = json.loads(Path(meta_path).read_text(encoding="utf-8"))
    return CountsRecord(
        singles=singles,
        coincidences=coincidences,
        acquisition_time=float(meta["acquisition_time"]),
        window=float(meta["window"]),
        efficiencies=efficiencies,
        fbs_transmissivity=float(meta.get("fbs_transmissivity", 0.5)),
    )


# ---------------------------------------------------------------------------
# schemas

def schema_names() -> list[str]:
    root = resources.files("qwalk2d.schemas")
    return sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def schema_path(name: str):
    """Traversable for the named JSON schema (e.g. "pair_distribution")."""
    return resources.files("qwalk2d.schemas").joinpath(f"{name}.json")


def load_schema(name: str) -> dict:
    path = schema_path(name)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ValueError(f"unknown schema {name!r}; available: {schema_names()}") from None
    return json.loads(text)
