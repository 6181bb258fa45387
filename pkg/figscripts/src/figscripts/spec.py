"""Figure specification: input file paths, transforms, and layout knobs.

A spec is a JSON document.  Required key ``kind`` selects the renderer
(``heatmap`` | ``kcut_stack`` | ``scan``); data inputs are paths to the
pipeline's CSV files plus its ``manifest.json``, and every referenced data
file must hash-match the manifest entry.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class SpecError(Exception):
    """Bad figure specification or inconsistent input data."""


KINDS = ("heatmap", "kcut_stack", "scan")
TRANSFORMS = ("real", "abs")
SCALES = ("linear", "percentile")


@dataclass
class FigureSpec:
    kind: str
    manifest: str
    ndsf: str | None = None
    scan: str | None = None
    bounds: str | None = None
    boundstates: str | None = None
    dispersion: str | None = None
    transform: str = "real"
    scale: str = "percentile"
    percentile: float = 99.0
    offset: float = 5.0
    kcuts: list = field(default_factory=list)
    title: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecError(f"kind: expected one of {KINDS}, got {self.kind!r}")
        if self.transform not in TRANSFORMS:
            raise SpecError(f"transform: expected one of {TRANSFORMS}")
        if self.scale not in SCALES:
            raise SpecError(f"scale: expected one of {SCALES}")
        if not 0 < self.percentile <= 100:
            raise SpecError("percentile: must lie in (0, 100]")
        if self.kind == "heatmap" and self.ndsf is None:
            raise SpecError("heatmap: needs an ndsf input")
        if self.kind == "kcut_stack" and self.ndsf is None:
            raise SpecError("kcut_stack: needs an ndsf input")
        if self.kind == "scan" and self.scan is None:
            raise SpecError("scan: needs a scan input")

    @classmethod
    def load(cls, path) -> "FigureSpec":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise SpecError(f"spec: {exc}") from exc
        if not isinstance(doc, dict):
            raise SpecError("spec: top-level JSON object expected")
        valid = set(cls.__dataclass_fields__)
        unknown = set(doc) - valid
        if unknown:
            raise SpecError(f"spec: unknown keys {sorted(unknown)}")
        try:
            spec = cls(**doc)
        except TypeError as exc:
            raise SpecError(str(exc)) from exc
        base = Path(path).parent
        for name in ("manifest", "ndsf", "scan", "bounds", "boundstates",
                     "dispersion"):
            value = getattr(spec, name)
            if value is not None and not Path(value).is_absolute():
                setattr(spec, name, str(base / value))
        return spec

    def data_paths(self):
        out = {}
        for name in ("ndsf", "scan", "bounds", "boundstates", "dispersion"):
            value = getattr(self, name)
            if value is not None:
                out[name] = Path(value)
        return out

    def verify_hashes(self) -> str:
        """Check every data file against the manifest; return manifest hash."""
        manifest_path = Path(self.manifest)
        try:
            doc = json.loads(manifest_path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise SpecError(f"manifest: {exc}") from exc
        listed = doc.get("files", {})
        for name, path in self.data_paths().items():
            if not path.exists():
                raise SpecError(f"{name}: missing input file {path}")
            digest = hashlib.sha256(path.read_bytes()).hexdigest()
            expect = listed.get(path.name)
            if expect is None:
                raise SpecError(f"{name}: {path.name} not listed in manifest")
            if digest != expect:
                raise SpecError(
                    f"{name}: {path.name} hash mismatch against manifest"
                )
        return hashlib.sha256(manifest_path.read_bytes()).hexdigest()


def _read_csv(path: Path, expected_header: list):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != expected_header:
            raise SpecError(
                f"{path.name}: expected columns {expected_header}, "
                f"got {header}"
            )
        return list(reader)


def load_ndsf(path) -> tuple:
    """ndsf.csv -> (k_grid, omega_grid, complex values (k, omega))."""
    rows = _read_csv(Path(path), ["k_index", "k", "omega", "re", "im"])
    if not rows:
        return np.empty(0), np.empty(0), np.empty((0, 0), dtype=complex)
    k_index = np.array([int(r[0]) for r in rows])
    k = np.array([float(r[1]) for r in rows])
    omega = np.array([float(r[2]) for r in rows])
    vals = np.array([float(r[3]) + 1j * float(r[4]) for r in rows])
    k_grid, k_first = np.unique(k, return_index=True)
    omega_grid = np.unique(omega)
    order = np.argsort(k_index[k_first])
    k_grid = k_grid[order]
    grid = np.empty((len(k_grid), len(omega_grid)), dtype=complex)
    ki = {kv: m for m, kv in enumerate(k_grid)}
    oi = {ov: n for n, ov in enumerate(omega_grid)}
    for kk, oo, vv in zip(k, omega, vals):
        grid[ki[kk], oi[oo]] = vv
    return k_grid, omega_grid, grid


def load_scan(path) -> tuple:
    """scan.csv -> (gamma_grid, k_values, omega_grid, values (g, k, omega))."""
    rows = _read_csv(Path(path), ["gamma", "k", "omega", "re", "im"])
    if not rows:
        return (np.empty(0), np.empty(0), np.empty(0),
                np.empty((0, 0, 0), dtype=complex))
    gamma = np.array([float(r[0]) for r in rows])
    k = np.array([float(r[1]) for r in rows])
    omega = np.array([float(r[2]) for r in rows])
    vals = np.array([float(r[3]) + 1j * float(r[4]) for r in rows])
    g_grid = np.unique(gamma)
    k_vals = np.unique(k)
    o_grid = np.unique(omega)
    grid = np.zeros((len(g_grid), len(k_vals), len(o_grid)), dtype=complex)
    gi = {v: i for i, v in enumerate(g_grid)}
    ki = {v: i for i, v in enumerate(k_vals)}
    oi = {v: i for i, v in enumerate(o_grid)}
    for gg, kk, oo, vv in zip(gamma, k, omega, vals):
        grid[gi[gg], ki[kk], oi[oo]] = vv
    return g_grid, k_vals, o_grid, grid


def load_bounds(path) -> dict:
    """bounds.csv -> {kind: (k, lower, upper) arrays}."""
    rows = _read_csv(Path(path), ["k", "kind", "lower", "upper"])
    out = {}
    for r in rows:
        out.setdefault(r[1], []).append(
            (float(r[0]), float(r[2]), float(r[3]))
        )
    return {
        kind: tuple(np.array(cols) for cols in zip(*sorted(vals)))
        for kind, vals in out.items()
    }


def load_boundstates(path) -> tuple:
    """boundstates.csv -> (k, level_n, omega) arrays."""
    rows = _read_csv(Path(path), ["k", "level_n", "omega"])
    if not rows:
        return np.empty(0), np.empty(0, dtype=int), np.empty(0)
    k = np.array([float(r[0]) for r in rows])
    n = np.array([int(r[1]) for r in rows])
    omega = np.array([float(r[2]) for r in rows])
    return k, n, omega


def load_dispersion(path) -> tuple:
    """dispersion.csv -> (k, epsilon) arrays."""
    rows = _read_csv(Path(path), ["k", "epsilon"])
    k = np.array([float(r[0]) for r in rows])
    eps = np.array([float(r[1]) for r in rows])
    return k, eps
