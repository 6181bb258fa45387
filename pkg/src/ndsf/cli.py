"""Command-line pipeline: single runs, gamma scans, and reference curves.

Configuration comes from an optional JSON document plus equivalent flags
(flags win).  Data files are CSV with 17-significant-digit floats and LF line
endings; every run writes a manifest.json listing the resolved configuration,
per-stage diagnostics, and a SHA-256 hash of each emitted file.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, SizeError
from .evolution import CorrelationSet, EvolutionConfig, correlation_series
from .model import ModelParams
from .reference import (
    bound_state_set,
    continuum_band,
    dispersion_curve,
    qcp_bounds,
)
from .spectral import (
    DEFAULT_OMEGA_MAX,
    DEFAULT_OMEGA_STEP,
    LpSpec,
    SpectralGrid,
    WindowSpec,
    default_lp_order,
    ndsf_pipeline,
)
from .tensor import TruncationSpec

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_OVERFLOW = 3
EXIT_PARTIAL_SCAN = 4

BOUNDSTATE_CUTOFF = 64


@dataclass
class RunConfig:
    """Fully resolved run description; serializes to the manifest."""

    gamma: float | None = None  # optional when scan_gamma supplies the grid
    hz: float = 0.0
    length: int = 16
    dt: float = 0.05
    tmax: float = 12.0
    bond_dim: int = 256
    cutoff: float = 1e-10
    trotter_order: int = 2
    state: str = "FMZ"
    op_pair: str = "xx"
    lp_order: int = 0  # 0 = automatic when LP is active
    lp_horizon: float = 0.0  # 0 = LP disabled
    omega_max: float = DEFAULT_OMEGA_MAX
    omega_step: float = DEFAULT_OMEGA_STEP
    scan_gamma: str = ""  # "start:stop:step", empty = single run
    kcut: list = field(default_factory=list)
    emit_bounds: bool = False
    emit_boundstates: bool = False
    reference_only: bool = False
    out: str = "."
    jobs: int = 1

    def __post_init__(self):
        if self.op_pair not in ("xx", "zz", "xz", "zx"):
            raise ConfigError(f"op_pair: unsupported pair {self.op_pair!r}")
        if self.state not in ("FMZ", "FMX", "NEEL"):
            raise ConfigError(f"state: unknown product state {self.state!r}")
        if self.lp_horizon and self.lp_horizon < self.tmax:
            raise ConfigError("lp_horizon: must extend beyond tmax")
        if self.omega_step <= 0 or self.omega_max <= 0:
            raise ConfigError("omega grid: max and step must be positive")
        if self.jobs < 1:
            raise ConfigError("jobs: must be >= 1")
        if self.scan_gamma:
            self.scan_values()  # validate format eagerly
        if self.gamma is None and not self.scan_gamma:
            raise ConfigError("gamma: required (flag or config file)")
        probe = self.gamma if self.gamma is not None else self.scan_values()[0]
        try:
            self.model_params(probe)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def scan_values(self):
        try:
            start, stop, step = (float(p) for p in self.scan_gamma.split(":"))
        except ValueError as exc:
            raise ConfigError(
                f"scan_gamma: expected start:stop:step, got {self.scan_gamma!r}"
            ) from exc
        if step <= 0 or stop < start:
            raise ConfigError("scan_gamma: need stop >= start and step > 0")
        n = int(round((stop - start) / step))
        return [start + m * step for m in range(n + 1)]

    def model_params(self, gamma=None) -> ModelParams:
        return ModelParams(
            gamma=self.gamma if gamma is None else gamma,
            hz=self.hz, length=self.length,
        )

    def evolution_config(self) -> EvolutionConfig:
        return EvolutionConfig(
            truncation=TruncationSpec(max_bond=self.bond_dim,
                                      rel_cutoff=self.cutoff),
            dt=self.dt, t_max=self.tmax, trotter_order=self.trotter_order,
        )

    def lp_spec(self) -> LpSpec | None:
        if not self.lp_horizon:
            return None
        n_known = int(round(self.tmax / self.dt)) + 1
        order = self.lp_order or default_lp_order(n_known)
        return LpSpec(order=order, horizon=self.lp_horizon)

    def omega_grid(self) -> np.ndarray:
        return np.arange(-self.omega_max,
                         self.omega_max + self.omega_step / 2,
                         self.omega_step)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_csv(path: Path, header: list, rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def write_correlations_csv(path: Path, cs: CorrelationSet) -> None:
    l = cs.params.length

    def rows():
        for i in range(1, l + 1):
            for j in range(1, l + 1):
                for n, t in enumerate(cs.t_grid):
                    v = cs.values[i - 1, j - 1, n]
                    yield (str(i), str(j), _fmt(t), _fmt(v.real), _fmt(v.imag))

    _write_csv(path, ["i", "j", "t", "re", "im"], rows())


def write_ndsf_csv(path: Path, grid: SpectralGrid) -> None:
    def rows():
        for m, k in enumerate(grid.k_grid):
            for n, w in enumerate(grid.omega_grid):
                v = grid.values[m, n]
                yield (str(m), _fmt(k), _fmt(w), _fmt(v.real), _fmt(v.imag))

    _write_csv(path, ["k_index", "k", "omega", "re", "im"], rows())


def write_scan_csv(path: Path, records) -> None:
    """records: iterable of (gamma, k, omega, value)."""

    def rows():
        for gamma, k, w, v in records:
            yield (_fmt(gamma), _fmt(k), _fmt(w), _fmt(v.real), _fmt(v.imag))

    _write_csv(path, ["gamma", "k", "omega", "re", "im"], rows())


def write_bounds_csv(path: Path, config: RunConfig, gamma: float) -> None:
    k_grid = 2.0 * np.pi * np.arange(config.length) / config.length
    at_qcp = abs(gamma - np.pi / 4) < 1e-12

    def rows():
        for kind in ("BOWTIE_CREATE", "BOWTIE_ANNIHILATE", "SHELL"):
            if at_qcp and kind != "BOWTIE_ANNIHILATE":
                pairs = [qcp_bounds(k, kind) for k in k_grid]
                band = None
            elif at_qcp:
                create = [qcp_bounds(k, "BOWTIE_CREATE") for k in k_grid]
                pairs = [(-hi, -lo) for lo, hi in create]
                band = None
            else:
                band = continuum_band(gamma, k_grid, kind)
                pairs = list(zip(band.lower, band.upper))
            for k, (lo, hi) in zip(k_grid, pairs):
                yield (_fmt(k), kind, _fmt(lo), _fmt(hi))

    _write_csv(path, ["k", "kind", "lower", "upper"], rows())


def write_boundstates_csv(path: Path, config: RunConfig, gamma: float) -> None:
    if config.hz <= 0:
        raise ConfigError("emit_boundstates: requires hz > 0")
    k_grid = 2.0 * np.pi * np.arange(config.length) / config.length
    bs = bound_state_set(gamma, config.hz, k_grid, BOUNDSTATE_CUTOFF)

    def rows():
        for m, k in enumerate(k_grid):
            for n in range(bs.cutoff):
                yield (_fmt(k), str(n + 1), _fmt(bs.levels[m, n]))

    _write_csv(path, ["k", "level_n", "omega"], rows())


def write_dispersion_csv(path: Path, config: RunConfig, gamma: float) -> None:
    k_grid = 2.0 * np.pi * np.arange(config.length) / config.length
    curve = dispersion_curve(gamma, k_grid)

    def rows():
        for k, e in zip(curve.k, curve.epsilon):
            yield (_fmt(k), _fmt(e))

    _write_csv(path, ["k", "epsilon"], rows())


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _json_scalar(obj):
    """Coerce numpy scalars so diagnostics serialize cleanly."""
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


class _Manifest:
    def __init__(self, config: RunConfig, out_dir: Path):
        self.out_dir = out_dir
        self.doc = {
            "version": __version__,
            "config": asdict(config),
            "diagnostics": {},
            "stages": {},
            "errors": [],
            "files": {},
        }
        self._t0 = time.monotonic()

    def stage(self, name: str) -> None:
        now = time.monotonic()
        self.doc["stages"][name] = round(now - self._t0, 6)
        self._t0 = now

    def record_file(self, path: Path) -> None:
        self.doc["files"][path.name] = _sha256(path)

    def write(self) -> None:
        path = self.out_dir / "manifest.json"
        with open(path, "w", newline="\n") as fh:
            json.dump(self.doc, fh, indent=2, sort_keys=True,
                      default=_json_scalar)
            fh.write("\n")


def _single_spectrum(config: RunConfig, gamma: float):
    """Evolve, transform; returns (CorrelationSet, SpectralGrid)."""
    cs = correlation_series(
        config.model_params(gamma), config.state, config.op_pair[0],
        config.op_pair[1], config.evolution_config(), n_jobs=config.jobs,
    )
    if cs.overflow is not None:
        return cs, None
    grid = ndsf_pipeline(cs, lp=config.lp_spec(),
                         omega_grid=config.omega_grid())
    return cs, grid


def _emit_references(config: RunConfig, gamma: float, out: Path,
                     manifest: _Manifest) -> None:
    if config.emit_bounds:
        path = out / "bounds.csv"
        write_bounds_csv(path, config, gamma)
        manifest.record_file(path)
        path = out / "dispersion.csv"
        write_dispersion_csv(path, config, gamma)
        manifest.record_file(path)
    if config.emit_boundstates:
        path = out / "boundstates.csv"
        write_boundstates_csv(path, config, gamma)
        manifest.record_file(path)


def run_reference(config: RunConfig) -> int:
    """Emit analytic curves only, on the grids a paired run would use."""
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = _Manifest(config, out)
    if not (config.emit_bounds or config.emit_boundstates):
        raise ConfigError("reference_only: set emit_bounds/emit_boundstates")
    if config.gamma is None:
        raise ConfigError("reference_only: gamma required")
    _emit_references(config, config.gamma, out, manifest)
    manifest.stage("reference")
    manifest.write()
    return EXIT_OK


def run_single(config: RunConfig) -> int:
    """One (gamma, state, op_pair) run: correlations + spectrum + manifest."""
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = _Manifest(config, out)
    cs, grid = _single_spectrum(config, config.gamma)
    manifest.stage("evolution")
    manifest.doc["diagnostics"].update({
        "max_bond_reached": cs.max_bond_reached,
        "accumulated_discard": cs.accumulated_discard,
        "t_last_valid": float(cs.t_grid[-1]),
    })
    path = out / "correlations.csv"
    write_correlations_csv(path, cs)
    manifest.record_file(path)
    if cs.overflow is not None:
        manifest.doc["errors"].append({
            "stage": "evolution", "kind": "truncation_overflow",
            "detail": cs.overflow,
        })
        manifest.write()
        return EXIT_OVERFLOW
    manifest.doc["diagnostics"].update({
        "resolution_sigma": grid.resolution_sigma,
        "lp_warnings": grid.manifest["lp_warnings"],
        "t_max_extended": grid.manifest["t_max_extended"],
    })
    path = out / "ndsf.csv"
    write_ndsf_csv(path, grid)
    manifest.record_file(path)
    manifest.stage("transform")
    _emit_references(config, config.gamma, out, manifest)
    manifest.write()
    return EXIT_OK


def run_scan(config: RunConfig) -> int:
    """Gamma scan emitting the requested k-cut rows of each spectrum."""
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = _Manifest(config, out)
    gammas = config.scan_values()
    if not config.kcut:
        raise ConfigError("kcut: scan mode needs at least one k-cut")
    k_grid = 2.0 * np.pi * np.arange(config.length) / config.length
    cut_indices = []
    for k in config.kcut:
        m = int(np.argmin(np.abs(k_grid - k)))
        if abs(k_grid[m] - k) > 1e-9:
            raise ConfigError(
                f"kcut: {k} is not a grid momentum for L={config.length}"
            )
        cut_indices.append(m)
    records = []
    failed = []
    for gamma in gammas:
        try:
            cs, grid = _single_spectrum(config, gamma)
            if grid is None:
                raise RuntimeError(cs.overflow)
        except Exception as exc:  # noqa: BLE001 - skip-and-record policy
            failed.append(gamma)
            manifest.doc["errors"].append({
                "stage": f"scan gamma={gamma:.10g}",
                "kind": type(exc).__name__, "detail": str(exc),
            })
            continue
        for m in cut_indices:
            for n, w in enumerate(grid.omega_grid):
                records.append((gamma, grid.k_grid[m], w, grid.values[m, n]))
        manifest.stage(f"scan gamma={gamma:.10g}")
    path = out / "scan.csv"
    write_scan_csv(path, records)
    manifest.record_file(path)
    manifest.doc["diagnostics"]["scan_points"] = len(gammas)
    manifest.doc["diagnostics"]["scan_failed"] = len(failed)
    manifest.write()
    return EXIT_PARTIAL_SCAN if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ndsf",
        description="Quench-correlator spectroscopy of the transverse-field "
                    "Ising chain.",
    )
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--gamma", type=float)
    p.add_argument("--hz", type=float)
    p.add_argument("--length", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--tmax", type=float)
    p.add_argument("--bond-dim", type=int, dest="bond_dim")
    p.add_argument("--cutoff", type=float)
    p.add_argument("--trotter-order", type=int, dest="trotter_order")
    p.add_argument("--state", choices=["FMZ", "FMX", "NEEL"])
    p.add_argument("--op-pair", dest="op_pair",
                   choices=["xx", "zz", "xz", "zx"])
    p.add_argument("--lp-order", type=int, dest="lp_order")
    p.add_argument("--lp-horizon", type=float, dest="lp_horizon")
    p.add_argument("--omega-max", type=float, dest="omega_max")
    p.add_argument("--omega-step", type=float, dest="omega_step")
    p.add_argument("--scan-gamma", dest="scan_gamma",
                   metavar="START:STOP:STEP")
    p.add_argument("--kcut", type=float, action="append")
    p.add_argument("--emit-bounds", action="store_true", default=None,
                   dest="emit_bounds")
    p.add_argument("--emit-boundstates", action="store_true", default=None,
                   dest="emit_boundstates")
    p.add_argument("--reference-only", action="store_true", default=None,
                   dest="reference_only")
    p.add_argument("--out")
    p.add_argument("--jobs", type=int)
    return p


def resolve_config(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    doc = {}
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config: top-level JSON object expected")
    valid = set(RunConfig.__dataclass_fields__)
    unknown = set(doc) - valid
    if unknown:
        raise ConfigError(f"config: unknown keys {sorted(unknown)}")
    for key, value in vars(args).items():
        if key == "config" or value is None:
            continue
        doc[key] = value
    try:
        return RunConfig(**doc)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    try:
        config = resolve_config(argv)
        if config.scan_gamma:
            return run_scan(config)
        if config.reference_only:
            return run_reference(config)
        return run_single(config)
    except (ConfigError, SizeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
