"""Renderers: (k, omega) heatmaps, stacked k-cuts, and gamma-scan panels.

All output is PNG at a fixed 200 dpi; the verified manifest hash is embedded
in the image metadata and printed in the caption line, so every figure is
traceable to the exact data files it was built from.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .spec import (  # noqa: E402
    FigureSpec,
    SpecError,
    load_bounds,
    load_boundstates,
    load_dispersion,
    load_ndsf,
    load_scan,
)

DPI = 200
CMAP = "magma"
BAND_STYLES = {
    "BOWTIE_CREATE": {"color": "white", "linestyle": "--"},
    "BOWTIE_ANNIHILATE": {"color": "white", "linestyle": "--"},
    "SHELL": {"color": "black", "linestyle": ":"},
}


def _transform(values: np.ndarray, spec: FigureSpec) -> np.ndarray:
    return np.abs(values) if spec.transform == "abs" else np.real(values)


def _color_limits(data: np.ndarray, spec: FigureSpec):
    if data.size == 0:
        return 0.0, 1.0
    if spec.scale == "percentile":
        vmax = float(np.percentile(data, spec.percentile))
        if vmax <= 0:
            vmax = float(np.max(data)) or 1.0
        return 0.0, vmax
    return float(np.min(data)), float(np.max(data))


def _caption(ax, text: str) -> None:
    ax.figure.text(0.01, 0.005, text, fontsize=4, family="monospace")


def _save(fig, out_path, manifest_hash: str) -> Path:
    out_path = Path(out_path)
    fig.savefig(
        out_path, dpi=DPI, format="png",
        metadata={"Software": "figscripts", "manifest-sha256": manifest_hash},
    )
    plt.close(fig)
    return out_path


def _overlay_bounds(ax, spec: FigureSpec) -> None:
    if spec.bounds is not None:
        for kind, (k, lo, hi) in load_bounds(spec.bounds).items():
            style = BAND_STYLES.get(kind, {"color": "cyan"})
            ax.plot(k, lo, linewidth=0.8, **style)
            ax.plot(k, hi, linewidth=0.8, **style)
    if spec.dispersion is not None:
        k, eps = load_dispersion(spec.dispersion)
        ax.plot(k, eps, color="white", linestyle="--", linewidth=0.8)


def render_heatmap(spec: FigureSpec, out_path) -> Path:
    """(k, omega) intensity map with optional analytic overlays."""
    manifest_hash = spec.verify_hashes()
    k_grid, omega_grid, values = load_ndsf(spec.ndsf)
    fig, ax = plt.subplots(figsize=(4.2, 3.4), constrained_layout=True)
    if values.size:
        data = _transform(values, spec)
        vmin, vmax = _color_limits(data, spec)
        mesh = ax.pcolormesh(k_grid, omega_grid, data.T, cmap=CMAP,
                             vmin=vmin, vmax=vmax, shading="nearest")
        fig.colorbar(mesh, ax=ax, label=r"$S(k,\omega)$")
        ax.set_xlim(float(k_grid.min()), float(k_grid.max()))
        ax.set_ylim(float(omega_grid.min()), float(omega_grid.max()))
    _overlay_bounds(ax, spec)
    ax.set_xlabel(r"$k$")
    ax.set_ylabel(r"$\omega$")
    if spec.title:
        ax.set_title(spec.title, fontsize=9)
    _caption(ax, f"manifest sha256:{manifest_hash[:16]}")
    return _save(fig, out_path, manifest_hash)


def render_kcut_stack(spec: FigureSpec, out_path) -> Path:
    """Stacked constant-k line cuts, successively offset by spec.offset."""
    manifest_hash = spec.verify_hashes()
    k_grid, omega_grid, values = load_ndsf(spec.ndsf)
    fig, ax = plt.subplots(figsize=(4.2, 3.4), constrained_layout=True)
    kcuts = spec.kcuts or ([float(k_grid[0])] if k_grid.size else [])
    markers = None
    if spec.boundstates is not None:
        markers = load_boundstates(spec.boundstates)
    for n, kc in enumerate(kcuts):
        if not k_grid.size:
            break
        m = int(np.argmin(np.abs(k_grid - kc)))
        row = _transform(values[m], spec)
        base = n * spec.offset
        ax.plot(omega_grid, row + base, linewidth=0.9,
                label=rf"$k={k_grid[m]:.3f}$")
        ax.axhline(base, color="gray", linewidth=0.4)
        if markers is not None:
            mk, _, momega = markers
            sel = np.abs(mk - k_grid[m]) < 1e-9
            for w in momega[sel]:
                if omega_grid.size and omega_grid[0] <= w <= omega_grid[-1]:
                    ax.plot([w], [base], marker="^", color="red",
                            markersize=3, clip_on=False)
    ax.set_xlabel(r"$\omega$")
    ax.set_ylabel(r"$S(k,\omega)$ + offset")
    if kcuts:
        ax.legend(fontsize=6)
    if spec.title:
        ax.set_title(spec.title, fontsize=9)
    _caption(ax, f"manifest sha256:{manifest_hash[:16]}")
    return _save(fig, out_path, manifest_hash)


def render_scan(spec: FigureSpec, out_path) -> Path:
    """(gamma, omega) heatmap, one panel per scanned k-cut."""
    manifest_hash = spec.verify_hashes()
    g_grid, k_vals, omega_grid, values = load_scan(spec.scan)
    n_panels = max(len(k_vals), 1)
    fig, axes = plt.subplots(
        1, n_panels, figsize=(3.4 * n_panels, 3.2),
        constrained_layout=True, squeeze=False,
    )
    for p in range(n_panels):
        ax = axes[0][p]
        if values.size:
            data = _transform(values[:, p, :], spec)
            vmin, vmax = _color_limits(data, spec)
            mesh = ax.pcolormesh(g_grid, omega_grid, data.T, cmap=CMAP,
                                 vmin=vmin, vmax=vmax, shading="nearest")
            fig.colorbar(mesh, ax=ax)
            ax.set_title(rf"$k = {k_vals[p]:.3f}$", fontsize=9)
        ax.set_xlabel(r"$\gamma$")
        ax.set_ylabel(r"$\omega$")
    if spec.title:
        fig.suptitle(spec.title, fontsize=9)
    _caption(axes[0][0], f"manifest sha256:{manifest_hash[:16]}")
    return _save(fig, out_path, manifest_hash)


RENDERERS = {
    "heatmap": render_heatmap,
    "kcut_stack": render_kcut_stack,
    "scan": render_scan,
}


def render(spec: FigureSpec, out_path) -> Path:
    try:
        fn = RENDERERS[spec.kind]
    except KeyError as exc:
        raise SpecError(f"unknown figure kind {spec.kind!r}") from exc
    return fn(spec, out_path)
