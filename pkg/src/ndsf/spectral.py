"""Momentum-space Fourier analysis of correlation sets.

Pipeline: spatial FT -> per-momentum Burg linear prediction -> conjugate
completion to negative times -> Parzen window -> temporal FT on a uniform
frequency grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .evolution import CorrelationSet

DEFAULT_OMEGA_MAX = 8.0
DEFAULT_OMEGA_STEP = 0.02


@dataclass
class TimeSeries:
    """Complex samples on a uniform time grid."""

    t_grid: np.ndarray
    values: np.ndarray
    lp_warning: bool = False

    def __post_init__(self):
        dt = np.diff(self.t_grid)
        if len(dt) and np.max(np.abs(dt - dt[0])) > 1e-12:
            raise ValueError("time grid is not uniform")


@dataclass(frozen=True)
class WindowSpec:
    """Parzen window of half-width ``half_width`` (= the maximal time)."""

    half_width: float
    family: str = "PARZEN"

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValueError("window half_width must be positive")
        if self.family != "PARZEN":
            raise ValueError(f"unsupported window family {self.family!r}")


@dataclass(frozen=True)
class LpSpec:
    """Burg linear-prediction settings: AR order and extension horizon."""

    order: int
    horizon: float
    stabilize: bool = True

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("LP order must be >= 1")


@dataclass
class SpectralGrid:
    """S(k, omega) on the momentum grid k_m = 2 pi m / L."""

    k_grid: np.ndarray
    omega_grid: np.ndarray
    values: np.ndarray  # shape (len(k_grid), len(omega_grid))
    resolution_sigma: float
    manifest: dict = field(default_factory=dict)


def default_lp_order(n_known: int) -> int:
    return max(1, min(32, n_known // 4))


def spatial_ft(cs: CorrelationSet):
    """S(k, t) = (1/L) sum_{i,j} e^{-ik(i-j)} S(i, j, t) for k = 2 pi m / L.

    Returns a list of TimeSeries, one per grid momentum.
    """
    if not np.all(np.isfinite(cs.values)):
        bad = np.argwhere(~np.isfinite(cs.values).all(axis=2))
        raise DataError(f"correlation set incomplete at (i, j) = {bad[:5] + 1}...")
    l = cs.params.length
    k_grid = 2 * np.pi * np.arange(l) / l
    sites = np.arange(1, l + 1)
    phases = np.exp(-1j * np.outer(k_grid, sites))  # (L_k, L_site)
    # S(k,t) = (1/L) e_k^dag M(t) e_k with e_k[i] = e^{+ik i}
    out = np.einsum("ki,ijt,kj->kt", phases, cs.values, phases.conj(), optimize=True) / l
    return [TimeSeries(t_grid=cs.t_grid.copy(), values=out[m]) for m in range(l)]


def burg_coefficients(x: np.ndarray, order: int, backward: bool = True):
    """AR coefficients minimizing the forward-backward prediction error.

    Solves the combined least-squares system for the forward residuals
    x[n] - sum_i a[i] x[n-i] and (with ``backward``) the conjugate backward
    residuals, the objective Burg's method targets.  A noiseless
    line-spectral signal of at most ``order`` modes is reproduced exactly.
    Returns (a, warning) with prediction x_hat[n] = sum_i a[i] x[n-1-i]; the
    flag marks a rank-deficient fit.
    """
    x = np.asarray(x, dtype=complex)
    n = len(x)
    if order >= n:
        raise ValueError(f"order {order} requires more than {n} samples")
    cols = [x[order - i:n - i] for i in range(1, order + 1)]
    design = np.stack(cols, axis=1)
    target = x[order:]
    if backward:
        bcols = [x[i:n - order + i].conj() for i in range(1, order + 1)]
        design = np.concatenate([design, np.stack(bcols, axis=1)])
        target = np.concatenate([target, x[:n - order].conj()])
    a, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    return a, rank < order


def _stabilize(a: np.ndarray) -> np.ndarray:
    """Reflect prediction-polynomial roots outside the unit circle inward."""
    poly = np.concatenate([[1.0], -a])  # z^k - a1 z^{k-1} - ... - ak
    roots = np.roots(poly)
    bad = np.abs(roots) > 1.0
    if not bad.any():
        return a
    roots[bad] = 1.0 / roots[bad].conj()
    poly = np.poly(roots)
    return -poly[1:]


def burg_extend(series: TimeSeries, spec: LpSpec) -> TimeSeries:
    """Extend a series to ``spec.horizon`` by Burg linear prediction."""
    x = series.values
    n = len(x)
    if spec.order >= n / 2:
        raise ValueError(
            f"LP order {spec.order} too large for {n} known samples"
        )
    dt = series.t_grid[1] - series.t_grid[0]
    n_total = int(round((spec.horizon - series.t_grid[0]) / dt)) + 1
    if n_total <= n:
        return TimeSeries(series.t_grid.copy(), x.copy())
    a, clamped = burg_coefficients(x, spec.order)
    if spec.stabilize:
        a = _stabilize(a)
    ext = np.concatenate([x, np.zeros(n_total - n, dtype=complex)])
    for m in range(n, n_total):
        ext[m] = np.dot(a, ext[m - 1:m - 1 - len(a):-1])
    t_grid = series.t_grid[0] + dt * np.arange(n_total)
    return TimeSeries(t_grid=t_grid, values=ext, lp_warning=clamped)


def parzen_weight(t, a: float):
    """Piecewise-cubic Parzen window W(t; a), compactly supported on |t| <= a."""
    if a <= 0:
        raise ValueError("window half-width must be positive")
    x = np.abs(np.asarray(t, dtype=float)) / a
    inner = 1.0 - 6.0 * x**2 + 6.0 * x**3
    outer = 2.0 * (1.0 - x) ** 3
    w = np.where(x <= 0.5, inner, np.where(x <= 1.0, outer, 0.0))
    return w if w.ndim else float(w)


def parzen_kernel(omega, a: float):
    """Broadening kernel (1/2 pi) F[W(t; a)]: 96 sin^4(a w / 4) / (pi a^3 w^4).

    Normalized to unit integral; standard deviation 2 sqrt(3) / a.  The
    a-cubed denominator follows from direct integration of the window.
    """
    w = np.asarray(omega, dtype=float)
    out = np.empty_like(w)
    small = np.abs(w) < 1e-8
    out[~small] = 96.0 * np.sin(a * w[~small] / 4.0) ** 4 / (
        np.pi * a**3 * w[~small] ** 4
    )
    out[small] = 3.0 * a / (8.0 * np.pi)
    return out if out.ndim else float(out)


def resolution_sigma(a: float) -> float:
    """Frequency-resolution standard error of the Parzen kernel."""
    return 2.0 * np.sqrt(3.0) / a


def temporal_ft(series: TimeSeries, window: WindowSpec, omega_grid):
    """Windowed transform int dt e^{i w t} f(t) W(t; a) by the trapezoid rule.

    The series must cover [-a, a]; the window's vanishing endpoint value and
    slope make the trapezoid rule high-order accurate here.
    """
    a = window.half_width
    t = series.t_grid
    if t[0] > -a + 1e-9 or t[-1] < a - 1e-9:
        raise DataError(
            f"series [{t[0]}, {t[-1]}] does not cover the window support "
            f"[-{a}, {a}]"
        )
    omega_grid = np.asarray(omega_grid, dtype=float)
    w = parzen_weight(t, a)
    dt = t[1] - t[0]
    weights = np.full(len(t), dt)
    weights[0] = weights[-1] = dt / 2
    integrand = series.values * w * weights
    return np.exp(1j * np.outer(omega_grid, t)) @ integrand


def conjugate_complete(series_by_k):
    """Extend per-k series to negative times via S(k, -t) = conj(S(-k, t)).

    Grid momenta satisfy -k_m = k_{L-m} (mod 2 pi), so the negative-time half
    of row m is the conjugate of row (L - m) % L reversed in time.
    """
    l = len(series_by_k)
    full = []
    for m in range(l):
        pos = series_by_k[m]
        mirror = series_by_k[(l - m) % l]
        t_pos = pos.t_grid
        if abs(t_pos[0]) > 1e-12:
            raise DataError("conjugate completion requires a series starting at t=0")
        t_full = np.concatenate([-t_pos[:0:-1], t_pos])
        v_full = np.concatenate([mirror.values[:0:-1].conj(), pos.values])
        full.append(TimeSeries(t_grid=t_full, values=v_full,
                               lp_warning=pos.lp_warning or mirror.lp_warning))
    return full


def ndsf_pipeline(cs: CorrelationSet, lp: LpSpec | None = None,
                  window: WindowSpec | None = None,
                  omega_grid=None) -> SpectralGrid:
    """Full nDSF transform of a correlation set.

    With ``lp`` set, each momentum series is Burg-extended to ``lp.horizon``
    before windowing; the window half-width defaults to the (extended)
    maximal time.
    """
    l = cs.params.length
    by_k = spatial_ft(cs)
    lp_warnings = 0
    if lp is not None:
        order = lp.order if lp.order else default_lp_order(len(cs.t_grid))
        spec = LpSpec(order=order, horizon=lp.horizon, stabilize=lp.stabilize)
        by_k = [burg_extend(s, spec) for s in by_k]
        lp_warnings = sum(s.lp_warning for s in by_k)
    t_max = by_k[0].t_grid[-1]
    if window is None:
        window = WindowSpec(half_width=t_max)
    if omega_grid is None:
        omega_grid = np.arange(
            -DEFAULT_OMEGA_MAX, DEFAULT_OMEGA_MAX + DEFAULT_OMEGA_STEP / 2,
            DEFAULT_OMEGA_STEP,
        )
    omega_grid = np.asarray(omega_grid, dtype=float)
    full = conjugate_complete(by_k)
    values = np.array([temporal_ft(s, window, omega_grid) for s in full])
    k_grid = 2 * np.pi * np.arange(l) / l
    manifest = {
        "length": l,
        "gamma": cs.params.gamma,
        "hz": cs.params.hz,
        "state_kind": cs.state_kind,
        "op_pair": cs.alpha + cs.beta,
        "t_max_raw": float(cs.t_grid[-1]),
        "t_max_extended": float(t_max),
        "lp_order": (lp.order if lp is not None else None),
        "lp_stabilize": (lp.stabilize if lp is not None else None),
        "lp_warnings": lp_warnings,
        "window": {"family": window.family, "half_width": window.half_width},
        "resolution_sigma": resolution_sigma(window.half_width),
        "max_bond_reached": cs.max_bond_reached,
        "accumulated_discard": cs.accumulated_discard,
    }
    return SpectralGrid(
        k_grid=k_grid, omega_grid=omega_grid, values=values,
        resolution_sigma=resolution_sigma(window.half_width), manifest=manifest,
    )


def extract_peaks(grid: SpectralGrid, k: float, threshold: float = 0.1):
    """Local maxima of Re S(k, w) above ``threshold`` x row maximum.

    Peak centers are refined by a three-point parabola; returns a list of
    (omega_center, height, width) sorted by omega.  Width is the distance
    between the half-height crossings around the peak.
    """
    m = int(np.argmin(np.abs(grid.k_grid - k)))
    row = np.real(grid.values[m])
    if not len(row) or np.max(row) <= 0:
        return []
    cut = threshold * np.max(row)
    omega = grid.omega_grid
    peaks = []
    for n in range(1, len(row) - 1):
        if row[n] >= row[n - 1] and row[n] > row[n + 1] and row[n] >= cut:
            denom = row[n - 1] - 2 * row[n] + row[n + 1]
            shift = 0.0 if denom == 0 else 0.5 * (row[n - 1] - row[n + 1]) / denom
            center = omega[n] + shift * (omega[1] - omega[0])
            half = row[n] / 2
            lo = n
            while lo > 0 and row[lo] > half:
                lo -= 1
            hi = n
            while hi < len(row) - 1 and row[hi] > half:
                hi += 1
            peaks.append((center, row[n], omega[hi] - omega[lo]))
    return sorted(peaks)
