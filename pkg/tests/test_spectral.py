"""Tests for the momentum/frequency analysis stages."""

import numpy as np
import pytest

from ndsf.errors import DataError
from ndsf.evolution import CorrelationSet, EvolutionConfig, correlation_series
from ndsf.model import ModelParams
from ndsf.spectral import (
    LpSpec,
    TimeSeries,
    WindowSpec,
    burg_coefficients,
    burg_extend,
    conjugate_complete,
    extract_peaks,
    ndsf_pipeline,
    parzen_kernel,
    parzen_weight,
    resolution_sigma,
    spatial_ft,
    temporal_ft,
)
from ndsf.tensor import TruncationSpec

RNG = np.random.default_rng(20240818)


def make_cs(values, t_grid, length, gamma=0.3, hz=0.0):
    return CorrelationSet(
        params=ModelParams(gamma=gamma, hz=hz, length=length),
        state_kind="FMZ", alpha="z", beta="z",
        t_grid=np.asarray(t_grid, dtype=float),
        values=np.asarray(values, dtype=complex),
        completed=np.zeros((length, length), dtype=bool),
    )


class TestSpatialFt:
    def test_onsite_delta_is_flat(self):
        l, nt = 6, 5
        vals = np.zeros((l, l, nt), dtype=complex)
        for i in range(l):
            vals[i, i, :] = 1.0
        series = spatial_ft(make_cs(vals, 0.05 * np.arange(nt), l))
        for s in series:
            assert np.max(np.abs(s.values - 1.0)) < 1e-12

    def test_uniform_concentrates_at_k0(self):
        l, nt = 6, 4
        vals = np.ones((l, l, nt), dtype=complex)
        series = spatial_ft(make_cs(vals, 0.05 * np.arange(nt), l))
        assert np.max(np.abs(series[0].values - l)) < 1e-10
        for s in series[1:]:
            assert np.max(np.abs(s.values)) < 1e-10

    def test_matches_double_loop(self):
        l, nt = 6, 7
        vals = RNG.normal(size=(l, l, nt)) + 1j * RNG.normal(size=(l, l, nt))
        series = spatial_ft(make_cs(vals, 0.05 * np.arange(nt), l))
        for m in range(l):
            k = 2 * np.pi * m / l
            ref = np.zeros(nt, dtype=complex)
            for i in range(l):
                for j in range(l):
                    ref += np.exp(-1j * k * (i - j)) * vals[i, j]
            ref /= l
            assert np.max(np.abs(series[m].values - ref)) < 1e-12

    def test_sum_rule_pre_window(self):
        # Parseval: sum_k S(k, t) = sum_i S(i, i, t); at t=0 with unit
        # diagonals this is exactly L.
        l, nt = 8, 3
        vals = RNG.normal(size=(l, l, nt)) + 1j * RNG.normal(size=(l, l, nt))
        for i in range(l):
            vals[i, i, 0] = 1.0
        series = spatial_ft(make_cs(vals, 0.05 * np.arange(nt), l))
        total = sum(s.values[0] for s in series)
        assert abs(total - l) < 1e-10

    def test_incomplete_set_raises(self):
        l, nt = 4, 3
        vals = np.ones((l, l, nt), dtype=complex)
        vals[1, 2, 1] = np.nan
        with pytest.raises(DataError):
            spatial_ft(make_cs(vals, 0.05 * np.arange(nt), l))


class TestLinearPrediction:
    def test_cosine_order_two_exact(self):
        delta, w0 = 0.05, 1.1
        n = np.arange(120)
        x = np.cos(w0 * n * delta)
        a, warn = burg_coefficients(x, 2)
        assert not warn
        assert np.max(np.abs(a - [2 * np.cos(w0 * delta), -1.0])) < 1e-10
        series = TimeSeries(t_grid=n * delta, values=x.astype(complex))
        ext = burg_extend(series, LpSpec(order=2, horizon=199 * delta))
        ref = np.cos(w0 * np.arange(200) * delta)
        assert np.max(np.abs(ext.values - ref)) < 1e-10

    def test_damped_exponential_order_one(self):
        delta, w0, eta = 0.05, 0.9, 0.3
        n = np.arange(80)
        x = np.exp((1j * w0 - eta) * n * delta)
        a, _ = burg_coefficients(x, 1, backward=False)
        assert abs(a[0] - np.exp((1j * w0 - eta) * delta)) < 1e-12

    def test_two_tone_extension(self):
        delta = 0.05
        n = np.arange(200)
        x = np.cos(0.7 * n * delta) + 0.5 * np.cos(1.9 * n * delta)
        series = TimeSeries(t_grid=n * delta, values=x.astype(complex))
        ext = burg_extend(series, LpSpec(order=4, horizon=299 * delta))
        m = np.arange(300)
        ref = np.cos(0.7 * m * delta) + 0.5 * np.cos(1.9 * m * delta)
        assert len(ext.values) == 300
        assert np.max(np.abs(ext.values - ref)) < 1e-8

    def test_noop_on_line_spectral_input(self):
        delta = 0.05
        n = np.arange(150)
        x = (np.cos(0.6 * n * delta) + 0.3 * np.sin(2.3 * n * delta)).astype(
            complex
        )
        series = TimeSeries(t_grid=n * delta, values=x)
        ext = burg_extend(series, LpSpec(order=8, horizon=220 * delta))
        assert np.max(np.abs(ext.values[:150] - x)) < 1e-8

    def test_stabilization_caps_growth(self):
        delta = 0.05
        n = np.arange(100)
        x = np.exp(0.4 * n * delta) * np.cos(1.2 * n * delta)  # growing tone
        series = TimeSeries(t_grid=n * delta, values=x.astype(complex))
        stable = burg_extend(series, LpSpec(order=4, horizon=500 * delta,
                                            stabilize=True))
        raw = burg_extend(series, LpSpec(order=4, horizon=500 * delta,
                                         stabilize=False))
        # Reflected roots lie on/inside the unit circle: the stabilized tail
        # decays while the raw prediction keeps growing exponentially.
        peak = np.max(np.abs(x))
        assert np.max(np.abs(stable.values[100:])) < 2 * peak
        assert np.max(np.abs(stable.values[-50:])) < peak
        assert np.max(np.abs(raw.values[100:])) > 100 * peak

    def test_rank_deficient_sets_warning(self):
        x = np.ones(40, dtype=complex)
        _, warn = burg_coefficients(x, 3)
        assert warn

    def test_order_too_large_rejected(self):
        series = TimeSeries(t_grid=0.05 * np.arange(10),
                            values=np.ones(10, dtype=complex))
        with pytest.raises(ValueError):
            burg_extend(series, LpSpec(order=5, horizon=1.0))


class TestParzen:
    def test_center_edges_and_knot(self):
        for a in (1.0, 12.0, 18.0):
            assert parzen_weight(0.0, a) == 1.0
            assert parzen_weight(a, a) == 0.0
            assert parzen_weight(-a, a) == 0.0
            assert abs(parzen_weight(a / 2, a) - 0.25) < 1e-15
            assert parzen_weight(1.5 * a, a) == 0.0

    def test_kernel_closed_form_and_limit(self):
        a = 12.0
        w = np.linspace(-8, 8, 801)
        w = w[np.abs(w) > 1e-6]
        ref = 96 * np.sin(a * w / 4) ** 4 / (np.pi * a**3 * w**4)
        assert np.max(np.abs(parzen_kernel(w, a) - ref)) < 1e-15
        assert abs(parzen_kernel(0.0, a) - 3 * a / (8 * np.pi)) < 1e-15

    def test_kernel_is_normalized(self):
        w = np.arange(-400, 400, 0.001)
        for a in (6.0, 12.0, 18.0):
            total = np.trapezoid(parzen_kernel(w, a), w)
            assert abs(total - 1.0) < 1e-6

    def test_resolution_sigma_values(self):
        assert abs(resolution_sigma(18.0) - np.sqrt(3) / 9) < 1e-15
        # Second-moment check of the stated standard error.
        a = 12.0
        w = np.arange(-600, 600, 0.001)
        var = np.trapezoid(w**2 * parzen_kernel(w, a), w)
        assert abs(np.sqrt(var) - resolution_sigma(a)) < 1e-4


class TestTemporalFt:
    @staticmethod
    def full_grid(a, dt=0.05):
        n = int(round(a / dt))
        return dt * np.arange(-n, n + 1)

    def test_unit_signal_gives_kernel(self):
        a = 12.0
        t = self.full_grid(a)
        series = TimeSeries(t_grid=t, values=np.ones_like(t, dtype=complex))
        omega = np.arange(-8, 8.0001, 0.02)
        out = temporal_ft(series, WindowSpec(half_width=a), omega)
        ref = 2 * np.pi * parzen_kernel(omega, a)
        assert np.max(np.abs(out - ref)) < 1e-6
        out0 = temporal_ft(series, WindowSpec(half_width=a), [0.0])[0]
        assert abs(out0 / (2 * np.pi) - 3 * a / (8 * np.pi)) < 1e-8

    def test_cosine_gives_two_kernel_copies(self):
        a, w0 = 12.0, 2.0
        t = self.full_grid(a)
        series = TimeSeries(t_grid=t, values=np.cos(w0 * t).astype(complex))
        omega = np.arange(-8, 8.0001, 0.02)
        out = temporal_ft(series, WindowSpec(half_width=a), omega)
        ref = np.pi * (parzen_kernel(omega - w0, a) + parzen_kernel(omega + w0, a))
        assert np.max(np.abs(out - ref)) < 1e-6
        plus = out[np.argmin(np.abs(omega - w0))]
        minus = out[np.argmin(np.abs(omega + w0))]
        assert abs(plus - minus) < 1e-6

    def test_window_widens_to_exact_transform(self):
        # Gaussian test signal: window -> 1 pointwise, so the windowed
        # transform converges to the exact Fourier transform as a doubles.
        sig = 2.0
        omega = np.array([0.0, 0.5, 1.0])
        exact = np.sqrt(2 * np.pi) * sig * np.exp(-(omega**2) * sig**2 / 2)
        errs = []
        for a in (12.0, 24.0, 48.0):
            t = self.full_grid(a, dt=0.01)
            series = TimeSeries(
                t_grid=t, values=np.exp(-(t**2) / (2 * sig**2)).astype(complex)
            )
            out = temporal_ft(series, WindowSpec(half_width=a), omega)
            errs.append(np.max(np.abs(out - exact)))
        # Window bias shrinks quadratically in (signal width / a).
        assert errs[2] < errs[1] / 3 and errs[1] < errs[0] / 3

    def test_missing_coverage_raises(self):
        t = 0.05 * np.arange(0, 41)  # only t >= 0
        series = TimeSeries(t_grid=t, values=np.ones(41, dtype=complex))
        with pytest.raises(DataError):
            temporal_ft(series, WindowSpec(half_width=2.0), [0.0])


class TestConjugateComplete:
    def test_negative_half_uses_mirror_momentum(self):
        l, nt = 4, 6
        t = 0.05 * np.arange(nt)
        series = [
            TimeSeries(t_grid=t.copy(),
                       values=RNG.normal(size=nt) + 1j * RNG.normal(size=nt))
            for _ in range(l)
        ]
        full = conjugate_complete(series)
        for m in range(l):
            mirror = series[(l - m) % l]
            assert np.allclose(full[m].values[: nt - 1],
                               mirror.values[:0:-1].conj())
            assert np.allclose(full[m].values[nt - 1 :], series[m].values)
            assert np.allclose(full[m].t_grid, np.concatenate([-t[:0:-1], t]))


class TestPipeline:
    def test_resolution_constant_12_to_18(self):
        params = ModelParams(gamma=0.0, hz=0.0, length=4)
        cfg = EvolutionConfig(dt=0.05, t_max=12.0)
        cs = correlation_series(params, "FMZ", "z", "z", cfg)
        grid = ndsf_pipeline(cs, lp=LpSpec(order=8, horizon=18.0))
        assert grid.resolution_sigma == resolution_sigma(18.0)
        assert abs(grid.resolution_sigma - np.sqrt(3) / 9) < 1e-15
        assert grid.manifest["t_max_raw"] == 12.0
        assert grid.manifest["t_max_extended"] == 18.0

    def test_static_limit_is_scaled_kernel(self):
        # gamma=0 FMZ zz: S(i,j,t)=1, so S(k,omega) = L * 2 pi * kernel at
        # k=0 and vanishes at every other momentum.
        params = ModelParams(gamma=0.0, hz=0.0, length=6)
        cfg = EvolutionConfig(dt=0.05, t_max=12.0)
        cs = correlation_series(params, "FMZ", "z", "z", cfg)
        omega = np.arange(-8, 8.0001, 0.02)
        grid = ndsf_pipeline(cs, omega_grid=omega)
        ref = 6 * 2 * np.pi * parzen_kernel(omega, 12.0)
        assert np.max(np.abs(grid.values[0] - ref)) < 1e-6
        assert np.max(np.abs(grid.values[1:])) < 1e-8

    def test_linearity(self):
        l, nt = 4, 241
        t = 0.05 * np.arange(nt)
        v1 = RNG.normal(size=(l, l, nt)) + 1j * RNG.normal(size=(l, l, nt))
        v2 = RNG.normal(size=(l, l, nt)) + 1j * RNG.normal(size=(l, l, nt))
        omega = np.arange(-4, 4.0001, 0.05)
        outs = [
            ndsf_pipeline(make_cs(v, t, l), omega_grid=omega).values
            for v in (v1, v2, 2.0 * v1 + 0.5 * v2)
        ]
        assert np.max(np.abs(outs[2] - 2.0 * outs[0] - 0.5 * outs[1])) < 1e-10

    def test_conjugate_momentum_symmetry(self):
        params = ModelParams(gamma=np.pi / 8, hz=0.0, length=6)
        cfg = EvolutionConfig(
            truncation=TruncationSpec(max_bond=128, rel_cutoff=1e-12),
            dt=0.05, t_max=4.0,
        )
        cs = correlation_series(params, "FMZ", "x", "x", cfg)
        grid = ndsf_pipeline(cs)
        l = 6
        scale = np.max(np.abs(grid.values))
        for m in range(l):
            dev = np.max(
                np.abs(grid.values[m] - grid.values[(l - m) % l].conj())
            )
            assert dev < 1e-8 * scale

    def test_manifest_records_stages(self):
        params = ModelParams(gamma=0.4, hz=0.1, length=4)
        cfg = EvolutionConfig(dt=0.05, t_max=2.0)
        cs = correlation_series(params, "FMX", "z", "z", cfg)
        grid = ndsf_pipeline(cs, lp=LpSpec(order=4, horizon=3.0))
        man = grid.manifest
        for key in (
            "length", "gamma", "hz", "state_kind", "op_pair", "t_max_raw",
            "t_max_extended", "lp_order", "lp_stabilize", "lp_warnings",
            "window", "resolution_sigma", "max_bond_reached",
            "accumulated_discard",
        ):
            assert key in man
        assert man["op_pair"] == "zz"
        assert man["lp_order"] == 4


class TestExtractPeaks:
    @staticmethod
    def kernel_grid(centers, heights, a=18.0):
        omega = np.arange(-8, 8.0001, 0.02)
        row = np.zeros_like(omega)
        for c, h in zip(centers, heights):
            row += h * parzen_kernel(omega - c, a) / parzen_kernel(0.0, a)
        from ndsf.spectral import SpectralGrid

        return SpectralGrid(
            k_grid=np.array([0.0]), omega_grid=omega,
            values=row[None, :].astype(complex),
            resolution_sigma=resolution_sigma(a),
        )

    def test_single_bump_center(self):
        grid = self.kernel_grid([1.3], [1.0])
        peaks = extract_peaks(grid, 0.0, threshold=0.1)
        assert len(peaks) == 1
        assert abs(peaks[0][0] - 1.3) < 0.005

    def test_two_separated_bumps(self):
        sigma = resolution_sigma(18.0)
        grid = self.kernel_grid([-1.0, -1.0 + 5 * sigma], [1.0, 0.8])
        centers = [p[0] for p in extract_peaks(grid, 0.0, threshold=0.1)]
        assert len(centers) == 2
        assert abs(centers[0] + 1.0) < 0.01
        assert abs(centers[1] + 1.0 - 5 * sigma) < 0.01

    def test_flat_zero_row_empty(self):
        from ndsf.spectral import SpectralGrid

        omega = np.arange(-2, 2.0001, 0.02)
        grid = SpectralGrid(
            k_grid=np.array([0.0]), omega_grid=omega,
            values=np.zeros((1, len(omega)), dtype=complex),
            resolution_sigma=0.1,
        )
        assert extract_peaks(grid, 0.0) == []
