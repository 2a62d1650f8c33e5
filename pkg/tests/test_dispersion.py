"""Sensor-pair wavenumber extraction on signals with known dispersion."""

import numpy as np
import pytest

from dispersim.dispersion import (
    compare_to_oracle,
    pair_group_velocity,
    pair_wavenumber,
)
from dispersim.curves import DispersionCurve
from dispersim.errors import BranchAmbiguityError, UnreliablePairError
from dispersim.transient import ProcessedWaveform

FS = 1e6


def tone_packet(f0, t_center, n_samples=4096, width=2.0e-4, amp=1.0, channel=0,
                t_peak=None):
    """Gaussian-windowed tone as a ProcessedWaveform."""
    t = np.arange(n_samples) / FS
    y = amp * np.exp(-((t - t_center) ** 2) / (2 * width**2)) * np.sin(
        2 * np.pi * f0 * (t - t_center)
    )
    return ProcessedWaveform(
        time=t,
        samples=y,
        window=(t_center - 3 * width, t_center + 3 * width),
        t_peak=t_center if t_peak is None else t_peak,
        channel=channel,
    )


def delayed_pair(f0, tau, dx, t0=0.8e-3, **kw):
    """Two packets related by a pure delay tau: k(w) = w tau / dx."""
    wf_i = tone_packet(f0, t0, channel=0, **kw)
    wf_j = tone_packet(f0, t0 + tau, channel=1, **kw)
    return wf_i, wf_j


class TestPairWavenumber:
    def test_pure_delay_recovered_to_0p1_percent(self):
        f0, tau, dx = 20e3, 120e-6, 0.0508
        wf_i, wf_j = delayed_pair(f0, tau, dx)
        est = pair_wavenumber(wf_i, wf_j, dx)
        i0 = np.argmin(np.abs(est.freq_hz - f0))
        k_true = 2 * np.pi * est.freq_hz[i0] * tau / dx
        assert est.k[i0] == pytest.approx(k_true, rel=1e-3)
        # the whole valid band follows k = w tau / dx
        ok = est.valid
        k_band = 2 * np.pi * est.freq_hz[ok] * tau / dx
        assert np.max(np.abs(est.k[ok] - k_band) / k_band) < 1e-3

    def test_wrapped_branch_resolved(self):
        # phase at the carrier ~ 2 pi * 5.3: several wraps across dx
        f0, dx = 30e3, 0.1016
        tau = 5.3 / f0
        wf_i, wf_j = delayed_pair(f0, tau, dx)
        est = pair_wavenumber(wf_i, wf_j, dx)
        assert est.metadata["branch_index"] != 0
        i0 = np.argmin(np.abs(est.freq_hz - f0))
        k_true = 2 * np.pi * f0 * tau / dx
        assert est.k[i0] == pytest.approx(k_true, rel=1e-3)

    def test_direction_independence(self):
        f0, tau, dx = 15e3, 150e-6, 0.0762
        wf_i, wf_j = delayed_pair(f0, tau, dx)
        fwd = pair_wavenumber(wf_i, wf_j, dx)
        rev = pair_wavenumber(wf_j, wf_i, dx)
        ok = fwd.valid & rev.valid
        assert np.allclose(fwd.k[ok], rev.k[ok], rtol=1e-9)

    def test_separation_consistency(self):
        # same medium, doubled separation and delay: identical k
        f0, tau = 18e3, 100e-6
        a = pair_wavenumber(*delayed_pair(f0, tau, 0.0508), 0.0508)
        b = pair_wavenumber(*delayed_pair(f0, 2 * tau, 0.1016), 0.1016)
        ok = a.valid & b.valid
        # sampling/truncation of the Gaussian windows limits agreement
        assert np.allclose(a.k[ok], b.k[ok], rtol=1e-4)

    def test_reference_anchor_overrides_arrival(self):
        f0, tau, dx = 20e3, 120e-6, 0.0508
        wf_i, wf_j = delayed_pair(f0, tau, dx)
        # break the arrival anchor, supply the true curve as reference
        wf_j.t_peak = wf_i.t_peak
        f_ref = np.linspace(10e3, 30e3, 50)
        k_ref = 2 * np.pi * f_ref * tau / dx
        est = pair_wavenumber(wf_i, wf_j, dx, k_ref=(f_ref, k_ref))
        i0 = np.argmin(np.abs(est.freq_hz - f0))
        assert est.k[i0] == pytest.approx(2 * np.pi * f0 * tau / dx, rel=1e-3)

    def test_branch_ambiguity_detected(self):
        # anchor exactly between two branches must refuse to guess
        f0, tau, dx = 20e3, 120e-6, 0.0508
        wf_i, wf_j = delayed_pair(f0, tau, dx)
        est = pair_wavenumber(wf_i, wf_j, dx)
        i0 = int(np.argmax(np.where(est.valid, 1.0, 0.0) * 2) or 0)
        spacing = 2 * np.pi / dx
        k_mid = est.k[np.argmin(np.abs(est.freq_hz - f0))] + 0.5 * spacing
        f_ref = np.array([1e3, 50e3])
        with pytest.raises(BranchAmbiguityError):
            pair_wavenumber(wf_i, wf_j, dx, k_ref=(f_ref, [k_mid, k_mid]))

    def test_disjoint_spectra_rejected(self):
        wf_i = tone_packet(5e3, 0.8e-3, channel=0)
        wf_j = tone_packet(45e3, 1.0e-3, channel=1)
        with pytest.raises(UnreliablePairError):
            pair_wavenumber(wf_i, wf_j, 0.05)

    def test_incoherent_magnitudes_rejected(self):
        # bin-to-bin roughness of the magnitude ratio marks a pair whose
        # spectra are not related by clean propagation
        rng = np.random.default_rng(4)
        wf_i, wf_j = delayed_pair(20e3, 120e-6, 0.0508)
        U_j = np.fft.rfft(wf_j.samples)
        jitter = np.exp(0.8 * rng.standard_normal(U_j.size))
        wf_j.samples = np.fft.irfft(U_j * jitter, n=wf_j.samples.size)
        with pytest.raises(UnreliablePairError):
            pair_wavenumber(wf_i, wf_j, 0.0508)

    def test_validation(self):
        wf_i, wf_j = delayed_pair(20e3, 120e-6, 0.05)
        with pytest.raises(ValueError):
            pair_wavenumber(wf_i, wf_j, 0.0)
        short = tone_packet(20e3, 0.5e-3, n_samples=2048, channel=1)
        with pytest.raises(ValueError):
            pair_wavenumber(wf_i, short, 0.05)


class TestPairGroupVelocity:
    def test_pure_delay_velocity(self):
        f0, tau, dx = 20e3, 120e-6, 0.0508
        est = pair_wavenumber(*delayed_pair(f0, tau, dx), dx)
        vg = pair_group_velocity(est)
        i0 = np.argmin(np.abs(est.freq_hz - f0))
        assert vg[i0] == pytest.approx(dx / tau, rel=5e-3)

    def test_needs_enough_bins(self):
        est = pair_wavenumber(*delayed_pair(20e3, 120e-6, 0.0508), 0.0508)
        est.valid[:] = False
        est.valid[10:13] = True
        with pytest.raises(ValueError):
            pair_group_velocity(est)


class TestCompareToOracle:
    def _curve(self, v):
        f = np.linspace(2e3, 40e3, 39)
        return DispersionCurve(
            freq_hz=f, k=2 * np.pi * f / v, v_group=np.full(f.size, float(v)),
            spread=np.zeros(f.size), n_pairs=np.full(f.size, 10),
        )

    def test_identical_curves(self):
        rep = compare_to_oracle(self._curve(5000.0), self._curve(5000.0))
        assert rep["median_rel_dev"] == 0.0 and rep["max_rel_dev"] == 0.0

    def test_two_percent_offset(self):
        rep = compare_to_oracle(self._curve(5100.0), self._curve(5000.0))
        assert rep["median_rel_dev"] == pytest.approx(0.02)
        assert rep["max_rel_dev"] == pytest.approx(0.02)

    def test_band_restriction(self):
        rep = compare_to_oracle(
            self._curve(5000.0), self._curve(5000.0), band_hz=(10e3, 20e3)
        )
        lo, hi = rep["band_hz"]
        assert lo >= 10e3 and hi <= 20e3
        assert rep["n_bins"] < 39

    def test_disjoint_support_rejected(self):
        a = self._curve(5000.0)
        b = DispersionCurve(
            freq_hz=np.array([50e3, 60e3]), k=np.ones(2), v_group=np.ones(2),
            spread=np.zeros(2), n_pairs=np.zeros(2),
        )
        with pytest.raises(ValueError):
            compare_to_oracle(a, b)


class TestCurveContainer:
    def test_json_roundtrip(self, tmp_path):
        f = np.linspace(2e3, 10e3, 9)
        c = DispersionCurve(
            freq_hz=f, k=f / 800.0, v_group=5000 + f / 100.0,
            spread=0.01 * np.ones(9), n_pairs=np.full(9, 7),
            reliable=np.array([True] * 8 + [False]),
            metadata={"note": "roundtrip"},
        )
        c.to_json(tmp_path / "c.json")
        back = DispersionCurve.from_json(tmp_path / "c.json")
        assert np.array_equal(back.freq_hz, c.freq_hz)
        assert np.array_equal(back.v_group, c.v_group)
        assert np.array_equal(back.reliable, c.reliable)
        assert back.metadata["note"] == "roundtrip"

    def test_csv_export_parses(self, tmp_path):
        f = np.linspace(2e3, 10e3, 5)
        c = DispersionCurve(
            freq_hz=f, k=f / 800.0, v_group=np.full(5, 5000.0),
            spread=np.zeros(5), n_pairs=np.full(5, 3),
        )
        c.to_csv(tmp_path / "c.csv")
        lines = (tmp_path / "c.csv").read_text().splitlines()
        assert lines[1] == "freq_hz,k_per_m,vg_mps,spread_mps,n_pairs,reliable"
        assert len(lines) == 7
        row = lines[2].split(",")
        assert float(row[0]) == 2e3 and float(row[2]) == 5000.0

    def test_validation(self):
        with pytest.raises(ValueError):
            DispersionCurve(
                freq_hz=np.array([2.0, 1.0]), k=np.ones(2), v_group=np.ones(2),
                spread=np.zeros(2), n_pairs=np.zeros(2),
            )
        with pytest.raises(ValueError):
            DispersionCurve(
                freq_hz=np.array([1.0, 2.0]), k=np.ones(3), v_group=np.ones(2),
                spread=np.zeros(2), n_pairs=np.zeros(2),
            )
