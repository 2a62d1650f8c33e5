"""FRF synthesis against a modal-summation rod oracle, plus dataset IO."""

import numpy as np
import pytest

from dispersim.waveguide import FrfDataset, synthesize_frfs
from dispersim.waveguide.frf import build_mesh


def _rod_modal_frf(spec, omega, n_modes=20_000):
    """Free-free rod receptance to the pin-force pair: exact static
    solution plus a mode-accelerated dynamic correction.

    Modes phi_n = cos(n pi x / L), m_n = rho A L / 2; the rigid-body
    mode drops out because the pair carries zero net force.  Writing
    u = u_static + sum_n phi_n dphi_n [1/(m_n(w_n^2 h - w^2)) -
    1/(m_n w_n^2 h)] with h = 1 + i eta makes the summand decay like
    1/n^4, so the truncation error is negligible."""
    m, s = spec.material, spec.section
    L = spec.length
    a1, a2 = spec.actuator_edges
    EA = m.E_complex * s.area
    h = 1.0 + 1j * m.eta
    n = np.arange(1, n_modes + 1)
    wn2 = (n * np.pi / L) ** 2 * m.E / m.rho
    dphi = np.cos(n * np.pi * a2 / L) - np.cos(n * np.pi * a1 / L)
    mn = m.rho * s.area * L / 2.0
    bracket = 1.0 / (mn * (wn2 * h - omega**2)) - 1.0 / (mn * wn2 * h)
    # zero-mean static field: u' = 1/EA between the pin forces, 0 outside
    c0 = -((a2 - a1) ** 2 / 2.0 + (L - a2) * (a2 - a1)) / (EA * L)

    def u_static(x):
        return c0 + (np.clip(x, a1, a2) - a1) / EA

    out = np.empty(len(spec.sensor_positions), dtype=complex)
    for i, xs in enumerate(spec.sensor_positions):
        out[i] = u_static(xs) + np.sum(np.cos(n * np.pi * xs / L) * dphi * bracket)
    return out


class TestMesh:
    def test_nodes_cover_layout(self, small_spec):
        nodes, act, sens = build_mesh(small_spec)
        assert nodes[0] == 0.0 and nodes[-1] == pytest.approx(small_spec.length)
        assert np.all(np.diff(nodes) > 0)
        for a, idx in zip(small_spec.actuator_edges, act):
            assert nodes[idx] == pytest.approx(a)
        for x, idx in zip(small_spec.sensor_positions, sens):
            assert nodes[idx] == pytest.approx(x)

    def test_coincident_points_merge(self, small_spec):
        # sensor 0 sits exactly on the actuator's right edge
        nodes, act, sens = build_mesh(small_spec)
        assert act[1] == sens[0]
        assert np.unique(nodes).size == nodes.size


class TestSynthesisOracle:
    def test_matches_rod_modal_summation(self, small_spec):
        omega = 2 * np.pi * np.array([3e3, 8e3, 15e3])
        ds = synthesize_frfs(small_spec, omega)
        for j, w in enumerate(omega):
            ref = _rod_modal_frf(small_spec, w)
            err = np.max(np.abs(ds.values[:, j] - ref) / np.abs(ref))
            assert err < 1e-10

    def test_mesh_invariance_extra_sensors(self, small_spec):
        omega = 2 * np.pi * np.linspace(2e3, 2e4, 7)
        base = synthesize_frfs(small_spec, omega)
        refined = synthesize_frfs(
            small_spec.replace(
                sensor_positions=tuple(
                    sorted(set(small_spec.sensor_positions)
                           | {0.16, 0.22, 0.31, 0.41})
                )
            ),
            omega,
        )
        common = [list(refined.locations).index(x) for x in base.locations]
        assert np.allclose(refined.values[common], base.values, rtol=1e-8)

    def test_pin_pair_reciprocity(self, small_spec):
        # reciprocity of the pin-force pairs, expressed through the
        # mirror image so both layouts keep sensors behind the actuator:
        # P_B . u[P_A] (forward) must equal P_A . u[P_B] (mirrored)
        omega = 2 * np.pi * np.array([4e3, 1.1e4])
        L = small_spec.length
        a1, a2 = small_spec.actuator_edges
        b1, b2 = 0.30, 0.33
        fwd = synthesize_frfs(small_spec.replace(sensor_positions=(b1, b2)), omega)
        rev = synthesize_frfs(
            small_spec.replace(
                actuator_edges=(L - b2, L - b1),
                sensor_positions=(L - a2, L - a1),
            ),
            omega,
        )
        assert np.allclose(
            fwd.values[1] - fwd.values[0], rev.values[1] - rev.values[0], rtol=1e-8
        )

    def test_undamped_grid_bookkeeping(self, small_spec):
        # with eta = 0 singular bins are dropped and recorded; in all
        # cases kept + flagged must account for every input frequency
        spec0 = small_spec.replace(material=small_spec.material.with_eta(0.0))
        f1 = spec0.material.rod_speed / (2.0 * spec0.length)  # first resonance
        omega = 2 * np.pi * np.array([0.5 * f1, f1, 1.5 * f1, 2.7 * f1])
        ds = synthesize_frfs(spec0, omega)
        flagged = ds.metadata.get("flagged_freqs_hz", [])
        assert ds.freq_grid.size + len(flagged) == omega.size
        assert np.all(np.isfinite(ds.values))

    def test_grid_validation(self, small_spec):
        with pytest.raises(ValueError):
            synthesize_frfs(small_spec, np.array([]))
        with pytest.raises(ValueError):
            synthesize_frfs(small_spec, np.array([0.0, 1.0]))
        with pytest.raises(ValueError):
            synthesize_frfs(small_spec, np.array([2.0, 1.0]))


class TestDatasetIO:
    @pytest.fixture
    def ds(self, small_spec):
        omega = 2 * np.pi * np.linspace(2e3, 6e3, 5)
        d = synthesize_frfs(small_spec, omega)
        d.metadata["note"] = "roundtrip"
        return d

    def test_json_roundtrip_bit_exact(self, ds, tmp_path):
        p = tmp_path / "frf.json"
        ds.to_json(p)
        back = FrfDataset.from_json(p)
        assert np.array_equal(back.freq_grid, ds.freq_grid)
        assert np.array_equal(back.values, ds.values)
        assert back.excitation_mode == ds.excitation_mode
        assert back.metadata["note"] == "roundtrip"

    def test_csv_roundtrip(self, ds, tmp_path):
        p = tmp_path / "frf.csv"
        ds.to_csv(p)
        back = FrfDataset.from_csv(p)
        assert np.array_equal(back.values, ds.values)
        assert np.array_equal(back.locations, ds.locations)
        assert back.metadata["note"] == "roundtrip"

    def test_band_slice(self, ds):
        mask = ds.band_slice(2500.0, 5500.0)
        assert np.array_equal(mask, (ds.freq_hz >= 2500.0) & (ds.freq_hz < 5500.0))

    def test_validation(self):
        with pytest.raises(ValueError):
            FrfDataset(
                freq_grid=np.array([1.0, 2.0]),
                locations=np.array([0.1]),
                values=np.zeros((2, 2), dtype=complex),
                excitation_mode="flexural",
            )
        with pytest.raises(ValueError):
            FrfDataset(
                freq_grid=np.array([2.0, 1.0]),
                locations=np.array([0.1]),
                values=np.zeros((1, 2), dtype=complex),
                excitation_mode="flexural",
            )
