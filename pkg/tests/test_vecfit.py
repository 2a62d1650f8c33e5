"""Vector fitting: pole containers, the linearized step, and recovery."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dispersim.vecfit import (
    BandPlan,
    BarycentricIterate,
    PoleSet,
    RationalModel,
    default_band_plan,
    detect_peaks,
    fit_band,
    init_poles,
    rel_l2_error,
    relocate_poles,
    vf_iterate,
)
from dispersim.waveguide.dataset import FrfDataset

RNG = np.random.default_rng


def random_stable_system(rng, n_pairs, n_out, damping=0.01, f_lo=100.0, f_hi=2e4):
    """Random stable SIMO system with 1% modal damping."""
    beta = 2 * np.pi * np.sort(rng.uniform(f_lo, f_hi, n_pairs))
    reps = -damping * beta + 1j * beta
    pole_set = PoleSet(reps)
    res_reps = rng.standard_normal((n_out, n_pairs)) + 1j * rng.standard_normal(
        (n_out, n_pairs)
    )
    residues = np.empty((n_out, pole_set.degree), dtype=complex)
    residues[:, 0::2] = res_reps
    residues[:, 1::2] = np.conj(res_reps)
    return RationalModel.from_pole_residues(pole_set, residues)


def as_dataset(model, omega):
    return FrfDataset(
        freq_grid=omega,
        locations=np.arange(model.n_outputs, dtype=float),
        values=model.eval(omega),
        excitation_mode="flexural",
    )


class TestPoleSet:
    def test_canonical_order_and_closure(self):
        reps = np.array([-2.0 + 30j, -1.0 + 10j, -5.0 + 0j])
        ps = PoleSet(reps)
        assert ps.n_pairs == 2 and ps.n_real == 1 and ps.degree == 5
        # pair representatives in sort_complex order, interleaved with
        # their conjugates, then the real poles
        assert np.allclose(ps.poles[:4], [-2 + 30j, -2 - 30j, -1 + 10j, -1 - 10j])
        assert ps.poles[4] == -5.0

    def test_tags(self):
        ps = PoleSet(np.array([-1.0 + 10j, -5.0]))
        assert list(ps.tags) == ["pair", "real"]

    def test_rejects_negative_imag_and_duplicates(self):
        with pytest.raises(ValueError):
            PoleSet(np.array([-1.0 - 10j]))
        with pytest.raises(ValueError):
            PoleSet(np.array([-1.0 + 10j, -1.0 + 10j]))
        with pytest.raises(ValueError):
            PoleSet(np.array([], dtype=complex))

    @given(
        st.lists(
            st.tuples(
                st.floats(min_value=-100.0, max_value=-0.1),
                st.floats(min_value=1.0, max_value=1e4),
            ),
            min_size=1,
            max_size=6,
            unique_by=lambda t: round(t[1], 3),
        )
    )
    @settings(deadline=None, max_examples=50)
    def test_canonicalization_idempotent(self, pairs):
        reps = np.array([re + 1j * im for re, im in pairs])
        ps = PoleSet(reps)
        ps2 = PoleSet(ps.representatives)
        assert np.array_equal(ps.representatives, ps2.representatives)
        assert np.array_equal(ps.poles, ps2.poles)


class TestPeaksAndSeeds:
    def test_single_mode_peak_location(self):
        # 1-DOF receptance with hysteretic damping peaks at f0 exactly
        f0 = 5000.0
        omega = 2 * np.pi * np.arange(1000.0, 9001.0, 2.0)
        w0 = 2 * np.pi * f0
        H = 1.0 / (w0**2 * (1 + 0.01j) - omega**2)
        ds = FrfDataset(omega, np.array([0.0]), H[None, :], "flexural")
        peaks = detect_peaks(ds)
        assert len(peaks) == 1
        assert peaks[0] == pytest.approx(f0, abs=2.0)

    def test_prominence_threshold_suppresses_ripple(self):
        omega = 2 * np.pi * np.arange(100.0, 2000.0, 2.0)
        H = (1.0 + 0.01 * np.sin(omega / 50.0)) * np.ones_like(omega)
        ds = FrfDataset(omega, np.array([0.0]), H[None, :].astype(complex), "flexural")
        assert detect_peaks(ds, prominence_db=3.0) == []

    def test_init_poles_form(self):
        ps = init_poles([100.0, 250.0])
        beta = 2 * np.pi * np.array([100.0, 250.0])
        want = np.sort_complex(-beta / 100.0 + 1j * beta)
        assert np.allclose(np.sort_complex(ps.representatives), want)
        with pytest.raises(ValueError):
            init_poles([])
        with pytest.raises(ValueError):
            init_poles([-5.0])

    def test_init_poles_merges_near_duplicates(self):
        ps = init_poles([100.0, 100.0 + 1e-8])
        assert ps.n_pairs == 1


class TestIterateAndRelocate:
    def test_true_poles_are_a_fixed_point(self):
        rng = RNG(7)
        model = random_stable_system(rng, 6, 3)
        omega = 2 * np.pi * np.linspace(50.0, 2.5e4, 4000)
        ds = as_dataset(model, omega)
        it = vf_iterate(ds, model.pole_set, np.ones(omega.size))
        # at the true poles the denominator correction vanishes
        assert np.max(np.abs(it.psi)) < 1e-6 * np.max(np.abs(model.poles))
        new = relocate_poles(it)
        d = np.abs(new.representatives - model.pole_set.representatives)
        assert np.max(d / np.abs(model.pole_set.representatives)) < 1e-8

    def test_relocation_closed_form_real_pole(self):
        # denominator 1 + c/(s - lam) vanishes at s = lam - c
        lam, c = -40.0, 15.0
        ps = PoleSet(np.array([lam + 0j]))
        it = BarycentricIterate(ps, np.zeros((1, 1)), np.array([c + 0j]))
        new = relocate_poles(it)
        assert new.representatives[0] == pytest.approx(lam - c)

    def test_relocation_reflects_unstable_zeros(self):
        lam, c = -1.0, -3.0  # zero at +2: must reflect to -2
        ps = PoleSet(np.array([lam + 0j]))
        it = BarycentricIterate(ps, np.zeros((1, 1)), np.array([c + 0j]))
        new = relocate_poles(it)
        assert new.representatives[0] == pytest.approx(-2.0)

    def test_weight_scale_invariance(self):
        rng = RNG(3)
        model = random_stable_system(rng, 4, 2)
        omega = 2 * np.pi * np.linspace(50.0, 2.5e4, 3000)
        ds = as_dataset(model, omega)
        start = PoleSet(model.pole_set.representatives * (1.0 + 0.02j))
        w = 1.0 / (1.0 + np.abs(ds.values[0]))
        it_a = vf_iterate(ds, start, w)
        it_b = vf_iterate(ds, start, 5.0 * w)
        assert np.allclose(it_a.psi, it_b.psi, rtol=1e-8, atol=1e-12)
        assert np.allclose(it_a.phi, it_b.phi, rtol=1e-8, atol=1e-12)

    def test_iterate_validation(self):
        rng = RNG(0)
        model = random_stable_system(rng, 3, 1)
        omega = 2 * np.pi * np.linspace(100.0, 1e3, 5)  # too few samples
        ds = as_dataset(model, omega)
        with pytest.raises(ValueError):
            vf_iterate(ds, model.pole_set, np.ones(omega.size))


class TestBandPlan:
    def test_default_plans(self):
        plan = default_band_plan("flexural")
        assert plan.bands[0][0] == 10.0 and plan.bands[-1][1] == 50000.0
        assert plan.total_budget == 238
        plan_l = default_band_plan("longitudinal")
        assert plan_l.bands == [(10.0, 50000.0)] and plan_l.budgets == [48]

    def test_validation(self):
        with pytest.raises(ValueError):
            BandPlan(bands=[(0.0, 1.0)], budgets=[2, 4])
        with pytest.raises(ValueError):
            BandPlan(bands=[(0.0, 1.0), (2.0, 3.0)], budgets=[2, 2])
        with pytest.raises(ValueError):
            BandPlan(bands=[(1.0, 1.0)], budgets=[2])
        with pytest.raises(ValueError):
            BandPlan(bands=[(0.0, 1.0)], budgets=[1])


class TestRecoveryAndModel:
    def test_exact_recovery_single_band(self):
        rng = RNG(11)
        model = random_stable_system(rng, 5, 3)
        omega = 2 * np.pi * np.arange(50.0, 2.5e4, 5.0)
        ds = as_dataset(model, omega)
        ps = fit_band(ds, (50.0, 2.5e4), model.degree)
        got = np.sort_complex(ps.representatives)
        want = np.sort_complex(model.pole_set.representatives)
        assert np.max(np.abs(got - want) / np.abs(want)) < 1e-6

    def test_eval_matches_state_space(self):
        rng = RNG(5)
        model = random_stable_system(rng, 4, 3)
        omega = 2 * np.pi * np.linspace(100.0, 2e4, 40)
        assert np.allclose(model.eval(omega), model.eval_state_space(omega), rtol=1e-9)

    def test_eval_conjugate_symmetry(self):
        rng = RNG(6)
        model = random_stable_system(rng, 4, 2)
        omega = np.linspace(100.0, 1e4, 50)
        assert np.allclose(model.eval(omega), np.conj(model.eval(-omega)), rtol=1e-12)

    def test_json_roundtrip_bit_exact(self, tmp_path):
        rng = RNG(9)
        model = random_stable_system(rng, 5, 3)
        model.metadata["note"] = "roundtrip"
        p = tmp_path / "model.json"
        model.to_json(p)
        back = RationalModel.from_json(p)
        assert np.array_equal(back.poles, model.poles)
        assert np.array_equal(back.residues, model.residues)
        assert np.array_equal(back.A, model.A)
        assert np.array_equal(back.C, model.C)
        assert back.metadata["note"] == "roundtrip"

    def test_rel_l2_error_definition(self):
        rng = RNG(13)
        model = random_stable_system(rng, 3, 2)
        omega = 2 * np.pi * np.linspace(100.0, 1e4, 200)
        ds = as_dataset(model, omega)
        assert rel_l2_error(ds, model) < 1e-14
        # a zero model leaves the full signal: error = 1/N by definition
        zero = RationalModel.from_pole_residues(
            model.pole_set, np.zeros_like(model.residues)
        )
        assert rel_l2_error(ds, zero) == pytest.approx(1.0 / omega.size)

    def test_residue_pole_mismatch_rejected(self):
        ps = PoleSet(np.array([-1.0 + 10j]))
        with pytest.raises(ValueError):
            RationalModel.from_pole_residues(ps, np.zeros((1, 3), dtype=complex))
