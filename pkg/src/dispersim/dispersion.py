"""Dispersion-curve estimation from sensor-pair waveforms.

Each sensor pair yields a wavenumber spectrum from the phase difference
of its processed (incident-only) waveforms; the 2π/Δx integer branch is
anchored by the envelope arrival-time difference, or by a caller-
supplied reference wavenumber for widely separated pairs.  Group
velocities from all pairs and excitation center frequencies are
aggregated by per-bin median.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import savgol_filter

from .curves import DispersionCurve
from .errors import (
    BranchAmbiguityError,
    DispersimError,
    NoArrivalError,
    PaddingError,
    UnreliablePairError,
)
from .transient import extract_incident, make_tone_burst, simulate

__all__ = [
    "PairEstimate",
    "pair_wavenumber",
    "pair_group_velocity",
    "sweep_and_aggregate",
    "compare_to_oracle",
]

_MAG_THRESHOLD = 0.1  # valid bins: |U| at least this fraction of band peak
_AMBIGUITY_MARGIN = 0.05  # of one full 2π/Δx branch spacing


@dataclass
class PairEstimate:
    """Wavenumber spectrum from one sensor pair."""

    loc_i: float
    loc_j: float
    freq_hz: np.ndarray
    k: np.ndarray  # rad/m, NaN outside the valid band
    valid: np.ndarray  # boolean mask
    band_hz: tuple = (0.0, 0.0)
    metadata: dict = field(default_factory=dict)

    @property
    def dx(self):
        return self.loc_j - self.loc_i


def _valid_run(mag_i, mag_j):
    """Contiguous bins where both spectra are above threshold, around
    the joint spectral peak."""
    ok = (mag_i >= _MAG_THRESHOLD * mag_i.max()) & (mag_j >= _MAG_THRESHOLD * mag_j.max())
    center = int(np.argmax(mag_i * mag_j))
    if not ok[center]:
        return None
    lo = center
    while lo > 0 and ok[lo - 1]:
        lo -= 1
    hi = center
    while hi < ok.size - 1 and ok[hi + 1]:
        hi += 1
    return lo, hi, center


def pair_wavenumber(wf_i, wf_j, dx, k_ref=None, coherence_tol=0.5):
    """Wavenumber spectrum from the phase difference of two waveforms.

    The unwrapped phase fixes k only up to an integer multiple of
    2π/dx.  The branch is anchored at the joint spectral peak: either
    by the envelope arrival-time difference of the two waveforms
    (group-delay estimate k₀ = ω_ref·Δt/dx), or, if ``k_ref`` is given
    as (freq_hz, k) arrays from already-resolved pairs, by the
    interpolated reference wavenumber.  Raises
    :class:`BranchAmbiguityError` when the anchor falls too close to
    the midpoint between two candidate branches.
    """
    if dx <= 0:
        raise ValueError("dx must be positive")
    if wf_i.time.size != wf_j.time.size or wf_i.sample_rate != wf_j.sample_rate:
        raise ValueError("waveforms must share one time grid")

    U_i = np.fft.rfft(wf_i.samples)
    U_j = np.fft.rfft(wf_j.samples)
    freq = np.fft.rfftfreq(wf_i.time.size, d=1.0 / wf_i.sample_rate)
    run = _valid_run(np.abs(U_i), np.abs(U_j))
    if run is None or run[1] - run[0] < 1:
        raise UnreliablePairError(
            f"pair ({wf_i.channel}, {wf_j.channel}): no usable overlap band"
        )
    lo, hi, center = run

    ratio = np.log(np.abs(U_j[lo:hi + 1]) / np.abs(U_i[lo:hi + 1]))
    if ratio.size > 2 and np.median(np.abs(np.diff(ratio))) > coherence_tol:
        raise UnreliablePairError(
            f"pair ({wf_i.channel}, {wf_j.channel}): magnitude ratio unstable"
        )

    phase = np.unwrap(-np.angle(U_j[lo:hi + 1] / U_i[lo:hi + 1]))
    k_raw = phase / dx
    i_ref = center - lo
    omega_ref = 2.0 * np.pi * freq[center]

    if k_ref is not None:
        f_ref, k_ref_vals = k_ref
        k0 = float(np.interp(freq[center], f_ref, k_ref_vals))
    else:
        dt = wf_j.t_peak - wf_i.t_peak
        k0 = omega_ref * dt / dx

    if k0 < 0:
        # Propagation direction opposite to the (i, j) ordering: negate
        # the phase so the resolved wavenumber is direction-independent.
        k_raw = -k_raw
        k0 = -k0

    spacing = 2.0 * np.pi / dx
    m = np.round((k0 - k_raw[i_ref]) / spacing)
    delta = abs(k0 - (k_raw[i_ref] + m * spacing))
    if spacing - 2.0 * delta < _AMBIGUITY_MARGIN * spacing:
        raise BranchAmbiguityError(
            f"branch anchor within {_AMBIGUITY_MARGIN:.0%} of the midpoint "
            f"between candidates",
            pair=(wf_i.channel, wf_j.channel),
        )

    k_full = np.full(freq.size, np.nan)
    k_full[lo:hi + 1] = k_raw + m * spacing
    valid = np.zeros(freq.size, dtype=bool)
    valid[lo:hi + 1] = True
    return PairEstimate(
        loc_i=min(wf_i.channel, wf_j.channel),
        loc_j=max(wf_i.channel, wf_j.channel),
        freq_hz=freq,
        k=k_full,
        valid=valid,
        band_hz=(float(freq[lo]), float(freq[hi])),
        metadata={"branch_index": int(m), "anchor_k": float(k0), "dx_m": float(dx)},
    )


def pair_group_velocity(est):
    """v_g(ω) = (dk/dω)⁻¹ per bin, NaN where invalid.

    The slope comes from a 5-bin local quadratic (Savitzky-Golay)
    derivative of k over the valid run; bins with non-positive slope are
    invalidated.  Returns an array aligned with ``est.freq_hz``.
    """
    vg = np.full(est.freq_hz.size, np.nan)
    idx = np.nonzero(est.valid)[0]
    if idx.size < 5:
        raise ValueError("need at least 5 contiguous valid bins")
    lo, hi = idx[0], idx[-1]
    domega = 2.0 * np.pi * (est.freq_hz[1] - est.freq_hz[0])
    slope = savgol_filter(est.k[lo:hi + 1], 5, 2, deriv=1, delta=domega)
    good = slope > 0
    if not np.any(good):
        warnings.warn("wavenumber non-increasing over the whole band; no group velocity")
        return vg
    vg[lo:hi + 1][good] = 1.0 / slope[good]
    return vg


def _gate_reflections(wf, sensors, domain_bounds, source_pos, burst, kappa, gamma,
                      skipped):
    """Drop channels whose first boundary reflection overlaps the
    incident window.

    The group velocity is estimated from the measured arrival times of
    adjacent channels, so the gate needs no dispersion model.  Only the
    echo from the boundary beyond the sensor array matters: the echo
    off the boundary behind the source adds the same extra path to both
    channels of any pair and cancels in their spectral ratio.  A
    channel at x survives only if the far-boundary echo arrives later
    than the window plus one taper time constant after the incident.
    """
    x_lo, x_hi = domain_bounds
    del x_lo  # near-side boundary: common-mode, cancels pairwise
    del source_pos
    slopes = [
        (wf[i + 1].t_peak - wf[i].t_peak) / (sensors[i + 1] - sensors[i])
        for i in range(len(wf) - 1)
        if wf[i] is not None and wf[i + 1] is not None
    ]
    slopes = [s for s in slopes if s > 0]
    if not slopes:
        return
    v_est = 1.0 / float(np.median(slopes))
    T_b = burst.n_cycles / burst.center_freq
    g = gamma if gamma is not None else 3.0 / T_b
    guard = kappa * T_b / 2.0 + 1.0 / g
    for ch, x in enumerate(sensors):
        if wf[ch] is None:
            continue
        echo_delay = 2.0 * (x_hi - x) / v_est
        if echo_delay < guard:
            wf[ch] = None
            skipped["echo_gated"] = skipped.get("echo_gated", 0) + 1


def _record_duration(model_meta_locs, f_center, burst_duration):
    """Record length heuristic: burst + travel allowance + modal decay."""
    return burst_duration + max(0.02, 120.0 / f_center)


def sweep_and_aggregate(
    model,
    sensors,
    f_centers,
    n_cycles=2,
    sample_rate=1e6,
    kappa=3.0,
    gamma=None,
    out_step_hz=100.0,
    f_min_hz=2000.0,
    max_retries=3,
    spread_rel_limit=0.05,
    center_band_frac=0.35,
    min_pair_phase=0.4,
    domain_bounds=None,
    source_pos=None,
):
    """Median-aggregated group-velocity curve over all sensor pairs and
    excitation center frequencies.

    Adjacent (smallest-spacing) pairs are resolved first using the
    arrival-time anchor; their median wavenumber then serves as the
    branch reference for wider pairs, whose own arrival anchor is not
    reliable once the phase and group velocities differ.  Per output
    bin the group velocities are combined by median with an IQR-derived
    spread; bins supported by fewer than 5 contributions are dropped,
    and bins whose spread exceeds ``spread_rel_limit`` of the median
    are flagged unreliable.
    """
    sensors = np.asarray(sensors, dtype=float)
    f_centers = np.asarray(f_centers, dtype=float)
    if f_centers.size == 0 or np.any(np.diff(f_centers) <= 0):
        raise ValueError("f_centers must be nonempty and ascending")
    n = sensors.size

    grid = np.arange(f_min_hz, float(f_centers[-1]) + out_step_hz, out_step_hz)
    samples = [[] for _ in grid]
    skipped = {"ambiguous": 0, "unreliable": 0, "no_arrival": 0, "other": 0}

    for f_c in f_centers:
        burst = make_tone_burst(f_c, n_cycles, sample_rate)
        duration = _record_duration(sensors, f_c, burst.duration)
        rec = None
        for _ in range(max_retries + 1):
            try:
                rec = simulate(model, burst, duration)
                break
            except PaddingError as exc:
                duration = exc.suggested_duration
        if rec is None:
            warnings.warn(f"center {f_c:g} Hz: record never decayed; skipped")
            continue

        wf = []
        for ch in range(n):
            try:
                wf.append(extract_incident(rec, ch, burst, kappa=kappa, gamma=gamma))
            except NoArrivalError:
                wf.append(None)
                skipped["no_arrival"] += 1

        if domain_bounds is not None:
            _gate_reflections(
                wf, sensors, domain_bounds, source_pos, burst, kappa, gamma, skipped
            )

        # first pass: adjacent pairs, arrival-time anchored
        ref_ests = []
        estimates = []
        for i in range(n - 1):
            if wf[i] is None or wf[i + 1] is None:
                continue
            dx = sensors[i + 1] - sensors[i]
            try:
                est = pair_wavenumber(wf[i], wf[i + 1], dx)
            except (BranchAmbiguityError, UnreliablePairError, DispersimError) as exc:
                skipped["ambiguous" if isinstance(exc, BranchAmbiguityError)
                        else "unreliable"] += 1
                continue
            ref_ests.append(est)
            estimates.append(est)
        if not ref_ests:
            continue

        # median reference wavenumber on the common bin grid
        freq_bins = ref_ests[0].freq_hz
        k_stack = np.vstack([e.k for e in ref_ests])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            k_med = np.nanmedian(k_stack, axis=0)
        ref_ok = np.isfinite(k_med)
        k_ref = (freq_bins[ref_ok], k_med[ref_ok])

        # second pass: all wider pairs, anchored by the reference curve
        for i in range(n):
            for j in range(i + 2, n):
                if wf[i] is None or wf[j] is None:
                    continue
                dx = sensors[j] - sensors[i]
                try:
                    estimates.append(pair_wavenumber(wf[i], wf[j], dx, k_ref=k_ref))
                except BranchAmbiguityError:
                    skipped["ambiguous"] += 1
                except UnreliablePairError:
                    skipped["unreliable"] += 1

        for est in estimates:
            try:
                vg = pair_group_velocity(est)
            except ValueError:
                skipped["other"] += 1
                continue
            # keep only the well-excited neighborhood of the burst center:
            # the valid band's edges carry the largest windowing phase
            # distortion, and adjacent sweep centers cover them anyway
            ok = np.isfinite(vg)
            ok &= np.abs(est.freq_hz - f_c) <= center_band_frac * f_c
            if np.count_nonzero(ok) < 5:
                continue
            # pairs must accumulate enough phase over their separation:
            # additive spectral contamination produces a fixed absolute
            # phase error, so short-baseline pairs on fast (long-
            # wavelength) waves have no signal to measure
            if np.nanmedian(np.abs(est.k[ok])) * est.metadata["dx_m"] < min_pair_phase:
                skipped["low_phase"] = skipped.get("low_phase", 0) + 1
                continue
            f_ok = est.freq_hz[ok]
            lo_idx = int(np.searchsorted(grid, f_ok[0], side="left"))
            hi_idx = int(np.searchsorted(grid, f_ok[-1], side="right"))
            for b in range(lo_idx, hi_idx):
                samples[b].append(float(np.interp(grid[b], f_ok, vg[ok])))

    keep, v_med, spread, n_pairs, reliable = [], [], [], [], []
    for b, vals in enumerate(samples):
        if len(vals) < 5:
            continue
        arr = np.asarray(vals)
        med = float(np.median(arr))
        q1, q3 = np.percentile(arr, [25.0, 75.0])
        sig = float((q3 - q1) / 1.349)
        if med <= 0 or sig > 5.0 * spread_rel_limit * med:
            # no cross-pair consensus at all; emitting a number here
            # would be noise dressed up as an estimate
            continue
        keep.append(b)
        v_med.append(med)
        spread.append(sig)
        n_pairs.append(len(vals))
        reliable.append(med > 0 and sig <= spread_rel_limit * abs(med))
    if not keep:
        raise DispersimError("sweep produced no aggregated bins")

    freq_out = grid[keep]
    v_out = np.asarray(v_med)
    # wavenumber consistent with the aggregated group velocity: k(f) by
    # integrating dk/dω = 1/v_g from the lowest aggregated bin
    omega_out = 2.0 * np.pi * freq_out
    k_out = np.concatenate(([0.0], np.cumsum(
        0.5 * (1.0 / v_out[1:] + 1.0 / v_out[:-1]) * np.diff(omega_out)
    )))
    return DispersionCurve(
        freq_hz=freq_out,
        k=k_out,
        v_group=v_out,
        spread=np.asarray(spread),
        n_pairs=np.asarray(n_pairs),
        reliable=np.asarray(reliable, dtype=bool),
        metadata={
            "f_centers_hz": f_centers.tolist(),
            "n_cycles": int(n_cycles),
            "sample_rate_hz": float(sample_rate),
            "kappa": float(kappa),
            "skipped": skipped,
            "k_origin": "integrated 1/v_g from first aggregated bin",
        },
    )


def compare_to_oracle(curve, oracle, band_hz=None):
    """Per-bin relative group-velocity deviation against a reference
    curve, with median/max summaries over ``band_hz``."""
    lo = max(curve.freq_hz[0], oracle.freq_hz[0])
    hi = min(curve.freq_hz[-1], oracle.freq_hz[-1])
    if band_hz is not None:
        lo, hi = max(lo, band_hz[0]), min(hi, band_hz[1])
    mask = (curve.freq_hz >= lo) & (curve.freq_hz <= hi)
    if not np.any(mask):
        raise ValueError("curves have no overlapping frequency support")
    f = curve.freq_hz[mask]
    v_ref = np.interp(f, oracle.freq_hz, oracle.v_group)
    dev = np.abs(curve.v_group[mask] - v_ref) / np.abs(v_ref)
    return {
        "band_hz": [float(lo), float(hi)],
        "n_bins": int(f.size),
        "median_rel_dev": float(np.median(dev)),
        "max_rel_dev": float(np.max(dev)),
        "freq_hz": f.tolist(),
        "rel_dev": dev.tolist(),
    }
