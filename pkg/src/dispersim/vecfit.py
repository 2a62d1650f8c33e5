"""Vector fitting of FRF datasets to stable SIMO rational models.

The fit is band-partitioned: peaks detected in each frequency band seed
conjugate pole pairs, each band is fitted independently, the surviving
in-band poles are merged, and a final fit over the whole grid produces
the model.  Rational functions are parameterized in barycentric form
with a real-coefficient conjugate-pair basis, so every linear
least-squares problem is real-valued and the fitted model is exactly
conjugate-symmetric by construction.
"""

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular
from scipy.signal import find_peaks

from ._kernels import rational_eval
from .errors import IllConditionedFitError, UnstableModelError
from .waveguide.dataset import FrfDataset

_COND_LIMIT = 1e13
_POLE_MOVE_TOL = 1e-6
_MAX_ITER = 30
_DEDUP_REL = 1e-4
_WEIGHT_FLOOR_REL = 1e-12

__all__ = [
    "PoleSet",
    "BarycentricIterate",
    "RationalModel",
    "BandPlan",
    "detect_peaks",
    "init_poles",
    "vf_iterate",
    "relocate_poles",
    "fit_band",
    "fit_full",
    "rel_l2_error",
    "inverse_magnitude_weights",
    "default_band_plan",
]


# ---------------------------------------------------------------------------
# pole containers


@dataclass
class PoleSet:
    """A conjugate-closed set of poles [rad/s].

    ``representatives`` holds one pole per conjugate pair (Im > 0) plus
    any purely real poles; ``poles`` expands to the full closed list in
    canonical order: pairs (λ, conj λ) sorted by imaginary part, then
    real poles sorted by real part.
    """

    representatives: np.ndarray
    converged: bool = True

    def __post_init__(self):
        reps = np.atleast_1d(np.asarray(self.representatives, dtype=complex))
        if reps.size == 0:
            raise ValueError("PoleSet needs at least one pole")
        if np.any(reps.imag < 0):
            raise ValueError("representatives must have Im >= 0")
        pairs = np.sort_complex(reps[reps.imag > 0])
        reals = np.sort(reps[reps.imag == 0].real)
        self.representatives = np.concatenate((pairs, reals.astype(complex)))
        scale = np.abs(self.representatives)
        d = np.abs(self.representatives[:, None] - self.representatives[None, :])
        np.fill_diagonal(d, np.inf)
        if np.any(d < 1e-9 * np.maximum(scale[:, None], 1.0)):
            raise ValueError("poles must be mutually distinct (1e-9 relative)")

    @property
    def n_pairs(self):
        return int(np.sum(self.representatives.imag > 0))

    @property
    def n_real(self):
        return self.representatives.size - self.n_pairs

    @property
    def degree(self):
        return 2 * self.n_pairs + self.n_real

    @property
    def tags(self):
        """'pair' or 'real' per representative."""
        return np.where(self.representatives.imag > 0, "pair", "real")

    @property
    def poles(self):
        """Full conjugate-closed pole list, length ``degree``."""
        out = np.empty(self.degree, dtype=complex)
        np_ = self.n_pairs
        out[0:2 * np_:2] = self.representatives[:np_]
        out[1:2 * np_:2] = np.conj(self.representatives[:np_])
        out[2 * np_:] = self.representatives[np_:]
        return out

    def max_real_part(self):
        return float(np.max(self.representatives.real))


def _expand_real_coeffs(pole_set, coeffs):
    """Real basis coefficients (…, degree) -> complex residues per pole.

    The basis is 1/(s−λ)+1/(s−λ̄) and i/(s−λ)−i/(s−λ̄) per conjugate
    pair, 1/(s−λ) per real pole; coefficients (c1, c2) map to residue
    c1 + i·c2 at λ (conjugate at λ̄).
    """
    coeffs = np.atleast_2d(coeffs)
    np_ = pole_set.n_pairs
    out = np.empty((coeffs.shape[0], pole_set.degree), dtype=complex)
    c1 = coeffs[:, 0:2 * np_:2]
    c2 = coeffs[:, 1:2 * np_:2]
    out[:, 0:2 * np_:2] = c1 + 1j * c2
    out[:, 1:2 * np_:2] = c1 - 1j * c2
    out[:, 2 * np_:] = coeffs[:, 2 * np_:]
    return out


def _basis_matrix(omega, pole_set):
    """Complex basis Phi (nf, degree) of the real-coefficient expansion."""
    s = 1j * np.asarray(omega, dtype=float)[:, None]
    reps = pole_set.representatives
    np_ = pole_set.n_pairs
    phi = np.empty((s.size, pole_set.degree), dtype=complex)
    if np_:
        gp = 1.0 / (s - reps[None, :np_])
        gm = 1.0 / (s - np.conj(reps[None, :np_]))
        phi[:, 0:2 * np_:2] = gp + gm
        phi[:, 1:2 * np_:2] = 1j * (gp - gm)
    if pole_set.n_real:
        phi[:, 2 * np_:] = 1.0 / (s - reps[None, np_:].real)
    return phi


@dataclass
class BarycentricIterate:
    """One linearized step: poles plus numerator (phi) / denominator
    (psi) residues, both aligned with ``poles.poles``."""

    poles: PoleSet
    phi: np.ndarray  # (n_channels, degree) complex
    psi: np.ndarray  # (degree,) complex

    def __post_init__(self):
        self.phi = np.atleast_2d(np.asarray(self.phi, dtype=complex))
        self.psi = np.atleast_1d(np.asarray(self.psi, dtype=complex))
        r = self.poles.degree
        if self.phi.shape[1] != r or self.psi.size != r:
            raise ValueError("phi/psi dimensions do not match the pole set")


# ---------------------------------------------------------------------------
# peak detection and initialization


def detect_peaks(frf, channel=0, prominence_db=3.0):
    """Resonant peak frequencies [Hz] of one channel's |H|.

    Local maxima of the dB magnitude with at least ``prominence_db`` of
    topographic prominence.  Returns an ascending list; empty if the
    channel has no qualifying peaks.
    """
    h = np.abs(frf.values[channel])
    db = 20.0 * np.log10(np.maximum(h, 1e-300))
    idx, _ = find_peaks(db, prominence=prominence_db)
    return [float(f) for f in frf.freq_hz[idx]]


def init_poles(peaks):
    """Starting poles −β/100 ± iβ, β = 2πf, one pair per peak."""
    peaks = np.asarray(sorted(peaks), dtype=float)
    if peaks.size == 0 or np.any(peaks <= 0):
        raise ValueError("peaks must be nonempty and positive")
    beta = 2.0 * np.pi * peaks
    keep = [beta[0]]
    for b in beta[1:]:
        if (b - keep[-1]) > 1e-6 * b:
            keep.append(b)
    beta = np.asarray(keep)
    return PoleSet(-beta / 100.0 + 1j * beta)


def inverse_magnitude_weights(values, floor_rel=_WEIGHT_FLOOR_REL):
    """Per-channel weights 1/|H| with a relative floor on |H|."""
    mag = np.abs(np.atleast_2d(values))
    floor = floor_rel * np.max(mag, axis=1, keepdims=True)
    return 1.0 / np.maximum(mag, floor)


# ---------------------------------------------------------------------------
# the linearized LS step and pole relocation


def _stack_real(a):
    return np.concatenate((a.real, a.imag), axis=0)


def vf_iterate(frf, pole_set, weights, band=None):
    """One weighted linear LS solve of the barycentric linearization.

    Minimizes Σ_ch Σ_j w_cj |Σφ/(iω_j−λ) − (1 + Σψ/(iω_j−λ))·H_c(iω_j)|²
    over per-channel numerator coefficients φ and shared denominator
    coefficients ψ, with the denominator constant pinned to 1.  Solved
    per channel by QR; the shared-ψ subsystem is assembled from the
    channels' triangular factors.
    """
    H = frf.values
    n_ch = H.shape[0]
    weights = np.asarray(weights, dtype=float)
    if weights.ndim == 1:
        weights = np.broadcast_to(weights, H.shape)
    nb = pole_set.degree
    if 2 * H.shape[1] < 2 * (nb + 1):
        raise ValueError("not enough samples for the requested model order")

    phi_mat = _basis_matrix(frf.freq_grid, pole_set)
    col_scale = 1.0 / np.maximum(np.abs(pole_set.poles), 1.0)
    phi_s = phi_mat * col_scale[None, :]

    r11 = np.empty((n_ch, nb, nb))
    r12 = np.empty((n_ch, nb, nb))
    rhs1 = np.empty((n_ch, nb))
    psi_blocks = np.empty((n_ch, nb, nb))
    psi_rhs = np.empty((n_ch, nb))
    for c in range(n_ch):
        w = weights[c][:, None]
        block = np.concatenate(
            (w * phi_s, -(w * H[c][:, None]) * phi_s, w * H[c][:, None]), axis=1
        )
        r = np.linalg.qr(_stack_real(block), mode="r")
        r11[c] = r[:nb, :nb]
        r12[c] = r[:nb, nb:2 * nb]
        rhs1[c] = r[:nb, 2 * nb]
        psi_blocks[c] = r[nb:2 * nb, nb:2 * nb]
        psi_rhs[c] = r[nb:2 * nb, 2 * nb]

    psi_sys = psi_blocks.reshape(n_ch * nb, nb)
    cond = np.linalg.cond(psi_sys)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise IllConditionedFitError(
            f"denominator LS system condition {cond:.3e} exceeds {_COND_LIMIT:.0e}",
            band=band,
        )
    d, *_ = np.linalg.lstsq(psi_sys, psi_rhs.ravel(), rcond=None)

    c_coef = np.empty((n_ch, nb))
    for c in range(n_ch):
        c_coef[c] = solve_triangular(r11[c], rhs1[c] - r12[c] @ d)

    phi = _expand_real_coeffs(pole_set, c_coef * col_scale[None, :])
    psi = _expand_real_coeffs(pole_set, d * col_scale)[0]
    return BarycentricIterate(poles=pole_set, phi=phi, psi=psi)


def _symmetrize(z):
    """Re-impose exact conjugate symmetry on eigenvalues of a real map."""
    scale = 1.0 + np.abs(z)
    real_mask = np.abs(z.imag) < 1e-9 * scale
    reals = z[real_mask].real.astype(complex)
    rest = z[~real_mask]
    pos = np.sort_complex(rest[rest.imag > 0])
    neg = np.sort_complex(np.conj(rest[rest.imag < 0]))
    if pos.size == neg.size:
        reps = 0.5 * (pos + neg)
    else:
        # Unbalanced split (borderline-real eigenvalue); fall back to
        # treating the surplus as real.
        n = min(pos.size, neg.size)
        reps = 0.5 * (pos[:n] + neg[:n])
        extra = np.concatenate((pos[n:], neg[n:])).real.astype(complex)
        reals = np.concatenate((reals, extra))
    return np.concatenate((reps, reals))


def _nudge_collisions(reps):
    """Separate representatives closer than the PoleSet validity limit."""
    reps = np.array(reps, dtype=complex)
    order = np.argsort(np.abs(reps))
    for a in range(reps.size):
        i = order[a]
        for b in range(a + 1, reps.size):
            j = order[b]
            lim = 1e-9 * max(max(abs(reps[i]), abs(reps[j])), 1.0)
            while abs(reps[i] - reps[j]) < lim:
                reps[j] += 10.0 * lim * (1.0 + 1.0j if reps[j].imag > 0 else 1.0)
    return reps


def relocate_poles(iterate):
    """New poles = zeros of the barycentric denominator 1 + Σψ/(s−λ).

    Computed as eigenvalues of diag(λ) − 𝟙ψᵀ; any zero in the right
    half-plane is reflected across the imaginary axis, and conjugate
    symmetry is re-imposed exactly.
    """
    lam = iterate.poles.poles
    psi = iterate.psi
    z = np.linalg.eigvals(np.diag(lam) - np.outer(np.ones(lam.size), psi))
    z = np.where(z.real > 0, -z.real + 1j * z.imag, z)
    reps = _nudge_collisions(_symmetrize(z))
    return PoleSet(reps, converged=iterate.poles.converged)


# ---------------------------------------------------------------------------
# band plans and fitting drivers


@dataclass
class BandPlan:
    """Contiguous frequency bands with per-band pole budgets."""

    bands: list  # [(f_lo_hz, f_hi_hz), ...]
    budgets: list  # pole count per band (even: conjugate pairs)
    peaks: list = field(default_factory=list)  # filled during fitting

    def __post_init__(self):
        if len(self.bands) != len(self.budgets):
            raise ValueError("one budget per band required")
        for (lo, hi), nxt in zip(self.bands, self.bands[1:]):
            if hi != nxt[0]:
                raise ValueError("bands must be contiguous and non-overlapping")
        for lo, hi in self.bands:
            if hi <= lo:
                raise ValueError("empty band")
        if any(b < 2 for b in self.budgets):
            raise ValueError("pole budgets must be >= 2")

    @property
    def total_budget(self):
        return int(sum(self.budgets))


_FLEXURAL_BANDS = [
    (10.0, 1000.0),
    (1000.0, 5000.0),
    (5000.0, 10000.0),
    (10000.0, 20000.0),
    (20000.0, 30000.0),
    (30000.0, 40000.0),
    (40000.0, 50000.0),
]
_FLEXURAL_BUDGETS = [28, 40, 32, 44, 38, 30, 26]


def default_band_plan(excitation_mode, f_lo_hz=10.0, f_hi_hz=50000.0):
    """Default partitioning: seven bands for flexural data, one band
    (budget 48) for longitudinal."""
    if excitation_mode == "flexural":
        bands = [(max(lo, f_lo_hz), min(hi, f_hi_hz)) for lo, hi in _FLEXURAL_BANDS]
        return BandPlan(bands=bands, budgets=list(_FLEXURAL_BUDGETS))
    return BandPlan(bands=[(f_lo_hz, f_hi_hz)], budgets=[48])


def _pad_poles(reps, budget, f_lo, f_hi):
    """Pad pair representatives with log-spaced starting pairs until the
    total pole count reaches ``budget``."""
    reps = list(reps)
    count = sum(2 if r.imag > 0 else 1 for r in reps)
    n_pad = max(0, (budget - count) // 2)
    if n_pad == 0:
        return np.asarray(reps, dtype=complex)
    beta = 2.0 * np.pi * np.geomspace(f_lo, f_hi, n_pad + 2)[1:-1]
    for b in beta:
        cand = -b / 100.0 + 1j * b
        while any(abs(cand - r) < 1e-6 * abs(cand) for r in reps):
            cand *= 1.0 + 1e-4
        reps.append(cand)
    return np.asarray(reps, dtype=complex)


def _pole_movement(old, new):
    """Max over new representatives of the distance to the nearest old
    one, relative to the pole magnitude."""
    d = np.abs(new[:, None] - old[None, :])
    return float(np.max(d.min(axis=1) / np.maximum(np.abs(new), 1.0)))


def _band_dataset(frf, band):
    mask = frf.band_slice(*band)
    if not np.any(mask):
        raise ValueError(f"band {band} contains no grid points")
    return FrfDataset(
        freq_grid=frf.freq_grid[mask],
        locations=frf.locations,
        values=frf.values[:, mask],
        excitation_mode=frf.excitation_mode,
        metadata=dict(frf.metadata),
    )


def fit_band(frf, band, pole_budget, prominence_db=3.0):
    """Converged poles for one frequency band.

    Detects peaks on the first channel, seeds one conjugate pair per
    peak, pads to ``pole_budget`` with log-spaced pairs, and iterates
    the linearized LS / pole-relocation cycle until the largest relative
    pole movement drops below 1e-6 (at most 30 iterations).
    """
    sub = _band_dataset(frf, band)
    peaks = detect_peaks(sub, 0, prominence_db=prominence_db)
    if peaks:
        reps = init_poles(peaks).representatives
    else:
        reps = np.empty(0, dtype=complex)
    reps = _pad_poles(reps, pole_budget, band[0], band[1])
    pole_set = PoleSet(reps)
    weights = inverse_magnitude_weights(sub.values)

    for _ in range(_MAX_ITER):
        it = vf_iterate(sub, pole_set, weights, band=band)
        new_set = relocate_poles(it)
        move = _pole_movement(pole_set.representatives, new_set.representatives)
        pole_set = new_set
        if move < _POLE_MOVE_TOL:
            return PoleSet(pole_set.representatives, converged=True)
    warnings.warn(
        f"band {band}: pole iteration did not converge in {_MAX_ITER} steps "
        f"(last movement {move:.2e})"
    )
    return PoleSet(pole_set.representatives, converged=False)


def _merge_band_poles(band_results, bands):
    """Keep each band's in-band poles, then deduplicate globally."""
    kept = []
    f_grid_lo = bands[0][0]
    f_grid_hi = bands[-1][1]
    for (f_lo, f_hi), ps in zip(bands, band_results):
        lo = 0.0 if f_lo == f_grid_lo else 2.0 * np.pi * f_lo
        hi = np.inf if f_hi == f_grid_hi else 2.0 * np.pi * f_hi
        for r in ps.representatives:
            if lo <= r.imag < hi or (r.imag == 0.0 and f_lo == f_grid_lo):
                kept.append(r)
    kept.sort(key=lambda z: (z.imag, z.real))
    merged = []
    for r in kept:
        if merged and abs(r - merged[-1]) < _DEDUP_REL * max(abs(r), 1.0):
            continue
        merged.append(r)
    return np.asarray(merged, dtype=complex)


def _solve_residues(frf, pole_set, weights=None):
    """Per-channel LS for residues with the denominator frozen at 1
    (psi = 0).

    Unweighted by default: with the poles fixed this directly minimizes
    the (absolute) L2 misfit the quality metric reports.  The inverse-
    magnitude weighting is only needed while the poles move.
    """
    phi_mat = _basis_matrix(frf.freq_grid, pole_set)
    col_scale = 1.0 / np.maximum(np.abs(pole_set.poles), 1.0)
    phi_s = phi_mat * col_scale[None, :]
    H = frf.values
    coeffs = np.empty((H.shape[0], pole_set.degree))
    for c in range(H.shape[0]):
        w = 1.0 if weights is None else weights[c][:, None]
        a = _stack_real(w * phi_s)
        b = _stack_real((w * H[c][:, None]) if weights is not None else H[c][:, None])[:, 0]
        coeffs[c], *_ = np.linalg.lstsq(a, b, rcond=None)
    return _expand_real_coeffs(pole_set, coeffs * col_scale[None, :])


def _realize(pole_set, residues):
    """Real block-diagonal state-space (A, B, C) equivalent to the
    pole/residue expansion."""
    r = pole_set.degree
    np_ = pole_set.n_pairs
    A = np.zeros((r, r))
    B = np.zeros((r, 1))
    C = np.empty((residues.shape[0], r))
    for p in range(np_):
        lam = pole_set.representatives[p]
        i = 2 * p
        A[i, i] = A[i + 1, i + 1] = lam.real
        A[i, i + 1] = lam.imag
        A[i + 1, i] = -lam.imag
        B[i, 0] = 2.0
        C[:, i] = residues[:, i].real
        C[:, i + 1] = residues[:, i].imag
    for q in range(pole_set.n_real):
        i = 2 * np_ + q
        A[i, i] = pole_set.representatives[np_ + q].real
        B[i, 0] = 1.0
        C[:, i] = residues[:, i].real
    return A, B, C


@dataclass
class RationalModel:
    """Fitted SIMO rational model: poles, residues, and an equivalent
    real state-space realization H̃(s) = C(sI−A)⁻¹B."""

    pole_set: PoleSet
    residues: np.ndarray  # (n_outputs, degree) complex, aligned with poles
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.residues = np.atleast_2d(np.asarray(self.residues, dtype=complex))
        if self.residues.shape[1] != self.pole_set.degree:
            raise ValueError("residues do not match pole count")

    @property
    def poles(self):
        return self.pole_set.poles

    @property
    def degree(self):
        return self.pole_set.degree

    @property
    def n_outputs(self):
        return self.residues.shape[0]

    @classmethod
    def from_pole_residues(cls, pole_set, residues, metadata=None):
        A, B, C = _realize(pole_set, np.atleast_2d(residues))
        return cls(pole_set, residues, A, B, C, metadata=metadata or {})

    def eval(self, freq_grid):
        """H̃(iω) on an angular-frequency grid, shape (n_outputs, nf)."""
        return rational_eval(self.poles, self.residues, np.asarray(freq_grid))

    def eval_state_space(self, freq_grid):
        """Direct C(iωI−A)⁻¹B evaluation (realization cross-check)."""
        omega = np.atleast_1d(np.asarray(freq_grid, dtype=float))
        out = np.empty((self.C.shape[0], omega.size), dtype=complex)
        eye = np.eye(self.A.shape[0])
        for i, w in enumerate(omega):
            out[:, i] = self.C @ np.linalg.solve(1j * w * eye - self.A, self.B)[:, 0]
        return out

    # -- serialization (hex floats: bit-exact round trip) --

    def to_json_dict(self):
        def enc(a):
            return [x.hex() for x in np.asarray(a, dtype=float).ravel()]

        return {
            "format": "rational-model",
            "degree": self.degree,
            "n_outputs": self.n_outputs,
            "metadata": self.metadata,
            "pole_reps_re": enc(self.pole_set.representatives.real),
            "pole_reps_im": enc(self.pole_set.representatives.imag),
            "residues_re": enc(self.residues.real),
            "residues_im": enc(self.residues.imag),
            "A": enc(self.A),
            "B": enc(self.B),
            "C": enc(self.C),
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, sort_keys=True)

    @classmethod
    def from_json_dict(cls, d):
        if d.get("format") != "rational-model":
            raise ValueError("not a rational-model JSON document")

        def dec(key, shape):
            return np.array([float.fromhex(x) for x in d[key]]).reshape(shape)

        r = d["degree"]
        n_out = d["n_outputs"]
        n_rep = len(d["pole_reps_re"])
        reps = dec("pole_reps_re", n_rep) + 1j * dec("pole_reps_im", n_rep)
        pole_set = PoleSet(reps)
        residues = dec("residues_re", (n_out, r)) + 1j * dec("residues_im", (n_out, r))
        return cls(
            pole_set=pole_set,
            residues=residues,
            A=dec("A", (r, r)),
            B=dec("B", (r, 1)),
            C=dec("C", (n_out, r)),
            metadata=d.get("metadata", {}),
        )

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


def rel_l2_error(frf, model):
    """(1/N)·sqrt(Σ‖H−H̃‖_F² / Σ‖H‖_F²) over the N grid frequencies."""
    h_fit = model.eval(frf.freq_grid)
    num = np.sum(np.abs(frf.values - h_fit) ** 2)
    den = np.sum(np.abs(frf.values) ** 2)
    return float(np.sqrt(num / den) / frf.freq_grid.size)


def fit_full(frf, plan=None, prominence_db=3.0):
    """Band-partitioned vector fit of a whole FRF dataset.

    Fits each band of ``plan`` independently, merges the in-band poles
    (deduplicating at 1e-4 relative distance), then re-runs the
    iteration over the entire grid with inverse-magnitude weighting.
    Final residues are solved with the denominator frozen at 1.  If the
    converged poles fit worse than the first full-grid iteration, the
    first iteration's poles are kept (non-deterioration guarantee).
    """
    if plan is None:
        f = frf.freq_hz
        plan = default_band_plan(frf.excitation_mode, f[0], f[-1])

    band_results = []
    band_meta = []
    for band, budget in zip(plan.bands, plan.budgets):
        peaks = detect_peaks(_band_dataset(frf, band), 0, prominence_db=prominence_db)
        plan.peaks.append(peaks)
        ps = fit_band(frf, band, budget, prominence_db=prominence_db)
        band_results.append(ps)
        band_meta.append({
            "band_hz": list(band),
            "budget": budget,
            "n_peaks": len(peaks),
            "converged": ps.converged,
        })

    merged = _merge_band_poles(band_results, plan.bands)
    pole_set = PoleSet(merged)
    weights = inverse_magnitude_weights(frf.values)

    best = None  # (error, pole_set, residues)
    n_iter = 0
    converged = False
    for n_iter in range(1, _MAX_ITER + 1):
        it = vf_iterate(frf, pole_set, weights)
        new_set = relocate_poles(it)
        move = _pole_movement(pole_set.representatives, new_set.representatives)
        pole_set = new_set
        if n_iter == 1:
            res1 = _solve_residues(frf, pole_set)
            m1 = RationalModel.from_pole_residues(pole_set, res1)
            best = (rel_l2_error(frf, m1), pole_set, res1)
        if move < _POLE_MOVE_TOL:
            converged = True
            break
    if not converged:
        warnings.warn(f"full-grid iteration did not converge in {_MAX_ITER} steps")

    residues = _solve_residues(frf, pole_set)
    model = RationalModel.from_pole_residues(pole_set, residues)
    err = rel_l2_error(frf, model)
    if best is not None and best[0] < err:
        err, pole_set, residues = best

    if pole_set.max_real_part() >= 0:
        bad = [complex(z) for z in pole_set.representatives if z.real >= 0]
        raise UnstableModelError("fit produced unstable poles", poles=bad)

    per_band_err = []
    for band in plan.bands:
        sub = _band_dataset(frf, band)
        m_eval = rational_eval(pole_set.poles, residues, sub.freq_grid)
        num = np.sum(np.abs(sub.values - m_eval) ** 2)
        den = np.sum(np.abs(sub.values) ** 2)
        per_band_err.append(float(np.sqrt(num / den) / sub.freq_grid.size))

    metadata = {
        "excitation_mode": frf.excitation_mode,
        "bands": band_meta,
        "iterations": n_iter,
        "converged": converged,
        "rel_l2_error": err,
        "per_band_rel_l2_error": per_band_err,
        "degree": pole_set.degree,
        "locations_m": frf.locations.tolist(),
    }
    return RationalModel.from_pole_residues(pole_set, residues, metadata=metadata)
