"""Wavenumbers and analytic dispersion curves of the rod/Timoshenko beam.

Three wave modes on a symmetric 1-D waveguide: the first symmetric
(longitudinal) mode, the first anti-symmetric (flexural, propagating)
mode and the second anti-symmetric mode, which is evanescent below the
cut-off frequency sqrt(G A kbar / rho I).

Conventions: spectral components of the form exp(-i (k x - omega t)); the
flexural wavenumbers are principal square roots of the two roots of the
quadratic (in k^2) characteristic equation, so the evanescent branch has
Im(k) > 0 for omega below cut-off.
"""

from dataclasses import dataclass

import numpy as np

from ..curves import DispersionCurve
from ..errors import NoPropagationError

WAVE_MODES = ("longitudinal", "flexural", "flexural_evanescent")


def longitudinal_wavenumber(material, omega):
    """k = omega * sqrt(rho / E*) with the complex modulus."""
    return np.asarray(omega) * np.sqrt(material.rho / material.E_complex)


def flexural_wavenumber_roots(material, section, omega):
    """Both flexural k^2 roots as wavenumbers (propagating, evanescent).

    Vectorized over ``omega``.  Roots of
    k^4 - omega^2 rho (1/E + 1/(G kbar)) k^2
        + rho^2 omega^4 / (E G kbar) - rho A omega^2 / (E I) = 0
    with complex moduli when the material is damped.
    """
    omega = np.asarray(omega, dtype=float)
    Ec = material.E_complex
    Gk = material.G_complex * section.kbar
    rho = material.rho
    A = section.area
    I = section.second_moment
    b = omega**2 * rho * (1.0 / Ec + 1.0 / Gk)
    c = rho**2 * omega**4 / (Ec * Gk) - rho * A * omega**2 / (Ec * I)
    disc = np.sqrt(b * b - 4.0 * c + 0j)
    k2_prop = (b + disc) / 2.0
    k2_evan = (b - disc) / 2.0
    return np.sqrt(k2_prop), np.sqrt(k2_evan)


def flexural_scaling(material, section, omega, k):
    """Rotation/deflection amplitude ratio r3 for a flexural wavenumber,
    from the second row of the 2x2 characteristic system."""
    g = material.G_complex * section.area * section.kbar
    Ec = material.E_complex
    denom = Ec * section.second_moment * k**2 - material.rho * section.second_moment * np.asarray(omega)**2 + g
    return -1j * g * k / denom


@dataclass(frozen=True)
class WavenumberSet:
    """All wavenumbers (and flexural scaling constants) at one frequency."""

    omega: float
    k_long: complex
    k_flex_prop: complex
    k_flex_evan: complex
    scaling: tuple  # (r3 propagating, r3 evanescent)


def solve_wavenumbers(spec, omega):
    """Characteristic-equation wavenumbers for a single omega > 0."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    m, s = spec.material, spec.section
    kl = complex(longitudinal_wavenumber(m, omega))
    kp, ke = flexural_wavenumber_roots(m, s, omega)
    rp = complex(flexural_scaling(m, s, omega, kp))
    re = complex(flexural_scaling(m, s, omega, ke))
    return WavenumberSet(
        omega=float(omega),
        k_long=kl,
        k_flex_prop=complex(kp),
        k_flex_evan=complex(ke),
        scaling=(rp, re),
    )


def characteristic_residual(spec, omega, k):
    """|det| of the 2x2 flexural characteristic system at (omega, k),
    normalized by the Frobenius scale of the matrix."""
    m, s = spec.material, spec.section
    g = m.G_complex * s.area * s.kbar
    a11 = g * k**2 - m.rho * s.area * omega**2
    a12 = -1j * g * k
    a21 = 1j * g * k
    a22 = m.E_complex * s.second_moment * k**2 - m.rho * s.second_moment * omega**2 + g
    det = a11 * a22 - a12 * a21
    scale = abs(a11) ** 2 + 2 * abs(a12) ** 2 + abs(a22) ** 2
    return abs(det) / scale


def analytic_group_velocity(spec, mode, omega_grid):
    """Ground-truth dispersion curve V_G = d omega / d k for a propagating
    mode, from the undamped (eta = 0) real wavenumber via central finite
    differences."""
    omega = np.asarray(omega_grid, dtype=float)
    if omega.ndim != 1 or omega.size < 3:
        raise ValueError("omega_grid must be a 1-D grid with at least 3 points")
    if np.any(np.diff(omega) <= 0) or omega[0] <= 0:
        raise ValueError("omega_grid must be strictly increasing and positive")
    if mode not in WAVE_MODES:
        raise ValueError(f"mode must be one of {WAVE_MODES}")

    mat0 = spec.material.with_eta(0.0)
    sec = spec.section
    if mode == "longitudinal":
        k = np.real(np.asarray(longitudinal_wavenumber(mat0, omega)))
        valid = np.ones(omega.shape, dtype=bool)
    else:
        kp, ke = flexural_wavenumber_roots(mat0, sec, omega)
        if mode == "flexural":
            k = np.real(kp)
            valid = np.ones(omega.shape, dtype=bool)
        else:
            # propagating only above cut-off
            valid = omega > spec.cutoff_frequency
            if not np.any(valid):
                raise NoPropagationError(
                    "second anti-symmetric mode is evanescent over the whole grid"
                )
            k = np.real(ke)

    omega_v = omega[valid]
    k_v = k[valid]
    vg = np.gradient(omega_v) / np.gradient(k_v)
    return DispersionCurve(
        freq_hz=omega_v / (2.0 * np.pi),
        k=k_v,
        v_group=vg,
        spread=np.zeros(omega_v.shape),
        n_pairs=np.zeros(omega_v.shape, dtype=int),
        metadata={"source": "analytic", "mode": mode},
    )
