"""Two-node spectral element: shape-function and force matrices.

Six wave modes per element (longitudinal +/-, flexural propagating +/-,
flexural evanescent +/-).  Each mode column is referenced to the element
node where its exponential is largest, which keeps the shape-function
matrix well conditioned even for strongly evanescent modes; the dynamic
stiffness is invariant under this per-column scaling.

DOF order per node: (u, w, phi); element vector
[u1, w1, phi1, u2, w2, phi2].
"""

import numpy as np

from ..errors import IllConditionedElementError
from .wavenumber import (
    flexural_scaling,
    flexural_wavenumber_roots,
    longitudinal_wavenumber,
)

COND_LIMIT = 1e14


def element_wavemodes(spec, omega):
    """Signed wavenumbers (6,) and rotation scalings (6,) of the element
    mode basis, ordered [+kl, -kl, +kp, -kp, +ke, -ke]."""
    m, s = spec.material, spec.section
    kl = complex(longitudinal_wavenumber(m, omega))
    kp, ke = flexural_wavenumber_roots(m, s, omega)
    kp, ke = complex(kp), complex(ke)
    k = np.array([kl, -kl, kp, -kp, ke, -ke], dtype=complex)
    r = np.zeros(6, dtype=complex)
    for idx in (2, 3, 4, 5):
        r[idx] = flexural_scaling(m, s, omega, k[idx])
    return k, r


def element_matrices(spec, omega, node_coords):
    """Shape-function matrix Psi and force matrix B for one element.

    Rows of Psi: (u, w, phi) at node 1 then node 2; columns are the six
    wave modes.  Rows of B: external nodal loads, i.e. minus the internal
    (axial force, shear, moment) at node 1 and plus at node 2.  The
    element dynamic stiffness is B @ inv(Psi).
    """
    x1, x2 = node_coords
    if not x1 < x2:
        raise ValueError("node_coords must be increasing")
    if omega <= 0:
        raise ValueError("omega must be positive")
    L = x2 - x1
    k, r = element_wavemodes(spec, omega)

    m, s = spec.material, spec.section
    EA = m.E_complex * s.area
    EI = m.E_complex * s.second_moment
    GAK = m.G_complex * s.area * s.kbar

    # Per-mode reference node: growing modes (Im k > 0) anchored at x2.
    xref = np.where(np.imag(k) > 0, L, 0.0)
    z1 = np.exp(-1j * k * (0.0 - xref))
    z2 = np.exp(-1j * k * (L - xref))

    psi = np.zeros((6, 6), dtype=complex)
    bmat = np.zeros((6, 6), dtype=complex)
    for j, z in ((0, z1), (3, z2)):
        # displacement rows
        psi[j, 0:2] = z[0:2]
        psi[j + 1, 2:6] = z[2:6]
        psi[j + 2, 2:6] = r[2:6] * z[2:6]
        # internal resultants: N = EA u', Q = GAK (w' - phi), M = EI phi'
        sign = -1.0 if j == 0 else 1.0
        bmat[j, 0:2] = sign * EA * (-1j * k[0:2]) * z[0:2]
        bmat[j + 1, 2:6] = sign * GAK * (-1j * k[2:6] - r[2:6]) * z[2:6]
        bmat[j + 2, 2:6] = sign * EI * r[2:6] * (-1j * k[2:6]) * z[2:6]

    cond = np.linalg.cond(psi)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise IllConditionedElementError(
            f"shape-function matrix condition {cond:.3e} at omega={omega:.6g}, "
            f"element length {L:.6g} m"
        )
    return psi, bmat


def element_stiffness(spec, omega, node_coords):
    """6x6 element dynamic stiffness K_e = B Psi^{-1} (symmetric)."""
    psi, bmat = element_matrices(spec, omega, node_coords)
    return np.linalg.solve(psi.T, bmat.T).T
