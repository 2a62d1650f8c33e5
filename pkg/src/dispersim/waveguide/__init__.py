"""Spectral element model of the beam under test (FRFs + analytic curves)."""

from .geometry import (
    IN,
    CrossSection,
    Material,
    WaveguideSpec,
    aluminum,
    compute_kbar,
    rayleigh_speed,
    reference_spec,
)
from .wavenumber import (
    WavenumberSet,
    analytic_group_velocity,
    characteristic_residual,
    solve_wavenumbers,
)
from .elements import element_matrices, element_stiffness
from .dataset import FrfDataset
from .frf import synthesize_frfs

__all__ = [
    "IN",
    "CrossSection",
    "Material",
    "WaveguideSpec",
    "WavenumberSet",
    "FrfDataset",
    "aluminum",
    "analytic_group_velocity",
    "characteristic_residual",
    "compute_kbar",
    "element_matrices",
    "element_stiffness",
    "rayleigh_speed",
    "reference_spec",
    "solve_wavenumbers",
    "synthesize_frfs",
]
