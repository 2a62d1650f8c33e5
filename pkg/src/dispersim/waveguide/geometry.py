"""Beam-under-test description: material, cross section, layout.

Internally everything is SI.  Inch-denominated helpers exist because test
articles in this domain are usually specified in inches.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidMaterialError

IN = 0.0254
"""Meters per inch."""

BOUNDARY_CONDITIONS = ("free", "clamped", "pinned")
EXCITATION_MODES = ("flexural", "longitudinal")


@dataclass(frozen=True)
class Material:
    """Isotropic material with hysteretic (structural) damping.

    Attributes
    ----------
    rho : float
        Mass density [kg/m^3].
    E : float
        Elastic modulus [Pa].
    G : float
        Rigidity (shear) modulus [Pa].
    eta : float
        Hysteretic loss factor; enters as a complex modulus E(1 + i eta).
    """

    rho: float
    E: float
    G: float
    eta: float = 0.0

    def __post_init__(self):
        if self.rho <= 0:
            raise InvalidMaterialError(f"density must be positive, got {self.rho}")
        if self.E <= 0 or self.G <= 0:
            raise InvalidMaterialError("moduli must be positive")
        if not 0 <= self.eta < 0.1:
            raise InvalidMaterialError(f"loss factor must be in [0, 0.1), got {self.eta}")
        nu = self.poisson
        if not 0 < nu < 0.5:
            raise InvalidMaterialError(f"Poisson ratio {nu:.4f} outside (0, 0.5)")

    @property
    def poisson(self):
        return self.E / (2.0 * self.G) - 1.0

    @property
    def E_complex(self):
        return self.E * (1.0 + 1j * self.eta)

    @property
    def G_complex(self):
        return self.G * (1.0 + 1j * self.eta)

    @property
    def shear_speed(self):
        """sqrt(G/rho), undamped [m/s]."""
        return float(np.sqrt(self.G / self.rho))

    @property
    def rod_speed(self):
        """sqrt(E/rho), undamped [m/s]."""
        return float(np.sqrt(self.E / self.rho))

    def with_eta(self, eta):
        return Material(rho=self.rho, E=self.E, G=self.G, eta=eta)


def rayleigh_speed(material):
    """Rayleigh surface-wave speed via the Viktorov rational approximation.

    c_R = c_s (0.862 + 1.14 nu) / (1 + nu); error below 0.5% of the exact
    secular-equation root across the valid Poisson range.
    """
    nu = material.poisson
    return material.shear_speed * (0.862 + 1.14 * nu) / (1.0 + nu)


def compute_kbar(material):
    """Shear correction factor matching the high-frequency flexural wave
    speed to the Rayleigh speed: kbar = (c_R / c_s)^2."""
    cr = rayleigh_speed(material)
    return (cr / material.shear_speed) ** 2


@dataclass(frozen=True)
class CrossSection:
    """Rectangular cross section.

    width/height in meters; ``kbar`` is the Timoshenko shear correction
    factor (use :func:`compute_kbar` unless overriding deliberately).
    """

    width: float
    height: float
    kbar: float

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("cross-section dimensions must be positive")
        if not 0 < self.kbar <= 1:
            raise ValueError(f"kbar must be in (0, 1], got {self.kbar}")

    @property
    def area(self):
        return self.width * self.height

    @property
    def second_moment(self):
        return self.width * self.height**3 / 12.0

    @classmethod
    def rectangular(cls, width, height, material):
        return cls(width=width, height=height, kbar=compute_kbar(material))


@dataclass(frozen=True)
class WaveguideSpec:
    """Beam geometry, boundary conditions and actuator/sensor layout."""

    material: Material
    section: CrossSection
    length: float
    bc_left: str = "free"
    bc_right: str = "free"
    actuator_edges: tuple = (0.0, 0.0)
    sensor_positions: tuple = field(default_factory=tuple)
    excitation_mode: str = "flexural"

    def __post_init__(self):
        if self.bc_left not in BOUNDARY_CONDITIONS or self.bc_right not in BOUNDARY_CONDITIONS:
            raise ValueError(f"boundary conditions must be one of {BOUNDARY_CONDITIONS}")
        if self.excitation_mode not in EXCITATION_MODES:
            raise ValueError(f"excitation_mode must be one of {EXCITATION_MODES}")
        a1, a2 = self.actuator_edges
        if not 0 < a1 < a2 < self.length:
            raise ValueError("actuator edges must satisfy 0 < a1 < a2 < length")
        pos = np.asarray(self.sensor_positions, dtype=float)
        if pos.size == 0:
            raise ValueError("at least one sensor position is required")
        if np.any(np.diff(pos) <= 0):
            raise ValueError("sensor positions must be strictly increasing")
        # The driving point may coincide with the actuator's right edge.
        if pos[0] < a2 or pos[-1] > self.length:
            raise ValueError("sensors must lie between the actuator and the beam end")
        object.__setattr__(self, "sensor_positions", tuple(float(x) for x in pos))
        object.__setattr__(self, "actuator_edges", (float(a1), float(a2)))

    @property
    def cutoff_frequency(self):
        """Angular cut-off frequency of the second anti-symmetric mode:
        sqrt(G A kbar / (rho I)), undamped [rad/s]."""
        m, s = self.material, self.section
        return float(np.sqrt(m.G * s.area * s.kbar / (m.rho * s.second_moment)))

    def replace(self, **kwargs):
        from dataclasses import replace

        return replace(self, **kwargs)


def aluminum(eta=0.0):
    """E = 69 GPa, G = 26 GPa, rho = 2700 kg/m^3."""
    return Material(rho=2700.0, E=69e9, G=26e9, eta=eta)


def reference_spec(bc_left="free", bc_right="free", excitation_mode="flexural",
                   eta=0.01, n_sensors=23, actuator_length_in=0.5):
    """48-in aluminum beam, 1 x 1/8 in^2 section, actuator 18.5 in from the
    left end, sensors at 1-in increments starting at the actuator's right
    edge (the driving point)."""
    mat = aluminum(eta=eta)
    sec = CrossSection.rectangular(width=1.0 * IN, height=0.125 * IN, material=mat)
    a1 = 18.5 * IN
    a2 = a1 + actuator_length_in * IN
    sensors = tuple(a2 + i * IN for i in range(n_sensors))
    return WaveguideSpec(
        material=mat,
        section=sec,
        length=48.0 * IN,
        bc_left=bc_left,
        bc_right=bc_right,
        actuator_edges=(a1, a2),
        sensor_positions=sensors,
        excitation_mode=excitation_mode,
    )
