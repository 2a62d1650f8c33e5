"""Shared fixtures: small waveguide specs and helper builders.

Heavy end-to-end fixtures (reference dataset fits, transient sweeps)
live in test_acceptance.py so that unit-test files stay fast.
"""

import numpy as np
import pytest

from dispersim.waveguide import (
    IN,
    CrossSection,
    Material,
    WaveguideSpec,
    aluminum,
    reference_spec,
)


@pytest.fixture(scope="session")
def alu():
    return aluminum(eta=0.01)


@pytest.fixture(scope="session")
def alu_undamped():
    return aluminum(eta=0.0)


@pytest.fixture(scope="session")
def ref_spec():
    """Reference 48-in damped free-free beam, flexural excitation."""
    return reference_spec()


@pytest.fixture(scope="session")
def ref_spec_long():
    return reference_spec(excitation_mode="longitudinal")


@pytest.fixture
def small_spec():
    """Short beam with few sensors: cheap to synthesize."""
    mat = aluminum(eta=0.01)
    sec = CrossSection.rectangular(1.0 * IN, 0.125 * IN, mat)
    return WaveguideSpec(
        material=mat,
        section=sec,
        length=20.0 * IN,
        actuator_edges=(5.0 * IN, 5.5 * IN),
        sensor_positions=tuple((5.5 + i) * IN for i in range(4)),
        excitation_mode="longitudinal",
    )


def make_material(eta=0.0):
    return Material(rho=2700.0, E=69e9, G=26e9, eta=eta)
