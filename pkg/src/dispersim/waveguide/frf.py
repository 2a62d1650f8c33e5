"""Exact FRF synthesis: mesh, assembly, boundary conditions, loads.

Element nodes are placed at every actuator edge and sensor position, so
responses are direct DOF reads (spectral elements are exact, the mesh is
a matter of bookkeeping only).  The actuator is modeled as a pin-force
pair: opposite axial forces (longitudinal excitation) or opposite moments
F*h/2 (flexural excitation) at the two actuator-edge nodes, unit F.
"""

import numpy as np

from ..errors import DispersimError
from ._sem_kernels import sem_solve, sem_solve_numpy
from .dataset import FrfDataset
from .wavenumber import (
    flexural_scaling,
    flexural_wavenumber_roots,
    longitudinal_wavenumber,
)

_MERGE_TOL = 1e-9  # meters; coincident mesh nodes


def build_mesh(spec):
    """Node coordinates plus actuator/sensor node indices."""
    raw = np.concatenate((
        [0.0, spec.length],
        list(spec.actuator_edges),
        list(spec.sensor_positions),
    ))
    raw.sort()
    nodes = [raw[0]]
    for x in raw[1:]:
        if x - nodes[-1] > _MERGE_TOL:
            nodes.append(x)
    nodes = np.asarray(nodes)

    def node_of(x):
        i = int(np.argmin(np.abs(nodes - x)))
        if abs(nodes[i] - x) > _MERGE_TOL:
            raise DispersimError(f"no mesh node at {x}")
        return i

    act = tuple(node_of(a) for a in spec.actuator_edges)
    sens = np.array([node_of(s) for s in spec.sensor_positions], dtype=int)
    return nodes, act, sens


def _mode_tables(spec, omega):
    """Signed wavenumbers and scalings (nf, 6) for the element basis."""
    m, s = spec.material, spec.section
    kl = longitudinal_wavenumber(m, omega)
    kp, ke = flexural_wavenumber_roots(m, s, omega)
    kmodes = np.stack([kl, -kl, kp, -kp, ke, -ke], axis=1)
    rmodes = np.zeros_like(kmodes)
    for col in (2, 3, 4, 5):
        rmodes[:, col] = flexural_scaling(m, s, omega, kmodes[:, col])
    return kmodes, rmodes


def _constrained_dofs(spec, n_nodes):
    """Indices eliminated by the boundary conditions (u, w, phi per node)."""
    fixed = []
    for node, bc in ((0, spec.bc_left), (n_nodes - 1, spec.bc_right)):
        base = 3 * node
        if bc == "clamped":
            fixed += [base, base + 1, base + 2]
        elif bc == "pinned":
            fixed += [base, base + 1]
    return fixed


def synthesize_frfs(spec, freq_grid):
    """Receptance FRFs of the beam at every sensor position.

    ``freq_grid``: strictly increasing angular frequencies [rad/s], zero
    excluded.  Returns an :class:`FrfDataset` with w-displacement rows for
    flexural excitation and u-displacement rows for longitudinal.

    With an undamped material an exact resonance hit makes the global
    matrix singular; such grid points are dropped from the dataset and
    recorded under ``metadata["flagged_freqs_hz"]``.
    """
    omega = np.asarray(freq_grid, dtype=float)
    if omega.ndim != 1 or omega.size == 0 or omega[0] <= 0:
        raise ValueError("freq_grid must be 1-D, nonempty, all > 0")
    if np.any(np.diff(omega) <= 0):
        raise ValueError("freq_grid must be strictly increasing")

    nodes, act, sens = build_mesh(spec)
    nd = 3 * nodes.size
    fixed = _constrained_dofs(spec, nodes.size)
    keep = np.array([i for i in range(nd) if i not in fixed], dtype=int)
    red_of = -np.ones(nd, dtype=int)
    red_of[keep] = np.arange(keep.size)

    force = np.zeros(nd, dtype=complex)
    if spec.excitation_mode == "longitudinal":
        force[3 * act[0]] = -1.0
        force[3 * act[1]] = 1.0
        dof_offset = 0  # read u
    else:
        m_amp = spec.section.height / 2.0
        force[3 * act[0] + 2] = -m_amp
        force[3 * act[1] + 2] = m_amp
        dof_offset = 1  # read w
    out_red = red_of[3 * sens + dof_offset]
    if np.any(out_red < 0) or np.any(red_of[np.nonzero(force)[0]] < 0):
        raise DispersimError("sensor or actuator DOF eliminated by boundary conditions")
    force_red = force[keep]

    m, s = spec.material, spec.section
    EA = m.E_complex * s.area
    EI = m.E_complex * s.second_moment
    GAK = m.G_complex * s.area * s.kbar

    kmodes, rmodes = _mode_tables(spec, omega)

    flagged = []
    if m.eta == 0.0:
        # Undamped synthesis can hit exact resonances; go frequency by
        # frequency so singular points can be flagged and dropped.
        cols = []
        kept = []
        for i in range(omega.size):
            try:
                h = sem_solve_numpy(
                    kmodes[i:i + 1], rmodes[i:i + 1], nodes, EA, GAK, EI,
                    keep, force_red, out_red,
                )
            except np.linalg.LinAlgError:
                flagged.append(omega[i] / (2 * np.pi))
                continue
            if not np.all(np.isfinite(h)):
                flagged.append(omega[i] / (2 * np.pi))
                continue
            cols.append(h[:, 0])
            kept.append(i)
        values = np.array(cols).T if cols else np.zeros((sens.size, 0), dtype=complex)
        omega_out = omega[kept]
    else:
        values = sem_solve(kmodes, rmodes, nodes, EA, GAK, EI, keep, force_red, out_red)
        omega_out = omega

    metadata = {
        "bc_left": spec.bc_left,
        "bc_right": spec.bc_right,
        "eta": m.eta,
        "resolution_hz": float(np.median(np.diff(omega)) / (2 * np.pi)) if omega.size > 1 else 0.0,
        "driving_point_m": spec.sensor_positions[0],
    }
    if flagged:
        metadata["flagged_freqs_hz"] = flagged
    return FrfDataset(
        freq_grid=omega_out,
        locations=np.asarray(spec.sensor_positions),
        values=values,
        excitation_mode=spec.excitation_mode,
        metadata=metadata,
    )
