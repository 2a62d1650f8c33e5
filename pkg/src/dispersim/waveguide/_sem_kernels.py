"""Hot loops of the FRF synthesis: per-frequency assembly and solve.

Two interchangeable implementations (see :mod:`dispersim.backend`):
``sem_solve_numba`` is an ``@njit`` loop over frequencies,
``sem_solve_numpy`` a chunked, batch-LAPACK vectorization.  Both take the
same pre-tabulated per-frequency wavenumbers/scalings and return the
receptance matrix (n_out, n_freq).
"""

import numpy as np

from ..backend import use_numba


def _assemble_chunk(kc, rc, node_x, EA, GAK, EI):
    """Element stiffnesses for a chunk of frequencies.

    kc, rc: (nc, 6) signed wavenumbers / scalings.  Returns the global
    stiffness (nc, nd, nd) for the chain mesh ``node_x``.
    """
    nc = kc.shape[0]
    nn = node_x.size
    nd = 3 * nn
    K = np.zeros((nc, nd, nd), dtype=complex)
    for e in range(nn - 1):
        L = node_x[e + 1] - node_x[e]
        xref = np.where(kc.imag > 0, L, 0.0)  # (nc, 6)
        z1 = np.exp(-1j * kc * (0.0 - xref))
        z2 = np.exp(-1j * kc * (L - xref))
        psi = np.zeros((nc, 6, 6), dtype=complex)
        bmat = np.zeros((nc, 6, 6), dtype=complex)
        for j, z in ((0, z1), (3, z2)):
            sign = -1.0 if j == 0 else 1.0
            psi[:, j, 0:2] = z[:, 0:2]
            psi[:, j + 1, 2:6] = z[:, 2:6]
            psi[:, j + 2, 2:6] = rc[:, 2:6] * z[:, 2:6]
            bmat[:, j, 0:2] = sign * EA * (-1j * kc[:, 0:2]) * z[:, 0:2]
            bmat[:, j + 1, 2:6] = sign * GAK * (-1j * kc[:, 2:6] - rc[:, 2:6]) * z[:, 2:6]
            bmat[:, j + 2, 2:6] = sign * EI * rc[:, 2:6] * (-1j * kc[:, 2:6]) * z[:, 2:6]
        ke = np.linalg.solve(np.transpose(psi, (0, 2, 1)), np.transpose(bmat, (0, 2, 1)))
        ke = np.transpose(ke, (0, 2, 1))
        base = 3 * e
        K[:, base:base + 6, base:base + 6] += ke
    return K


def sem_solve_numpy(kmodes, rmodes, node_x, EA, GAK, EI, keep, force_red,
                    out_red, chunk=512):
    nf = kmodes.shape[0]
    n_out = out_red.size
    H = np.empty((n_out, nf), dtype=complex)
    for lo in range(0, nf, chunk):
        hi = min(lo + chunk, nf)
        K = _assemble_chunk(kmodes[lo:hi], rmodes[lo:hi], node_x, EA, GAK, EI)
        Kr = K[:, keep][:, :, keep]
        x = np.linalg.solve(Kr, force_red[:, None])[..., 0]
        H[:, lo:hi] = x[:, out_red].T
    return H


_sem_solve_jit = None


def _get_jit():
    global _sem_solve_jit
    if _sem_solve_jit is None:
        from numba import njit

        @njit(cache=True)
        def sem_loop(kmodes, rmodes, node_x, EA, GAK, EI, keep, force_red, out_red):
            nf = kmodes.shape[0]
            nn = node_x.size
            nd = 3 * nn
            nk = keep.size
            n_out = out_red.size
            H = np.empty((n_out, nf), dtype=np.complex128)
            K = np.empty((nd, nd), dtype=np.complex128)
            Kr = np.empty((nk, nk), dtype=np.complex128)
            psi = np.empty((6, 6), dtype=np.complex128)
            bmat = np.empty((6, 6), dtype=np.complex128)
            for f in range(nf):
                K[:, :] = 0.0
                for e in range(nn - 1):
                    L = node_x[e + 1] - node_x[e]
                    psi[:, :] = 0.0
                    bmat[:, :] = 0.0
                    for m in range(6):
                        km = kmodes[f, m]
                        rm = rmodes[f, m]
                        xr = L if km.imag > 0 else 0.0
                        z1 = np.exp(-1j * km * (0.0 - xr))
                        z2 = np.exp(-1j * km * (L - xr))
                        if m < 2:
                            psi[0, m] = z1
                            psi[3, m] = z2
                            nfc = EA * (-1j * km)
                            bmat[0, m] = -nfc * z1
                            bmat[3, m] = nfc * z2
                        else:
                            psi[1, m] = z1
                            psi[2, m] = rm * z1
                            psi[4, m] = z2
                            psi[5, m] = rm * z2
                            qc = GAK * (-1j * km - rm)
                            mc = EI * rm * (-1j * km)
                            bmat[1, m] = -qc * z1
                            bmat[2, m] = -mc * z1
                            bmat[4, m] = qc * z2
                            bmat[5, m] = mc * z2
                    ke = np.linalg.solve(
                        np.ascontiguousarray(psi.T), np.ascontiguousarray(bmat.T)
                    ).T
                    base = 3 * e
                    K[base:base + 6, base:base + 6] += ke
                for a in range(nk):
                    for b in range(nk):
                        Kr[a, b] = K[keep[a], keep[b]]
                x = np.linalg.solve(Kr, force_red.copy())
                for o in range(n_out):
                    H[o, f] = x[out_red[o]]
            return H

        _sem_solve_jit = sem_loop
    return _sem_solve_jit


def sem_solve(kmodes, rmodes, node_x, EA, GAK, EI, keep, force_red, out_red):
    """Backend-dispatching entry point."""
    if use_numba():
        fn = _get_jit()
        return fn(
            np.ascontiguousarray(kmodes),
            np.ascontiguousarray(rmodes),
            np.ascontiguousarray(node_x),
            complex(EA),
            complex(GAK),
            complex(EI),
            np.ascontiguousarray(keep, dtype=np.int64),
            np.ascontiguousarray(force_red, dtype=np.complex128),
            np.ascontiguousarray(out_red, dtype=np.int64),
        )
    return sem_solve_numpy(kmodes, rmodes, node_x, EA, GAK, EI, keep, force_red, out_red)
