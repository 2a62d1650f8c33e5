"""Hot loop of rational-model evaluation.

Evaluates H̃(iω) = Σ_j R[:, j] / (iω − λ_j) on a frequency grid.  Two
interchangeable implementations (see :mod:`dispersim.backend`): a numba
``@njit`` loop and a chunked BLAS formulation (Cauchy matrix times
residue matrix).
"""

import numpy as np

from .backend import use_numba


def rational_eval_numpy(poles, residues, omega, chunk=4096):
    """residues: (n_out, r) complex; poles: (r,); omega: (nf,) rad/s."""
    poles = np.asarray(poles, dtype=complex)
    residues = np.asarray(residues, dtype=complex)
    omega = np.asarray(omega, dtype=float)
    n_out = residues.shape[0]
    nf = omega.size
    H = np.empty((n_out, nf), dtype=complex)
    for lo in range(0, nf, chunk):
        hi = min(lo + chunk, nf)
        cauchy = 1.0 / (1j * omega[lo:hi][None, :] - poles[:, None])
        H[:, lo:hi] = residues @ cauchy
    return H


_rational_jit = None


def _get_jit():
    global _rational_jit
    if _rational_jit is None:
        from numba import njit

        @njit(cache=True)
        def rational_loop(poles, residues, omega):
            n_out, r = residues.shape
            nf = omega.size
            H = np.zeros((n_out, nf), dtype=np.complex128)
            for f in range(nf):
                s = 1j * omega[f]
                for j in range(r):
                    g = 1.0 / (s - poles[j])
                    for o in range(n_out):
                        H[o, f] += residues[o, j] * g
            return H

        _rational_jit = rational_loop
    return _rational_jit


def rational_eval(poles, residues, omega):
    """Backend-dispatching entry point."""
    if use_numba():
        fn = _get_jit()
        return fn(
            np.ascontiguousarray(poles, dtype=np.complex128),
            np.ascontiguousarray(residues, dtype=np.complex128),
            np.ascontiguousarray(omega, dtype=np.float64),
        )
    return rational_eval_numpy(poles, residues, omega)
