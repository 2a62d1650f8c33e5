"""Numba / pure-numpy backend selection.

Hot numeric kernels ship in two variants: a numba ``@njit`` loop and a
vectorized numpy fallback.  Selection is controlled by the environment
variable ``DISPERSIM_BACKEND``:

* ``"numba"`` -- require numba, fail loudly if it cannot be imported
* ``"numpy"`` -- always use the pure-numpy path
* unset / ``"auto"`` -- numba when importable, numpy otherwise
"""

import os

_ENV_VAR = "DISPERSIM_BACKEND"

_numba_ok = None


def _numba_importable():
    global _numba_ok
    if _numba_ok is None:
        try:
            import numba  # noqa: F401

            _numba_ok = True
        except ImportError:
            _numba_ok = False
    return _numba_ok


def backend_name():
    """Resolved backend: ``"numba"`` or ``"numpy"``."""
    choice = os.environ.get(_ENV_VAR, "auto").lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(
            f"{_ENV_VAR} must be 'auto', 'numba' or 'numpy', got {choice!r}"
        )
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        if not _numba_importable():
            raise ImportError(f"{_ENV_VAR}=numba but numba is not importable")
        return "numba"
    return "numba" if _numba_importable() else "numpy"


def use_numba():
    return backend_name() == "numba"
