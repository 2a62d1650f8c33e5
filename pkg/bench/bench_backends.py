"""Timing comparison of the numba and numpy kernel variants.

Run:  python3 bench/bench_backends.py  [--repeat N]

Covers the two hot paths: per-frequency spectral-element assembly/solve
(FRF synthesis) and rational-model evaluation on a dense grid.  The
numba variant is timed after a warm-up call so JIT compilation is not
counted.
"""

import argparse
import os
import time

import numpy as np


def _time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_synthesis(repeat):
    from dispersim.waveguide import reference_spec, synthesize_frfs

    spec = reference_spec(eta=0.01)
    omega = 2 * np.pi * np.arange(10.0, 50001.0, 20.0)

    results = {}
    for backend in ("numba", "numpy"):
        os.environ["DISPERSIM_BACKEND"] = backend
        synthesize_frfs(spec, omega[:32])  # warm-up / JIT
        results[backend] = _time(lambda: synthesize_frfs(spec, omega), repeat)
    return omega.size, results


def bench_rational_eval(repeat):
    from dispersim._kernels import rational_eval

    rng = np.random.default_rng(0)
    r, n_out = 212, 23
    beta = 2 * np.pi * np.sort(rng.uniform(10.0, 5e4, r // 2))
    poles = np.empty(r, dtype=complex)
    poles[0::2] = -0.005 * beta + 1j * beta
    poles[1::2] = np.conj(poles[0::2])
    residues = rng.standard_normal((n_out, r)) + 1j * rng.standard_normal((n_out, r))
    omega = 2 * np.pi * np.arange(10.0, 50001.0, 2.0)

    results = {}
    for backend in ("numba", "numpy"):
        os.environ["DISPERSIM_BACKEND"] = backend
        rational_eval(poles, residues, omega[:32])  # warm-up / JIT
        results[backend] = _time(lambda: rational_eval(poles, residues, omega), repeat)
    return omega.size, results


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    nf, res = bench_synthesis(args.repeat)
    print(f"FRF synthesis, reference beam, {nf} frequencies:")
    for name, t in res.items():
        print(f"  {name:>6}: {t:8.3f} s  ({nf / t:9.0f} freq/s)")
    print(f"  speedup numba vs numpy: {res['numpy'] / res['numba']:.2f}x")

    nf, res = bench_rational_eval(args.repeat)
    print(f"rational eval, 212 poles x 23 outputs, {nf} frequencies:")
    for name, t in res.items():
        print(f"  {name:>6}: {t:8.3f} s  ({nf / t:9.0f} freq/s)")
    print(f"  speedup numba vs numpy: {res['numpy'] / res['numba']:.2f}x")


if __name__ == "__main__":
    main()
