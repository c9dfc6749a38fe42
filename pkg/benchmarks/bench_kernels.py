"""Time the tridiagonal kernels: compiled vs pure-Python backend, with scipy as reference.

Usage: ``python3 benchmarks/bench_kernels.py [--sizes 64,256,1024] [--repeat 3]``
"""
import argparse
import time

import numpy as np
from scipy.linalg import eigh_tridiagonal

from jacobi_spectra import kernels
from jacobi_spectra.ensemble import LimitParams, ensemble_for
from jacobi_spectra.rng import SeededStream
from jacobi_spectra.sampler import sample_rescaled


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="64,256,1024")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    print(f"{'n':>6} {'backend':>8} {'eigh (s)':>10} {'moments K=16 (s)':>17} {'max |dlambda|':>14}")
    for n in sizes:
        J = sample_rescaled(ensemble_for(LimitParams(0.5, 1.0), n, 2.0), SeededStream(1, n))
        ref = eigh_tridiagonal(J.diag, J.offdiag, eigvals_only=True)
        t_ref = best_of(lambda: eigh_tridiagonal(J.diag, J.offdiag), args.repeat)
        print(f"{n:>6} {'scipy':>8} {t_ref:>10.4g} {'-':>17} {0.0:>14.2g}")
        for name in kernels.available_backends():
            with kernels.using_backend(name):
                lam, _, _ = kernels.tridiag_eigh_first_row(J.diag, J.offdiag)
                err = np.max(np.abs(np.sort(lam) - ref))
                t_e = best_of(lambda: kernels.tridiag_eigh_first_row(J.diag, J.offdiag),
                              args.repeat)
                t_m = best_of(lambda: kernels.tridiag_moments(J.diag, J.offdiag, 16), args.repeat)
            print(f"{n:>6} {name:>8} {t_e:>10.4g} {t_m:>17.4g} {err:>14.2g}")


if __name__ == "__main__":
    main()
