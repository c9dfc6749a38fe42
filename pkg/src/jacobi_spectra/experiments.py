"""Distances between measures and Monte Carlo experiment harnesses.

Every replicate draws from its own :class:`~jacobi_spectra.rng.SeededStream`
with ``stream_id = (cell << 32) | replicate``; results are gathered by index,
so reports do not depend on the number of worker threads.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from . import __version__, kernels
from .ensemble import EnsembleParams, LimitParams, SpectralMeasure, ensemble_for, limit_params_of
from .limits import limit_cdf, support_of_limit
from .rng import SeededStream
from .sampler import sample_rescaled
from .spectra import (ConvergenceError, eigen_decompose,
                      kolmogorov_distance_spectral_vs_empirical, polynomial_integral)

W2_GRID = 10_000


# ------------------------------------------------------------------ distances

def ks_distance(measure: SpectralMeasure, cdf) -> float:
    """``sup_x |F(x) - G(x)|`` between a reference CDF ``F`` and the measure's CDF ``G``.

    The supremum over a step function is attained at an atom, on one side or
    the other of the jump.
    """
    F = np.asarray(cdf(measure.atoms), dtype=float)
    W = measure.cumulative()
    W_prev = np.concatenate(([0.0], W[:-1]))
    return float(min(1.0, max(np.max(np.abs(F - W)), np.max(np.abs(F - W_prev)))))


def _midpoints(grid: int) -> np.ndarray:
    return (np.arange(grid) + 0.5) / grid


def discrete_quantile(measure: SpectralMeasure, t) -> np.ndarray:
    """Left-continuous quantile: the smallest atom whose cumulative weight reaches ``t``."""
    idx = np.searchsorted(measure.cumulative(), np.asarray(t, dtype=float), side="left")
    return measure.atoms[np.minimum(idx, measure.n - 1)]


def wasserstein2_quantiles(q1, q2, grid: int = W2_GRID) -> float:
    """``(int_0^1 (q1(t) - q2(t))^2 dt)^(1/2)`` by the midpoint rule."""
    t = _midpoints(grid)
    d = np.asarray(q1(t), dtype=float) - np.asarray(q2(t), dtype=float)
    return math.sqrt(math.fsum(d * d) / grid)


def wasserstein2(measure: SpectralMeasure, reference_quantile, grid: int = W2_GRID) -> float:
    return wasserstein2_quantiles(lambda t: discrete_quantile(measure, t), reference_quantile, grid)


# -------------------------------------------------------------------- reports

@dataclass
class ExperimentReport:
    """Per-cell summaries of a Monte Carlo experiment.

    ``param_grid[i]`` and ``metrics[i]`` describe cell ``i``; each metrics cell
    carries its replicate count and the stream ids it used.
    """

    name: str
    seed: int
    param_grid: list
    metrics: list
    failures: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def column(self, key: str) -> np.ndarray:
        return np.array([cell[key] for cell in self.metrics], dtype=float)

    def to_dict(self) -> dict:
        return {
            "experiment": self.name,
            "seeds": {"master_seed": self.seed, "stream_id": "(cell << 32) | replicate"},
            "grid": self.param_grid,
            "metrics": self.metrics,
            "failures": self.failures,
            "extra": self.extra,
            "versions": versions(),
        }

    def csv_rows(self, columns) -> list:
        return [[cell[c] for c in columns] for cell in self.metrics]


def versions() -> dict:
    import scipy
    return {"jacobi_spectra": __version__, "numpy": np.__version__,
            "scipy": scipy.__version__, "kernel_backend": kernels.backend()}


def summarize(values) -> dict:
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if v.size == 0:
        return {"mean": math.nan, "median": math.nan, "q05": math.nan, "q95": math.nan}
    q05, med, q95 = np.quantile(v, [0.05, 0.5, 0.95])
    return {"mean": math.fsum(v) / v.size, "median": float(med),
            "q05": float(q05), "q95": float(q95)}


def stream_id(cell: int, rep: int) -> int:
    return (cell << 32) | rep


def default_threads() -> int:
    return os.cpu_count() or 1


def _run_replicates(fn, reps: int, threads: int | None):
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1:
        return [fn(r) for r in range(reps)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(reps)))


def _cell_seeds(seed: int, cell: int, reps: int) -> dict:
    return {"master_seed": seed, "stream_id_first": stream_id(cell, 0),
            "stream_id_last": stream_id(cell, reps - 1)}


# ---------------------------------------------------------------- experiments

def convergence_experiment(params: LimitParams, n_grid, beta: float, reps: int,
                           seed: int, threads: int | None = None) -> ExperimentReport:
    """KS distance of the empirical and spectral measures to the limit law, along ``n_grid``."""
    cdf = limit_cdf(params)
    grid, metrics, failures = [], [], []
    for cell, n in enumerate(n_grid):
        ens = ensemble_for(params, int(n), beta)

        def one(rep, ens=ens, cell=cell):
            sid = stream_id(cell, rep)
            try:
                mu = eigen_decompose(sample_rescaled(ens, SeededStream(seed, sid)))
            except ConvergenceError as exc:
                return None, {"n": ens.n, "replicate": rep, "stream_id": sid, "error": str(exc)}
            return (ks_distance(mu.empirical(), cdf), ks_distance(mu, cdf),
                    kolmogorov_distance_spectral_vs_empirical(mu)), None

        out = _run_replicates(one, reps, threads)
        vals = np.array([r if r is not None else (math.nan,) * 3 for r, _ in out])
        failures.extend(f for _, f in out if f is not None)
        grid.append({**ens.to_dict(), "reps": reps})
        sL, sM, sG = summarize(vals[:, 0]), summarize(vals[:, 1]), summarize(vals[:, 2])
        metrics.append({
            "n": ens.n, "reps": reps, "n_failed": int(np.isnan(vals[:, 0]).sum()),
            "median_ks_Ln": sL["median"], "median_ks_mun": sM["median"],
            "spectral_vs_empirical_gap": sG["median"],
            "ks_Ln": sL, "ks_mun": sM, "gap": sG,
            "seeds": _cell_seeds(seed, cell, reps),
        })
    return ExperimentReport("converge", seed, grid, metrics, failures,
                            {"limit": params.to_dict(), "beta": beta})


def extremal_eigenvalue_check(params: LimitParams, n_grid, beta: float, reps: int,
                              seed: int, threads: int | None = None,
                              reference: str = "limit") -> ExperimentReport:
    """Median extreme rescaled eigenvalues against the support edges.

    ``reference="limit"`` compares with the support of ``params``;
    ``reference="proxy"`` with that of the finite-n ratios ``(n/p1, p1/p2)``.
    """
    if reference not in ("limit", "proxy"):
        raise ValueError(f"reference must be 'limit' or 'proxy', got {reference!r}")
    grid, metrics, failures = [], [], []
    for cell, n in enumerate(n_grid):
        ens = ensemble_for(params, int(n), beta)
        sup = support_of_limit(params if reference == "limit" else limit_params_of(ens))

        def one(rep, ens=ens, cell=cell):
            sid = stream_id(cell, rep)
            try:
                mu = eigen_decompose(sample_rescaled(ens, SeededStream(seed, sid)))
            except ConvergenceError as exc:
                return None, {"n": ens.n, "replicate": rep, "stream_id": sid, "error": str(exc)}
            return (mu.atoms[0], mu.atoms[-1]), None

        out = _run_replicates(one, reps, threads)
        vals = np.array([r if r is not None else (math.nan, math.nan) for r, _ in out])
        failures.extend(f for _, f in out if f is not None)
        grid.append({**ens.to_dict(), "reps": reps})
        med_min = float(np.nanmedian(vals[:, 0]))
        med_max = float(np.nanmedian(vals[:, 1]))
        metrics.append({
            "n": ens.n, "reps": reps, "n_failed": int(np.isnan(vals[:, 0]).sum()),
            "median_min": med_min, "median_max": med_max,
            "limit_lower": sup.lower, "limit_upper": sup.upper,
            "deviation_min": abs(med_min - sup.lower),
            "deviation_max": abs(med_max - sup.upper),
            "seeds": _cell_seeds(seed, cell, reps),
        })
    return ExperimentReport("extremal", seed, grid, metrics, failures,
                            {"limit": params.to_dict(), "beta": beta, "reference": reference})


def clt_experiment(ensembles, coeffs, reps: int, seed: int, threads: int | None = None,
                   cross_check: int = 16, cross_check_tol: float = 1e-9) -> ExperimentReport:
    """Fluctuations ``S = sqrt(beta' n) (<mu_n, p> - mean)`` for a polynomial ``p``.

    ``coeffs[j]`` multiplies ``x**j``.  The first ``cross_check`` replicates of
    each cell also evaluate ``sum_i w_i p(lambda_i)`` from the eigendecomposition
    and compare with the moment route.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if reps < 1000:
        raise ValueError(f"clt_experiment needs reps >= 1000, got {reps}")
    poly = np.polynomial.Polynomial(coeffs)
    grid, metrics, failures = [], [], []
    for cell, ens in enumerate(ensembles):
        if not isinstance(ens, EnsembleParams):
            ens = EnsembleParams(**ens)

        def one(rep, ens=ens, cell=cell):
            sid = stream_id(cell, rep)
            J = sample_rescaled(ens, SeededStream(seed, sid))
            val = polynomial_integral(J, coeffs)
            diff = 0.0
            if rep < cross_check:
                try:
                    mu = eigen_decompose(J)
                except ConvergenceError as exc:
                    return val, math.nan, {"n": ens.n, "replicate": rep, "stream_id": sid,
                                           "error": str(exc)}
                diff = abs(mu.integrate(poly) - val) / max(1.0, abs(val))
            return val, diff, None

        out = _run_replicates(one, reps, threads)
        vals = np.array([o[0] for o in out])
        diffs = np.array([o[1] for o in out[:cross_check]])
        failures.extend(o[2] for o in out if o[2] is not None)
        S = math.sqrt(ens.beta_prime * ens.n) * (vals - math.fsum(vals) / vals.size)
        var = float(np.var(S, ddof=1))
        if var > 0.0:
            Z = S / math.sqrt(var)
            ks = ks_distance(SpectralMeasure(Z), special.ndtr)
            skew, kurt = float(stats.skew(S)), float(stats.kurtosis(S))
        else:
            ks = skew = kurt = math.nan
        grid.append({**ens.to_dict(), "reps": reps})
        max_diff = float(np.nanmax(diffs)) if diffs.size else 0.0
        metrics.append({
            "n": ens.n, "reps": reps, "variance": var, "skewness": skew,
            "excess_kurtosis": kurt, "ks_normal": ks,
            "cross_check_max_rel_diff": max_diff,
            "cross_check_ok": bool(max_diff <= cross_check_tol),
            "seeds": _cell_seeds(seed, cell, reps),
        })
    return ExperimentReport("clt", seed, grid, metrics, failures,
                            {"polynomial": [float(c) for c in coeffs]})
