"""Rate functions for the large deviations of the rescaled spectral measure.

Everything is built from ``g(x) = x - log x - 1`` (``+inf`` for ``x <= 0``),
the Legendre transform of the Gamma log-moment generating function up to
scaling.  Values live in ``[0, +inf]``; ``math.inf`` encodes infeasibility.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coeffs import DecompositionError, uv_from_jacobi
from .ensemble import LimitParams, Regime

MEMBERSHIP_TOL = 1e-9


def g(x: float) -> float:
    x = float(x)
    if not x > 0.0:
        return math.inf
    if math.isinf(x):
        return math.inf
    # x - 1 - log x loses digits near 1; log1p keeps them
    t = x - 1.0
    return t - math.log1p(t) if abs(t) < 0.5 else x - math.log(x) - 1.0


@dataclass(frozen=True)
class RateValue:
    """A (possibly truncated) rate-function value with its per-index breakdown.

    ``tail_estimate`` is twice the last term: a rough size of the neglected
    tail when terms decay geometrically, reported and never asserted.
    ``diagnostic`` explains an infinite value when it comes from a failed
    decomposition.
    """

    value: float
    terms: tuple
    truncation_K: int
    tail_estimate: float = 0.0
    diagnostic: str | None = None

    def to_dict(self) -> dict:
        out = {
            "value": _json_float(self.value),
            "terms": [_json_float(t) for t in self.terms],
            "truncation_K": self.truncation_K,
            "tail_estimate": _json_float(self.tail_estimate),
        }
        if self.diagnostic:
            out["diagnostic"] = self.diagnostic
        return out


def _json_float(x):
    return "inf" if math.isinf(x) else float(x)


def _on(lhs: float, rhs: float) -> bool:
    return abs(lhs - rhs) <= MEMBERSHIP_TOL


def _in_DM(x, params: LimitParams) -> bool:
    s, rg = params.sigma, math.sqrt(params.gamma)
    return (_on(x[2], s / (1.0 + s) * (rg * x[0] + x[1]))
            and _on(x[3], rg * x[0] + x[1]))


def _in_DP(x, params: LimitParams) -> bool:
    return _on(x[2], params.c * x[0]) and _on(x[3], math.sqrt(params.gamma) * x[0])


def rate_IM(x, params: LimitParams) -> float:
    """Rate function of the Gamma-pair vector driving the ``c_k`` variables."""
    x = [float(t) for t in x]
    if len(x) != 4:
        raise ValueError("rate_IM takes a 4-vector")
    g_, s = params.gamma, params.sigma
    rg = math.sqrt(g_)
    if not _in_DM(x, params):
        return math.inf
    if params.regime is Regime.BULK:
        return (g((x[1] + rg * x[0]) / (1.0 + s)) / g_
                + g((x[1] - rg * s * x[0]) / (1.0 + s)) / (g_ * s))
    if not _on(x[1], 1.0 + s):
        return math.inf
    if params.regime is Regime.SIGMA_ZERO:
        return g(1.0 + rg * x[0]) / g_
    return x[0] ** 2 / (2.0 * (1.0 + s))


def rate_IP(x, params: LimitParams) -> float:
    """Rate function of the Gamma-pair vector driving the ``s_k`` variables."""
    x = [float(t) for t in x]
    if len(x) != 4:
        raise ValueError("rate_IP takes a 4-vector")
    if not _in_DP(x, params):
        return math.inf
    if params.regime is Regime.BULK:
        c = params.c
        return g(x[0]) + (1.0 - c) / c * g((x[1] - c * x[0]) / (1.0 - c))
    if not _on(x[1], 1.0):
        return math.inf
    return g(x[0])


def _u_term(uk: float, params: LimitParams) -> float:
    g_, s = params.gamma, params.sigma
    if params.regime is Regime.GAMMA_ZERO:
        return (1.0 + s) / 2.0 * uk * uk
    rg = math.sqrt(g_)
    out = g(1.0 + rg * uk) / g_
    if params.regime is Regime.BULK:
        out += g(1.0 - rg * s * uk) / (g_ * s)
    return out


def _v_term(vk: float, params: LimitParams) -> float:
    out = g(vk)
    if params.regime is Regime.BULK:
        c = params.c
        out += (1.0 - c) / c * g((1.0 - c * vk) / (1.0 - c))
    return out


def rate_measure(u, v, params: LimitParams, K: int) -> RateValue:
    """Rate of the measure with parameters ``(u, v)``, summed over ``k <= K``.

    Entry ``k`` of ``terms`` is the ``u_k`` contribution plus the ``v_k`` one.
    A finite measure has one fewer ``v`` than ``u``; missing ``v_k`` are skipped.
    """
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if u.size < K:
        raise ValueError(f"need at least K={K} values of u, got {u.size}")
    terms = []
    for k in range(K):
        parts = [_u_term(u[k], params)]
        if k < v.size:
            parts.append(_v_term(v[k], params))
        terms.append(math.fsum(parts) if all(map(math.isfinite, parts)) else math.inf)
    value = math.fsum(terms) if all(map(math.isfinite, terms)) else math.inf
    return RateValue(value, tuple(terms), K, 2.0 * terms[-1])


def rate_of_spectral_measure(a, b, params: LimitParams, K: int) -> RateValue:
    """Rate of the measure with rescaled Jacobi coefficients ``(a, b)``.

    Measures outside the admissible interval fail the decomposition and get
    ``+inf`` with a diagnostic naming the failing stage and index.
    """
    try:
        u, v = uv_from_jacobi(np.asarray(a)[:K], np.asarray(b)[:K], params)
    except DecompositionError as exc:
        return RateValue(math.inf, (), K, math.inf, diagnostic=str(exc))
    return rate_measure(u, v, params, min(K, u.size))
