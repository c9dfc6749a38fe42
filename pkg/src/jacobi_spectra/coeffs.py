"""Parameterizations of Jacobi coefficients.

For a measure on ``[0, inf)`` the coefficients factor as

    a_k = z_{2k-2} + z_{2k-1},   b_k^2 = z_{2k-1} z_{2k},   z_0 = 0,

and for a measure on ``[0, 1]`` the ``z_k`` form a chain sequence
``z_k = p_k (1 - p_{k-1})`` with ``p_0 = 0`` and ``0 < p_k < 1``.

The rescaled spectral measures live on ``[-1/sqrt(gamma), 1/(sqrt(gamma) sigma)]``,
mapped onto ``[0, 1]`` by ``lambda = sigma (sqrt(gamma) x + 1) / (1 + sigma)``.
On that scale the odd and even chain parameters are re-centred as

    u_k = ((1 + sigma) p_{2k-1} - sigma) / (sqrt(gamma) sigma)
    v_k = (1 + sigma) / (gamma sigma) * p_{2k}

so that the limit law has ``u = 0, v = 1``.  All sequences are 1-based in the
formulas and stored 0-based: ``z[0]`` is ``z_1``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .ensemble import LimitParams, ParameterDomainError, Regime

_GUARD = 1e-12


class DecompositionError(ValueError):
    """A coefficient sequence does not admit the requested decomposition.

    ``stage`` names the failing transform and ``index`` the 1-based position.
    """

    def __init__(self, message: str, stage: str, index: int):
        super().__init__(f"{stage}: {message} (index {index})")
        self.stage = stage
        self.index = index


class NotNonnegativeSupport(DecompositionError):
    pass


class NotUnitInterval(DecompositionError):
    pass


class RangeError(DecompositionError):
    pass


@dataclass(frozen=True, eq=False)
class ChainDecomposition:
    z: np.ndarray
    p: np.ndarray
    u: np.ndarray
    v: np.ndarray


def _arr(x) -> np.ndarray:
    return np.asarray(x, dtype=float).ravel()


def zk_from_jacobi(a, b) -> np.ndarray:
    """``z`` from ``(a, b)``.  ``len(b)`` is ``len(a) - 1`` (finite) or ``len(a)``."""
    a, b = _arr(a), _arr(b)
    K = a.size
    if b.size not in (K - 1, K):
        raise ParameterDomainError(f"len(b) must be {K - 1} or {K}, got {b.size}")
    z = np.empty(K + b.size)
    prev = 0.0
    for k in range(K):
        odd = a[k] - prev
        if not odd > 0.0:
            raise NotNonnegativeSupport(f"z_{2 * k + 1} = {odd} <= 0", "zk_from_jacobi", 2 * k + 1)
        z[2 * k] = odd
        if k < b.size:
            prev = b[k] ** 2 / odd
            z[2 * k + 1] = prev
    return z


def jacobi_from_zk(z):
    """Inverse of :func:`zk_from_jacobi`."""
    z = _arr(z)
    if np.any(~(z > 0.0)):
        raise ParameterDomainError("all z_k must be positive")
    odd = z[0::2]
    even = z[1::2]
    K = odd.size
    a = odd.copy()
    a[1:] += even[:K - 1]
    b = np.sqrt(odd[:even.size] * even)
    return a, b


def zk_from_chain(p, p0: float = 0.0) -> np.ndarray:
    p = _arr(p)
    prev = np.concatenate(([p0], p[:-1]))
    return p * (1.0 - prev)


def chain_from_zk(z, p0: float = 0.0) -> np.ndarray:
    """Chain parameters ``p_k = z_k / (1 - p_{k-1})``.

    Raises :class:`NotUnitInterval` as soon as some ``p_k`` leaves ``(0, 1)``,
    i.e. the measure is not supported in ``[0, 1]``.
    """
    z = _arr(z)
    if not 0.0 <= p0 < 1.0:
        raise ParameterDomainError(f"p0 must lie in [0, 1), got {p0}")
    p = np.empty_like(z)
    prev = p0
    for k in range(z.size):
        room = 1.0 - prev
        if room < _GUARD:
            raise NotUnitInterval(f"1 - p_{k} = {room} too small", "chain_from_zk", k + 1)
        pk = z[k] / room
        if not 0.0 < pk < 1.0:
            raise NotUnitInterval(f"p_{k + 1} = {pk} outside (0, 1)", "chain_from_zk", k + 1)
        p[k] = pk
        prev = pk
    return p


def _require_bulk(params: LimitParams, what: str):
    if params.regime is not Regime.BULK:
        raise ParameterDomainError(f"{what} is defined only for 0 < sigma*gamma <= 1")


def uv_bounds(params: LimitParams):
    """Open intervals for ``u_k`` and ``v_k``; ``inf`` replaces divisions by zero."""
    g, s = params.gamma, params.sigma
    rg = math.sqrt(g)
    u_lo = -1.0 / rg if g > 0 else -math.inf
    u_hi = 1.0 / (rg * s) if g * s > 0 else math.inf
    v_hi = (1.0 + s) / (g * s) if g * s > 0 else math.inf
    return (u_lo, u_hi), (0.0, v_hi)


def _check_uv_ranges(u, v, params, stage):
    (ulo, uhi), (vlo, vhi) = uv_bounds(params)
    for k, uk in enumerate(u):
        if not ulo < uk < uhi:
            raise RangeError(f"u_{k + 1} = {uk} outside ({ulo}, {uhi})", stage, k + 1)
    for k, vk in enumerate(v):
        if not vlo < vk < vhi:
            raise RangeError(f"v_{k + 1} = {vk} outside ({vlo}, {vhi})", stage, k + 1)


def uv_from_chain(p, params: LimitParams):
    """``(u, v)`` from chain parameters; ``p[0::2]`` feeds ``u``, ``p[1::2]`` feeds ``v``."""
    _require_bulk(params, "uv_from_chain")
    p = _arr(p)
    g, s = params.gamma, params.sigma
    u = ((1.0 + s) * p[0::2] - s) / (math.sqrt(g) * s)
    v = (1.0 + s) / (g * s) * p[1::2]
    _check_uv_ranges(u, v, params, "uv_from_chain")
    return u, v


def chain_from_uv(u, v, params: LimitParams) -> np.ndarray:
    _require_bulk(params, "chain_from_uv")
    u, v = _arr(u), _arr(v)
    g, s = params.gamma, params.sigma
    p = np.empty(u.size + v.size)
    p[0::2] = s * (1.0 + math.sqrt(g) * u) / (1.0 + s)
    p[1::2] = params.c * v
    return p


def jacobi_from_uv(u, v, params: LimitParams):
    """Rescaled Jacobi coefficients from ``(u, v)``, with ``u_0 = v_0 = 0``.

    For ``sigma = 0`` or ``gamma = 0`` the formulas are their continuous limits
    in ``(gamma, sigma)``.
    """
    u, v = _arr(u), _arr(v)
    K = u.size
    if v.size not in (K - 1, K):
        raise ParameterDomainError(f"len(v) must be {K - 1} or {K}, got {v.size}")
    _check_uv_ranges(u, v, params, "jacobi_from_uv")
    g, s = params.gamma, params.sigma
    rg = math.sqrt(g)
    c = params.c
    v_prev = np.concatenate(([0.0], v[:K - 1]))
    u_prev = np.concatenate(([0.0], u[:-1]))
    a = rg * (1.0 - s) / (1.0 + s) * v_prev - c * v_prev * (u_prev + u) + u
    m = v.size
    b2 = v / (1.0 + s) * (1.0 - s * rg * u[:m]) * (1.0 + rg * u[:m]) * (1.0 - c * v_prev[:m])
    bad = np.flatnonzero(~(b2 > 0.0))
    if bad.size:
        k = int(bad[0])
        raise RangeError(f"b_{k + 1}^2 = {b2[k]} <= 0", "jacobi_from_uv", k + 1)
    return a, np.sqrt(b2)


def to_unit_interval(a, b, params: LimitParams):
    """Coefficients of the image measure under ``x -> sigma (sqrt(gamma) x + 1)/(1 + sigma)``."""
    _require_bulk(params, "to_unit_interval")
    g, s = params.gamma, params.sigma
    scale = s * math.sqrt(g) / (1.0 + s)
    return scale * _arr(a) + s / (1.0 + s), scale * _arr(b)


def from_unit_interval(a, b, params: LimitParams):
    _require_bulk(params, "from_unit_interval")
    g, s = params.gamma, params.sigma
    scale = s * math.sqrt(g) / (1.0 + s)
    return (_arr(a) - s / (1.0 + s)) / scale, _arr(b) / scale


def decompose(a, b, params: LimitParams) -> ChainDecomposition:
    """Full chain ``(a, b) -> z -> p -> (u, v)`` for rescaled coefficients in the bulk regime."""
    al, bl = to_unit_interval(a, b, params)
    z = zk_from_jacobi(al, bl)
    p = chain_from_zk(z)
    u, v = uv_from_chain(p, params)
    return ChainDecomposition(z, p, u, v)


def uv_from_jacobi(a, b, params: LimitParams):
    """``(u, v)`` for rescaled coefficients in any regime.

    The bulk regime goes through :func:`decompose`; the degenerate regimes
    invert the limiting form of :func:`jacobi_from_uv` directly.
    """
    if params.regime is Regime.BULK:
        d = decompose(a, b, params)
        return d.u, d.v
    a, b = _arr(a), _arr(b)
    if b.size not in (a.size - 1, a.size):
        raise ParameterDomainError(f"len(b) must be {a.size - 1} or {a.size}, got {b.size}")
    g, s = params.gamma, params.sigma
    if params.regime is Regime.GAMMA_ZERO:
        u = a.copy()
        v = (1.0 + s) * b ** 2
    else:
        rg = math.sqrt(g)
        u = np.empty_like(a)
        v = np.empty_like(b)
        v_prev = 0.0
        for k in range(a.size):
            u[k] = a[k] - rg * v_prev
            if not 1.0 + rg * u[k] > 0.0:
                raise RangeError(f"u_{k + 1} = {u[k]} <= -1/sqrt(gamma)", "uv_from_jacobi", k + 1)
            if k < b.size:
                v[k] = b[k] ** 2 / (1.0 + rg * u[k])
                v_prev = v[k]
    _check_uv_ranges(u, v, params, "uv_from_jacobi")
    return u, v


# ---------------------------------------------------------------- JSON format

COEFF_KEYS = ("a", "b", "z", "p", "u", "v")


def coefficients_to_json(path_or_file=None, *, index_base: int = 1, **arrays) -> str:
    """Serialize coefficient arrays as ``{"index_base": 1, "a": [...], ...}``.

    Returns the JSON text; also writes it if ``path_or_file`` is given.
    """
    unknown = set(arrays) - set(COEFF_KEYS)
    if unknown:
        raise ValueError(f"unknown coefficient keys {sorted(unknown)}")
    doc = {"index_base": index_base}
    for key in COEFF_KEYS:
        if arrays.get(key) is not None:
            doc[key] = [float(x) for x in _arr(arrays[key])]
    text = json.dumps(doc, indent=2)
    if path_or_file is not None:
        if hasattr(path_or_file, "write"):
            path_or_file.write(text)
        else:
            with open(path_or_file, "w") as fh:
                fh.write(text + "\n")
    return text


def coefficients_from_json(source) -> dict:
    """Parse the coefficient JSON document into ``{key: ndarray}``."""
    if hasattr(source, "read"):
        doc = json.load(source)
    elif isinstance(source, dict):
        doc = source
    else:
        with open(source) as fh:
            doc = json.load(fh)
    base = doc.get("index_base", 1)
    if base != 1:
        raise ValueError(f"only index_base 1 is supported, got {base}")
    out = {}
    for key in COEFF_KEYS:
        if key in doc:
            vals = doc[key]
            if not isinstance(vals, list) or not all(isinstance(x, (int, float)) for x in vals):
                raise ValueError(f"field {key!r} must be a list of numbers")
            out[key] = np.asarray(vals, dtype=float)
    return out
