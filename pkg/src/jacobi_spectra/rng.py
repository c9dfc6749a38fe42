"""Seeded random streams and Gamma/Beta variates.

Streams are keyed by ``(master_seed, stream_id)`` and drive a counter-based
Philox generator, so a replicate's draws do not depend on how many replicates
run before it or on which worker runs it.

Gamma variates use the Marsaglia-Tsang squeeze method.  For shape ``a < 1`` a
``Gamma(a + 1)`` draw is multiplied by ``U**(1/a)``.  All work is done on the
log scale so shapes like ``0.025`` do not underflow.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .ensemble import ParameterDomainError

DEFAULT_SEED = 0x5EED_0000_0000_0001
SEED_ENV_VAR = "JACOBI_SPECTRA_SEED"

_MASK64 = (1 << 64) - 1


def seed_from_env(default: int = DEFAULT_SEED) -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None or raw.strip() == "":
        return default
    return parse_seed(raw)


def parse_seed(value) -> int:
    """Accept decimal or ``0x``-prefixed seeds; underscores allowed."""
    if isinstance(value, str):
        seed = int(value.strip().replace("_", ""), 0)
    else:
        seed = int(value)
    if not 0 <= seed <= _MASK64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {value!r}")
    return seed


@dataclass(frozen=True)
class SeededStream:
    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_id"):
            v = int(getattr(self, name))
            if not 0 <= v <= _MASK64:
                raise ValueError(f"{name} must fit in 64 unsigned bits, got {v}")
            object.__setattr__(self, name, v)

    def generator(self, role: int = 0) -> np.random.Generator:
        """Fresh generator for one role (e.g. the ``c`` or ``s`` variables) of this stream."""
        ss = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_id, int(role)))
        return np.random.Generator(np.random.Philox(ss))


def _as_generator(stream) -> np.random.Generator:
    if isinstance(stream, np.random.Generator):
        return stream
    if isinstance(stream, SeededStream):
        return stream.generator()
    raise TypeError(f"expected SeededStream or numpy Generator, got {type(stream).__name__}")


def _check_shape(shape: np.ndarray, name: str = "shape"):
    if np.any(~(shape > 0.0)) or np.any(~np.isfinite(shape)):
        raise ParameterDomainError(f"Gamma {name} must be positive and finite")


def _log_gamma_mt(rng: np.random.Generator, a: np.ndarray) -> np.ndarray:
    """log of Gamma(a) draws for a >= 1 (Marsaglia-Tsang)."""
    d = a - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)
    out = np.empty_like(a)
    pending = np.arange(a.size)
    while pending.size:
        dp, cp = d[pending], c[pending]
        x = rng.standard_normal(pending.size)
        u = rng.random(pending.size)
        t = 1.0 + cp * x
        ok = t > 0.0
        v = np.where(ok, t, 1.0) ** 3
        logv = np.log(v)
        x2 = x * x
        # squeeze test first, full log test for the rest
        accept = ok & ((u < 1.0 - 0.0331 * x2 * x2)
                       | (np.log(u) < 0.5 * x2 + dp * (1.0 - v + logv)))
        idx = pending[accept]
        out[idx] = np.log(dp[accept]) + logv[accept]
        pending = pending[~accept]
    return out


def sample_log_gamma(shape, stream, size=None) -> np.ndarray:
    """log of Gamma(shape) variates.  ``shape`` broadcasts against ``size``."""
    rng = _as_generator(stream)
    a = np.asarray(shape, dtype=float)
    if size is not None:
        a = np.broadcast_to(a, size)
    # np.array keeps 0-d input 0-d (ascontiguousarray would promote it)
    a = np.array(a, dtype=float, order="C")
    _check_shape(a)
    flat = a.ravel()
    small = flat < 1.0
    boosted = np.where(small, flat + 1.0, flat)
    out = _log_gamma_mt(rng, boosted)
    if np.any(small):
        u = rng.random(int(small.sum()))
        out[small] += np.log(u) / flat[small]
    return out.reshape(a.shape)


def sample_gamma(shape, stream, size=None):
    """Gamma(shape) variates with density ``x**(a-1) e**(-x) / Gamma(a)``.

    Returns a float when both ``shape`` and ``size`` are scalar.  Passing a
    :class:`SeededStream` always restarts that stream; pass a numpy Generator to
    keep drawing.
    """
    out = np.exp(sample_log_gamma(shape, stream, size))
    # exp(log G) may underflow for shapes << 1
    out = np.maximum(out, np.finfo(float).tiny)
    if out.ndim == 0:
        return float(out)
    return out


def sample_beta_pair(a, b, stream, size=None):
    """Beta(a, b) draws ``X`` together with ``1 - X``, both computed without cancellation.

    ``X = G1/(G1 + G2)`` with independent ``G1 ~ Gamma(a)``, ``G2 ~ Gamma(b)``.
    Results are clipped into the open interval ``(0, 1)``.
    """
    rng = _as_generator(stream)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    shape = np.broadcast_shapes(a.shape, b.shape) if size is None else size
    a = np.broadcast_to(a, shape)
    b = np.broadcast_to(b, shape)
    _check_shape(a, "a")
    _check_shape(b, "b")
    lg1 = sample_log_gamma(a, rng)
    lg2 = sample_log_gamma(b, rng)
    diff = lg1 - lg2
    tiny = np.finfo(float).tiny
    x = np.clip(expit(diff), tiny, np.nextafter(1.0, 0.0))
    xc = np.clip(expit(-diff), tiny, np.nextafter(1.0, 0.0))
    return x, xc


def sample_beta(a, b, stream, size=None):
    """Beta(a, b) variates via two Gamma draws."""
    x, _ = sample_beta_pair(a, b, stream, size)
    if np.ndim(x) == 0:
        return float(x)
    return x
