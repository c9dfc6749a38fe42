"""Shared domain types and parameter validation.

The finite ensemble is described by :class:`EnsembleParams` ``(beta, n, p1, p2)``;
its asymptotic regime by :class:`LimitParams` ``(gamma, sigma)`` with
``gamma = lim n/p1`` and ``sigma = lim p1/p2``.  Which branch of the piecewise
limit formulas applies is decided by :func:`classify_regime`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class ParameterDomainError(ValueError):
    """Raised when parameters fall outside the domain of an operation."""


class Regime(enum.Enum):
    BULK = "bulk"              # 0 < sigma*gamma <= 1
    SIGMA_ZERO = "sigma_zero"  # sigma = 0, 0 < gamma <= 1
    GAMMA_ZERO = "gamma_zero"  # gamma = 0, sigma >= 0


def classify_regime(gamma: float, sigma: float) -> Regime:
    """Return the branch of the limit formulas that applies to ``(gamma, sigma)``.

    ``gamma = 0`` always maps to :attr:`Regime.GAMMA_ZERO`, whatever ``sigma``.

    Raises
    ------
    ParameterDomainError
        If ``gamma`` is outside ``[0, 1]``, ``sigma`` is negative, or
        ``sigma * gamma > 1``.
    """
    gamma = float(gamma)
    sigma = float(sigma)
    if not (math.isfinite(gamma) and math.isfinite(sigma)):
        raise ParameterDomainError(f"non-finite parameters gamma={gamma}, sigma={sigma}")
    if gamma < 0.0 or gamma > 1.0:
        raise ParameterDomainError(f"gamma must lie in [0, 1], got {gamma}")
    if sigma < 0.0:
        raise ParameterDomainError(f"sigma must be nonnegative, got {sigma}")
    if sigma * gamma > 1.0:
        raise ParameterDomainError(f"sigma*gamma must be <= 1, got {sigma * gamma}")
    if gamma == 0.0:
        return Regime.GAMMA_ZERO
    if sigma == 0.0:
        return Regime.SIGMA_ZERO
    return Regime.BULK


@dataclass(frozen=True)
class EnsembleParams:
    """Parameters of the finite beta-Jacobi ensemble.

    Nothing here checks that ``beta * n`` is large; the limit theorems need it,
    but every finite parameter set is a valid ensemble.
    """

    beta: float
    n: int
    p1: float
    p2: float

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n:
            raise ParameterDomainError(f"n must be an integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "p1", float(self.p1))
        object.__setattr__(self, "p2", float(self.p2))
        if not self.beta > 0.0:
            raise ParameterDomainError(f"beta must be positive, got {self.beta}")
        if self.n < 1:
            raise ParameterDomainError(f"n must be >= 1, got {self.n}")
        if not (self.p1 >= self.n and self.p2 >= self.n):
            raise ParameterDomainError(
                f"need p1, p2 >= n; got n={self.n}, p1={self.p1}, p2={self.p2}"
            )

    @property
    def beta_prime(self) -> float:
        return self.beta / 2.0

    def to_dict(self) -> dict:
        return {"beta": self.beta, "n": self.n, "p1": self.p1, "p2": self.p2}


@dataclass(frozen=True)
class LimitParams:
    gamma: float
    sigma: float
    regime: Regime = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "regime", classify_regime(self.gamma, self.sigma))

    @property
    def c(self) -> float:
        """The constant ``gamma*sigma/(1+sigma)``."""
        return self.gamma * self.sigma / (1.0 + self.sigma)

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "sigma": self.sigma, "regime": self.regime.value}


def limit_params_of(ensemble: EnsembleParams) -> LimitParams:
    """Finite-n proxy ``(n/p1, p1/p2)`` for the limit parameters."""
    return LimitParams(ensemble.n / ensemble.p1, ensemble.p1 / ensemble.p2)


def ensemble_for(params: LimitParams, n: int, beta: float) -> EnsembleParams:
    """Pick ``(p1, p2)`` at size ``n`` so that the ratios approximate ``params``.

    Positive ``gamma``/``sigma`` are matched exactly (``p1 = n/gamma``,
    ``p2 = p1/sigma``).  A zero limit is approached through ``p1 = n**2``
    (for ``gamma = 0``) and ``p2 = n * p1`` (for ``sigma = 0``).
    """
    p1 = n / params.gamma if params.gamma > 0 else float(n) ** 2
    p2 = p1 / params.sigma if params.sigma > 0 else n * p1
    # p1 = n/gamma can round just below n when gamma = 1
    return EnsembleParams(beta, n, max(p1, n), max(p2, n))


@dataclass(frozen=True, eq=False)
class TridiagonalMatrix:
    """Symmetric tridiagonal (Jacobi) matrix stored as two arrays.

    ``diag`` holds ``a_1..a_n`` and ``offdiag`` holds ``b_1..b_{n-1}``; storage
    is 0-based, so ``a_k`` is ``diag[k-1]``.
    """

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = np.ascontiguousarray(self.diag, dtype=float)
        e = np.ascontiguousarray(self.offdiag, dtype=float)
        if d.ndim != 1 or e.ndim != 1:
            raise ParameterDomainError("diag and offdiag must be 1-d arrays")
        if d.size == 0:
            raise ParameterDomainError("empty matrix")
        if e.size != d.size - 1:
            raise ParameterDomainError(
                f"offdiag must have length {d.size - 1}, got {e.size}"
            )
        if np.any(~(e > 0.0)):
            raise ParameterDomainError("off-diagonal entries must be strictly positive")
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def n(self) -> int:
        return self.diag.size

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


@dataclass(frozen=True, eq=False)
class SpectralMeasure:
    """Finite measure ``sum_i w_i delta_{atoms_i}``.

    With ``weights=None`` the uniform weights ``1/n`` are used, which gives the
    empirical measure of the atoms.
    """

    atoms: np.ndarray
    weights: np.ndarray = None

    def __post_init__(self):
        x = np.asarray(self.atoms, dtype=float)
        if x.ndim != 1 or x.size == 0:
            raise ParameterDomainError("atoms must be a non-empty 1-d array")
        if self.weights is None:
            w = np.full(x.size, 1.0 / x.size)
        else:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != x.shape:
                raise ParameterDomainError("atoms and weights differ in shape")
            if np.any(w < 0.0) or np.any(w > 1.0):
                raise ParameterDomainError("weights must lie in [0, 1]")
            if abs(math.fsum(w) - 1.0) > 1e-12:
                raise ParameterDomainError(f"weights sum to {math.fsum(w)}, not 1")
        if np.any(np.diff(x) < 0.0):
            order = np.argsort(x, kind="stable")
            x, w = x[order], w[order]
        object.__setattr__(self, "atoms", x)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.atoms.size

    def empirical(self) -> "SpectralMeasure":
        return SpectralMeasure(self.atoms)

    def cumulative(self) -> np.ndarray:
        c = np.cumsum(self.weights)
        c[-1] = 1.0
        return c

    def integrate(self, f) -> float:
        return math.fsum(self.weights * f(self.atoms))


def joint_log_density(points, ensemble: EnsembleParams) -> float:
    """Unnormalized log of the beta-Jacobi joint eigenvalue density.

    Computes ``beta * sum_{i<j} log|x_i - x_j| + sum_i [e1 log x_i + e2 log(1-x_i)]``
    with ``e_r = beta/2 (p_r - n + 1) - 1``.  The normalizing constant is left out.

    Points are sorted before summing and the sum is exactly rounded, so any
    permutation of the input gives the same float.
    """
    x = np.sort(np.asarray(points, dtype=float).ravel())
    if x.size != ensemble.n:
        raise ParameterDomainError(f"expected {ensemble.n} points, got {x.size}")
    if np.any(~((x > 0.0) & (x < 1.0))):
        raise ParameterDomainError("all points must lie in the open interval (0, 1)")
    n = ensemble.n
    e1 = ensemble.beta_prime * (ensemble.p1 - n + 1) - 1.0
    e2 = ensemble.beta_prime * (ensemble.p2 - n + 1) - 1.0
    i, j = np.triu_indices(n, k=1)
    gaps = x[j] - x[i]
    if np.any(gaps == 0.0):
        return -math.inf
    terms = [ensemble.beta * math.fsum(np.log(gaps))]
    # exponents may be exactly zero; skip to keep exact zeros exact
    if e1 != 0.0:
        terms.append(e1 * math.fsum(np.log(x)))
    if e2 != 0.0:
        terms.append(e2 * math.fsum(np.log1p(-x)))
    return math.fsum(terms)
