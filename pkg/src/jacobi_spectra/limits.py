"""Limit laws of the rescaled beta-Jacobi ensemble.

Densities
---------
wachter_density
    ``h_{gamma,sigma}`` on ``[u1, u2]`` inside ``[0, 1]``.
marchenko_pastur_density
    ``h_gamma`` on ``[(sqrt(gamma) - 1)**2, (sqrt(gamma) + 1)**2]``.
modified_wachter_density
    The limit ``h~_{gamma,sigma}`` of the rescaled ensemble, one branch per
    :class:`~jacobi_spectra.ensemble.Regime`.

The same law is the spectral measure of a Jacobi matrix whose coefficients are
constant from the second row on (:func:`limiting_jacobi`).  Its Stieltjes
transform is available in closed form (:func:`m_function`) and the density can
be recovered from it by Stieltjes inversion (:func:`density_from_m`).
"""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from .ensemble import LimitParams, ParameterDomainError, Regime, TridiagonalMatrix

DEFAULT_EPSILONS = (1e-3, 5e-4, 2.5e-4)


@dataclass(frozen=True)
class SupportInterval:
    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ParameterDomainError(f"empty support [{self.lower}, {self.upper}]")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (x >= self.lower) & (x <= self.upper)


@dataclass(frozen=True)
class LimitJacobiParams:
    """Jacobi matrix with ``J(1,1) = alpha0``, ``J(1,2) = beta0`` and
    ``J(k,k) = alpha1``, ``J(k,k+1) = beta1`` for ``k >= 2``."""

    alpha0: float
    beta0: float
    alpha1: float
    beta1: float

    def __post_init__(self):
        if not (self.beta0 > 0.0 and self.beta1 > 0.0):
            raise ParameterDomainError("beta0 and beta1 must be positive")

    def truncation(self, size: int) -> TridiagonalMatrix:
        """Leading ``size x size`` block of the semi-infinite matrix."""
        diag = np.full(size, self.alpha1)
        diag[0] = self.alpha0
        off = np.full(size - 1, self.beta1)
        if size > 1:
            off[0] = self.beta0
        return TridiagonalMatrix(diag, off)

    def coefficients(self, K: int):
        """``(a_1..a_K, b_1..b_K)`` of the semi-infinite matrix."""
        a = np.full(K, self.alpha1)
        a[0] = self.alpha0
        b = np.full(K, self.beta1)
        b[0] = self.beta0
        return a, b


def _sqrt_pos(t):
    return np.sqrt(np.maximum(t, 0.0))


def _as_output(x_in, out):
    return float(out) if np.ndim(x_in) == 0 else out


# ---------------------------------------------------------------- closed forms

def wachter_support(gamma: float, sigma: float):
    f = sigma / (1.0 + sigma)
    r1 = math.sqrt(1.0 - sigma * gamma / (1.0 + sigma))
    r2 = math.sqrt(gamma / (1.0 + sigma))
    return f * (r1 - r2) ** 2, f * (r1 + r2) ** 2


def _check_bulk(gamma, sigma):
    if LimitParams(gamma, sigma).regime is not Regime.BULK:
        raise ParameterDomainError(
            f"Wachter law needs 0 < sigma*gamma <= 1, got gamma={gamma}, sigma={sigma}")


def wachter_density(x, gamma: float, sigma: float):
    _check_bulk(gamma, sigma)
    u1, u2 = wachter_support(gamma, sigma)
    xa = np.asarray(x, dtype=float)
    inside = (xa >= u1) & (xa <= u2) & (xa > 0.0) & (xa < 1.0)
    xs = np.where(inside, xa, 0.5)
    val = (1.0 + sigma) / (2.0 * math.pi * sigma * gamma) \
        * _sqrt_pos((xs - u1) * (u2 - xs)) / (xs * (1.0 - xs))
    return _as_output(x, np.where(inside, val, 0.0))


def marchenko_pastur_density(x, gamma: float):
    if not 0.0 < gamma <= 1.0:
        raise ParameterDomainError(f"Marchenko-Pastur law needs gamma in (0, 1], got {gamma}")
    g1 = (math.sqrt(gamma) - 1.0) ** 2
    g2 = (math.sqrt(gamma) + 1.0) ** 2
    xa = np.asarray(x, dtype=float)
    inside = (xa >= g1) & (xa <= g2) & (xa > 0.0)
    xs = np.where(inside, xa, 1.0)
    val = _sqrt_pos((xs - g1) * (g2 - xs)) / (2.0 * math.pi * gamma * xs)
    return _as_output(x, np.where(inside, val, 0.0))


def semicircle_density(x, sigma: float = 0.0):
    """``(1 + sigma)/(2 pi) * sqrt(4/(1 + sigma) - x**2)``."""
    xa = np.asarray(x, dtype=float)
    val = (1.0 + sigma) / (2.0 * math.pi) * _sqrt_pos(4.0 / (1.0 + sigma) - xa * xa)
    return _as_output(x, val)


def modified_wachter_density(x, params: LimitParams):
    g, s = params.gamma, params.sigma
    if params.regime is Regime.BULK:
        rg = math.sqrt(g)
        xa = np.asarray(x, dtype=float)
        val = s * rg / (1.0 + s) * wachter_density(s * (rg * xa + 1.0) / (1.0 + s), g, s)
        return _as_output(x, np.asarray(val))
    if params.regime is Regime.SIGMA_ZERO:
        rg = math.sqrt(g)
        xa = np.asarray(x, dtype=float)
        return _as_output(x, rg * np.asarray(marchenko_pastur_density(1.0 + rg * xa, g)))
    return semicircle_density(x, s)


def support_of_limit(params: LimitParams) -> SupportInterval:
    g, s = params.gamma, params.sigma
    centre = (1.0 - s) * math.sqrt(g)
    half = 2.0 * math.sqrt(1.0 + s - s * g)
    return SupportInterval((centre - half) / (1.0 + s), (centre + half) / (1.0 + s))


def limiting_jacobi(params: LimitParams) -> LimitJacobiParams:
    g, s = params.gamma, params.sigma
    return LimitJacobiParams(
        alpha0=0.0,
        beta0=1.0 / math.sqrt(1.0 + s),
        alpha1=math.sqrt(g) * (1.0 - s) / (1.0 + s),
        beta1=math.sqrt(1.0 + s - s * g) / (1.0 + s),
    )


def jacobi_density(x, p: LimitJacobiParams):
    """Closed-form density of the spectral measure of ``p``'s Jacobi matrix.

    Valid when the measure has no atoms (true for all :func:`limiting_jacobi`
    parameters); the continuous part is returned either way.
    """
    xa = np.asarray(x, dtype=float)
    band = 4.0 * p.beta1 ** 2 - (xa - p.alpha1) ** 2
    den = (p.beta0 ** 4 + p.beta1 ** 2 * (xa - p.alpha0) ** 2
           + p.beta0 ** 2 * (xa - p.alpha0) * (p.alpha1 - xa))
    inside = (band > 0.0) & (den > 0.0)
    val = p.beta0 ** 2 * _sqrt_pos(band) / (2.0 * math.pi * np.where(inside, den, 1.0))
    return _as_output(x, np.where(inside, val, 0.0))


# ----------------------------------------------------------------- m-function

def m1_function(z, p: LimitJacobiParams):
    """Herglotz root of ``beta1^2 m^2 + (z - alpha1) m + 1 = 0``."""
    z = np.asarray(z, dtype=complex)
    w = z - p.alpha1
    root = np.sqrt(w * w - 4.0 * p.beta1 ** 2)
    m1 = (-w + root) / (2.0 * p.beta1 ** 2)
    # exactly one root has Im > 0 when Im z > 0 (the roots multiply to 1/beta1^2)
    flip = m1.imag <= 0.0
    root = np.where(flip, -root, root)
    return np.where(flip, (-w + root) / (2.0 * p.beta1 ** 2), m1), root


def m_function(z, p: LimitJacobiParams):
    """Stieltjes transform ``int d mu(x) / (x - z)`` of the spectral measure of ``p``.

    Uses the closed form obtained by solving ``-1/m = z - alpha0 + beta0^2 m1``
    with the Herglotz branch of ``m1``.
    """
    z_in = z
    z = np.asarray(z, dtype=complex)
    if np.any(~(z.imag > 0.0)):
        raise ParameterDomainError("m_function needs Im z > 0")
    _, root = m1_function(z, p)
    b02, b12 = p.beta0 ** 2, p.beta1 ** 2
    num = 2.0 * b12 * (z - p.alpha0) - b02 * (z - p.alpha1) - b02 * root
    den = 2.0 * b02 ** 2 + 2.0 * b12 * (z - p.alpha0) ** 2 \
        + 2.0 * b02 * (z - p.alpha0) * (p.alpha1 - z)
    m = -num / den
    return complex(m) if np.ndim(z_in) == 0 else m


def density_from_m(x, p: LimitJacobiParams, epsilons=DEFAULT_EPSILONS,
                   tol: float = 1e-6, full_output: bool = False):
    """Density from ``lim_{eps -> 0} Im m(x + i eps) / pi``.

    The values at the given ``epsilons`` are extrapolated polynomially to
    ``eps = 0`` (Richardson).  The gap between the full extrapolation and the
    one that drops the largest ``eps`` serves as an error estimate; a
    ``RuntimeWarning`` is issued where it exceeds ``tol``, which happens near
    the support endpoints where ``Im m`` is not smooth in ``eps``.

    Returns
    -------
    density : float or ndarray
    error : float or ndarray
        Only with ``full_output=True``, together with a boolean ``converged``.
    """
    eps = np.asarray(epsilons, dtype=float)
    if eps.ndim != 1 or eps.size < 2 or np.any(eps <= 0.0):
        raise ValueError("need at least two positive epsilons")
    xa = np.asarray(x, dtype=float)
    vals = np.stack([np.imag(m_function(xa + 1j * e, p)) / math.pi for e in eps])

    def extrapolate(idx):
        e = eps[idx]
        out = 0.0
        for j in range(e.size):
            wj = np.prod([e[i] / (e[i] - e[j]) for i in range(e.size) if i != j])
            out = out + wj * vals[idx[j]]
        return out

    full = extrapolate(np.arange(eps.size))
    partial = extrapolate(np.arange(1, eps.size))
    err = np.abs(full - partial)
    converged = err <= tol
    if not np.all(converged):
        warnings.warn(f"Stieltjes inversion not converged at {int(np.size(err) - np.count_nonzero(converged))}"
                      " point(s); likely near a support endpoint", RuntimeWarning, stacklevel=2)
    dens = np.maximum(full, 0.0)
    if np.ndim(x) == 0:
        dens, err, converged = float(dens), float(err), bool(converged)
    if full_output:
        return dens, err, converged
    return dens


# ------------------------------------------------------------------ quadrature

def integrate_on_support(f, lower: float, upper: float, **quad_kw) -> float:
    """``int_lower^upper f(x) dx`` after ``x = lower + (upper - lower) sin^2(t)``.

    The substitution cancels square-root behaviour at both endpoints, and the
    ``x^{-1/2}`` hard edges of Marchenko-Pastur and arcsine laws.
    """
    w = upper - lower
    kw = dict(epsabs=1e-13, epsrel=1e-13, limit=200)
    kw.update(quad_kw)

    def integrand(t):
        return f(lower + w * math.sin(t) ** 2) * w * math.sin(2.0 * t)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(integrand, 0.0, math.pi / 2.0, **kw)
    return val


def limit_density(params: LimitParams):
    """``(density, support)`` of the limit law for ``params``."""
    sup = support_of_limit(params)
    return (lambda x: modified_wachter_density(x, params)), sup


def law_moments(params: LimitParams, K: int) -> np.ndarray:
    """``int x^k h~(x) dx`` for ``k = 0..K`` by quadrature."""
    f, sup = limit_density(params)
    return np.array([integrate_on_support(lambda x, k=k: x ** k * f(x), sup.lower, sup.upper)
                     for k in range(K + 1)])


class LimitCDF:
    """CDF and quantile of a limit law, tabulated once and interpolated.

    The table uses ``grid`` nodes ``x_j = lower + width * sin^2(theta_j)`` with
    uniform ``theta_j``, which clusters nodes at the edges.  Each cell is
    integrated with 8-point Gauss-Legendre in ``theta``; interpolation is
    monotone cubic (PCHIP).
    """

    def __init__(self, params: LimitParams, grid: int = 4096):
        self.params = params
        f, sup = limit_density(params)
        self.support = sup
        w = sup.width
        theta = np.linspace(0.0, math.pi / 2.0, grid)
        nodes, weights = np.polynomial.legendre.leggauss(8)
        lo, hi = theta[:-1], theta[1:]
        half = 0.5 * (hi - lo)
        t = (0.5 * (hi + lo))[:, None] + half[:, None] * nodes[None, :]
        vals = np.asarray(f(sup.lower + w * np.sin(t) ** 2)) * w * np.sin(2.0 * t)
        cells = (vals * weights[None, :]).sum(axis=1) * half
        F = np.concatenate(([0.0], np.cumsum(cells)))
        self.mass = float(F[-1])
        F /= F[-1]
        x = sup.lower + w * np.sin(theta) ** 2
        x[-1] = sup.upper
        self._cdf = PchipInterpolator(x, F, extrapolate=False)
        keep = np.concatenate(([True], np.diff(F) > 0.0))
        self._quantile = PchipInterpolator(F[keep], x[keep], extrapolate=False)

    def __call__(self, x):
        xa = np.asarray(x, dtype=float)
        out = self._cdf(np.clip(xa, self.support.lower, self.support.upper))
        out = np.where(xa < self.support.lower, 0.0, np.where(xa > self.support.upper, 1.0, out))
        out = np.clip(out, 0.0, 1.0)
        return _as_output(x, out)

    def quantile(self, t):
        ta = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        return _as_output(t, self._quantile(ta))


@functools.lru_cache(maxsize=32)
def _cached_cdf(gamma: float, sigma: float, grid: int) -> LimitCDF:
    return LimitCDF(LimitParams(gamma, sigma), grid)


def limit_cdf(params: LimitParams, grid: int = 4096) -> LimitCDF:
    return _cached_cdf(params.gamma, params.sigma, grid)
