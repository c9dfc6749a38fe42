import math
import warnings

import numpy as np
import pytest
from scipy import integrate

from jacobi_spectra.ensemble import LimitParams, ParameterDomainError
from jacobi_spectra.experiments import wasserstein2_quantiles
from jacobi_spectra.limits import (LimitCDF, LimitJacobiParams, density_from_m,
                                   integrate_on_support, jacobi_density, law_moments,
                                   limit_cdf, limiting_jacobi, m1_function, m_function,
                                   marchenko_pastur_density, modified_wachter_density,
                                   semicircle_density, support_of_limit, wachter_density,
                                   wachter_support)
from jacobi_spectra.spectra import moments_by_recurrence

PARAMS = [LimitParams(0.5, 1.0), LimitParams(1.0, 0.0), LimitParams(0.0, 0.0),
          LimitParams(0.3, 2.0), LimitParams(0.0, 1.0), LimitParams(0.25, 0.0),
          LimitParams(0.5, 2.0)]


def bulk_points(params, k=100, margin=0.05):
    sup = support_of_limit(params)
    return np.linspace(sup.lower + margin * sup.width, sup.upper - margin * sup.width, k)


# ------------------------------------------------------------------ closed forms

def test_wachter_outside_support_is_zero():
    u1, u2 = wachter_support(0.5, 1.0)
    assert wachter_density(u1 - 1e-3, 0.5, 1.0) == 0.0
    assert wachter_density(u2 + 1e-3, 0.5, 1.0) == 0.0
    assert wachter_density(0.5 * (u1 + u2), 0.5, 1.0) > 0


def test_wachter_arcsine_case():
    assert wachter_support(1.0, 1.0) == pytest.approx((0.0, 1.0), abs=1e-15)
    assert wachter_density(0.5, 1.0, 1.0) == pytest.approx(2 / math.pi, rel=1e-14)
    x = np.linspace(0.01, 0.99, 50)
    np.testing.assert_allclose(wachter_density(x, 1.0, 1.0), 1 / (math.pi * np.sqrt(x * (1 - x))),
                               rtol=1e-13)


@pytest.mark.parametrize("gamma,sigma", [(0.5, 1.0), (1.0, 1.0), (0.3, 2.0), (0.9, 1.1)])
def test_wachter_mass(gamma, sigma):
    u1, u2 = wachter_support(gamma, sigma)
    mass = integrate_on_support(lambda x: wachter_density(x, gamma, sigma), u1, u2)
    assert abs(mass - 1) < 1e-8


def test_wachter_domain():
    with pytest.raises(ParameterDomainError):
        wachter_density(0.5, 0.5, 0.0)


def test_marchenko_pastur():
    assert marchenko_pastur_density(1.0, 1.0) == pytest.approx(math.sqrt(3) / (2 * math.pi),
                                                               rel=1e-14)
    assert marchenko_pastur_density(0.1, 0.25) == 0.0   # below (sqrt(g) - 1)^2 = 0.25
    g1, g2 = (0.5 - 1) ** 2, (0.5 + 1) ** 2
    mass = integrate_on_support(lambda x: marchenko_pastur_density(x, 0.25), g1, g2)
    assert abs(mass - 1) < 1e-8
    mass1 = integrate_on_support(lambda x: marchenko_pastur_density(x, 1.0), 0.0, 4.0)
    assert abs(mass1 - 1) < 1e-8
    with pytest.raises(ParameterDomainError):
        marchenko_pastur_density(1.0, 1.5)


def test_modified_wachter_values():
    assert modified_wachter_density(0.0, LimitParams(0, 0)) == pytest.approx(1 / math.pi)
    assert modified_wachter_density(0.0, LimitParams(0, 1)) == pytest.approx(math.sqrt(2) / math.pi)
    assert modified_wachter_density(5.0, LimitParams(0.5, 1)) == 0.0


@pytest.mark.parametrize("params", PARAMS)
def test_modified_wachter_mass(params):
    f = lambda x: modified_wachter_density(x, params)
    sup = support_of_limit(params)
    assert abs(integrate_on_support(f, sup.lower, sup.upper) - 1) < 1e-8


def test_modified_wachter_matches_direct_change_of_variables():
    # oracle: push the Wachter law through x = ((1 + s) l - s)/(s sqrt(g)) numerically
    g, s = 0.5, 1.0
    p = LimitParams(g, s)
    x = bulk_points(p, 20)
    lam = s * (math.sqrt(g) * x + 1) / (1 + s)
    h = 1e-6
    dlam = (s * (math.sqrt(g) * (x + h) + 1) / (1 + s) - lam) / h
    np.testing.assert_allclose(modified_wachter_density(x, p),
                               wachter_density(lam, g, s) * dlam, rtol=1e-6)


@pytest.mark.parametrize("params,expected", [
    (LimitParams(0, 0), (-2.0, 2.0)),
    (LimitParams(1, 1), (-1.0, 1.0)),
])
def test_support_values(params, expected):
    sup = support_of_limit(params)
    assert (sup.lower, sup.upper) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("params", PARAMS)
def test_support_matches_density(params):
    sup = support_of_limit(params)
    f = lambda x: modified_wachter_density(x, params)
    inside = np.linspace(sup.lower, sup.upper, 2001)[1:-1]
    assert np.all(f(inside) > 0)
    assert f(sup.lower - 1e-9) == 0.0 and f(sup.upper + 1e-9) == 0.0
    # soft edges vanish; hard edges (lower at gamma = 1, upper at sigma*gamma = 1) blow up
    if params.gamma < 1.0:
        assert f(sup.lower + 1e-12 * sup.width) < 1e-4
    if params.gamma * params.sigma < 1.0:
        assert f(sup.upper - 1e-12 * sup.width) < 1e-4
    assert sup.contains(0.5 * (sup.lower + sup.upper))


def test_semicircle_cdf_oracle():
    cdf = limit_cdf(LimitParams(0, 0))
    x = np.linspace(-1.99, 1.99, 200)
    exact = 0.5 + x * np.sqrt(4 - x * x) / (4 * math.pi) + np.arcsin(x / 2) / math.pi
    np.testing.assert_allclose(cdf(x), exact, atol=1e-9)
    assert cdf(-3.0) == 0.0 and cdf(3.0) == 1.0
    np.testing.assert_allclose(cdf.quantile(exact), x, atol=1e-7)


def test_limit_cdf_against_quad():
    p = LimitParams(0.5, 1.0)
    cdf = LimitCDF(p)
    assert abs(cdf.mass - 1) < 1e-10
    sup = support_of_limit(p)
    for x in (-0.8, 0.0, 0.3, 1.1):
        ref = integrate.quad(lambda t: modified_wachter_density(t, p), sup.lower, x,
                             epsabs=1e-13, limit=200)[0]
        assert cdf(x) == pytest.approx(ref, abs=1e-9)


# --------------------------------------------------------- limiting Jacobi matrix

@pytest.mark.parametrize("params,expected", [
    (LimitParams(0, 0), (0, 1, 0, 1)),
    (LimitParams(1, 1), (0, 1 / math.sqrt(2), 0, 0.5)),
    (LimitParams(0.5, 1), (0, 1 / math.sqrt(2), 0, math.sqrt(1.5) / 2)),
])
def test_limiting_jacobi(params, expected):
    p = limiting_jacobi(params)
    assert (p.alpha0, p.beta0, p.alpha1, p.beta1) == pytest.approx(expected, abs=1e-15)


def test_limit_jacobi_params_validation():
    with pytest.raises(ParameterDomainError):
        LimitJacobiParams(0, 0, 0, 1)
    J = LimitJacobiParams(0.1, 0.7, 0.2, 0.5).truncation(4)
    np.testing.assert_array_equal(J.diag, [0.1, 0.2, 0.2, 0.2])
    np.testing.assert_array_equal(J.offdiag, [0.7, 0.5, 0.5])


SC = LimitJacobiParams(0.0, 1.0, 0.0, 1.0)


def _zgrid():
    re = np.linspace(-4, 4, 100)
    return np.concatenate([re + 1j * im for im in (0.1, 1.0, 10.0)])


def test_m_function_semicircle_value():
    m = m_function(2j, SC)
    assert m == pytest.approx((2 * math.sqrt(2) - 2) / 2 * 1j, abs=1e-15)
    z = _zgrid()
    np.testing.assert_allclose(m_function(z, SC), (np.sqrt(z - 2) * np.sqrt(z + 2) - z) / 2,
                               atol=1e-13)


@pytest.mark.parametrize("params", PARAMS)
def test_m_function_herglotz_and_identity(params):
    p = limiting_jacobi(params)
    z = _zgrid()
    m = m_function(z, p)
    m1, _ = m1_function(z, p)
    assert np.all(m.imag > 0) and np.all(m1.imag > 0)
    resid = np.abs(1 / m + z - p.alpha0 + p.beta0 ** 2 * m1)
    assert resid.max() < 1e-12


def test_m_function_is_stieltjes_transform():
    # oracle: integrate the density against 1/(x - z) directly
    params = LimitParams(0.5, 1.0)
    p = limiting_jacobi(params)
    sup = support_of_limit(params)
    f = lambda x: modified_wachter_density(x, params)
    for z in (0.3 + 0.5j, -1.0 + 0.2j, 2.0 + 1.0j):
        re = integrate_on_support(lambda x: f(x) * (1 / (x - z)).real, sup.lower, sup.upper)
        im = integrate_on_support(lambda x: f(x) * (1 / (x - z)).imag, sup.lower, sup.upper)
        assert m_function(z, p) == pytest.approx(re + 1j * im, abs=1e-10)


def test_m_function_domain():
    with pytest.raises(ParameterDomainError):
        m_function(1.0 + 0j, SC)


@pytest.mark.parametrize("params", PARAMS)
def test_jacobi_closed_form_matches_limit_density(params):
    x = np.linspace(-4, 4, 801)
    np.testing.assert_allclose(jacobi_density(x, limiting_jacobi(params)),
                               modified_wachter_density(x, params), atol=1e-12)


def test_density_from_m_basic():
    assert density_from_m(0.0, SC) == pytest.approx(1 / math.pi, abs=1e-8)
    p = LimitParams(0.5, 1.0)
    assert density_from_m(0.0, limiting_jacobi(p)) == pytest.approx(
        modified_wachter_density(0.0, p), abs=1e-6)
    assert density_from_m(10.0, limiting_jacobi(p)) < 1e-6


def test_density_from_m_flags_endpoint():
    with pytest.warns(RuntimeWarning):
        _, err, ok = density_from_m(2.0, SC, full_output=True)
    assert not ok and err > 1e-6


@pytest.mark.parametrize("params", [LimitParams(0.5, 1.0), LimitParams(1.0, 0.0),
                                    LimitParams(0.0, 0.0)])
def test_density_from_m_bulk(params):
    x = bulk_points(params)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        d = density_from_m(x, limiting_jacobi(params))
    np.testing.assert_allclose(d, modified_wachter_density(x, params), rtol=0, atol=1e-6)


def test_moments_match_truncation():
    params = LimitParams(0.5, 1.0)
    quad = law_moments(params, 8)
    rec = moments_by_recurrence(limiting_jacobi(params).truncation(200), 8).moments
    np.testing.assert_allclose(quad, rec, rtol=0, atol=1e-6)
    assert quad[0] == pytest.approx(1.0, abs=1e-10)


def test_w2_decreases_as_sigma_vanishes():
    ref = limit_cdf(LimitParams(0.5, 0.0)).quantile
    d = [wasserstein2_quantiles(limit_cdf(LimitParams(0.5, s)).quantile, ref)
         for s in (0.2, 0.1, 0.05)]
    assert d[0] > d[1] > d[2] > 0
