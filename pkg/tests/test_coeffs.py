import io
import json
import math

import numpy as np
import pytest

from jacobi_spectra.coeffs import (NotNonnegativeSupport, NotUnitInterval, RangeError,
                                   chain_from_uv, chain_from_zk, coefficients_from_json,
                                   coefficients_to_json, decompose, from_unit_interval,
                                   jacobi_from_uv, jacobi_from_zk, to_unit_interval,
                                   uv_bounds, uv_from_chain, uv_from_jacobi, zk_from_chain,
                                   zk_from_jacobi)
from jacobi_spectra.ensemble import EnsembleParams, LimitParams, ParameterDomainError
from jacobi_spectra.limits import limiting_jacobi
from jacobi_spectra.rng import SeededStream
from jacobi_spectra.sampler import build_tridiagonal, draw_coefficients

P = LimitParams(0.5, 1.0)


def wachter_chain(params, length):
    p = np.empty(length)
    p[0::2] = params.sigma / (1 + params.sigma)
    p[1::2] = params.c
    return p


def random_chain(rng, length):
    return rng.uniform(0.02, 0.98, length)


def perturbed_wachter_chain(rng, params, length, rel=0.9):
    """Relative perturbations of the Wachter chain; the (u, v) recovery is well conditioned here."""
    return wachter_chain(params, length) * (1 + rel * rng.uniform(-1, 1, length))


# ------------------------------------------------------------------------- z_k

def test_marchenko_pastur_z():
    g = 0.3
    a = np.array([1.0] + [1.0 + g] * 5)
    b = np.full(6, math.sqrt(g))
    z = zk_from_jacobi(a, b)
    np.testing.assert_allclose(z, np.tile([1.0, g], 6), rtol=1e-14)


def test_negative_first_z():
    with pytest.raises(NotNonnegativeSupport) as exc:
        zk_from_jacobi([-1.0], [])
    assert exc.value.index == 1 and exc.value.stage == "zk_from_jacobi"


def test_length_mismatch():
    with pytest.raises(ParameterDomainError):
        zk_from_jacobi([1.0, 2.0], [1.0, 1.0, 1.0])


def test_jacobi_from_zk_examples():
    a, b = jacobi_from_zk([1.0, 0.25, 1.0])
    np.testing.assert_allclose(a, [1.0, 1.25])
    np.testing.assert_allclose(b, [0.5])
    a, b = jacobi_from_zk(np.ones(8))
    np.testing.assert_array_equal(a, [1, 2, 2, 2])
    np.testing.assert_array_equal(b, [1, 1, 1, 1])
    with pytest.raises(ParameterDomainError):
        jacobi_from_zk([1.0, 0.0])


def test_zk_round_trip(rng):
    for _ in range(50):
        z = rng.uniform(0.05, 2.0, 2 * 7 - 1)
        a, b = jacobi_from_zk(z)
        np.testing.assert_allclose(zk_from_jacobi(a, b), z, rtol=1e-13)
        a2, b2 = jacobi_from_zk(zk_from_jacobi(a, b))
        np.testing.assert_allclose(a2, a, rtol=1e-13)
        np.testing.assert_allclose(b2, b, rtol=1e-13)


# ---------------------------------------------------------------------- chains

def test_wachter_chain_reproduces_itself():
    p = wachter_chain(P, 20)
    np.testing.assert_allclose(chain_from_zk(zk_from_chain(p)), p, rtol=1e-14)


def test_chain_rejects_out_of_range():
    with pytest.raises(NotUnitInterval):
        chain_from_zk([2.0])
    with pytest.raises(ParameterDomainError):
        chain_from_zk([0.1], p0=1.0)


def test_chain_round_trip(rng):
    p = random_chain(rng, 30)
    z = zk_from_chain(p)
    np.testing.assert_allclose(z, p * (1 - np.concatenate(([0.0], p[:-1]))), rtol=1e-15)
    np.testing.assert_allclose(chain_from_zk(z), p, rtol=1e-13)


# ------------------------------------------------------------------------ u, v

def test_wachter_chain_gives_minimizer():
    u, v = uv_from_chain(wachter_chain(P, 20), P)
    np.testing.assert_allclose(u, 0.0, rtol=0, atol=1e-14)
    np.testing.assert_allclose(v, 1.0, rtol=0, atol=1e-14)


def test_uv_linearity():
    g, s = P.gamma, P.sigma
    t = 0.1
    p = wachter_chain(P, 4)
    p[0] = s / (1 + s) + math.sqrt(g) * s * t / (1 + s)
    u, _ = uv_from_chain(p, P)
    assert u[0] == pytest.approx(t, abs=1e-15)


def test_uv_range_violation():
    # p in (0, 1) always lands in range; a value past 1 must be rejected
    p = wachter_chain(P, 4)
    p[1] = 1.0 + 1e-9
    with pytest.raises(RangeError):
        uv_from_chain(p, P)
    (ulo, uhi), (vlo, vhi) = uv_bounds(P)
    assert (ulo, uhi, vlo, vhi) == pytest.approx((-math.sqrt(2), math.sqrt(2), 0.0, 4.0))


def test_uv_from_chain_bulk_only():
    with pytest.raises(ParameterDomainError):
        uv_from_chain([0.5, 0.5], LimitParams(0.5, 0.0))


def test_minimizer_gives_limiting_matrix():
    for params in (P, LimitParams(1, 1), LimitParams(0.3, 2.0), LimitParams(0.5, 0.0),
                   LimitParams(0.0, 0.0), LimitParams(0.0, 1.5)):
        a, b = jacobi_from_uv(np.zeros(6), np.ones(6), params)
        ea, eb = limiting_jacobi(params).coefficients(6)
        np.testing.assert_allclose(a, ea, rtol=0, atol=1e-15)
        np.testing.assert_allclose(b, eb, rtol=1e-15)


def test_jacobi_from_uv_hand_case():
    a, b = jacobi_from_uv([0.1, 0.0], [1.0, 1.0], LimitParams(1, 1))
    assert a[0] == pytest.approx(0.1, abs=1e-15)
    assert b[0] ** 2 == pytest.approx(0.495, rel=1e-14)


def test_two_routes_from_uv_agree(rng):
    """Closed-form (u, v) -> (a, b) against chain -> z -> Jacobi -> affine map."""
    for params in (P, LimitParams(1, 1), LimitParams(0.3, 2.0)):
        for _ in range(20):
            u, v = uv_from_chain(random_chain(rng, 20), params)
            a, b = jacobi_from_uv(u, v, params)
            al, bl = jacobi_from_zk(zk_from_chain(chain_from_uv(u, v, params)))
            a2, b2 = from_unit_interval(al, bl, params)
            np.testing.assert_allclose(a, a2, rtol=0, atol=1e-12)
            np.testing.assert_allclose(b, b2, rtol=0, atol=1e-12)


def test_unit_interval_map_round_trip(rng):
    a, b = rng.normal(size=5), rng.uniform(0.1, 1, 4)
    a2, b2 = from_unit_interval(*to_unit_interval(a, b, P), P)
    np.testing.assert_allclose(a2, a, atol=1e-14)
    np.testing.assert_allclose(b2, b, atol=1e-14)


def test_full_round_trip(rng):
    for _ in range(100):
        u, v = uv_from_chain(perturbed_wachter_chain(rng, P, 20), P)
        a, b = jacobi_from_uv(u, v, P)
        d = decompose(a, b, P)
        np.testing.assert_allclose(d.u, u, rtol=0, atol=1e-12)
        np.testing.assert_allclose(d.v, v, rtol=0, atol=1e-12)
        a2, b2 = jacobi_from_uv(d.u, d.v, P)
        np.testing.assert_allclose(a2, a, rtol=0, atol=1e-12)
        np.testing.assert_allclose(b2, b, rtol=0, atol=1e-12)


def test_backward_stable_on_extreme_chains(rng):
    # chains near 0 or 1 amplify rounding in (u, v), but the recovered (u, v)
    # always reproduce their (a, b) to rounding level
    for _ in range(100):
        u, v = uv_from_chain(random_chain(rng, 20), P)
        a, b = jacobi_from_uv(u, v, P)
        d = decompose(a, b, P)
        a2, b2 = jacobi_from_uv(d.u, d.v, P)
        np.testing.assert_allclose(a2, a, rtol=0, atol=1e-14)
        np.testing.assert_allclose(b2, b, rtol=0, atol=1e-14)


@pytest.mark.parametrize("params", [LimitParams(0.5, 0.0), LimitParams(1.0, 0.0),
                                    LimitParams(0.0, 0.0), LimitParams(0.0, 2.0)])
def test_degenerate_round_trip(rng, params):
    for _ in range(20):
        u = rng.uniform(-0.5, 0.5, 8)
        v = rng.uniform(0.2, 1.8, 7)
        a, b = jacobi_from_uv(u, v, params)
        u2, v2 = uv_from_jacobi(a, b, params)
        np.testing.assert_allclose(u2, u, atol=1e-12)
        np.testing.assert_allclose(v2, v, atol=1e-12)


@pytest.mark.parametrize("limit,near", [
    (LimitParams(0.5, 0.0), LimitParams(0.5, 1e-9)),
    (LimitParams(0.0, 1.0), LimitParams(1e-12, 1.0)),
])
def test_degenerate_formulas_are_limits(rng, limit, near):
    u = rng.uniform(-0.5, 0.5, 6)
    v = rng.uniform(0.5, 1.5, 6)
    a0, b0 = jacobi_from_uv(u, v, limit)
    a1, b1 = jacobi_from_uv(u, v, near)
    np.testing.assert_allclose(a0, a1, atol=1e-6)
    np.testing.assert_allclose(b0, b1, atol=1e-6)


def test_sampled_matrices_are_chain_sequences():
    ens = EnsembleParams(2, 50, 100, 100)
    for r in range(100):
        J = build_tridiagonal(draw_coefficients(ens, SeededStream(12, r)))
        p = chain_from_zk(zk_from_jacobi(J.diag, J.offdiag))
        assert np.all((p > 0) & (p < 1))


def test_error_localization(rng):
    u, v = uv_from_chain(perturbed_wachter_chain(rng, P, 20, rel=0.3), P)
    a, b = to_unit_interval(*jacobi_from_uv(u, v, P), P)
    z, p = zk_from_jacobi(a, b), chain_from_zk(zk_from_jacobi(a, b))
    j = 4
    b2 = b.copy()
    b2[j - 1] *= 1.01
    z2 = zk_from_jacobi(a, b2)
    p2 = chain_from_zk(z2)
    first = 2 * j - 1      # 1-based index of the first entry allowed to change
    np.testing.assert_array_equal(z2[:first - 1], z[:first - 1])
    np.testing.assert_array_equal(p2[:first - 1], p[:first - 1])
    assert not np.array_equal(z2, z)


def test_json_round_trip(tmp_path):
    arrays = {"a": [0.1, 0.2], "b": [0.3], "u": [0.0, 1e-300]}
    text = coefficients_to_json(tmp_path / "c.json", **arrays)
    doc = json.loads(text)
    assert doc["index_base"] == 1
    back = coefficients_from_json(tmp_path / "c.json")
    for k, vals in arrays.items():
        np.testing.assert_array_equal(back[k], vals)
    buf = io.StringIO()
    coefficients_to_json(buf, a=[1.0])
    assert coefficients_from_json(io.StringIO(buf.getvalue()))["a"].tolist() == [1.0]


def test_json_rejects_bad_input():
    with pytest.raises(ValueError):
        coefficients_to_json(q=[1.0])
    with pytest.raises(ValueError):
        coefficients_from_json({"index_base": 0, "a": [1.0]})
    with pytest.raises(ValueError):
        coefficients_from_json({"a": ["x"]})
