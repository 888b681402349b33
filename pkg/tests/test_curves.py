from __future__ import annotations

import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import fresnel

from lagmin import curves as C
from lagmin.errors import InvalidParameterError, NeedsMoreIntegrationError, OriginApproachError


def apsidal_closed_form(c: float) -> float:
    """Apsidal ratio of the n = 2 constant-A spirals, independent of r0."""
    return (c / np.sqrt(c * c - 4.0) - 1.0) / 2.0


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(-6.0, 6.0))
def test_cornu_matches_scipy_fresnel(lam, s):
    k = np.sqrt(lam / np.pi)
    S, Cf = fresnel(s * k)
    expected = (Cf + 1j * S) / k
    assert abs(C.make_cornu(lam)(np.array(s)) - expected) < 1e-9


def test_cornu_curvature_is_linear():
    for lam in (0.5, 1.0, 2.0):
        s = np.linspace(-5, 5, 41)
        assert np.max(np.abs(C.curvature(C.make_cornu(lam), s) - lam * s)) < 1e-8


def test_negative_lambda_mirrors_cornu():
    s = np.linspace(-4, 4, 17)
    assert np.allclose(C.make_cornu(-1.0)(s), np.conj(C.make_cornu(1.0)(s)), atol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_circle_has_constant_a(n):
    R = 1.5
    s = np.linspace(0.1, 9.0, 13)
    c = C.make_circle(R)
    assert np.allclose(C.a_alpha(c, n, s), n * R ** (n - 2), atol=1e-9)
    assert np.allclose(C.a_alpha_power_curvature(c, n, s), R ** (n - 2), atol=1e-9)


def test_g_alpha_derivative_consistency():
    c = C.make_cornu(1.0, (0.5, 4.0))
    s = np.linspace(1.0, 3.5, 11)
    h = 1e-4
    fd = (C.g_alpha(c, 3, s + h) - C.g_alpha(c, 3, s - h)) / (2 * h)
    assert np.max(np.abs(fd - C.g_alpha_prime(c, 3, s))) < 1e-6


@pytest.mark.parametrize("n,r0", [(2, 0.7), (2, 1.3), (3, 0.5), (3, 1.2)])
def test_constant_a_circle_solution(n, r0):
    # the circle of radius r0 about the origin has A = n r0^(n-2); for n > 2
    # it is unstable, so one revolution is integrated
    c = C.make_constantA(n, n * r0 ** (n - 2), r0, length=2 * np.pi * r0)
    s = np.linspace(0, c.domain[1], 200)
    assert np.max(np.abs(np.abs(c(s)) - r0)) < 1e-7


@pytest.mark.parametrize("c_value", [2.5, 3.0, 5.0])
def test_apsidal_ratio_matches_closed_form(c_value):
    for r0 in (0.4, 1.0, 1.7):
        curve = C.make_constantA(2, c_value, r0, length=12.0 * r0)
        assert abs(C.apsidal_ratio(curve) - apsidal_closed_form(c_value)) < 1e-9


def test_constant_a_has_constant_a():
    c = C.make_constantA(3, 1.0, 0.31, length=3.0)
    s = np.linspace(0.2, 2.8, 30)
    assert np.max(np.abs(C.a_alpha(c, 3, s) - 1.0)) < 1e-7


def test_closure_rational_case():
    # c = 5/2 gives apsidal ratio exactly 1/3
    res = C.detect_closure(C.make_constantA(2, 2.5, 1.0, length=30.0))
    assert res.closed and res.rotation == (1, 3) and res.gap < 1e-6


def test_closure_irrational_case_is_open():
    res = C.detect_closure(C.make_constantA(2, 5.0, 1.0, length=10.0), tol=1e-5)
    assert not res.closed
    assert abs(res.ratio - apsidal_closed_form(5.0)) < 1e-9


def test_closure_simple_families():
    assert C.detect_closure(C.make_circle(2.0)).closed
    assert not C.detect_closure(C.make_cornu(1.0)).closed


def test_shooting_hits_a_third_for_n3():
    c = C.shoot_constantA(3, 1.0, 1 / 3, (0.3, 0.32), length=3.0)
    assert abs(c.params["r0"] - 0.30570260190777376) < 1e-8
    res = C.detect_closure(c, tol=1e-7)
    assert res.closed and res.rotation == (1, 3)


def test_shooting_without_crossing_raises():
    with pytest.raises(InvalidParameterError):
        C.shoot_constantA(2, 5.0, 1 / 3, (0.5, 1.5))


def test_short_trajectory_needs_more_integration():
    with pytest.raises(NeedsMoreIntegrationError) as exc:
        C.apsidal_ratio(C.make_constantA(2, 5.0, 1.0, length=0.1))
    assert exc.value.suggested_length > 0.1


def test_origin_approach_is_reported():
    # a radial line towards the origin has A = 0 when n = 2
    with pytest.raises(OriginApproachError) as exc:
        C.make_constantA(2, 0.0, 1.0, theta0=np.pi, length=3.0)
    assert exc.value.last_time < 1.0


def test_invalid_parameters():
    with pytest.raises(InvalidParameterError):
        C.make_circle(-1.0)
    with pytest.raises(InvalidParameterError):
        C.make_constantA(1, 1.0, 1.0)
    with pytest.raises(InvalidParameterError):
        C.make_constantA(2, 1.0, 0.0)


def test_curve_csv_layout():
    c = C.make_cornu(1.0)
    s = np.linspace(-6, 6, 121)
    text = C.write_curve_csv(c, s)
    rows = text.strip().splitlines()
    assert rows[0] == "s,re,im,kappa,G_alpha,A_alpha"
    data = np.genfromtxt(io.StringIO(text), delimiter=",", names=True)
    assert np.max(np.abs(data["kappa"] - data["s"])) < 1e-8
    assert np.isnan(data["G_alpha"][60])  # alpha(0) = 0
    assert C.write_curve_csv(c, s) == text
