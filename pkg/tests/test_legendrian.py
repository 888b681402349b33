from __future__ import annotations

import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lagmin import legendrian as L
from lagmin.errors import InvalidInputError, InvalidParameterError


def rotation_2(theta):
    return np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]], dtype=complex)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_geodesic_sphere_is_legendrian_with_constant_angle(m):
    psi = L.geodesic_sphere(m)
    P = psi.sample(50, seed=m)
    assert np.max(np.abs(np.sum(np.abs(psi(P)) ** 2, axis=-1) - 1.0)) < 1e-12
    assert np.max(np.abs(L.contact_residual(psi, P))) < 1e-12
    beta = L.legendrian_angle(psi, P)
    spread = np.max(np.abs(np.angle(np.exp(1j * (beta - beta[0])))))
    assert spread <= 1e-8
    # beta is a multiple of pi for the real sphere
    assert abs(np.sin(beta[0])) < 1e-8


def test_analytic_jacobian_matches_differences():
    for psi in (L.geodesic_sphere(2), L.flat_torus(), L.gamma_phi(0.7), L.gamma_n1n2(2, 1)):
        P = psi.sample(5, seed=1)
        h = 1e-5
        for i in range(psi.m):
            e = np.zeros(psi.m)
            e[i] = h
            fd = (psi(P + e) - psi(P - e)) / (2 * h)
            assert np.max(np.abs(fd - psi.jacobian(P)[..., i])) < 1e-8


@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 1.37))
def test_gamma_phi_curvature_oracle(phi):
    s = np.linspace(0.5, 4.0, 7)
    expected = np.tan(phi) - 1.0 / np.tan(phi)
    assert np.max(np.abs(L.legendrian_curvature(L.gamma_phi(phi), s) - expected)) < 1e-9


@pytest.mark.parametrize("p,q", [(1, 2), (3, 7), (1, 1), (5, 3), (2, 9)])
def test_gamma_phi_closes_for_rational_tan2(p, q):
    res = L.gamma_phi_closure(np.arctan(np.sqrt(p / q)))
    assert res.closed and res.ratio == (p, q)
    assert abs(res.period - 2 * np.pi * np.sqrt(p * q)) < 1e-12


@pytest.mark.parametrize("x", [np.sqrt(2.0), np.pi / 3, np.e])
def test_gamma_phi_open_for_irrational_tan2(x):
    assert not L.gamma_phi_closure(np.arctan(np.sqrt(x))).closed


@pytest.mark.parametrize("n1,n2", [(1, 1), (2, 1), (2, 2), (1, 3)])
def test_gamma_n1n2_ratio_constancy(n1, n2):
    g = L.gamma_n1n2(n1, n2)
    s = np.linspace(*g.domain[0], 101)
    r1, r2 = L.gammamu_ratio(g, s, n1, n2)
    assert np.max(np.abs(r1 - r1[0])) < 1e-8
    assert np.max(np.abs(r1 - r2)) < 1e-8
    assert np.max(np.abs(L.legendrian_curvature(g, s[3:6]) - g.params["curvature"])) < 1e-8
    # closed on its period
    assert np.max(np.abs(g(g.domain[0][1]) - g(0.0))) < 1e-12


@pytest.mark.parametrize("mu", [0.0, 0.5, -1.0])
def test_gammamu_flow_stays_on_sphere_and_legendrian(mu):
    g = L.solve_gammamu(2, 1, mu, np.array([0.6, 0.8]), 20.0)
    t = np.linspace(0, 20, 801)
    assert np.max(np.abs(np.sum(np.abs(g(t)) ** 2, axis=-1) - 1.0)) < 1e-7
    assert np.max(np.abs(L.contact_residual(g, t))) < 1e-7
    assert np.max(L.gammamu_residual(g, t[2:-2])) < 1e-9


def test_gammamu_unit_speed_option():
    g = L.solve_gammamu(2, 2, 0.5, np.array([0.6, 0.8]), 5.0, unit_speed=True)
    s = np.linspace(0, g.domain[0][1], 101)
    speed = np.sqrt(np.sum(np.abs(g.jacobian(s)[..., 0]) ** 2, axis=-1))
    assert np.max(np.abs(speed - 1.0)) < 1e-9
    assert np.max(L.gammamu_residual(g, s[5:-5])) < 1e-8


def test_gammamu_rejects_bad_start():
    with pytest.raises(InvalidInputError):
        L.solve_gammamu(1, 1, 0.0, np.array([1.0, 1.0]), 1.0)
    with pytest.raises(InvalidInputError):
        L.solve_gammamu(1, 1, 0.0, np.array([1.0, 0.0]), 1.0)


def test_join_is_legendrian_in_s7():
    S1 = L.geodesic_sphere(1)
    psi = L.join_legendrian(L.gamma_n1n2(2, 2), S1, S1)
    assert psi.k == 4 and psi.m == 3
    P = psi.sample(40, seed=2)
    assert np.max(np.abs(np.sum(np.abs(psi(P)) ** 2, axis=-1) - 1.0)) < 1e-12
    assert np.max(np.abs(L.contact_residual(psi, P))) < 1e-12


def test_rotation_preserves_legendrian_and_shifts_angle():
    g = L.gamma_phi(0.6)
    U = rotation_2(0.3) * np.exp(0.2j)
    gU = L.rotated(g, U)
    s = np.linspace(0.5, 5, 9)
    assert np.max(np.abs(L.contact_residual(gU, s))) < 1e-12
    shift = np.angle(np.exp(1j * (L.legendrian_angle(gU, s) - L.legendrian_angle(g, s))))
    assert np.allclose(shift, np.angle(np.linalg.det(U)), atol=1e-12)


def test_hyperbolic_curves_satisfy_identities():
    a = L.alpha_qr(1, 2)
    t = np.linspace(*a.domain, 50)
    x, dx = a(t), a.derivative(t)
    assert np.allclose(L.hermitian_11(x, x), -1.0, atol=1e-12)
    assert np.allclose(L.hermitian_11(dx, dx), 1.0, atol=1e-12)
    assert np.allclose(L.hermitian_11(dx, x), 0.0, atol=1e-12)
    with pytest.raises(InvalidParameterError):
        L.alpha_qr(2, 1)


def test_hopf_projections():
    g = L.gamma_phi(0.6)
    xs = L.hopf_project(g(np.linspace(0, 3, 20)))
    assert np.allclose(np.sum(xs ** 2, axis=-1), 0.25, atol=1e-12)
    xh = L.hopf_project(L.alpha_qr(1, 2)(np.linspace(0, 1, 20)))
    assert np.allclose(xh[:, 2] ** 2 - xh[:, 0] ** 2 - xh[:, 1] ** 2, 0.25, atol=1e-12)
    with pytest.raises(InvalidInputError):
        L.hopf_project(np.array([1.0, 1.0]))


def test_curve_csv_columns():
    g = L.gamma_phi(0.6)
    t = np.linspace(0, 1, 5)
    text = L.write_curve_csv(g, t)
    assert text.splitlines()[0] == ",".join(L.LEGENDRIAN_CSV_COLUMNS)
    hopf = np.genfromtxt(io.StringIO(L.write_hopf_csv(g, t)), delimiter=",", names=True)
    assert hopf.dtype.names == L.HOPF_CSV_COLUMNS
