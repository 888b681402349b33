from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lagmin import constructions as K
from lagmin import curves as C
from lagmin import legendrian as L
from lagmin import verify as V
from lagmin.errors import InvalidInputError, NeedsInteriorError, UnsupportedProvenanceError

S1 = L.geodesic_sphere(1)


def test_grid_spec_basics():
    g = V.GridSpec(((0.0, 1.0), (0.0, 2.0)), (5, 9))
    assert g.spacing == (0.25, 0.25)
    assert g.points().shape == (5, 9, 2)
    r = g.refined()
    assert r.counts == (9, 17) and r.spacing == (0.125, 0.125)
    inner = g.interior()
    assert inner.sum() == 1 * 5
    with pytest.raises(InvalidInputError):
        V.GridSpec(((1.0, 0.0),), (3,))


def test_grid_calculus_in_polar_coordinates():
    # x^2 in polar coordinates: Laplacian 2, Hessian norm 2 (flat metric oracle)
    grid = V.GridSpec(((0.5, 2.0), (0.0, 3.0)), (121, 121))
    P = grid.points()
    r, th = P[..., 0], P[..., 1]
    g = np.zeros(r.shape + (2, 2))
    g[..., 0, 0] = 1.0
    g[..., 1, 1] = r ** 2
    calc = V.grid_calculus((r * np.cos(th)) ** 2, g, grid.spacing)
    inner = grid.interior()
    inner[:4] = inner[-4:] = False
    inner[:, :4] = inner[:, -4:] = False
    assert np.max(np.abs(calc.laplacian[inner] - 2.0)) < 1e-6
    assert np.max(np.abs(calc.hessian_norm[inner] - 2.0)) < 1e-6


def test_induced_metric_of_sphere():
    psi = L.geodesic_sphere(2)
    p = np.array([0.7, 1.1])
    ms = V.induced_metric(psi, p)
    # round metric dt1^2 + sin^2(t1) dt2^2 in the hyperspherical chart
    assert np.allclose(ms.g, np.diag([1.0, np.sin(0.7) ** 2]), atol=1e-12)
    # Gamma^1_22 = -sin cos, Gamma^2_12 = cot
    assert abs(ms.christoffel[0, 1, 1] + np.sin(0.7) * np.cos(0.7)) < 1e-8
    assert abs(ms.christoffel[1, 0, 1] - 1 / np.tan(0.7)) < 1e-8


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_cornu_opposite_product_is_h_minimal(lam):
    im = K.product_of_curves([C.make_cornu(lam), C.make_cornu(-lam)])
    af = V.lagrangian_angle_field(im, V.GridSpec.over(im.domain, 64))
    assert af.max_abs(af.laplacian) < 1e-8


def test_angle_field_windings_for_full_periods():
    im = K.product_of_curves([C.make_circle(1.0), C.make_circle(1.0)])
    grid = V.GridSpec(im.domain, (33, 33))
    af = V.lagrangian_angle_field(im, grid)
    assert af.windings == {0: 1, 1: 1}


def test_certify_report_round_trip_and_determinism():
    im = K.curve_times_legendrian(C.make_circle(1.0), L.geodesic_sphere(2))
    grid = V.GridSpec.over(im.domain, 24)
    rep = V.certify(im, grid)
    assert rep.passed and rep.exit_code() == 0
    text = rep.to_text()
    assert V.VerificationReport.from_text(text) == rep
    assert V.certify(im, grid).to_text() == text


def test_parallel_h_is_informational_unless_claimed():
    im = K.surface_times_two_legendrians(K.torus_qr(1, 2, t_domain=(0.0, 2.0)), S1, S1)
    grid = V.GridSpec.over(im.domain, (32, 32, 5, 5))
    rep = V.certify(im, grid)
    par = rep.check("parallelH")
    assert not par.passed and not par.required
    assert rep.passed and rep.check("divA").passed
    claimed = V.certify(im, grid, claims=["parallelH"])
    assert not claimed.passed and claimed.exit_code() == 1
    with pytest.raises(InvalidInputError):
        V.certify(im, grid, claims=["bogus"])


def test_circle_orbit_surface_claims_parallel_h():
    im = K.surface_times_two_legendrians(K.circle_orbit_surface(), S1, S1)
    rep = V.certify(im, V.GridSpec.over(im.domain, (32, 32, 5, 5)), claims=["parallelH"])
    assert rep.passed


def test_non_minimal_product_fails():
    im = K.product_of_curves([C.make_cornu(1.0), C.make_cornu(1.0)])
    rep = V.certify(im, V.GridSpec.over(im.domain, 64))
    assert not rep.passed
    assert abs(rep.check("hminimal").max_residual - 2.0) < 1e-6
    assert rep.check("laplacian").passed


def test_tolerance_override():
    im = K.product_of_curves([C.make_cornu(1.0), C.make_cornu(1.0)])
    rep = V.certify(im, V.GridSpec.over(im.domain, 32), tolerances={"hminimal": 3.0})
    assert rep.passed


def test_div_a_phi_vanishes_on_the_torus_join():
    torus = K.torus_qr(1, 2, t_domain=(0.0, 2.0))
    _, worst = V.div_a_phi(torus, 2, 2, V.GridSpec.over(torus.domain, 48))
    assert worst < 1e-9
    # generic route on a non-join surface
    _, worst = V.div_a_phi(K.circle_orbit_surface(), 2, 2, V.GridSpec.over(K.circle_orbit_surface().domain, 48))
    assert worst < 1e-8


def test_mean_curvature_needs_interior():
    im = K.circle_orbit_surface()
    with pytest.raises(NeedsInteriorError):
        V.mean_curvature(im, np.array([im.domain[0][0], 1.0]))


def test_laplacian_check_needs_provenance():
    torus = K.torus_qr(1, 2, t_domain=(0.0, 2.0))
    assert torus.laplacian_fn is None
    with pytest.raises(UnsupportedProvenanceError):
        V.laplacian_formula_check(torus, V.GridSpec.over(torus.domain, 8))


def test_certify_legendrian_join():
    psi = L.join_legendrian(L.gamma_n1n2(2, 2), S1, S1)
    rep = V.certify_legendrian(psi, V.GridSpec.over(psi.domain, 24))
    assert rep.passed
    assert rep.check("sphere").max_residual < 1e-12


@settings(max_examples=10, deadline=None)
@given(st.integers(8, 20))
def test_convergence_is_fourth_order(count):
    im = K.curve_times_legendrian(C.make_cornu(1.0, (1.0, 2.5)), L.flat_torus())
    grid = V.GridSpec.over(im.domain, (count * 3, 9, 9))
    e1 = V.laplacian_formula_check(im, grid)[0]
    e2 = V.laplacian_formula_check(im, grid.refined())[0]
    assert e1 / e2 > 8.0


def test_residual_csv_header():
    im = K.product_of_curves([C.make_cornu(1.0), C.make_cornu(1.0)])
    text = V.residual_field_csv(im, V.GridSpec.over(im.domain, 9))
    assert text.splitlines()[0] == "p1,p2,delta_beta,hessian_norm,laplacian_error"
    assert len(text.splitlines()) == 1 + 5 * 5
