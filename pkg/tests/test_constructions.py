from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lagmin import acceptance
from lagmin import constructions as K
from lagmin import curves as C
from lagmin import legendrian as L
from lagmin import verify as V
from lagmin.errors import (
    InvalidCompositionError,
    InvalidIngredientError,
    OriginCrossingError,
    SingularLocusError,
    SingularPointError,
)

S1 = L.geodesic_sphere(1)
SHIPPED = acceptance.shipped_constructions()


@pytest.mark.parametrize("name", sorted(SHIPPED))
def test_shipped_constructions_are_lagrangian(name):
    im = SHIPPED[name]
    assert V.symplectic_max(im, im.sample(200, seed=4)) < 1e-10


@pytest.mark.parametrize("name", sorted(SHIPPED))
def test_closed_form_metric_and_angle(name):
    im = SHIPPED[name]
    P = im.sample(30, seed=5)
    if im.metric_fn is not None:
        assert np.max(np.abs(im.metric(P) - im.predicted_metric(P))) < 1e-9
    if im.angle_fn is not None:
        assert np.max(np.abs(np.angle(np.exp(1j * (im.angle(P) - im.predicted_angle(P)))))) < 1e-9


def test_cornu_product_laplacian_is_sum_of_lambdas():
    im = K.product_of_curves([C.make_cornu(0.5), C.make_cornu(1.5)])
    P = im.sample(10, seed=0)
    assert np.allclose(im.predicted_laplacian(P), 2.0, atol=1e-9)


def test_structural_errors():
    with pytest.raises(OriginCrossingError):
        K.curve_times_legendrian(C.make_cornu(1.0), L.flat_torus())
    with pytest.raises(SingularPointError):
        K.cone(L.flat_torus(), (-1.0, 1.0))
    with pytest.raises(SingularLocusError):
        K.surface_times_two_legendrians(K.circle_orbit_surface(margin=0.0), S1, S1)
    with pytest.raises(InvalidIngredientError):
        K.curve_join_surface(L.solve_gammamu(2, 2, 0.5, np.array([0.6, 0.8]), 3.0), L.alpha_qr(1, 2))
    with pytest.raises(InvalidCompositionError):
        K.product_of_curves([])


def test_unitary_image_shifts_angle_by_det():
    base = K.circle_orbit_surface()
    U = np.array([[0.0, 1j], [1.0, 0.0]])
    im = K.apply_unitary(base, U)
    P = base.sample(20, seed=1)
    shift = np.angle(np.exp(1j * (im.angle(P) - base.angle(P))))
    assert np.allclose(shift, np.angle(np.linalg.det(U)), atol=1e-12)


def test_reparametrize_keeps_image():
    base = K.torus_qr(1, 2, t_domain=(0.0, 2.0))
    im = K.reparametrize(base, (2.0, 0.5), (0.1, 0.0))
    P = im.sample(10, seed=2)
    assert np.allclose(im(P), base(P * np.array([2.0, 0.5]) + np.array([0.1, 0.0])), atol=1e-14)


def test_torus_join_is_conformal():
    im = K.torus_qr(1, 2, t_domain=(0.0, 2.0))
    P = im.sample(30, seed=3)
    g = im.metric(P)
    assert np.allclose(g[..., 0, 1], 0.0, atol=1e-12)
    assert np.allclose(g[..., 0, 0], g[..., 1, 1], atol=1e-12)
    assert np.allclose(g[..., 0, 0], im.conformal_factor(P), atol=1e-12)


def _fd_along(f, x, h=1e-4):
    d = [np.angle(np.exp(1j * (f(x + k * h) - f(x)))) for k in (-2, -1, 1, 2)]
    return (d[0] - 8 * d[1] + 8 * d[2] - d[3]) / (12 * h)


@pytest.mark.parametrize("n1,n2", [(2, 3), (3, 2), (2, 2)])
def test_gs_and_gt_closed_forms_match_differences(n1, n2):
    surf = K.curve_join_surface(L.gamma_phi(0.5), L.alpha_qr(1, 2, (0.0, 2.0)))
    s = np.linspace(0.5, 5.0, 9)
    t = np.linspace(0.3, 1.7, 9)
    gs = _fd_along(lambda x: surf.g_closed(np.stack([x, np.full_like(x, 0.9)], -1), n1, n2), s)
    gt = _fd_along(lambda x: surf.g_closed(np.stack([np.full_like(x, 1.3), x], -1), n1, n2), t)
    assert np.max(np.abs(gs - surf.g_s(s, n1, n2))) < 1e-8
    assert np.max(np.abs(gt - surf.g_t(t, n1, n2))) < 1e-8


def test_sufficient_condition_series():
    a = L.alpha_qr(1, 2, (0.0, 2.0))
    c1, c2 = K.check_cond_sufficient(K.gamma_zero(), a, 2, 2)
    assert np.ptp(c1) < 1e-10 and np.ptp(c2) < 1e-10
    # gamma_phi alone also gives a constant series, a rotated copy does not
    c1, _ = K.check_cond_sufficient(L.gamma_phi(0.5), a, 2, 3)
    assert np.ptp(c1) < 1e-10
    c = np.cos(0.3)
    U = np.array([[c, -np.sin(0.3)], [np.sin(0.3), c]])
    c1, _ = K.check_cond_sufficient(L.rotated(L.gamma_phi(0.5), U), a, 2, 3)
    assert np.ptp(c1) > 1e-2


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_mean_curvature_identity(seed):
    for name in ("cornu x flat torus", "torus-qr extension", "circle x sphere"):
        im = SHIPPED[name]
        p = im.sample(1, seed=seed, margin=0.05)[0]
        assert np.max(np.abs(V.mean_curvature(im, p) - V.mean_curvature_sff(im, p))) < 1e-6


def test_clifford_mean_curvature_norm():
    im = K.product_of_curves([C.make_circle(1.0), C.make_circle(1.0)])
    for p in im.sample(5, seed=0):
        # each circle contributes curvature 1 in its own normal direction
        assert abs(np.linalg.norm(V.mean_curvature(im, p)) - np.sqrt(2) / 2) < 1e-8


def test_immersion_csv_layout():
    im = K.circle_orbit_surface()
    P = V.GridSpec.over(im.domain, 3).points()
    text = K.write_immersion_csv(im, P)
    lines = text.strip().splitlines()
    assert lines[0] == "p1,p2,re1,im1,re2,im2"
    assert len(lines) == 1 + 9
