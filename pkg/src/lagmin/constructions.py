"""Lagrangian immersions built from planar curves and Legendrian immersions.

Every combinator returns a :class:`LagrangianImmersion` with an analytic
Jacobian and, where a closed form exists, predicted Lagrangian angle,
induced metric and Laplacian of the angle. The predictions are computed
from ingredient data only, so comparing them with the numeric quantities of
:mod:`lagmin.verify` is a genuine cross-check.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import curves, numerics
from .curves import PlanarCurve
from .errors import (
    InvalidCompositionError,
    InvalidIngredientError,
    InvalidParameterError,
    OriginCrossingError,
    SingularLocusError,
    SingularPointError,
)
from .legendrian import (
    HyperbolicLegendrianCurve,
    LegendrianMap,
    alpha_qr,
    as_points,
    contact_residual,
    curve_angle_rate,
    geodesic_sphere,
    hopf_project,
    legendrian_angle,
    orthonormal_frame,
)
from .numerics import TWO_PI, det_complex, fd_derivative

SINGULAR_EPS = 1e-6
DOMAIN_MARGIN = 1e-2


@dataclass(frozen=True, eq=False)
class LagrangianImmersion:
    """Map from an n-dimensional parameter box into C^n.

    ``provenance`` records the combinator and its ingredients. The optional
    ``*_fn`` fields hold closed-form predictions; ``legendrians`` lists the
    Legendrian ingredients with the parameter axes they consume.
    """

    n: int
    domain: tuple
    periodic: tuple
    eval_fn: Callable[[np.ndarray], np.ndarray]
    jac_fn: Callable[[np.ndarray], np.ndarray]
    provenance: dict = field(default_factory=dict)
    angle_fn: Callable | None = None
    metric_fn: Callable | None = None
    laplacian_fn: Callable | None = None
    hessian_fn: Callable | None = None
    legendrians: tuple = ()

    def __call__(self, P) -> np.ndarray:
        return self.eval_fn(as_points(P, self.n))

    def jacobian(self, P) -> np.ndarray:
        return self.jac_fn(as_points(P, self.n))

    def complex_volume(self, P, J=None, rotation=None) -> np.ndarray:
        """``det_C(e_1, ..., e_n)`` for the Gram-Schmidt frame of the Jacobian columns."""
        J = self.jacobian(P) if J is None else J
        return det_complex(orthonormal_frame(J, rotation))

    def angle(self, P, J=None) -> np.ndarray:
        """Numeric Lagrangian angle, principal branch."""
        return np.angle(self.complex_volume(P, J))

    def metric(self, P, J=None) -> np.ndarray:
        J = self.jacobian(P) if J is None else J
        return np.real(np.swapaxes(J, -1, -2).conj() @ J)

    def predicted_angle(self, P):
        return None if self.angle_fn is None else self.angle_fn(as_points(P, self.n))

    def predicted_metric(self, P):
        return None if self.metric_fn is None else self.metric_fn(as_points(P, self.n))

    def predicted_laplacian(self, P):
        return None if self.laplacian_fn is None else self.laplacian_fn(as_points(P, self.n))

    def predicted_hessian(self, P):
        return None if self.hessian_fn is None else self.hessian_fn(as_points(P, self.n))

    @property
    def combinator(self) -> str:
        return self.provenance.get("combinator", "custom")

    def interior_box(self, margin: float = DOMAIN_MARGIN) -> tuple:
        return tuple((a + margin, b - margin) for a, b in self.domain)

    def sample(self, count: int, seed: int = 0, margin: float = DOMAIN_MARGIN) -> np.ndarray:
        rng = np.random.default_rng(seed)
        box = np.array(self.interior_box(margin))
        return box[:, 0] + (box[:, 1] - box[:, 0]) * rng.random((count, self.n))


def symplectic_residual(J: np.ndarray) -> np.ndarray:
    """``omega(d_i Phi, d_j Phi) = -Im sum_k d_i Phi_k conj(d_j Phi_k)`` for all pairs."""
    return -np.imag(np.swapaxes(J, -1, -2) @ J.conj())


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _block_diag(blocks) -> np.ndarray:
    shape = blocks[0].shape[:-2]
    size = sum(b.shape[-1] for b in blocks)
    out = np.zeros(shape + (size, size))
    i = 0
    for b in blocks:
        k = b.shape[-1]
        out[..., i:i + k, i:i + k] = b
        i += k
    return out


def _legendrian_metric(psi: LegendrianMap, x) -> np.ndarray:
    J = psi.jacobian(x)
    return np.real(np.swapaxes(J, -1, -2).conj() @ J)


def _legendrian_angle_or_zero(psi: LegendrianMap, x) -> np.ndarray:
    if psi.m == 0:
        return np.angle(psi(x)[..., 0])
    return legendrian_angle(psi, x)


def _legendrian_laplacian(psi: LegendrianMap, x):
    if psi.m == 0:
        return np.zeros(x.shape[:-1])
    return psi.angle_laplacian(x)


def _curve_kappa_prime(c: PlanarCurve, s) -> np.ndarray:
    if c.family in ("line", "circle"):
        return np.zeros_like(s)
    if c.family == "cornu":
        return np.full_like(s, c.params["lambda"])
    return fd_derivative(lambda x: curves.curvature(c, x), s)


def _check_nonvanishing_curve(alpha: PlanarCurve, count: int = 4001):
    s = np.linspace(alpha.domain[0], alpha.domain[1], count)
    if np.min(np.abs(alpha(s))) < SINGULAR_EPS:
        raise OriginCrossingError("curve meets the origin on its domain; use cone() for radial lines")


def _phase_derivative(phase: Callable, P, axis: int, h: float) -> np.ndarray:
    """Derivative of ``arg phase`` along ``axis``, free of branch cuts."""
    ref = np.conj(phase(P))
    return fd_derivative(lambda Q: np.angle(phase(Q) * ref), P, axis=axis, h=h)


# ---------------------------------------------------------------------------
# products of planar curves
# ---------------------------------------------------------------------------

def product_of_curves(curve_list) -> LagrangianImmersion:
    """``(s_1, ..., s_n) -> (alpha_1(s_1), ..., alpha_n(s_n))``, flat."""
    cs = list(curve_list)
    if not cs:
        raise InvalidCompositionError("need at least one curve")
    for c in cs:
        if not c.arclength:
            raise InvalidIngredientError("product ingredients must be arclength parametrized")
        s = np.linspace(c.domain[0], c.domain[1], 257)
        if np.min(np.abs(c.derivative(s))) < 1e-12:
            raise InvalidIngredientError("curve is not regular")
    n = len(cs)

    def ev(P):
        return np.stack([c(P[..., j]) for j, c in enumerate(cs)], axis=-1)

    def jac(P):
        J = np.zeros(P.shape[:-1] + (n, n), dtype=complex)
        for j, c in enumerate(cs):
            J[..., j, j] = c.derivative(P[..., j])
        return J

    def angle(P):
        return sum(np.angle(c.derivative(P[..., j])) for j, c in enumerate(cs))

    def metric(P):
        return np.broadcast_to(np.eye(n), P.shape[:-1] + (n, n)).copy()

    def hessian(P):
        H = np.zeros(P.shape[:-1] + (n, n))
        for j, c in enumerate(cs):
            H[..., j, j] = _curve_kappa_prime(c, P[..., j])
        return H

    def laplacian(P):
        return np.trace(hessian(P), axis1=-2, axis2=-1)

    return LagrangianImmersion(
        n, tuple(c.domain for c in cs), tuple(c.family == "circle" for c in cs), ev, jac,
        {"combinator": "product", "curves": cs},
        angle_fn=angle, metric_fn=metric, laplacian_fn=laplacian, hessian_fn=hessian,
    )


# ---------------------------------------------------------------------------
# curve times Legendrian, cones
# ---------------------------------------------------------------------------

def curve_times_legendrian(alpha: PlanarCurve, psi: LegendrianMap, *, _cone: bool = False) -> LagrangianImmersion:
    """``(s, x) -> alpha(s) psi(x)`` for a curve avoiding the origin."""
    if psi.m != psi.k - 1:
        raise InvalidCompositionError("psi must be Legendrian (m = k - 1)")
    if not alpha.arclength:
        raise InvalidIngredientError("alpha must be arclength parametrized")
    _check_nonvanishing_curve(alpha)
    n = psi.k
    m = psi.m

    def ev(P):
        return alpha(P[..., 0])[..., None] * psi.eval_fn(P[..., 1:])

    def jac(P):
        s, x = P[..., 0], P[..., 1:]
        J = np.empty(P.shape[:-1] + (n, n), dtype=complex)
        J[..., :, 0] = alpha.derivative(s)[..., None] * psi.eval_fn(x)
        J[..., :, 1:] = alpha(s)[..., None, None] * psi.jac_fn(x)
        return J

    def angle(P):
        return curves.g_alpha(alpha, n, P[..., 0]) + _legendrian_angle_or_zero(psi, P[..., 1:])

    def metric(P):
        s, x = P[..., 0], P[..., 1:]
        ones = np.ones(P.shape[:-1] + (1, 1))
        if m == 0:
            return ones
        return _block_diag([ones, (np.abs(alpha(s)) ** 2)[..., None, None] * _legendrian_metric(psi, x)])

    laplacian = None
    if m == 0 or psi.angle_laplacian_fn is not None:
        def laplacian(P):
            s, x = P[..., 0], P[..., 1:]
            r = np.abs(alpha(s))
            dA = fd_derivative(lambda u: curves.a_alpha(alpha, n, u), s)
            return dA / r ** (n - 1) + _legendrian_laplacian(psi, x) / r ** 2

    name = "cone" if _cone else "curve-times-legendrian"
    return LagrangianImmersion(
        n, (alpha.domain,) + tuple(psi.domain), (False,) + tuple(psi.periodic), ev, jac,
        {"combinator": name, "alpha": alpha, "psi": psi},
        angle_fn=angle, metric_fn=metric, laplacian_fn=laplacian,
        legendrians=((psi, tuple(range(1, n))),),
    )


def cone(psi: LegendrianMap, s_range=(0.5, 2.0)) -> LagrangianImmersion:
    """``(s, x) -> s psi(x)`` over a radial interval not containing 0."""
    lo, hi = map(float, s_range)
    if not hi > lo:
        raise InvalidParameterError("empty radial interval")
    if lo <= 0.0 <= hi:
        raise SingularPointError("the cone is singular at s = 0; choose a radial range excluding it")
    line = curves.make_line(1.0, 0.0, (lo, hi))
    return curve_times_legendrian(line, psi, _cone=True)


# ---------------------------------------------------------------------------
# surface times two Legendrians
# ---------------------------------------------------------------------------

def _surface_nonvanishing(phi: LagrangianImmersion, count: int = 129):
    axes = [np.linspace(a, b, count) for a, b in phi.domain]
    P = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    v = phi(P)
    if np.min(np.abs(v[..., 0])) < SINGULAR_EPS or np.min(np.abs(v[..., 1])) < SINGULAR_EPS:
        raise SingularLocusError("a component of the surface vanishes on its domain; shrink the domain")


def g_phi_phase(phi: LagrangianImmersion, n1: int, n2: int) -> Callable:
    """``P -> exp(i G_phi)`` with ``G_phi = beta_phi + (n1-1) arg phi_1 + (n2-1) arg phi_2``."""
    def phase(P):
        v = phi(P)
        u1, u2 = v[..., 0] / np.abs(v[..., 0]), v[..., 1] / np.abs(v[..., 1])
        vol = phi.complex_volume(P)
        return vol / np.abs(vol) * u1 ** (n1 - 1) * u2 ** (n2 - 1)
    return phase


def a_phi_weight(phi: LagrangianImmersion, n1: int, n2: int, P) -> np.ndarray:
    v = phi(P)
    return np.abs(v[..., 0]) ** (n1 - 1) * np.abs(v[..., 1]) ** (n2 - 1)


def a_phi(phi: LagrangianImmersion, n1: int, n2: int, P, h: float = numerics.DEFAULT_FD_STEP) -> np.ndarray:
    """Components of ``A_phi = |phi_1|^(n1-1) |phi_2|^(n2-1) grad_g G_phi`` in the parameter basis."""
    P = as_points(P, 2)
    phase = g_phi_phase(phi, n1, n2)
    dG = np.stack([_phase_derivative(phase, P, i, h) for i in range(2)], axis=-1)
    ginv = np.linalg.inv(phi.metric(P))
    return a_phi_weight(phi, n1, n2, P)[..., None] * np.einsum("...ij,...j->...i", ginv, dG)


def div_a_phi_pointwise(phi: LagrangianImmersion, n1: int, n2: int, P,
                        h: float = numerics.DEFAULT_FD_STEP) -> np.ndarray:
    """``div_g A_phi = (1/sqrt g) d_i(sqrt g A^i)`` by nested finite differences."""
    P = as_points(P, 2)

    def flux(Q, i):
        return np.sqrt(np.linalg.det(phi.metric(Q))) * a_phi(phi, n1, n2, Q, h)[..., i]

    total = sum(fd_derivative(lambda Q: flux(Q, i), P, axis=i, h=h) for i in range(2))
    return total / np.sqrt(np.linalg.det(phi.metric(P)))


def surface_times_two_legendrians(phi: LagrangianImmersion, psi1: LegendrianMap,
                                  psi2: LegendrianMap) -> LagrangianImmersion:
    """``(p, x, y) -> (phi_1(p) psi1(x), phi_2(p) psi2(y))``."""
    if phi.n != 2:
        raise InvalidCompositionError("phi must be a Lagrangian surface in C^2")
    for psi in (psi1, psi2):
        if psi.m != psi.k - 1:
            raise InvalidCompositionError("psi1, psi2 must be Legendrian (m = k - 1)")
    _surface_nonvanishing(phi)
    n1, n2 = psi1.k, psi2.k
    m1, m2 = psi1.m, psi2.m
    n = n1 + n2

    def split(P):
        return P[..., :2], P[..., 2:2 + m1], P[..., 2 + m1:]

    def ev(P):
        p, x, y = split(P)
        v = phi.eval_fn(p)
        return np.concatenate([v[..., :1] * psi1.eval_fn(x), v[..., 1:] * psi2.eval_fn(y)], axis=-1)

    def jac(P):
        p, x, y = split(P)
        v = phi.eval_fn(p)
        dv = phi.jac_fn(p)
        a1, a2 = psi1.eval_fn(x), psi2.eval_fn(y)
        J = np.zeros(P.shape[:-1] + (n, n), dtype=complex)
        J[..., :n1, :2] = dv[..., 0:1, :] * a1[..., :, None]
        J[..., n1:, :2] = dv[..., 1:2, :] * a2[..., :, None]
        J[..., :n1, 2:2 + m1] = v[..., 0, None, None] * psi1.jac_fn(x)
        J[..., n1:, 2 + m1:] = v[..., 1, None, None] * psi2.jac_fn(y)
        return J

    phase = g_phi_phase(phi, n1, n2)

    def angle(P):
        p, x, y = split(P)
        return ((n1 - 1) * np.pi + np.angle(phase(p))
                + _legendrian_angle_or_zero(psi1, x) + _legendrian_angle_or_zero(psi2, y))

    def metric(P):
        p, x, y = split(P)
        v = phi.eval_fn(p)
        blocks = [phi.metric(p)]
        if m1:
            blocks.append((np.abs(v[..., 0]) ** 2)[..., None, None] * _legendrian_metric(psi1, x))
        if m2:
            blocks.append((np.abs(v[..., 1]) ** 2)[..., None, None] * _legendrian_metric(psi2, y))
        return _block_diag(blocks)

    laplacian = None
    if all(psi.m == 0 or psi.angle_laplacian_fn is not None for psi in (psi1, psi2)):
        def laplacian(P):
            p, x, y = split(P)
            v = phi.eval_fn(p)
            w = a_phi_weight(phi, n1, n2, p)
            div = div_a_phi_pointwise(phi, n1, n2, p)
            return (div / w + _legendrian_laplacian(psi1, x) / np.abs(v[..., 0]) ** 2
                    + _legendrian_laplacian(psi2, y) / np.abs(v[..., 1]) ** 2)

    return LagrangianImmersion(
        n, tuple(phi.domain) + tuple(psi1.domain) + tuple(psi2.domain),
        tuple(phi.periodic) + tuple(psi1.periodic) + tuple(psi2.periodic), ev, jac,
        {"combinator": "surface-times-two-legendrians", "phi": phi, "psi1": psi1, "psi2": psi2,
         "n1": n1, "n2": n2},
        angle_fn=angle, metric_fn=metric, laplacian_fn=laplacian,
        legendrians=((psi1, tuple(range(2, 2 + m1))), (psi2, tuple(range(2 + m1, 2 + m1 + m2)))),
    )


def circle_orbit_surface(scale: float = 1.0, margin: float = 0.1) -> LagrangianImmersion:
    """``(s, t) -> scale (cos s e^{it}, sin s e^{it})`` with s kept away from
    the zeros of cos and sin."""
    if not scale > 0:
        raise InvalidParameterError("scale must be positive")
    c = float(scale)

    def ev(P):
        s, t = P[..., 0], P[..., 1]
        e = c * np.exp(1j * t)
        return np.stack([np.cos(s) * e, np.sin(s) * e], axis=-1)

    def jac(P):
        s, t = P[..., 0], P[..., 1]
        e = c * np.exp(1j * t)
        ds = np.stack([-np.sin(s) * e, np.cos(s) * e], axis=-1)
        dt = np.stack([1j * np.cos(s) * e, 1j * np.sin(s) * e], axis=-1)
        return np.stack([ds, dt], axis=-1)

    def angle(P):
        return -np.pi / 2 + 2.0 * P[..., 1]

    def metric(P):
        return c * c * np.broadcast_to(np.eye(2), P.shape[:-1] + (2, 2)).copy()

    def zeros(P):
        return np.zeros(P.shape[:-1])

    def zero_hess(P):
        return np.zeros(P.shape[:-1] + (2, 2))

    return LagrangianImmersion(
        2, ((margin, np.pi / 2 - margin), (0.0, TWO_PI)), (False, True), ev, jac,
        {"combinator": "circle-orbit", "scale": c},
        angle_fn=angle, metric_fn=metric, laplacian_fn=zeros, hessian_fn=zero_hess,
    )


# ---------------------------------------------------------------------------
# the gamma (.) alpha surfaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LagrangianSurfaceJoin(LagrangianImmersion):
    """``(s, t) -> (gamma_1(s) alpha_1(t), gamma_2(s) alpha_2(t))``."""

    gamma: LegendrianMap | None = None
    alpha: HyperbolicLegendrianCurve | None = None

    def conformal_factor(self, P) -> np.ndarray:
        """``xi_3 + eta_3`` from the two Hopf projections."""
        P = as_points(P, 2)
        xi = hopf_project(self.gamma(P[..., 0]), "sphere")
        eta = hopf_project(self.alpha(P[..., 1]), "hyperbolic")
        return xi[..., 2] + eta[..., 2]

    def g_closed(self, P, n1: int, n2: int) -> np.ndarray:
        """``G_phi`` assembled from curve data (principal branches of each term)."""
        P = as_points(P, 2)
        s, t = P[..., 0], P[..., 1]
        g, a = self.gamma(s), self.alpha(t)
        return (legendrian_angle(self.gamma, s) + (n1 - 1) * np.angle(g[..., 0]) + (n2 - 1) * np.angle(g[..., 1])
                + self.alpha.angle(t) + (n1 - 1) * np.angle(a[..., 0]) + (n2 - 1) * np.angle(a[..., 1])
                + np.pi)

    def g_s(self, s, n1: int, n2: int) -> np.ndarray:
        """``beta_gamma' + <gamma_1', J gamma_1> ((n1-1)/|gamma_1|^2 - (n2-1)/|gamma_2|^2)``."""
        return gamma_gs(self.gamma, s, n1, n2)

    def g_t(self, t, n1: int, n2: int) -> np.ndarray:
        return alpha_gt(self.alpha, t, n1, n2)


def _coordinate_moduli(v, n1, n2, who):
    m1, m2 = np.abs(v[..., 0]), np.abs(v[..., 1])
    if (n1 > 1 and np.min(m1) < SINGULAR_EPS) or (n2 > 1 and np.min(m2) < SINGULAR_EPS):
        raise SingularPointError(f"a coordinate of {who} vanishes on the requested samples")
    return m1, m2


def _weighted_rate(beta_rate, v, dv, n1, n2, who, sign):
    m1, m2 = _coordinate_moduli(v, n1, n2, who)
    turn = np.imag(dv[..., 0] * np.conj(v[..., 0]))
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.where(n1 > 1, (n1 - 1) / m1 ** 2, 0.0)
        t2 = np.where(n2 > 1, (n2 - 1) / m2 ** 2, 0.0)
    return beta_rate + turn * (t1 + sign * t2)


def gamma_gs(gamma: LegendrianMap, s, n1: int, n2: int) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    return _weighted_rate(curve_angle_rate(gamma, s), gamma(s), gamma.jacobian(s)[..., 0], n1, n2, "gamma", -1.0)


def alpha_gt(alpha: HyperbolicLegendrianCurve, t, n1: int, n2: int) -> np.ndarray:
    """``beta_alpha' + <alpha_1', J alpha_1> ((n1-1)/|alpha_1|^2 + (n2-1)/|alpha_2|^2)``.

    The plus sign comes from ``alpha_1' conj(alpha_1) = alpha_2' conj(alpha_2)``
    on H^3_1 (on S^3 the two products are opposite, hence the minus in G_s).
    """
    t = np.asarray(t, dtype=float)
    return _weighted_rate(alpha.angle_rate(t), alpha(t), alpha.derivative(t), n1, n2, "alpha", 1.0)


def curve_join_surface(gamma: LegendrianMap, alpha: HyperbolicLegendrianCurve) -> LagrangianSurfaceJoin:
    """The conformal Lagrangian surface ``gamma (.) alpha``."""
    if gamma.k != 2 or gamma.m != 1:
        raise InvalidCompositionError("gamma must be a curve in S^3")
    s = np.linspace(gamma.domain[0][0], gamma.domain[0][1], 513)
    g = gamma(s)
    dg = gamma.jacobian(s)[..., 0]
    if np.max(np.abs(np.sum(np.abs(dg) ** 2, axis=-1) - 1.0)) > 1e-8:
        raise InvalidIngredientError("gamma must be unit speed")
    if np.max(np.abs(contact_residual(gamma, s))) > 1e-8 or np.max(np.abs(np.sum(np.abs(g) ** 2, -1) - 1)) > 1e-9:
        raise InvalidIngredientError("gamma must be a Legendrian curve in S^3")

    def ev(P):
        return gamma.eval_fn(P[..., :1]) * alpha(P[..., 1])

    def jac(P):
        s, t = P[..., :1], P[..., 1]
        ds = gamma.jac_fn(s)[..., 0] * alpha(t)
        dt = gamma.eval_fn(s) * alpha.derivative(t)
        return np.stack([ds, dt], axis=-1)

    def angle(P):
        return legendrian_angle(gamma, P[..., 0]) + alpha.angle(P[..., 1]) + np.pi

    def metric(P):
        xi = hopf_project(gamma(P[..., 0]), "sphere")[..., 2]
        eta = hopf_project(alpha(P[..., 1]), "hyperbolic")[..., 2]
        return (xi + eta)[..., None, None] * np.eye(2)

    return LagrangianSurfaceJoin(
        2, (gamma.domain[0], alpha.domain), (gamma.periodic[0], False), ev, jac,
        {"combinator": "curve-join-surface", "gamma": gamma, "alpha": alpha},
        angle_fn=angle, metric_fn=metric,
        gamma=gamma, alpha=alpha,
    )


def gamma_zero(margin: float = 0.1) -> LegendrianMap:
    """The Legendrian great circle ``(cos s, sin s)`` on ``[margin, pi/2 - margin]``."""
    return geodesic_sphere(1).restrict([(margin, np.pi / 2 - margin)])


def torus_qr(q: int, r: int, margin: float = 0.1, t_domain=None) -> LagrangianSurfaceJoin:
    """``gamma_0 (.) alpha_{q,r}`` with s away from the zeros of cos s and sin s."""
    return curve_join_surface(gamma_zero(margin), alpha_qr(q, r, t_domain))


def check_cond_sufficient(gamma: LegendrianMap, alpha: HyperbolicLegendrianCurve, n1: int, n2: int,
                          s=None, t=None, count: int = 200):
    """Series ``|gamma_1|^(n1-1) |gamma_2|^(n2-1) G_s`` along gamma and
    ``|alpha_1|^(n1-1) |alpha_2|^(n2-1) G_t`` along alpha.

    Each series is constant exactly when the matching sufficient condition
    for ``div A_phi = 0`` holds; the constant is c1 (resp. c2).
    """
    if s is None:
        s = np.linspace(gamma.domain[0][0], gamma.domain[0][1], count)
    if t is None:
        t = np.linspace(alpha.domain[0], alpha.domain[1], count)
    s, t = np.asarray(s, float), np.asarray(t, float)
    g, a = gamma(s), alpha(t)
    w1 = np.abs(g[..., 0]) ** (n1 - 1) * np.abs(g[..., 1]) ** (n2 - 1)
    w2 = np.abs(a[..., 0]) ** (n1 - 1) * np.abs(a[..., 1]) ** (n2 - 1)
    return w1 * gamma_gs(gamma, s, n1, n2), w2 * alpha_gt(alpha, t, n1, n2)


# ---------------------------------------------------------------------------
# generic wrappers
# ---------------------------------------------------------------------------

def direct_product(first: LagrangianImmersion, second: LagrangianImmersion) -> LagrangianImmersion:
    """``(p, q) -> (Phi_1(p), Phi_2(q))`` in C^(n1 + n2)."""
    a, b = first.n, second.n
    n = a + b

    def ev(P):
        return np.concatenate([first.eval_fn(P[..., :a]), second.eval_fn(P[..., a:])], axis=-1)

    def jac(P):
        J = np.zeros(P.shape[:-1] + (n, n), dtype=complex)
        J[..., :a, :a] = first.jac_fn(P[..., :a])
        J[..., a:, a:] = second.jac_fn(P[..., a:])
        return J

    def both(fa, fb, combine):
        if fa is None or fb is None:
            return None
        return lambda P: combine(fa(P[..., :a]), fb(P[..., a:]))

    shift = tuple((ps, tuple(i + a for i in ax)) for ps, ax in second.legendrians)
    return LagrangianImmersion(
        n, tuple(first.domain) + tuple(second.domain), tuple(first.periodic) + tuple(second.periodic),
        ev, jac, {"combinator": "direct-product", "first": first, "second": second},
        angle_fn=both(first.angle_fn, second.angle_fn, lambda u, v: u + v),
        metric_fn=both(first.metric_fn, second.metric_fn, lambda u, v: _block_diag([u, v])),
        laplacian_fn=both(first.laplacian_fn, second.laplacian_fn, lambda u, v: u + v),
        hessian_fn=both(first.hessian_fn, second.hessian_fn, lambda u, v: _block_diag([u, v])),
        legendrians=tuple(first.legendrians) + shift,
    )


def apply_unitary(im: LagrangianImmersion, U) -> LagrangianImmersion:
    """``U Phi`` for a unitary U; the Lagrangian angle shifts by ``arg det U``."""
    U = np.asarray(U, dtype=complex)
    if U.shape != (im.n, im.n) or not np.allclose(U.conj().T @ U, np.eye(im.n), atol=1e-12):
        raise InvalidParameterError("expected a unitary matrix of matching size")
    shift = float(np.angle(np.linalg.det(U)))
    angle = None if im.angle_fn is None else (lambda P: im.angle_fn(P) + shift)
    return replace(
        im, eval_fn=lambda P: im.eval_fn(P) @ U.T, jac_fn=lambda P: U @ im.jac_fn(P),
        provenance=dict(im.provenance, unitary=U.tolist(), base=im), angle_fn=angle,
    )


def reparametrize(im: LagrangianImmersion, scale, shift=None) -> LagrangianImmersion:
    """``u -> Phi(scale * u + shift)`` with per-axis positive scales."""
    a = np.asarray(scale, dtype=float) * np.ones(im.n)
    b = np.zeros(im.n) if shift is None else np.asarray(shift, dtype=float) * np.ones(im.n)
    if np.any(a <= 0):
        raise InvalidParameterError("scales must be positive")
    domain = tuple(((lo - bb) / aa, (hi - bb) / aa) for (lo, hi), aa, bb in zip(im.domain, a, b))

    def mapped(f):
        return None if f is None else (lambda P: f(P * a + b))

    metric = None if im.metric_fn is None else (lambda P: im.metric_fn(P * a + b) * np.outer(a, a))
    hessian = None if im.hessian_fn is None else (lambda P: im.hessian_fn(P * a + b) * np.outer(a, a))
    return replace(
        im, domain=domain,
        eval_fn=lambda P: im.eval_fn(P * a + b),
        jac_fn=lambda P: im.jac_fn(P * a + b) * a,
        provenance=dict(im.provenance, reparametrized=(a.tolist(), b.tolist()), base=im),
        angle_fn=mapped(im.angle_fn), metric_fn=metric, laplacian_fn=mapped(im.laplacian_fn),
        hessian_fn=hessian,
        legendrians=(),
    )


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def immersion_columns(n: int) -> list[str]:
    cols = [f"p{i + 1}" for i in range(n)]
    for k in range(n):
        cols += [f"re{k + 1}", f"im{k + 1}"]
    return cols


def write_immersion_csv(im: LagrangianImmersion, P, fh=None) -> str:
    """Parameter columns, then interleaved real/imaginary parts per coordinate."""
    P = as_points(P, im.n).reshape(-1, im.n)
    Z = im(P)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(immersion_columns(im.n))
    for p, z in zip(P, Z):
        row = [repr(float(x)) for x in p]
        for zk in z:
            row += [repr(float(zk.real)), repr(float(zk.imag))]
        w.writerow(row)
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text
