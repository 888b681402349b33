"""Legendrian immersions into odd-dimensional spheres, Legendrian curves in
the anti de Sitter space H^3_1, and the Hopf projections.

A :class:`LegendrianMap` is evaluated on parameter arrays of shape
``(..., m)`` and returns points of shape ``(..., k)`` in C^k, with
``m = k - 1``. Jacobians are analytic for every shipped family.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import gcd
from typing import Callable

import numpy as np

from . import numerics
from .errors import (
    CoordinateDegeneracyError,
    DegenerateFrameError,
    InvalidCompositionError,
    InvalidInputError,
    InvalidParameterError,
)
from .numerics import OdeSystem, Trajectory, det_complex, integrate_ode

TWO_PI = numerics.TWO_PI
POLE_MARGIN = 1e-2


def as_points(P, m: int) -> np.ndarray:
    """Coerce parameters to shape ``(..., m)``; bare arrays are accepted for curves."""
    P = np.asarray(P, dtype=float)
    if m == 1 and (P.ndim == 0 or P.shape[-1] != 1):
        P = P[..., None]
    if P.ndim == 0 or P.shape[-1] != m:
        raise InvalidInputError(f"expected parameters with trailing axis {m}, got {P.shape}")
    return P


def real_inner(u, v):
    """``<u, v> = Re sum u conj(v)`` over the last axis."""
    return np.real(np.sum(u * np.conj(v), axis=-1))


def orthonormal_frame(J: np.ndarray, rotation=None, tol: float = 1e-10) -> np.ndarray:
    """Gram-Schmidt (real inner product) on the Jacobian columns, in column order.

    ``rotation`` (an m x m real matrix) is applied to the resulting frame; with
    a proper rotation the orientation is unchanged.
    """
    J = np.asarray(J, dtype=complex)
    m = J.shape[-1]
    scale = np.sqrt(np.max(real_inner(np.swapaxes(J, -1, -2), np.swapaxes(J, -1, -2)), initial=1.0))
    cols = []
    for j in range(m):
        v = J[..., :, j].copy()
        for e in cols:
            v = v - real_inner(v, e)[..., None] * e
        nv = np.sqrt(real_inner(v, v))
        if np.any(nv <= tol * scale):
            raise DegenerateFrameError("Jacobian is rank deficient")
        cols.append(v / nv[..., None])
    E = np.stack(cols, axis=-1) if cols else J.copy()
    if rotation is not None:
        E = E @ np.asarray(rotation, dtype=float)
    return E


@dataclass(frozen=True, eq=False)
class LegendrianMap:
    family: str
    k: int
    domain: tuple
    periodic: tuple
    eval_fn: Callable[[np.ndarray], np.ndarray]
    jac_fn: Callable[[np.ndarray], np.ndarray]
    params: dict = field(default_factory=dict)
    angle_laplacian_fn: Callable[[np.ndarray], np.ndarray] | None = None
    trajectory: Trajectory | None = None

    @property
    def m(self) -> int:
        return len(self.domain)

    def __call__(self, P) -> np.ndarray:
        return self.eval_fn(as_points(P, self.m))

    def jacobian(self, P) -> np.ndarray:
        return self.jac_fn(as_points(P, self.m))

    def complex_volume(self, P, J=None, rotation=None) -> np.ndarray:
        """``det_C{psi, e_1, ..., e_m}`` for the oriented orthonormal frame e."""
        P = as_points(P, self.m)
        psi = self.eval_fn(P)
        if self.m == 0:
            return psi[..., 0]
        J = self.jac_fn(P) if J is None else J
        E = orthonormal_frame(J, rotation)
        M = np.concatenate([psi[..., :, None], E], axis=-1)
        return det_complex(M)

    def angle_laplacian(self, P):
        """Closed-form Laplacian of the Legendrian angle, or None if unknown."""
        if self.angle_laplacian_fn is None:
            return None
        return self.angle_laplacian_fn(as_points(P, self.m))

    def restrict(self, domain) -> "LegendrianMap":
        """Same map on a sub-box; restricted axes are no longer periodic."""
        domain = tuple((float(a), float(b)) for a, b in domain)
        if len(domain) != self.m or any(not b > a for a, b in domain):
            raise InvalidParameterError("restricted domain must be a non-empty box of the same dimension")
        periodic = tuple(p and d == old for p, d, old in zip(self.periodic, domain, self.domain))
        return replace(self, domain=domain, periodic=periodic)

    def sample(self, count: int, seed: int = 0, margin: float = POLE_MARGIN) -> np.ndarray:
        """Deterministic uniform random parameters inside the domain."""
        rng = np.random.default_rng(seed)
        lo = np.array([a for a, _ in self.domain]) + margin
        hi = np.array([b for _, b in self.domain]) - margin
        return lo + (hi - lo) * rng.random((count, self.m))


def _zero_laplacian(P):
    return np.zeros(P.shape[:-1])


# ---------------------------------------------------------------------------
# families in spheres
# ---------------------------------------------------------------------------

def geodesic_sphere(m: int, margin: float = POLE_MARGIN) -> LegendrianMap:
    """Real unit m-sphere in C^(m+1), in hyperspherical coordinates.

    ``x_j = sin(t_1)...sin(t_(j-1)) cos(t_j)`` for j <= m and the last
    coordinate is the product of all sines. The polar angles t_1..t_(m-1) are
    restricted to ``[margin, pi - margin]``; t_m runs over a full period.
    """
    if m < 1:
        raise InvalidParameterError("sphere dimension must be >= 1")

    def ev(P):
        s, c = np.sin(P), np.cos(P)
        out = np.empty(P.shape[:-1] + (m + 1,))
        prod = np.ones(P.shape[:-1])
        for j in range(m):
            out[..., j] = prod * c[..., j]
            prod = prod * s[..., j]
        out[..., m] = prod
        return out.astype(complex)

    def jac(P):
        s, c = np.sin(P), np.cos(P)
        J = np.zeros(P.shape[:-1] + (m + 1, m))
        for j in range(m + 1):
            for i in range(min(j + 1, m)):
                # d/dt_i of (prod_{l<j} sin t_l) * (cos t_j or 1)
                term = np.ones(P.shape[:-1])
                for l in range(min(j, m)):
                    term = term * (c[..., l] if l == i else s[..., l])
                if j < m:
                    term = term * (-s[..., j] if i == j else c[..., j])
                J[..., j, i] = term
        return J.astype(complex)

    domain = tuple([(margin, np.pi - margin)] * (m - 1) + [(0.0, TWO_PI)])
    periodic = tuple([False] * (m - 1) + [True])
    return LegendrianMap("geodesic-sphere", m + 1, domain, periodic, ev, jac,
                         {"m": m}, angle_laplacian_fn=_zero_laplacian)


def flat_torus() -> LegendrianMap:
    """``(e^{is}, e^{it}, e^{-i(s+t)}) / sqrt(3)`` in S^5: flat and minimal."""
    r = 1.0 / np.sqrt(3.0)

    def ev(P):
        s, t = P[..., 0], P[..., 1]
        return r * np.stack([np.exp(1j * s), np.exp(1j * t), np.exp(-1j * (s + t))], axis=-1)

    def jac(P):
        s, t = P[..., 0], P[..., 1]
        e3 = -1j * r * np.exp(-1j * (s + t))
        zero = np.zeros_like(e3)
        ds = np.stack([1j * r * np.exp(1j * s), zero, e3], axis=-1)
        dt = np.stack([zero, 1j * r * np.exp(1j * t), e3], axis=-1)
        return np.stack([ds, dt], axis=-1)

    return LegendrianMap("flat-torus", 3, ((0.0, TWO_PI), (0.0, TWO_PI)), (True, True),
                         ev, jac, {}, angle_laplacian_fn=_zero_laplacian)


def _circle_pair(a: float, wa: float, b: float, wb: float, domain, family: str, params: dict,
                 periodic: bool) -> LegendrianMap:
    def ev(P):
        s = P[..., 0]
        return np.stack([a * np.exp(1j * wa * s), b * np.exp(1j * wb * s)], axis=-1)

    def jac(P):
        s = P[..., 0]
        d = np.stack([1j * wa * a * np.exp(1j * wa * s), 1j * wb * b * np.exp(1j * wb * s)], axis=-1)
        return d[..., None]

    return LegendrianMap(family, 2, (tuple(map(float, domain)),), (periodic,), ev, jac, params,
                         angle_laplacian_fn=_zero_laplacian)


def gamma_phi(phi: float, domain=None) -> LegendrianMap:
    """``(cos phi e^{i tan(phi) s}, sin phi e^{-i cot(phi) s})``: unit speed,
    constant curvature ``tan phi - cot phi``."""
    if not 0.0 < phi < np.pi / 2:
        raise InvalidParameterError("phi must lie in (0, pi/2)")
    tp = np.tan(phi)
    if domain is None:
        domain = (0.0, TWO_PI)
    return _circle_pair(np.cos(phi), tp, np.sin(phi), -1.0 / tp, domain, "gamma-phi",
                        {"phi": float(phi), "curvature": tp - 1.0 / tp}, periodic=False)


def gamma_phi_period(p: int, q: int) -> float:
    """Period of gamma_phi when tan^2(phi) = p/q in lowest terms."""
    g = gcd(p, q)
    p, q = p // g, q // g
    return TWO_PI * np.sqrt(p * q)


def gamma_n1n2(n1: int, n2: int) -> LegendrianMap:
    """Closed constant-curvature Legendrian curve with curvature
    ``sqrt(n2/n1) - sqrt(n1/n2)``, on one full period."""
    if n1 < 1 or n2 < 1:
        raise InvalidParameterError("n1, n2 must be >= 1")
    n = n1 + n2
    period = TWO_PI * np.sqrt(n1 * n2) / gcd(n1, n2)
    return _circle_pair(np.sqrt(n1 / n), np.sqrt(n2 / n1), np.sqrt(n2 / n), -np.sqrt(n1 / n2),
                        (0.0, period), "gamma-n1n2",
                        {"n1": n1, "n2": n2, "curvature": np.sqrt(n2 / n1) - np.sqrt(n1 / n2),
                         "period": period},
                        periodic=True)


def point_map(z: complex = 1.0) -> LegendrianMap:
    """0-dimensional Legendrian 'immersion' of a point into S^1 in C^1."""
    z = complex(z)
    if abs(abs(z) - 1.0) > 1e-12:
        raise InvalidParameterError("point must lie on the unit circle")

    def ev(P):
        return np.full(P.shape[:-1] + (1,), z)

    def jac(P):
        return np.zeros(P.shape[:-1] + (1, 0), dtype=complex)

    return LegendrianMap("point", 1, (), (), ev, jac, {"z": z}, angle_laplacian_fn=_zero_laplacian)


def rotated(psi: LegendrianMap, U) -> LegendrianMap:
    """Image of ``psi`` under a unitary map of C^k (still Legendrian)."""
    U = np.asarray(U, dtype=complex)
    if U.shape != (psi.k, psi.k) or not np.allclose(U.conj().T @ U, np.eye(psi.k), atol=1e-12):
        raise InvalidParameterError("expected a unitary matrix matching the ambient dimension")
    return LegendrianMap(
        psi.family + "+unitary", psi.k, psi.domain, psi.periodic,
        lambda P: psi.eval_fn(P) @ U.T,
        lambda P: U @ psi.jac_fn(P),
        dict(psi.params, unitary=U.tolist()),
        angle_laplacian_fn=psi.angle_laplacian_fn,
        trajectory=psi.trajectory,
    )


# ---------------------------------------------------------------------------
# the one-parameter ODE family and the join construction
# ---------------------------------------------------------------------------

def _gammamu_velocity(n1: int, n2: int, mu: float, t, g1, g2):
    rot = np.exp(1j * mu * t)
    d1 = 1j * rot * np.conj(g1) ** (n1 - 1) * np.conj(g2) ** n2
    d2 = -1j * rot * np.conj(g1) ** n1 * np.conj(g2) ** (n2 - 1)
    return d1, d2


def solve_gammamu(
    n1: int,
    n2: int,
    mu: float,
    gamma0,
    t_end: float,
    unit_speed: bool = False,
    rtol: float = 1e-12,
    atol: float = 1e-12,
    cutoff: float = 1e-6,
) -> LegendrianMap:
    """Integrate ``gamma_j' conj(gamma_j) = (-1)^(j-1) i e^{i mu t} conj(gamma_1)^n1 conj(gamma_2)^n2``.

    The two products fix the velocity completely, and their sum vanishes, so
    the flow stays on S^3 and is Legendrian. With ``unit_speed`` the curve is
    reparametrized by arclength (time is carried as a third state component).
    """
    g0 = np.asarray(gamma0, dtype=complex)
    if g0.shape != (2,) or abs(np.sum(np.abs(g0) ** 2) - 1.0) > 1e-9:
        raise InvalidInputError("gamma0 must be a point of S^3 in C^2")
    if np.any(np.abs(g0) < cutoff):
        raise InvalidInputError("gamma0 must have non-vanishing coordinates")

    def velocity(t, y):
        d1, d2 = _gammamu_velocity(n1, n2, mu, t, y[..., 0], y[..., 1])
        return np.stack([d1, d2], axis=-1)

    def norm_res(y):
        return np.abs(y[..., 0]) ** 2 + np.abs(y[..., 1]) ** 2 - 1.0

    if unit_speed:
        def fieldfn(s, y):
            tau = np.real(y[..., 2])
            v = velocity(tau, y[..., :2])
            speed = np.sqrt(np.sum(np.abs(v) ** 2, axis=-1))
            return np.concatenate([v / speed[..., None], (1.0 / speed)[..., None] + 0j], axis=-1)

        y0 = np.array([g0[0], g0[1], 0.0 + 0j])
        system = OdeSystem(3, fieldfn, {"norm": norm_res})
    else:
        fieldfn = velocity
        y0 = g0
        system = OdeSystem(2, fieldfn, {"norm": norm_res})

    traj = integrate_ode(system, y0, 0.0, float(t_end), rtol=rtol, atol=atol,
                         stop=lambda t, y: bool(np.min(np.abs(y[:2])) < cutoff))

    def ev(P):
        return traj(P[..., 0])[..., :2]

    def jac(P):
        return traj.derivative(P[..., 0])[..., :2, None]

    time_of = (lambda s: np.real(traj(s)[..., 2])) if unit_speed else (lambda s: np.asarray(s))
    curve = LegendrianMap("ode-gammamu", 2, ((0.0, traj.t1),), (False,), ev, jac,
                          {"n1": n1, "n2": n2, "mu": float(mu), "unit_speed": unit_speed,
                           "time_of": time_of},
                          trajectory=traj)
    if traj.stopped:
        raise CoordinateDegeneracyError(
            f"a coordinate of gamma vanished near parameter {traj.t1:.6g}; domain truncated",
            result=curve, last_time=traj.t1,
        )
    return curve


def gammamu_ratio(gamma: LegendrianMap, P, n1: int, n2: int, h: float | None = None):
    """Ratios ``(gamma_j' conj gamma_j) / ((-1)^(j-1) i conj(gamma_1)^n1 conj(gamma_2)^n2)``, j = 1, 2.

    The velocity is the analytic Jacobian, or a finite difference of the
    curve when ``h`` is given. For a solution with mu = 0 both ratios equal
    the same real constant (1 in the solution's own time).
    """
    P = as_points(P, 1)
    g = gamma(P)
    if h is None:
        dg = gamma.jacobian(P)[..., 0]
    else:
        dg = np.stack([numerics.fd_derivative(lambda x: gamma(x)[..., j], P[..., 0], h=h)
                       for j in range(2)], axis=-1)
    w = np.conj(g[..., 0]) ** n1 * np.conj(g[..., 1]) ** n2
    r1 = dg[..., 0] * np.conj(g[..., 0]) / (1j * w)
    r2 = dg[..., 1] * np.conj(g[..., 1]) / (-1j * w)
    return r1, r2


def gammamu_residual(gamma: LegendrianMap, s, h: float = 1e-3) -> np.ndarray:
    """Residual of the defining ODE along an integrated curve, with gamma'
    taken by finite differences of the dense trajectory (not from the field)."""
    p = gamma.params
    s = np.asarray(s, dtype=float)
    g = gamma(s)
    dg = np.stack([numerics.fd_derivative(lambda x: gamma(x)[..., j], s, h=h) for j in range(2)], axis=-1)
    t = p["time_of"](s)
    if p["unit_speed"]:
        dt = numerics.fd_derivative(p["time_of"], s, h=h)
        dg = dg / dt[..., None]
    d1, d2 = _gammamu_velocity(p["n1"], p["n2"], p["mu"], t, g[..., 0], g[..., 1])
    res = np.stack([dg[..., 0] * np.conj(g[..., 0]) - d1 * np.conj(g[..., 0]),
                    dg[..., 1] * np.conj(g[..., 1]) - d2 * np.conj(g[..., 1])], axis=-1)
    return np.max(np.abs(res), axis=-1)


def join_legendrian(g: LegendrianMap, psi1: LegendrianMap, psi2: LegendrianMap) -> LegendrianMap:
    """``(t, x, y) -> (gamma_1(t) psi1(x), gamma_2(t) psi2(y))`` into S^(2(n1+n2)-1)."""
    if g.k != 2 or g.m != 1:
        raise InvalidCompositionError("first ingredient must be a curve in S^3")
    for psi in (psi1, psi2):
        if psi.m != psi.k - 1:
            raise InvalidCompositionError("ingredients must be Legendrian (m = k - 1)")
    n1, n2 = psi1.k, psi2.k
    m1, m2 = psi1.m, psi2.m

    def split(P):
        return P[..., :1], P[..., 1:1 + m1], P[..., 1 + m1:]

    def ev(P):
        t, x, y = split(P)
        gg = g.eval_fn(t)
        return np.concatenate([gg[..., :1] * psi1.eval_fn(x), gg[..., 1:] * psi2.eval_fn(y)], axis=-1)

    def jac(P):
        t, x, y = split(P)
        gg = g.eval_fn(t)
        dg = g.jac_fn(t)[..., 0]
        p1, p2 = psi1.eval_fn(x), psi2.eval_fn(y)
        J = np.zeros(P.shape[:-1] + (n1 + n2, 1 + m1 + m2), dtype=complex)
        J[..., :n1, 0] = dg[..., :1] * p1
        J[..., n1:, 0] = dg[..., 1:] * p2
        J[..., :n1, 1:1 + m1] = gg[..., :1, None] * psi1.jac_fn(x)
        J[..., n1:, 1 + m1:] = gg[..., 1:, None] * psi2.jac_fn(y)
        return J

    return LegendrianMap("join", n1 + n2, g.domain + psi1.domain + psi2.domain,
                         g.periodic + psi1.periodic + psi2.periodic, ev, jac,
                         {"gamma": g, "psi1": psi1, "psi2": psi2})


# ---------------------------------------------------------------------------
# Legendrian angle and contact residual
# ---------------------------------------------------------------------------

def legendrian_angle(psi: LegendrianMap, x, rotation=None) -> np.ndarray:
    """Argument of ``det_C{psi, e_1, ..., e_m}`` with the frame oriented by column order."""
    return np.angle(psi.complex_volume(x, rotation=rotation))


def curve_angle_rate(gamma: LegendrianMap, s, h: float = numerics.DEFAULT_FD_STEP) -> np.ndarray:
    """Derivative of the Legendrian angle of a curve in S^3,
    ``Im(det(gamma, gamma'') / det(gamma, gamma'))``, with gamma'' from the
    analytic velocity by one finite difference."""
    if gamma.k != 2 or gamma.m != 1:
        raise InvalidInputError("expected a curve in S^3")
    s = np.asarray(s, dtype=float)
    g = gamma(s)
    dg = gamma.jacobian(s)[..., 0]
    ddg = numerics.fd_derivative(lambda x: gamma.jacobian(x)[..., 0], s, h=h)
    num = g[..., 0] * ddg[..., 1] - g[..., 1] * ddg[..., 0]
    den = g[..., 0] * dg[..., 1] - g[..., 1] * dg[..., 0]
    return np.imag(num / den)


def legendrian_curvature(gamma: LegendrianMap, s, h: float = numerics.DEFAULT_FD_STEP) -> np.ndarray:
    """Curvature ``<gamma'', J gamma'> / |gamma'|^3`` of a Legendrian curve in S^3."""
    s = np.asarray(s, dtype=float)
    dg = gamma.jacobian(s)[..., 0]
    ddg = numerics.fd_derivative(lambda x: gamma.jacobian(x)[..., 0], s, h=h)
    speed = np.sqrt(np.sum(np.abs(dg) ** 2, axis=-1))
    return real_inner(ddg, 1j * dg) / speed ** 3


@dataclass(frozen=True)
class CurveClosure:
    closed: bool
    period: float | None
    gap: float
    ratio: tuple | None


def gamma_phi_closure(phi: float, max_q: int = 20, tol: float = 1e-7) -> CurveClosure:
    """Decide whether gamma_phi closes, from the best rational approximation
    p/q of tan^2(phi) with q <= max_q and the return gap at the candidate period."""
    curve = gamma_phi(phi)
    frac = Fraction(float(np.tan(phi) ** 2)).limit_denominator(max_q)
    p, q = frac.numerator, frac.denominator
    if p == 0:
        return CurveClosure(False, None, float("inf"), None)
    period = gamma_phi_period(p, q)
    gap = float(np.max(np.abs(curve(period) - curve(0.0))))
    return CurveClosure(gap <= tol, period if gap <= tol else None, gap, (p, q))


def contact_residual(psi: LegendrianMap, P) -> np.ndarray:
    """``<d_i psi, J psi>`` for every axis i; shape ``(..., m)``."""
    P = as_points(P, psi.m)
    p = psi.eval_fn(P)
    J = psi.jac_fn(P)
    return np.imag(np.sum(J * np.conj(p)[..., :, None], axis=-2))


# ---------------------------------------------------------------------------
# curves in the anti de Sitter space
# ---------------------------------------------------------------------------

def hermitian_11(u, v):
    """Indefinite form ``u1 conj(v1) - u2 conj(v2)``."""
    return u[..., 0] * np.conj(v[..., 0]) - u[..., 1] * np.conj(v[..., 1])


@dataclass(frozen=True, eq=False)
class HyperbolicLegendrianCurve:
    family: str
    params: dict
    eval_fn: Callable[[np.ndarray], np.ndarray]
    deriv_fn: Callable[[np.ndarray], np.ndarray]
    domain: tuple[float, float]

    def __post_init__(self):
        t = np.linspace(self.domain[0], self.domain[1], 257)
        a, da = self(t), self.derivative(t)
        worst = max(
            np.max(np.abs(np.real(hermitian_11(a, a)) + 1.0)),
            np.max(np.abs(np.real(hermitian_11(da, da)) - 1.0)),
            np.max(np.abs(da[..., 0] * np.conj(a[..., 0]) - da[..., 1] * np.conj(a[..., 1]))),
        )
        if worst > 1e-9:
            raise InvalidInputError(f"not a unit-speed Legendrian curve in H^3_1 (residual {worst:.3g})")

    def __call__(self, t):
        return self.eval_fn(np.asarray(t, dtype=float))

    def derivative(self, t):
        return self.deriv_fn(np.asarray(t, dtype=float))

    def second_derivative(self, t, h: float = numerics.DEFAULT_FD_STEP):
        return numerics.fd_derivative(self.deriv_fn, np.asarray(t, dtype=float), h=h)

    def angle_rate(self, t):
        """Derivative of :meth:`angle` along the curve."""
        a, da, dda = self(t), self.derivative(t), self.second_derivative(t)
        num = dda[..., 0] * a[..., 1] - dda[..., 1] * a[..., 0]
        den = da[..., 0] * a[..., 1] - da[..., 1] * a[..., 0]
        return np.imag(num / den)

    def angle(self, t):
        """Legendrian angle ``arg det_C{alpha', alpha}``."""
        a, da = self(t), self.derivative(t)
        return np.angle(da[..., 0] * a[..., 1] - da[..., 1] * a[..., 0])


def _hyperbolic_pair(a, wa, b, wb, domain, family, params):
    def ev(t):
        return np.stack([a * np.exp(1j * wa * t), b * np.exp(1j * wb * t)], axis=-1)

    def dv(t):
        return np.stack([1j * wa * a * np.exp(1j * wa * t), 1j * wb * b * np.exp(1j * wb * t)], axis=-1)

    return HyperbolicLegendrianCurve(family, params, ev, dv, tuple(map(float, domain)))


def alpha_delta(delta: float, domain=(0.0, TWO_PI)) -> HyperbolicLegendrianCurve:
    """``(sinh d e^{i coth(d) t}, cosh d e^{i tanh(d) t})`` in H^3_1."""
    if not delta > 0:
        raise InvalidParameterError("delta must be positive")
    return _hyperbolic_pair(np.sinh(delta), 1.0 / np.tanh(delta), np.cosh(delta), np.tanh(delta),
                            domain, "alpha-delta", {"delta": float(delta)})


def alpha_qr(q: int, r: int, domain=None) -> HyperbolicLegendrianCurve:
    """Closed member of the alpha_delta family with ``tanh^2 delta = q / r``."""
    if not (isinstance(q, (int, np.integer)) and isinstance(r, (int, np.integer))) or not 0 < q < r:
        raise InvalidParameterError("need integers 0 < q < r")
    period = alpha_qr_period(q, r)
    if domain is None:
        domain = (0.0, period)
    s = 1.0 / np.sqrt(r - q)
    return _hyperbolic_pair(s * np.sqrt(q), np.sqrt(r / q), s * np.sqrt(r), np.sqrt(q / r),
                            domain, "alpha-qr", {"q": int(q), "r": int(r), "period": period})


def alpha_qr_period(q: int, r: int) -> float:
    return TWO_PI * np.sqrt(q * r) / gcd(q, r)


# ---------------------------------------------------------------------------
# Hopf projections
# ---------------------------------------------------------------------------

def hopf_project(p, kind: str | None = None, tol: float = 1e-9) -> np.ndarray:
    """``(z, w) -> (Re z conj w, Im z conj w, (|z|^2 -+ |w|^2) / 2)``.

    ``kind`` is ``"sphere"`` (S^3 -> S^2(1/2)), ``"hyperbolic"``
    (H^3_1 -> H^2(-1/2)) or None to infer it from the quadric.
    """
    p = np.asarray(p, dtype=complex)
    if p.shape[-1] != 2:
        raise InvalidInputError("expected points of C^2")
    z, w = p[..., 0], p[..., 1]
    n_sph = np.abs(z) ** 2 + np.abs(w) ** 2 - 1.0
    n_hyp = np.abs(z) ** 2 - np.abs(w) ** 2 + 1.0
    if kind is None:
        kind = "sphere" if np.all(np.abs(n_sph) <= tol) else "hyperbolic"
    if kind == "sphere":
        bad, sign = np.abs(n_sph) > tol, -1.0
    elif kind == "hyperbolic":
        bad, sign = np.abs(n_hyp) > tol, 1.0
    else:
        raise InvalidInputError(f"unknown quadric {kind!r}")
    if np.any(bad):
        raise InvalidInputError(f"point(s) off the {kind} quadric")
    zw = z * np.conj(w)
    x3 = 0.5 * (np.abs(z) ** 2 + sign * np.abs(w) ** 2)
    return np.stack([zw.real, zw.imag, x3], axis=-1)


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

LEGENDRIAN_CSV_COLUMNS = ("t", "re1", "im1", "re2", "im2", "beta")
HOPF_CSV_COLUMNS = ("t", "x1", "x2", "x3")


def curve_rows(curve, t) -> np.ndarray:
    """Rows ``t, re1, im1, re2, im2, beta`` for a curve in S^3 or H^3_1."""
    t = np.asarray(t, dtype=float)
    if isinstance(curve, HyperbolicLegendrianCurve):
        pts, beta = curve(t), curve.angle(t)
    else:
        pts, beta = curve(t), legendrian_angle(curve, t)
    return np.column_stack([t, pts[:, 0].real, pts[:, 0].imag, pts[:, 1].real, pts[:, 1].imag, beta])


def write_rows(columns, rows, fh=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(float(x)) for x in row])
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def write_curve_csv(curve, t, fh=None) -> str:
    return write_rows(LEGENDRIAN_CSV_COLUMNS, curve_rows(curve, t), fh)


def write_hopf_csv(curve, t, fh=None) -> str:
    t = np.asarray(t, dtype=float)
    xyz = hopf_project(curve(t))
    return write_rows(HOPF_CSV_COLUMNS, np.column_stack([t, xyz]), fh)
