"""Planar curves: lines, circles, Cornu spirals and constant-A spirals.

A planar curve is a map ``s -> alpha(s)`` into C, evaluated on numpy arrays.
Besides the point map every family carries its first derivative, and where it
is cheap the second derivative and the signed curvature in closed form.

The angle ``G_alpha = arg alpha' + (n-1) arg alpha`` and the quantity
``A_alpha = |alpha|^(n-1) G_alpha'`` are what the product constructions in
:mod:`lagmin.constructions` are built from.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq

from . import numerics
from .errors import (
    InvalidInputError,
    InvalidParameterError,
    NeedsMoreIntegrationError,
    OriginApproachError,
    OriginCrossingError,
    SingularPointError,
)
from .numerics import TWO_PI, OdeSystem, Trajectory, integrate_ode, unwrap_array, wrap_angle

FAMILIES = ("line", "circle", "cornu", "constantA", "sampled")
ORIGIN_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class PlanarCurve:
    family: str
    params: dict
    point_fn: Callable[[np.ndarray], np.ndarray]
    deriv_fn: Callable[[np.ndarray], np.ndarray]
    domain: tuple[float, float]
    arclength: bool = True
    second_fn: Callable[[np.ndarray], np.ndarray] | None = None
    curvature_fn: Callable[[np.ndarray], np.ndarray] | None = None
    trajectory: Trajectory | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __call__(self, s):
        return self.point_fn(np.asarray(s, dtype=float))

    def derivative(self, s):
        return self.deriv_fn(np.asarray(s, dtype=float))

    def second_derivative(self, s):
        s = np.asarray(s, dtype=float)
        if self.second_fn is not None:
            return self.second_fn(s)
        return numerics.fd_derivative(self.deriv_fn, s)

    def restrict(self, lo: float, hi: float) -> "PlanarCurve":
        """Same curve on the sub-interval ``[lo, hi]``."""
        if not hi > lo:
            raise InvalidInputError("empty domain")
        if self.trajectory is not None:
            a, b = self.domain
            if lo < a - 1e-12 or hi > b + 1e-12:
                raise InvalidInputError("cannot extend an integrated curve by restriction")
        return replace(self, domain=(float(lo), float(hi)), _cache={})

    def scaled(self, lam: float) -> "PlanarCurve":
        """The curve ``lam * alpha(s / lam)``, again parametrized by arclength."""
        if not lam > 0:
            raise InvalidParameterError("scale factor must be positive")
        p = self.params
        lo, hi = self.domain
        dom = (lam * lo, lam * hi)
        if self.family == "circle":
            return make_circle(p["R"] * lam, center=p["center"] * lam, domain=dom)
        if self.family == "line":
            return make_line(p["direction"], p["offset"] * lam, domain=dom)
        if self.family == "cornu":
            return make_cornu(p["lambda"] / lam**2, domain=dom)
        if self.family == "constantA":
            n = p["n"]
            return make_constantA(
                n, p["c"] * lam ** (n - 2), p["r0"] * lam, p["theta0"],
                length=p["length"] * lam, rtol=p["rtol"], atol=p["atol"],
            )
        pf, df, sf = self.point_fn, self.deriv_fn, self.second_derivative
        kf = self.curvature_fn
        return PlanarCurve(
            self.family, dict(p, scale=lam * p.get("scale", 1.0)),
            lambda s: lam * pf(s / lam), lambda s: df(s / lam), dom, self.arclength,
            second_fn=lambda s: sf(s / lam) / lam,
            curvature_fn=None if kf is None else (lambda s: kf(s / lam) / lam),
        )


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------

def make_line(direction=1.0 + 0.0j, offset=0.0j, domain=(-10.0, 10.0)) -> PlanarCurve:
    d = complex(direction)
    if abs(d) == 0:
        raise InvalidParameterError("line direction must be non-zero")
    d /= abs(d)
    o = complex(offset)
    return PlanarCurve(
        "line", {"direction": d, "offset": o},
        lambda s: o + d * s,
        lambda s: d * np.ones_like(s, dtype=complex),
        tuple(map(float, domain)),
        second_fn=lambda s: np.zeros_like(s, dtype=complex),
        curvature_fn=lambda s: np.zeros_like(s, dtype=float),
    )


def make_circle(R: float, center=0.0j, domain=None) -> PlanarCurve:
    """Circle ``center + R exp(i s / R)``, counter-clockwise, unit speed."""
    if not R > 0:
        raise InvalidParameterError("circle radius must be positive")
    R = float(R)
    c0 = complex(center)
    if domain is None:
        domain = (0.0, TWO_PI * R)
    return PlanarCurve(
        "circle", {"R": R, "center": c0},
        lambda s: c0 + R * np.exp(1j * s / R),
        lambda s: 1j * np.exp(1j * s / R),
        tuple(map(float, domain)),
        second_fn=lambda s: -np.exp(1j * s / R) / R,
        curvature_fn=lambda s: np.full(np.shape(s), 1.0 / R),
    )


_GL_NODES, _GL_WEIGHTS = leggauss(16)


def _fresnel_panels(s: float, lam: float, panels: int) -> complex:
    edges = np.linspace(0.0, s, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    t = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    vals = np.exp(0.5j * lam * t * t)
    return complex(np.sum(half[:, None] * _GL_WEIGHTS[None, :] * vals))


def fresnel_integral(s, lam: float, target: float = 1e-11) -> np.ndarray:
    """``int_0^s exp(i lam t^2 / 2) dt`` by panel-adaptive Gauss-Legendre quadrature.

    The panel count starts from the phase swept over ``[0, s]`` and is doubled
    until two successive estimates agree to ``target``.
    """
    s = np.asarray(s, dtype=float)
    flat = s.reshape(-1)
    uniq, inv = np.unique(flat, return_inverse=True)
    out = np.empty(uniq.shape, dtype=complex)
    for i, x in enumerate(uniq):
        if x == 0.0:
            out[i] = 0.0
            continue
        panels = max(1, int(np.ceil(abs(x) * (1.0 + abs(lam * x)) / 2.0)))
        est = _fresnel_panels(x, lam, panels)
        while True:
            panels *= 2
            new = _fresnel_panels(x, lam, panels)
            if abs(new - est) <= target or panels > 1 << 20:
                est = new
                break
            est = new
        out[i] = est
    return out[inv].reshape(s.shape)


def make_cornu(lam: float, domain=(-6.0, 6.0)) -> PlanarCurve:
    """Cornu spiral with curvature ``lam * s``, through the origin at s = 0."""
    if lam == 0:
        raise InvalidParameterError("Cornu parameter must be non-zero (use make_line)")
    lam = float(lam)
    deriv = lambda s: np.exp(0.5j * lam * s * s)
    return PlanarCurve(
        "cornu", {"lambda": lam},
        lambda s: fresnel_integral(s, lam),
        deriv,
        tuple(map(float, domain)),
        second_fn=lambda s: 1j * lam * s * deriv(s),
        curvature_fn=lambda s: lam * s,
    )


def _constant_a_system(n: int, c: float) -> OdeSystem:
    def fieldfn(t, y):
        x, yy, th = y[..., 0], y[..., 1], y[..., 2]
        r2 = x * x + yy * yy
        ct, st = np.cos(th), np.sin(th)
        cross = x * st - yy * ct  # Im(conj(alpha) alpha')
        k = c * r2 ** ((1 - n) / 2) - (n - 1) * cross / r2
        return np.stack([ct, st, k], axis=-1)

    def first_integral(y):
        x, yy, th = y[..., 0], y[..., 1], y[..., 2]
        r2 = x * x + yy * yy
        cross = x * np.sin(th) - yy * np.cos(th)
        e = r2 ** ((n - 1) / 2) * cross - 0.5 * c * r2
        return e - e[0]

    return OdeSystem(3, fieldfn, {"first_integral": first_integral}, autonomous=True)


def make_constantA(
    n: int,
    c: float,
    r0: float,
    theta0: float = np.pi / 2,
    length: float = 40.0,
    rtol: float = 1e-12,
    atol: float = 1e-12,
    cutoff: float = 1e-6,
) -> PlanarCurve:
    """Arclength curve with ``|alpha|^(n-1) G_alpha' = c``, from ``alpha(0) = r0``
    with tangent angle ``theta0``.

    The curve is integrated once, on ``[0, length]``, as the system
    ``alpha' = exp(i theta)``, ``theta' = c |alpha|^(1-n) - (n-1) Im(conj(alpha) alpha') / |alpha|^2``.
    """
    if n < 2:
        raise InvalidParameterError("ambient dimension n must be >= 2")
    if not r0 > 0:
        raise InvalidParameterError("r0 must be positive")
    system = _constant_a_system(int(n), float(c))
    last = [complex(r0, 0.0)]

    def near_origin(t, y):
        # the chord between accepted nodes is tested too, since a radial
        # line passes through the origin without slowing the integrator
        z, p = complex(y[0], y[1]), last[0]
        last[0] = z
        d = z - p
        u = 0.0 if d == 0 else min(max(-(p.conjugate() * d).real / abs(d) ** 2, 0.0), 1.0)
        return abs(p + u * d) < cutoff

    traj = integrate_ode(
        system, [float(r0), 0.0, float(theta0)], 0.0, float(length),
        rtol=rtol, atol=atol, max_step=0.1 * r0, stop=near_origin,
    )
    params = {"n": int(n), "c": float(c), "r0": float(r0), "theta0": float(theta0),
              "length": float(length), "rtol": rtol, "atol": atol}

    def point(s):
        y = traj(s)
        return y[..., 0] + 1j * y[..., 1]

    def deriv(s):
        return np.exp(1j * traj(s)[..., 2])

    def curvature(s):
        return traj.derivative(s)[..., 2]

    def second(s):
        y = traj(s)
        return 1j * system.field(s, y)[..., 2] * np.exp(1j * y[..., 2])

    curve = PlanarCurve("constantA", params, point, deriv, (0.0, traj.t1),
                        second_fn=second, curvature_fn=curvature, trajectory=traj)
    if traj.stopped:
        raise OriginApproachError(
            f"trajectory reached |alpha| < {cutoff} near s = {traj.t1:.6g}; domain truncated",
            result=curve, last_time=traj.t1,
        )
    return curve


def make_sampled(s, points, arclength: bool = False) -> PlanarCurve:
    """Cubic-spline curve through sampled points (e.g. read back from CSV)."""
    from scipy.interpolate import CubicSpline

    s = np.asarray(s, dtype=float)
    pts = np.asarray(points, dtype=complex)
    spl = CubicSpline(s, pts)
    d1, d2 = spl.derivative(1), spl.derivative(2)
    return PlanarCurve("sampled", {"nodes": len(s)}, spl, d1, (float(s[0]), float(s[-1])),
                       arclength=arclength, second_fn=d2)


# ---------------------------------------------------------------------------
# curvature, G_alpha, A_alpha
# ---------------------------------------------------------------------------

def curvature(c: PlanarCurve, s, h: float = numerics.DEFAULT_FD_STEP):
    """Signed curvature at ``s``."""
    s = np.asarray(s, dtype=float)
    speed = np.abs(c.derivative(s))
    if np.any(speed < 1e-12):
        raise SingularPointError("curve is not regular at the requested parameter")
    if c.curvature_fn is not None and c.arclength:
        return c.curvature_fn(s)

    def local_arg(x):
        return np.angle(c.derivative(x) * np.conj(c.derivative(s)))

    return numerics.fd_derivative(local_arg, s, h=h) / speed


def _check_origin(a):
    if np.any(np.abs(a) < ORIGIN_EPS):
        raise OriginCrossingError("curve passes through the origin")


def _g_raw(c: PlanarCurve, n: int, s):
    a = c(s)
    _check_origin(a)
    return np.angle(c.derivative(s)) + (n - 1) * np.angle(a)


def _g_reference(c: PlanarCurve, n: int):
    key = ("G", n)
    if key in c._cache:
        return c._cache[key]
    lo, hi = c.domain
    mid = 0.5 * (lo + hi)
    count = 2001
    while True:
        grid = np.linspace(lo, hi, count)
        raw = _g_raw(c, n, grid)
        ref = unwrap_array(raw)
        if np.max(np.abs(np.diff(ref)), initial=0.0) < np.pi / 4 or count > 2_000_000:
            break
        count = 4 * count - 3
    anchor = float(wrap_angle(_g_raw(c, n, np.array(mid))))
    at_mid = float(np.interp(mid, grid, ref))
    ref = ref - TWO_PI * np.rint((at_mid - anchor) / TWO_PI)
    c._cache[key] = (grid, ref)
    return grid, ref


def g_alpha(c: PlanarCurve, n: int, s):
    """``G_alpha = arg alpha' + (n-1) arg alpha``, continuous along the domain
    and on the principal branch at the domain midpoint."""
    if n < 2:
        raise InvalidParameterError("n must be >= 2")
    s = np.asarray(s, dtype=float)
    grid, ref = _g_reference(c, n)
    raw = _g_raw(c, n, s)
    approx = np.interp(s, grid, ref)
    return raw + TWO_PI * np.rint((approx - raw) / TWO_PI)


def g_alpha_prime(c: PlanarCurve, n: int, s):
    """Arclength derivative of ``G_alpha`` from curvature and ``<alpha', J alpha>/|alpha|^2``."""
    s = np.asarray(s, dtype=float)
    a, da = c(s), c.derivative(s)
    _check_origin(a)
    speed = np.abs(da)
    turn = np.imag(np.conj(a) * da) / (np.abs(a) ** 2 * speed)
    return curvature(c, s) + (n - 1) * turn


def a_alpha(c: PlanarCurve, n: int, s):
    """``A_alpha = |alpha|^(n-1) G_alpha'``."""
    s = np.asarray(s, dtype=float)
    return np.abs(c(s)) ** (n - 1) * g_alpha_prime(c, n, s)


def a_alpha_power_curvature(c: PlanarCurve, n: int, s):
    """``|alpha|^(2n-2) * curvature of the curve alpha^n``.

    Kept next to :func:`a_alpha` so the two normalizations can be compared;
    for unit-speed curves ``a_alpha = n * a_alpha_power_curvature``.
    """
    s = np.asarray(s, dtype=float)
    a, da, dda = c(s), c.derivative(s), c.second_derivative(s)
    _check_origin(a)
    b1 = n * a ** (n - 1) * da
    b2 = n * (n - 1) * a ** (n - 2) * da * da + n * a ** (n - 1) * dda
    kappa_n = np.imag(np.conj(b1) * b2) / np.abs(b1) ** 3
    return np.abs(a) ** (2 * n - 2) * kappa_n


# ---------------------------------------------------------------------------
# closure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClosureResult:
    closed: bool
    period: float | None
    gap: float
    rotation: tuple[int, int] | None = None
    ratio: float | None = None
    radial_period: float | None = None
    note: str = ""


def _radial_maxima(c: PlanarCurve) -> np.ndarray:
    """Arclength positions where |alpha| has a local maximum."""
    lo, hi = c.domain
    traj = c.trajectory
    nodes = traj.t if traj is not None else np.linspace(lo, hi, 4001)
    sub = np.linspace(0.0, 1.0, 9)[:-1]
    grid = np.concatenate([(nodes[:-1, None] + np.diff(nodes)[:, None] * sub).ravel(), nodes[-1:]])
    grid = grid[(grid >= lo) & (grid <= hi)]

    def radial_velocity(x):
        return np.real(np.conj(c(x)) * c.derivative(x))

    u = radial_velocity(grid)
    idx = np.where((u[:-1] > 0) & (u[1:] <= 0))[0]
    roots = []
    for i in idx:
        a, b = grid[i], grid[i + 1]
        if radial_velocity(np.array(b)) == 0:
            roots.append(b)
            continue
        roots.append(brentq(lambda x: float(radial_velocity(np.array(x))), a, b, xtol=1e-14, rtol=1e-15))
    return np.array(roots)


def _phase_advance(c: PlanarCurve, a: float, b: float) -> float:
    count = 2001
    while True:
        s = np.linspace(a, b, count)
        ph = unwrap_array(np.angle(c(s)))
        if np.max(np.abs(np.diff(ph))) < np.pi / 8 or count > 10**6:
            return float(ph[-1] - ph[0])
        count *= 4


def detect_closure(c: PlanarCurve, tol: float = 1e-5, max_q: int = 64) -> ClosureResult:
    """Decide whether the curve closes up.

    For constant-A spirals the apsidal angle advanced over one radial period is
    measured; if its ratio to 2*pi is within reach of a fraction p/q with
    q <= ``max_q`` the curve is continued over q radial periods and declared
    closed when both the position and the heading return within ``tol``.
    """
    if c.family == "circle":
        return ClosureResult(True, TWO_PI * c.params["R"], 0.0)
    if c.family in ("line", "cornu"):
        return ClosureResult(False, None, float("inf"), note=f"{c.family} never closes")
    if c.family == "sampled":
        lo, hi = c.domain
        gap = float(abs(c(hi) - c(lo)) + abs(wrap_angle(np.angle(c.derivative(hi)) - np.angle(c.derivative(lo)))))
        return ClosureResult(gap <= tol, hi - lo if gap <= tol else None, gap)
    if c.family != "constantA":
        raise InvalidInputError(f"closure detection not supported for family {c.family!r}")

    maxima = _radial_maxima(c)
    lo, hi = c.domain
    if len(maxima) < 2:
        r = np.abs(c(np.linspace(lo, hi, 201)))
        if len(maxima) == 0 and r[-1] > 2.0 * r[0] and np.all(np.diff(r[len(r) // 2:]) > 0):
            return ClosureResult(False, None, float("inf"), note="unbounded: radius grows monotonically")
        raise NeedsMoreIntegrationError(
            "fewer than one full radial oscillation on the stored domain",
            suggested_length=2.0 * (hi - lo),
        )
    s0, s1 = float(maxima[0]), float(maxima[1])
    T = s1 - s0
    ratio = _phase_advance(c, s0, s1) / TWO_PI
    frac = Fraction(ratio).limit_denominator(max_q)
    p, q = frac.numerator, frac.denominator
    need = s0 + q * T
    curve = c
    if need > hi - 1e-9:
        p_ = c.params
        curve = make_constantA(p_["n"], p_["c"], p_["r0"], p_["theta0"], length=need + T,
                               rtol=p_["rtol"], atol=p_["atol"])
    a0, a1 = curve(np.array(s0)), curve(np.array(need))
    th0 = np.angle(curve.derivative(np.array(s0)))
    th1 = np.angle(curve.derivative(np.array(need)))
    gap = float(abs(a1 - a0) + abs(wrap_angle(th1 - th0)))
    closed = gap <= tol
    return ClosureResult(closed, q * T if closed else None, gap, (p, q), ratio, T)


def apsidal_ratio(c: PlanarCurve) -> float:
    """Polar angle advanced over one radial period, divided by 2*pi."""
    maxima = _radial_maxima(c)
    if len(maxima) < 2:
        raise NeedsMoreIntegrationError("need two radial maxima", suggested_length=2.0 * (c.domain[1] - c.domain[0]))
    return _phase_advance(c, float(maxima[0]), float(maxima[1])) / TWO_PI


def shoot_constantA(n: int, c: float, target: float, bracket: tuple, theta0: float = np.pi / 2,
                    length: float = 40.0, probe_length: float = 8.0) -> PlanarCurve:
    """Constant-A curve whose apsidal ratio equals ``target``, found by
    bisection on the initial radius inside ``bracket``.

    Each probe integrates ``probe_length`` of arclength, which must cover two
    radial maxima; the returned curve has the full ``length``.
    """
    def miss(r0):
        return apsidal_ratio(make_constantA(n, c, r0, theta0, length=probe_length)) - target

    a, b = map(float, bracket)
    fa, fb = miss(a), miss(b)
    if fa * fb > 0:
        raise InvalidParameterError(
            f"apsidal ratio does not cross {target} on r0 in [{a}, {b}] (ends {fa + target:.6g}, {fb + target:.6g})")
    r0 = brentq(miss, a, b, xtol=1e-14, rtol=1e-14)
    return make_constantA(n, c, r0, theta0, length=length)


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

CURVE_CSV_COLUMNS = ("s", "re", "im", "kappa", "G_alpha", "A_alpha")


def _fmt(x: float) -> str:
    return repr(float(x))


def curve_table(c: PlanarCurve, s, n: int = 2) -> np.ndarray:
    """Rows ``s, re, im, kappa, G_alpha, A_alpha``; G/A are NaN where alpha = 0."""
    s = np.asarray(s, dtype=float)
    a = c(s)
    kap = curvature(c, s)
    ok = np.abs(a) >= ORIGIN_EPS
    G = np.full(s.shape, np.nan)
    A = np.full(s.shape, np.nan)
    if np.any(ok):
        # G jumps by (n - 1) pi through the origin, so each run of samples
        # between excluded points is unwrapped on its own
        idx = np.flatnonzero(ok)
        for seg in np.split(idx, np.flatnonzero(np.diff(idx) > 1) + 1):
            raw = np.angle(c.derivative(s[seg])) + (n - 1) * np.angle(a[seg])
            G[seg] = unwrap_array(raw)
        A[ok] = a_alpha(c, n, s[ok])
    return np.column_stack([s, a.real, a.imag, kap, G, A])


def write_curve_csv(c: PlanarCurve, s, fh=None, n: int = 2) -> str:
    """Write the curve CSV layout; returns the text (also written to ``fh`` if given)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CURVE_CSV_COLUMNS)
    for row in curve_table(c, s, n):
        w.writerow([_fmt(x) for x in row])
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text
