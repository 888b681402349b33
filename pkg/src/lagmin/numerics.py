"""Small numeric kernel: complex determinants, finite differences, ODE
integration with dense evaluation, and angle unwrapping.

All routines are vectorized over leading batch axes so that grid pipelines
can push whole parameter grids through them at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import AmbiguousUnwrapError, IntegrationError, InvalidInputError

MAX_DIM = 8
DEFAULT_FD_STEP = 1e-3
DEFAULT_ODE_TOL = 1e-10
TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# complex determinant
# ---------------------------------------------------------------------------

def det_complex(m) -> complex | np.ndarray:
    """Determinant of a complex square matrix (or a stack of them).

    LU factorisation with partial pivoting, batched over leading axes.
    Returns a Python complex for a single matrix.
    """
    a = np.array(m, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise InvalidInputError(f"expected square matrices, got shape {a.shape}")
    d = a.shape[-1]
    if not 1 <= d <= MAX_DIM:
        raise InvalidInputError(f"matrix dimension {d} outside 1..{MAX_DIM}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix has non-finite entries")
    batch = a.shape[:-2]
    a = a.reshape(-1, d, d)
    nb = a.shape[0]
    rows = np.arange(nb)
    det = np.ones(nb, dtype=complex)
    for k in range(d):
        piv = k + np.argmax(np.abs(a[:, k:, k]), axis=1)
        swap = piv != k
        if np.any(swap):
            r, p = rows[swap], piv[swap]
            tmp = a[r, k, :].copy()
            a[r, k, :] = a[r, p, :]
            a[r, p, :] = tmp
            det[swap] = -det[swap]
        pivot = a[:, k, k]
        det *= pivot
        if k + 1 < d:
            nz = pivot != 0
            factor = np.zeros((nb, d - k - 1), dtype=complex)
            factor[nz] = a[nz, k + 1:, k] / pivot[nz, None]
            a[:, k + 1:, k:] -= factor[:, :, None] * a[:, None, k, k:]
    if batch == ():
        return complex(det[0])
    return det.reshape(batch)


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------

def fd_derivative(f: Callable, p, axis: int | None = None, h: float = DEFAULT_FD_STEP):
    """Fourth-order central difference of ``f`` at ``p``.

    With ``axis=None`` every entry of ``p`` is shifted (a scalar or a batch of
    scalar parameters). With an integer ``axis``, ``p`` holds points with
    coordinates on its last axis and only that coordinate is shifted.
    """
    if not h > 0:
        raise InvalidInputError("finite-difference step must be positive")
    p = np.asarray(p, dtype=float)
    if axis is None:
        shift = lambda k: p + k * h
    else:
        if p.ndim == 0 or not -p.shape[-1] <= axis < p.shape[-1]:
            raise InvalidInputError(f"axis {axis} out of range for points of shape {p.shape}")
        e = np.zeros(p.shape[-1])
        e[axis] = h
        shift = lambda k: p + k * e
    fm2, fm1, fp1, fp2 = (np.asarray(f(shift(k))) for k in (-2, -1, 1, 2))
    return (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h)


def _shifted(a: np.ndarray, axis: int, k: int) -> np.ndarray:
    """View of ``a`` shifted by ``k`` nodes along ``axis`` (interior region only)."""
    n = a.shape[axis]
    sl = [slice(None)] * a.ndim
    sl[axis] = slice(2 + k, n - 2 + k)
    return a[tuple(sl)]


def _pad_interior(core: np.ndarray, axis: int) -> np.ndarray:
    pad = [(0, 0)] * core.ndim
    pad[axis] = (2, 2)
    return np.pad(core.astype(np.result_type(core, float)), pad, constant_values=np.nan)


def grid_diff(a: np.ndarray, axis: int, h: float, order: int = 1) -> np.ndarray:
    """Fourth-order central difference of gridded data along ``axis``.

    The result has the shape of ``a``; the two boundary nodes on each side of
    ``axis`` are NaN since the five-point stencil does not fit there.
    """
    a = np.asarray(a)
    if a.shape[axis] < 5:
        raise InvalidInputError("need at least 5 nodes along each differentiated axis")
    fm2, fm1, f0, fp1, fp2 = (_shifted(a, axis, k) for k in (-2, -1, 0, 1, 2))
    if order == 1:
        core = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h)
    elif order == 2:
        core = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h)
    else:
        raise InvalidInputError("order must be 1 or 2")
    return _pad_interior(core, axis)


# ---------------------------------------------------------------------------
# ODE integration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OdeSystem:
    """First-order system y' = field(t, y).

    ``field`` must be vectorized: ``t`` broadcasts against ``y[..., 0]``.
    ``invariants`` maps names to residual evaluators ``y -> array`` that are
    monitored along every trajectory.
    """

    dim: int
    field: Callable[[np.ndarray, np.ndarray], np.ndarray]
    invariants: Mapping[str, Callable[[np.ndarray], np.ndarray]] = field(default_factory=dict)
    autonomous: bool = False


# Dormand-Prince 5(4)
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_DP_E = _DP_B5 - _DP_B4


def _dp_step(fun, t, y, f0, h):
    """One Dormand-Prince step; ``t``/``h`` may be arrays broadcasting over y[..., 0]."""
    t = np.asarray(t, dtype=float)
    h = np.asarray(h, dtype=float)
    hy = h[..., None] if h.ndim else h
    ks = [f0]
    for i in range(1, 7):
        incr = sum(a * k for a, k in zip(_DP_A[i], ks) if a != 0.0)
        ks.append(fun(t + _DP_C[i] * h, y + hy * incr))
    y5 = y + hy * sum(b * k for b, k in zip(_DP_B5, ks) if b != 0.0)
    err = hy * sum(e * k for e, k in zip(_DP_E, ks))
    return y5, ks[-1], err


def _rk4_step(fun, t, y, f0, h):
    t = np.asarray(t, dtype=float)
    h = np.asarray(h, dtype=float)
    hy = h[..., None] if h.ndim else h
    k1 = f0
    k2 = fun(t + 0.5 * h, y + 0.5 * hy * k1)
    k3 = fun(t + 0.5 * h, y + 0.5 * hy * k2)
    k4 = fun(t + h, y + hy * k3)
    return y + hy * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


@dataclass(frozen=True)
class Trajectory:
    """Accepted nodes of an integration run plus dense evaluation.

    Between nodes the state is reconstructed by one step of the same method
    from the nearest node on the left, so off-node values carry the local
    error of a single accepted step.
    """

    system: OdeSystem
    t: np.ndarray
    y: np.ndarray
    f: np.ndarray
    method: str
    rtol: float
    atol: float
    invariants: dict
    stopped: bool = False

    @property
    def t0(self) -> float:
        return float(self.t[0])

    @property
    def t1(self) -> float:
        return float(self.t[-1])

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        flat = t.reshape(-1)
        tol = 1e-12 * max(1.0, abs(self.t1))
        if np.any(flat < self.t0 - tol) or np.any(flat > self.t1 + tol):
            raise InvalidInputError(f"time outside trajectory range [{self.t0}, {self.t1}]")
        ts, ys, fs = self.t, self.y, self.f
        idx = np.clip(np.searchsorted(ts, flat, side="right") - 1, 0, len(ts) - 1)
        dt = flat - ts[idx]
        out = ys[idx].copy()
        move = dt != 0.0
        if np.any(move):
            fun = self.system.field
            if self.method == "rk4":
                out[move] = _rk4_step(fun, ts[idx][move], ys[idx][move], fs[idx][move], dt[move])
            else:
                out[move] = _dp_step(fun, ts[idx][move], ys[idx][move], fs[idx][move], dt[move])[0]
        return out.reshape(t.shape + (self.system.dim,))

    def derivative(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.system.field(t, self(t))

    def max_invariant_residual(self) -> dict:
        return {k: float(np.max(np.abs(v))) for k, v in self.invariants.items()}


def integrate_ode(
    sys: OdeSystem,
    y0,
    t0: float,
    t1: float,
    method: str = "dopri5",
    rtol: float = DEFAULT_ODE_TOL,
    atol: float = DEFAULT_ODE_TOL,
    step: float | None = None,
    max_step: float | None = None,
    max_steps: int = 1_000_000,
    stop: Callable[[float, np.ndarray], bool] | None = None,
) -> Trajectory:
    """Integrate ``sys`` from ``t0`` to ``t1``.

    ``method`` is ``"dopri5"`` (adaptive, embedded 5(4) pair with error
    control ``atol + rtol*|y|``) or ``"rk4"`` (classical fixed step ``step``,
    shortened to land exactly on ``t1``). ``stop(t, y)`` returning True ends
    the run early with ``stopped=True``; the last stored node is the last
    state for which ``stop`` was False.
    """
    y = np.array(y0)
    if not np.issubdtype(y.dtype, np.complexfloating):
        y = y.astype(float)
    if y.shape != (sys.dim,):
        raise InvalidInputError(f"initial state must have shape ({sys.dim},)")
    if not np.all(np.isfinite(y)):
        raise InvalidInputError("initial state is not finite")
    if not t1 > t0:
        raise InvalidInputError("integration requires t1 > t0")
    fun = sys.field
    t = float(t0)
    f = np.asarray(fun(np.float64(t), y))
    ts, ys, fs = [t], [y.copy()], [f.copy()]
    span = t1 - t0
    stopped = False

    if method == "rk4":
        if step is None or not step > 0:
            raise InvalidInputError("rk4 needs a positive fixed step")
        nsteps = int(np.ceil(span / step - 1e-12))
        for i in range(nsteps):
            tn = t0 + (i + 1) * span / nsteps
            y = _rk4_step(fun, t, y, f, tn - t)
            t = tn
            f = np.asarray(fun(np.float64(t), y))
            if not np.all(np.isfinite(y)):
                raise IntegrationError("non-finite state", last_time=ts[-1])
            if stop is not None and stop(t, y):
                stopped = True
                break
            ts.append(t)
            ys.append(y.copy())
            fs.append(f.copy())
    elif method == "dopri5":
        hmax = span if max_step is None else max_step
        scale = atol + rtol * np.abs(y)
        d0 = np.sqrt(np.mean(np.abs(y / scale) ** 2))
        d1 = np.sqrt(np.mean(np.abs(f / scale) ** 2))
        h = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        h = min(h, hmax)
        n = 0
        while t < t1:
            if n >= max_steps:
                raise IntegrationError("maximum number of steps exceeded", last_time=t)
            h = min(h, t1 - t)
            if h < 1e-14 * max(1.0, abs(t)):
                raise IntegrationError("step size underflow", last_time=t)
            y_new, f_new, err = _dp_step(fun, t, y, f, h)
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            enorm = np.sqrt(np.mean(np.abs(err / scale) ** 2))
            if not np.isfinite(enorm):
                h *= 0.2
                continue
            if enorm <= 1.0:
                t_new = t + h if t1 - (t + h) > 1e-14 * max(1.0, abs(t1)) else float(t1)
                n += 1
                if stop is not None and stop(t_new, y_new):
                    stopped = True
                    break
                t, y, f = t_new, y_new, f_new
                ts.append(t)
                ys.append(y.copy())
                fs.append(f.copy())
                fac = 5.0 if enorm == 0 else min(5.0, 0.9 * enorm ** -0.2)
                h = min(h * fac, hmax)
            else:
                h *= max(0.2, 0.9 * enorm ** -0.2)
    else:
        raise InvalidInputError(f"unknown method {method!r}")

    ys_a = np.array(ys)
    inv = {name: np.asarray(fn(ys_a)) for name, fn in sys.invariants.items()}
    return Trajectory(sys, np.array(ts), ys_a, np.array(fs), method, rtol, atol, inv, stopped)


# ---------------------------------------------------------------------------
# angles
# ---------------------------------------------------------------------------

def wrap_angle(x):
    """Principal value in (-pi, pi]."""
    x = np.asarray(x, dtype=float)
    return np.pi - np.mod(np.pi - x, TWO_PI)


@dataclass(frozen=True)
class AngleSeries:
    samples: np.ndarray
    unwrapped: bool = False

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if not self.unwrapped:
            s = wrap_angle(s)
        object.__setattr__(self, "samples", s)


def unwrap_array(a, axis: int = -1, tol: float = 1e-9) -> np.ndarray:
    """Remove 2*pi jumps along ``axis``; the first sample of each line is kept.

    Raises :class:`AmbiguousUnwrapError` when a raw jump lies within ``tol``
    of +-pi, where the branch choice is undecidable.
    """
    a = np.asarray(a, dtype=float)
    if a.shape[axis] < 2:
        return a.copy()
    d = np.diff(a, axis=axis)
    dw = wrap_angle(d)
    bad = np.abs(np.abs(dw) - np.pi) < tol
    if np.any(bad):
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise AmbiguousUnwrapError(f"jump of pi at index {idx}; refine the sampling", index=idx)
    corr = np.cumsum(dw - d, axis=axis)
    pad = [(0, 0)] * a.ndim
    pad[axis] = (1, 0)
    return a + np.pad(corr, pad)


def unwrap(series: AngleSeries, tol: float = 1e-9) -> AngleSeries:
    if series.unwrapped:
        return series
    return AngleSeries(unwrap_array(series.samples, tol=tol), unwrapped=True)


def unwrap_grid(a, tol: float = 1e-9) -> np.ndarray:
    """Unwrap a gridded angle along axis-0 lines from the origin node, then
    successively along the remaining axes."""
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        return unwrap_array(a, tol=tol)
    base = unwrap_grid(a[..., 0], tol=tol)
    lines = unwrap_array(a, axis=-1, tol=tol)
    return lines - lines[..., :1] + base[..., None]


def winding_number(samples, tol: float = 1e-9) -> int:
    """Total winding of a closed loop of angle samples (last node joins the first)."""
    s = np.asarray(samples, dtype=float)
    loop = unwrap_array(np.append(s, s[0]), tol=tol)
    return int(np.rint((loop[-1] - loop[0]) / TWO_PI))
