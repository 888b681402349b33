from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lagmin import numerics as N
from lagmin.errors import AmbiguousUnwrapError, InvalidInputError


def cofactor_det(m):
    """Independent oracle: Leibniz expansion over permutations."""
    n = len(m)
    total = 0j
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = complex((-1) ** inversions)
        for i in range(n):
            term *= m[i][perm[i]]
        total += term
    return total


finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: st.lists(st.tuples(finite, finite), min_size=n * n, max_size=n * n)))
def test_det_complex_matches_leibniz_expansion(entries):
    n = int(round(len(entries) ** 0.5))
    m = np.array([complex(a, b) for a, b in entries]).reshape(n, n)
    assert abs(N.det_complex(m) - cofactor_det(m.tolist())) <= 1e-9 * max(1.0, np.abs(m).max() ** n)


def test_det_complex_batched_and_singular():
    rng = np.random.default_rng(3)
    stack = rng.normal(size=(4, 3, 3)) + 1j * rng.normal(size=(4, 3, 3))
    out = N.det_complex(stack)
    assert out.shape == (4,)
    for k in range(4):
        assert abs(out[k] - cofactor_det(stack[k].tolist())) < 1e-12
    assert N.det_complex(np.ones((3, 3))) == 0
    with pytest.raises(InvalidInputError):
        N.det_complex(np.ones((2, 3)))


def test_grid_diff_is_fourth_order():
    errs = []
    for count in (41, 81):
        x = np.linspace(0.0, 2.0, count)
        h = x[1] - x[0]
        d = N.grid_diff(np.sin(x), 0, h)
        assert np.all(np.isnan(d[:2])) and np.all(np.isnan(d[-2:]))
        errs.append(np.max(np.abs(d[2:-2] - np.cos(x[2:-2]))))
    assert errs[0] / errs[1] > 14.0


def test_grid_diff_second_order_derivative_and_axis():
    x = np.linspace(0, 1, 21)
    y = np.linspace(0, 1, 31)
    X, Y = np.meshgrid(x, y, indexing="ij")
    f = X ** 3 * Y ** 2
    d2 = N.grid_diff(f, 0, x[1] - x[0], order=2)
    assert np.nanmax(np.abs(d2 - 6 * X * Y ** 2)) < 1e-10
    dy = N.grid_diff(f, 1, y[1] - y[0])
    assert np.nanmax(np.abs(dy - 2 * X ** 3 * Y)) < 1e-10


def test_fd_derivative_axis_semantics():
    assert abs(N.fd_derivative(np.sin, 0.3) - np.cos(0.3)) < 1e-11
    batch = np.array([0.1, 0.5, 0.9])
    assert np.allclose(N.fd_derivative(np.exp, batch), np.exp(batch), atol=1e-11)
    pts = np.array([[0.2, 0.7], [1.0, -0.4]])

    def f(p):
        return p[..., 0] ** 2 * p[..., 1]

    assert np.allclose(N.fd_derivative(f, pts, axis=1), pts[:, 0] ** 2, atol=1e-10)
    assert np.allclose(N.fd_derivative(f, pts, axis=0), 2 * pts[:, 0] * pts[:, 1], atol=1e-10)


def test_dopri5_complex_rotation_and_invariant():
    sys_ = N.OdeSystem(1, lambda t, y: 1j * y, {"norm": lambda y: np.abs(y[..., 0]) - 1.0}, autonomous=True)
    traj = N.integrate_ode(sys_, [1.0 + 0j], 0.0, 10.0)
    t = np.linspace(0, 10, 57)
    assert np.max(np.abs(traj(t)[:, 0] - np.exp(1j * t))) < 1e-8
    assert traj.max_invariant_residual()["norm"] < 1e-8
    assert traj.t0 == 0.0 and traj.t1 == 10.0


def test_rk4_fixed_step_and_stop():
    sys_ = N.OdeSystem(2, lambda t, y: np.stack([y[..., 1], -y[..., 0]], axis=-1))
    traj = N.integrate_ode(sys_, [0.0, 1.0], 0.0, 3.0, method="rk4", step=1e-3)
    assert abs(traj(np.array(3.0))[0] - np.sin(3.0)) < 1e-10
    stopped = N.integrate_ode(sys_, [0.0, 1.0], 0.0, 3.0, stop=lambda t, y: y[0] < 0.5 and t > 1.0)
    assert stopped.stopped and stopped.t1 < 3.0
    with pytest.raises(InvalidInputError):
        traj(np.array(3.5))


@settings(max_examples=100, deadline=None)
@given(st.floats(-50, 50, allow_nan=False))
def test_wrap_angle_range(x):
    w = float(N.wrap_angle(x))
    assert -np.pi < w <= np.pi
    assert abs(np.sin(w) - np.sin(x)) < 1e-9 and abs(np.cos(w) - np.cos(x)) < 1e-9


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-3.0, 3.0, allow_nan=False), min_size=2, max_size=40), st.floats(-10, 10))
def test_unwrap_recovers_continuous_series(steps, start):
    series = start + np.cumsum([0.0] + steps)
    series = series if np.all(np.abs(np.abs(np.diff(series)) - np.pi) > 1e-6) else series[:1]
    back = N.unwrap_array(N.wrap_angle(series))
    assert np.allclose(back - back[0], series - series[0], atol=1e-9)


def test_unwrap_ambiguous_jump_raises():
    with pytest.raises(AmbiguousUnwrapError):
        N.unwrap_array(np.array([0.0, np.pi]))


@pytest.mark.parametrize("k", [-3, -1, 0, 2, 5])
def test_winding_number(k):
    t = np.linspace(0, 2 * np.pi, 400, endpoint=False)
    assert N.winding_number(np.angle(np.exp(1j * k * t))) == k


def test_unwrap_grid_two_axes():
    x = np.linspace(0, 6, 60)
    y = np.linspace(0, 4, 50)
    X, Y = np.meshgrid(x, y, indexing="ij")
    true = 2 * X - 1.5 * Y
    back = N.unwrap_grid(N.wrap_angle(true))
    assert np.allclose(back - back[0, 0], true - true[0, 0], atol=1e-9)
