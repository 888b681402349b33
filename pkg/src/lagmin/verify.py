"""Numerical verification of Lagrangian immersions on parameter grids.

Angles are unwrapped on the grid, differentiated with fourth-order stencils,
and combined with the induced metric (Christoffel symbols from finite
differences of g) into gradient, covariant Hessian and Laplace-Beltrami
operator. All differential quantities live on interior nodes (a two-node
margin on every differentiated axis).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import __version__, numerics
from .constructions import (
    DOMAIN_MARGIN,
    LagrangianImmersion,
    LagrangianSurfaceJoin,
    a_phi_weight,
    g_phi_phase,
    symplectic_residual,
)
from .errors import (
    DegenerateMetricError,
    InvalidInputError,
    NeedsInteriorError,
    SingularLocusError,
    UnsupportedProvenanceError,
)
from .legendrian import LegendrianMap, as_points, contact_residual
from .numerics import DEFAULT_FD_STEP, TWO_PI, fd_derivative, grid_diff, unwrap_grid, wrap_angle

EIGEN_FLOOR = 1e-10

DEFAULT_TOLERANCES = {
    "symplectic": 1e-8,
    "contact": 1e-8,
    "metric": 1e-7,
    "angle": 1e-7,
    "laplacian": 1e-5,
    "hminimal": 1e-6,
    "parallelH": 1e-5,
    "divA": 1e-5,
    "sphere": 1e-9,
}

# parallel mean curvature is a property some examples have and others
# deliberately lack, so it only gates the verdict when claimed
INFORMATIONAL = frozenset({"parallelH"})


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Tensor grid with inclusive end points on every axis."""

    bounds: tuple
    counts: tuple

    def __post_init__(self):
        if len(self.bounds) != len(self.counts):
            raise InvalidInputError("bounds and counts must have the same length")
        for (a, b), c in zip(self.bounds, self.counts):
            if not b > a or c < 1:
                raise InvalidInputError("grid axes need b > a and at least one node")

    @classmethod
    def over(cls, domain, counts, margin: float = DOMAIN_MARGIN) -> "GridSpec":
        """Grid over ``domain`` shrunk by ``margin``; ``counts`` may be a single int."""
        if isinstance(counts, (int, np.integer)):
            counts = (int(counts),) * len(domain)
        bounds = tuple((float(a) + margin, float(b) - margin) for a, b in domain)
        return cls(bounds, tuple(int(c) for c in counts))

    @property
    def dim(self) -> int:
        return len(self.counts)

    @property
    def spacing(self) -> tuple:
        return tuple((b - a) / (c - 1) if c > 1 else 0.0 for (a, b), c in zip(self.bounds, self.counts))

    def axes(self) -> list:
        return [np.linspace(a, b, c) for (a, b), c in zip(self.bounds, self.counts)]

    def points(self) -> np.ndarray:
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    def refined(self) -> "GridSpec":
        """Same box with the spacing halved."""
        return GridSpec(self.bounds, tuple(2 * c - 1 for c in self.counts))

    def describe(self) -> str:
        box = " x ".join(f"[{a!r}, {b!r}]" for a, b in self.bounds)
        return "x".join(str(c) for c in self.counts) + " over " + box

    def interior(self) -> np.ndarray:
        """Mask of nodes at least two nodes away from every boundary."""
        mask = np.ones(self.counts, dtype=bool)
        for ax, c in enumerate(self.counts):
            sl = [slice(None)] * self.dim
            sl[ax] = np.r_[0:min(2, c), max(c - 2, 0):c]
            mask[tuple(sl)] = False
        return mask


# ---------------------------------------------------------------------------
# pointwise metric data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricSample:
    point: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    volume: float
    christoffel: np.ndarray  # [k, i, j] = Gamma^k_ij
    min_eigenvalue: float


def _jacobian_of(obj, P):
    return obj.jacobian(P)


def _metric_from_jacobian(J):
    return np.real(np.swapaxes(J, -1, -2).conj() @ J)


def induced_metric(obj, p, h: float = DEFAULT_FD_STEP) -> MetricSample:
    """First fundamental form at ``p`` with Christoffel symbols from finite differences of g."""
    n = obj.n if isinstance(obj, LagrangianImmersion) else obj.m
    p = as_points(p, n)
    if p.ndim != 1:
        raise InvalidInputError("induced_metric expects a single point")
    g = _metric_from_jacobian(_jacobian_of(obj, p))
    lam = float(np.min(np.linalg.eigvalsh(g)))
    if lam <= EIGEN_FLOOR:
        raise DegenerateMetricError(f"induced metric degenerate at {p.tolist()} (min eigenvalue {lam:.3g})")
    g_inv = np.linalg.inv(g)
    dg = np.stack([fd_derivative(lambda q: _metric_from_jacobian(_jacobian_of(obj, q)), p, axis=k, h=h)
                   for k in range(n)])  # [k, i, j] = d_k g_ij
    low = 0.5 * (np.einsum("ijk->kij", dg) + np.einsum("jik->kij", dg) - dg)  # [l, i, j]
    gamma = np.einsum("kl,lij->kij", g_inv, low)
    return MetricSample(p, g, g_inv, float(np.sqrt(np.linalg.det(g))), gamma, lam)


# ---------------------------------------------------------------------------
# angle fields on grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridCalculus:
    """First and second covariant derivatives of a scalar sampled on a grid."""

    d: np.ndarray          # covector d_i f
    grad: np.ndarray       # vector g^{ij} d_j f
    hessian: np.ndarray    # covariant Hessian
    laplacian: np.ndarray  # trace with g^{-1}
    hessian_norm: np.ndarray


def _christoffel_lowered(g: np.ndarray, h: tuple) -> np.ndarray:
    """``[..., l, i, j] = (d_i g_jl + d_j g_il - d_l g_ij) / 2`` on the grid."""
    n = g.shape[-1]
    dg = np.stack([grid_diff(g, axis=k, h=h[k]) for k in range(n)], axis=-3)  # [..., k, i, j]
    return 0.5 * (np.einsum("...ijl->...lij", dg) + np.einsum("...jil->...lij", dg) - dg)


def grid_calculus(f: np.ndarray, g: np.ndarray, h: tuple, lowered=None) -> GridCalculus:
    n = g.shape[-1]
    g_inv = np.linalg.inv(g)
    d = np.stack([grid_diff(f, axis=k, h=h[k]) for k in range(n)], axis=-1)
    grad = np.einsum("...ij,...j->...i", g_inv, d)
    d2 = np.empty(f.shape + (n, n))
    for i in range(n):
        d2[..., i, i] = grid_diff(f, axis=i, h=h[i], order=2)
        for j in range(i + 1, n):
            d2[..., i, j] = d2[..., j, i] = grid_diff(d[..., i], axis=j, h=h[j])
    low = _christoffel_lowered(g, h) if lowered is None else lowered
    hess = d2 - np.einsum("...lij,...l->...ij", low, grad)
    lap = np.einsum("...ij,...ij->...", g_inv, hess)
    norm = np.sqrt(np.abs(np.einsum("...ik,...jl,...ij,...kl->...", g_inv, g_inv, hess, hess)))
    return GridCalculus(d, grad, hess, lap, norm)


@dataclass(frozen=True)
class AngleField:
    grid: GridSpec
    raw: np.ndarray
    beta: np.ndarray
    metric: np.ndarray
    calculus: GridCalculus
    interior: np.ndarray
    windings: dict = field(default_factory=dict)
    degenerate: int = 0
    orientation: str = "jacobian column order"

    @property
    def laplacian(self) -> np.ndarray:
        return self.calculus.laplacian

    @property
    def hessian_norm(self) -> np.ndarray:
        return self.calculus.hessian_norm

    def max_abs(self, values) -> float:
        v = np.abs(values[self.interior])
        return float(np.max(v)) if v.size else 0.0


def _intrinsic_dim(obj) -> int:
    return obj.n if isinstance(obj, LagrangianImmersion) else obj.m


def lagrangian_angle_field(obj, grid: GridSpec) -> AngleField:
    """Lagrangian (or Legendrian) angle on ``grid`` with its derivatives.

    Works for :class:`LagrangianImmersion` (argument of the determinant of
    the orthonormalized tangent frame) and :class:`LegendrianMap` (argument
    of ``det{psi, frame}``).
    """
    n = _intrinsic_dim(obj)
    if grid.dim != n:
        raise InvalidInputError(f"grid has {grid.dim} axes, immersion has dimension {n}")
    P = grid.points()
    J = obj.jacobian(P)
    g = _metric_from_jacobian(J)
    lam = np.linalg.eigvalsh(g)[..., 0]
    bad = lam <= EIGEN_FLOOR
    if np.all(bad):
        raise DegenerateMetricError("induced metric degenerate on the whole grid")
    raw = np.angle(obj.complex_volume(P, J=J))
    beta = unwrap_grid(raw)
    calc = grid_calculus(beta, g, grid.spacing)
    interior = grid.interior() & ~bad
    if np.any(bad):
        # a degenerate node poisons every stencil that touches it
        near = bad.copy()
        for ax in range(n):
            for k in (-2, -1, 1, 2):
                near |= np.roll(bad, k, axis=ax)
        interior &= ~near
    windings = {}
    periodic = getattr(obj, "periodic", ())
    domain = getattr(obj, "domain", ())
    for ax in range(n):
        if ax < len(periodic) and periodic[ax]:
            lo, hi = domain[ax]
            a, b = grid.bounds[ax]
            if abs(a - lo) < 1e-12 and abs(b - hi) < 1e-12:
                line = beta[(0,) * ax + (slice(None),) + (0,) * (n - ax - 1)]
                windings[ax] = int(np.rint((line[-1] - line[0]) / TWO_PI))
    return AngleField(grid, raw, beta, g, calc, interior, windings, int(np.sum(bad)))


# ---------------------------------------------------------------------------
# mean curvature
# ---------------------------------------------------------------------------

def _require_interior(obj, p, h):
    for ax, (lo, hi) in enumerate(obj.domain):
        periodic = obj.periodic[ax] if ax < len(obj.periodic) else False
        if not periodic and not (lo + 2 * h <= p[ax] <= hi - 2 * h):
            raise NeedsInteriorError(f"point too close to the boundary along axis {ax}")


def mean_curvature(im: LagrangianImmersion, p, h: float = DEFAULT_FD_STEP) -> np.ndarray:
    """``H = J(dPhi(grad beta)) / n`` at ``p`` from a local stencil of the angle."""
    p = as_points(p, im.n)
    _require_interior(im, p, h)
    J = im.jacobian(p)
    g_inv = np.linalg.inv(_metric_from_jacobian(J))
    ref = np.conj(im.complex_volume(p, J=J))
    d = np.array([fd_derivative(lambda q: np.angle(im.complex_volume(q) * ref), p, axis=i, h=h)
                  for i in range(im.n)])
    grad = g_inv @ d
    return 1j * (J @ grad) / im.n


def mean_curvature_sff(im: LagrangianImmersion, p, h: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Independent oracle: trace of the second fundamental form.

    ``d_i d_j Phi`` comes from differencing the analytic Jacobian, is
    projected onto the normal bundle and traced with ``g^{-1}``.
    """
    p = as_points(p, im.n)
    _require_interior(im, p, h)
    J = im.jacobian(p)
    g_inv = np.linalg.inv(_metric_from_jacobian(J))
    n = im.n
    total = np.zeros(n, dtype=complex)
    for j in range(n):
        dJ = fd_derivative(lambda q: im.jacobian(q), p, axis=j, h=h)  # columns d_j d_i Phi
        for i in range(n):
            v = dJ[:, i]
            coeff = np.real(J.conj().T @ v)  # <v, d_l Phi>
            normal = v - J @ (g_inv @ coeff)
            total += g_inv[i, j] * normal
    return total / n


# ---------------------------------------------------------------------------
# formula checks and div A
# ---------------------------------------------------------------------------

def laplacian_formula_check(im: LagrangianImmersion, grid: GridSpec, field_: AngleField | None = None):
    """Largest interior gap between numeric and closed-form Laplacian of beta."""
    if im.laplacian_fn is None:
        raise UnsupportedProvenanceError(f"no closed-form Laplacian for {im.combinator!r}")
    af = lagrangian_angle_field(im, grid) if field_ is None else field_
    P = grid.points()[af.interior]
    diff = np.full(grid.counts, np.nan)
    diff[af.interior] = af.laplacian[af.interior] - im.predicted_laplacian(P)
    return af.max_abs(diff), diff


def div_a_phi(phi: LagrangianImmersion, n1: int, n2: int, grid: GridSpec):
    """Divergence of ``A_phi`` on the grid; returns (field, max |div|).

    For ``gamma (.) alpha`` surfaces the conformal form
    ``(d_s(w G_s) + d_t(w G_t)) / lambda`` is used; otherwise
    ``w Delta G + g(grad w, grad G)``.
    """
    if phi.n != 2:
        raise InvalidInputError("A_phi is defined for surfaces in C^2")
    P = grid.points()
    v = phi(P)
    if min(np.min(np.abs(v[..., 0])), np.min(np.abs(v[..., 1]))) < 1e-6:
        raise SingularLocusError("phi_1 or phi_2 vanishes on the grid")
    G = unwrap_grid(np.angle(g_phi_phase(phi, n1, n2)(P)))
    w = a_phi_weight(phi, n1, n2, P)
    h = grid.spacing
    if isinstance(phi, LagrangianSurfaceJoin):
        lam = phi.conformal_factor(P)
        div = sum(grid_diff(w * grid_diff(G, i, h[i]), i, h[i]) for i in range(2)) / lam
        # the outer difference of an inner one widens the margin to four nodes
        mask = np.zeros(grid.counts, dtype=bool)
        mask[4:-4, 4:-4] = True
    else:
        g = phi.metric(P)
        calc = grid_calculus(G, g, h)
        dw = np.stack([grid_diff(w, k, h[k]) for k in range(2)], axis=-1)
        div = w * calc.laplacian + np.einsum("...i,...i->...", dw, calc.grad)
        mask = grid.interior()
    vals = np.abs(div[mask])
    return np.where(mask, div, np.nan), float(np.max(vals)) if vals.size else 0.0


def symplectic_max(im: LagrangianImmersion, P) -> float:
    return float(np.max(np.abs(symplectic_residual(im.jacobian(P))), initial=0.0))


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    max_residual: float
    tolerance: float
    required: bool = True
    note: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.max_residual <= self.tolerance)


@dataclass(frozen=True)
class VerificationReport:
    subject: str
    grid: str
    fd_step: float
    checks: tuple
    metadata: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.required)

    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_text(self) -> str:
        lines = ["lagmin-report 1", f"subject = {self.subject}", f"grid = {self.grid}",
                 f"fd_step = {self.fd_step!r}"]
        for k in sorted(self.metadata):
            lines.append(f"meta.{k} = {self.metadata[k]}")
        lines.append(f"verdict = {'pass' if self.passed else 'fail'}")
        for c in self.checks:
            lines += ["", f"[check {c.name}]", f"max_residual = {c.max_residual!r}",
                      f"tolerance = {c.tolerance!r}", f"passed = {str(c.passed).lower()}",
                      f"required = {str(c.required).lower()}"]
            if c.note:
                lines.append(f"note = {c.note}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "VerificationReport":
        lines = text.splitlines()
        if not lines or lines[0] != "lagmin-report 1":
            raise InvalidInputError("not a lagmin report")
        head: dict = {}
        meta: dict = {}
        checks = []
        cur = None
        for raw in lines[1:]:
            if not raw.strip():
                continue
            if raw.startswith("[check ") and raw.endswith("]"):
                cur = {"name": raw[7:-1]}
                checks.append(cur)
                continue
            key, _, val = raw.partition(" = ")
            if cur is not None:
                cur[key] = val
            elif key.startswith("meta."):
                meta[key[5:]] = val
            else:
                head[key] = val
        results = tuple(
            CheckResult(c["name"], float(c["max_residual"]), float(c["tolerance"]),
                        c["required"] == "true", c.get("note", ""))
            for c in checks
        )
        return cls(head["subject"], head["grid"], float(head["fd_step"]), results, meta)


def _contact_check(im: LagrangianImmersion, grid: GridSpec):
    worst = 0.0
    found = False
    axes = grid.axes()
    for psi, cols in im.legendrians:
        if psi.m == 0:
            continue
        found = True
        sub = np.stack(np.meshgrid(*[axes[c] for c in cols], indexing="ij"), axis=-1)
        worst = max(worst, float(np.max(np.abs(contact_residual(psi, sub)))))
    return worst if found else None


def certify(
    im: LagrangianImmersion,
    grid: GridSpec,
    tolerances: dict | None = None,
    claims=(),
    div_n: tuple | None = None,
    subject: str | None = None,
) -> VerificationReport:
    """Run every applicable check on ``grid``.

    ``claims`` names informational checks (``parallelH``) that should gate
    the verdict. ``div_n = (n1, n2)`` enables the divergence check for a
    surface; outputs of :func:`surface_times_two_legendrians` enable it
    automatically on their surface factor.
    """
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    claims = set(claims)
    unknown = claims - set(DEFAULT_TOLERANCES)
    if unknown:
        raise InvalidInputError(f"unknown check names: {sorted(unknown)}")

    def add(name, value, note=""):
        required = name not in INFORMATIONAL or name in claims
        checks.append(CheckResult(name, float(value), float(tol[name]), required, note))

    checks: list = []
    P = grid.points()
    add("symplectic", symplectic_max(im, P))
    contact = _contact_check(im, grid)
    if contact is not None:
        add("contact", contact)
    if im.metric_fn is not None:
        add("metric", np.max(np.abs(im.metric(P) - im.predicted_metric(P))))
    if im.angle_fn is not None:
        add("angle", np.max(np.abs(wrap_angle(im.angle(P) - im.predicted_angle(P)))))
    af = lagrangian_angle_field(im, grid)
    note = f"{af.degenerate} degenerate nodes excluded" if af.degenerate else ""
    if im.laplacian_fn is not None:
        add("laplacian", laplacian_formula_check(im, grid, af)[0], note)
    mean = float(np.mean(af.laplacian[af.interior])) if np.any(af.interior) else 0.0
    add("hminimal", af.max_abs(af.laplacian), (note + "; " if note else "") + f"grid mean {mean:.6e}")
    add("parallelH", af.max_abs(af.hessian_norm), note)
    if div_n is not None or im.combinator == "surface-times-two-legendrians":
        if div_n is not None:
            surf, n1, n2, sub = im, div_n[0], div_n[1], grid
        else:
            surf, n1, n2 = im.provenance["phi"], im.provenance["n1"], im.provenance["n2"]
            sub = GridSpec(grid.bounds[:2], grid.counts[:2])
        add("divA", div_a_phi(surf, n1, n2, sub)[1])
    meta = {"version": __version__, "ode_tol": repr(numerics.DEFAULT_ODE_TOL),
            "claims": ",".join(sorted(claims)) or "-"}
    return VerificationReport(subject or im.combinator, grid.describe(), DEFAULT_FD_STEP, tuple(checks), meta)


def certify_legendrian(
    psi: LegendrianMap,
    grid: GridSpec,
    tolerances: dict | None = None,
    subject: str | None = None,
) -> VerificationReport:
    """Checks for a Legendrian immersion into the unit sphere: unit norm,
    contact condition and harmonic Legendrian angle (``hminimal``)."""
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    P = grid.points()
    af = lagrangian_angle_field(psi, grid)
    note = f"{af.degenerate} degenerate nodes excluded" if af.degenerate else ""
    values = [
        ("sphere", np.max(np.abs(np.sum(np.abs(psi(P)) ** 2, axis=-1) - 1.0)), ""),
        ("contact", np.max(np.abs(contact_residual(psi, P))), ""),
        ("hminimal", af.max_abs(af.laplacian), note),
        ("parallelH", af.max_abs(af.hessian_norm), note),
    ]
    checks = tuple(CheckResult(name, float(v), float(tol[name]), name not in INFORMATIONAL, n_)
                   for name, v, n_ in values)
    meta = {"version": __version__, "ode_tol": repr(numerics.DEFAULT_ODE_TOL), "claims": "-"}
    return VerificationReport(subject or psi.family, grid.describe(), DEFAULT_FD_STEP, checks, meta)


RESIDUAL_COLUMNS = ("delta_beta", "hessian_norm", "laplacian_error")


def residual_field_csv(im: LagrangianImmersion, grid: GridSpec, fh=None) -> str:
    """Interior nodes with their parameter coordinates and residuals."""
    af = lagrangian_angle_field(im, grid)
    if getattr(im, "laplacian_fn", None) is not None:
        lap_err = laplacian_formula_check(im, grid, af)[1]
    else:
        lap_err = np.full(grid.counts, np.nan)
    P = grid.points()[af.interior]
    cols = [f"p{i + 1}" for i in range(grid.dim)] + list(RESIDUAL_COLUMNS)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    rows = np.column_stack([P, af.laplacian[af.interior], af.hessian_norm[af.interior], lap_err[af.interior]])
    for r in rows:
        w.writerow([repr(float(x)) for x in r])
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text
