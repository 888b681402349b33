"""Command-line front end: ``lagmin generate|verify|plot|acceptance``.

Exit status: 0 when every required check passes, 1 when a check fails,
2 for malformed recipes and structural errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from pathlib import Path

import numpy as np

from . import acceptance, recipes, svgplot
from . import curves as C
from . import legendrian as L
from . import verify as V
from .constructions import LagrangianImmersion, write_immersion_csv
from .errors import InvalidInputError, LagminError, RecipeError

DEFAULT_OUT = "lagmin-out"
TARGETS = ("curve", "projection", "residual-heatmap")


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _out_dir(args) -> Path:
    out = Path(os.environ.get("LAGMIN_OUT") or args.out or DEFAULT_OUT)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_recipe(args) -> recipes.Recipe:
    if bool(args.recipe) == bool(args.preset):
        raise InvalidInputError("give exactly one of --recipe or --preset")
    if args.preset:
        return recipes.preset(args.preset)
    path = Path(args.recipe)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidInputError(f"cannot read recipe {path}: {exc.strerror}") from exc
    stem = path.stem[:-len(".recipe")] if path.stem.endswith(".recipe") else path.stem
    return recipes.parse_recipe(text, name=stem)


def _write(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8", newline="")
    return path


def _samples(recipe: recipes.Recipe, default: int) -> int:
    return recipes.integer(recipe.get("output", "samples", str(default)))


def _legendrian_points_csv(psi: L.LegendrianMap, P) -> str:
    P = P.reshape(-1, psi.m)
    Z = psi(P)
    cols = [f"p{i + 1}" for i in range(psi.m)]
    for k in range(Z.shape[-1]):
        cols += [f"re{k + 1}", f"im{k + 1}"]
    rows = [np.concatenate([p, np.column_stack([z.real, z.imag]).ravel()]) for p, z in zip(P, Z)]
    return L.write_rows(cols, np.array(rows))


def _generate(recipe: recipes.Recipe, obj, out: Path, grid: int | None) -> list:
    stem = recipe.name
    paths = [_write(out / f"{stem}.recipe.txt", recipe.to_text())]
    if isinstance(obj, C.PlanarCurve):
        n = recipes.integer(recipe.get("output", "n", "2"))
        s = np.linspace(*obj.domain, _samples(recipe, 801))
        paths.append(_write(out / f"{stem}.csv", C.write_curve_csv(obj, s, n=n)))
    elif isinstance(obj, L.HyperbolicLegendrianCurve) or (isinstance(obj, L.LegendrianMap) and obj.m == 1):
        dom = obj.domain if isinstance(obj, L.HyperbolicLegendrianCurve) else obj.domain[0]
        t = np.linspace(*dom, _samples(recipe, 801))
        paths.append(_write(out / f"{stem}.csv", L.write_curve_csv(obj, t)))
        paths.append(_write(out / f"{stem}.hopf.csv", L.write_hopf_csv(obj, t)))
    elif isinstance(obj, L.LegendrianMap):
        P = V.GridSpec.over(obj.domain, grid or _samples(recipe, 16), margin=0.0).points()
        paths.append(_write(out / f"{stem}.csv", _legendrian_points_csv(obj, P)))
    elif isinstance(obj, LagrangianImmersion):
        P = V.GridSpec.over(obj.domain, grid or _samples(recipe, 16), margin=0.0).points()
        paths.append(_write(out / f"{stem}.csv", write_immersion_csv(obj, P)))
    else:
        raise InvalidInputError(f"nothing to generate for {type(obj).__name__}")
    return paths


def _tolerances(recipe: recipes.Recipe, tol: float | None) -> dict:
    sec = recipe.sections.get("verify", {})
    out = {k: recipes.number(v) for k, v in sec.items() if k in V.DEFAULT_TOLERANCES}
    if tol is not None:
        out["hminimal"] = tol
    return out


def _certify(recipe: recipes.Recipe, obj, grid: int | None, tol: float | None):
    if not isinstance(obj, (LagrangianImmersion, L.LegendrianMap)) or getattr(obj, "m", 1) == 0:
        raise InvalidInputError("verify needs an immersion or a Legendrian map; build a combinator from curves")
    dim = obj.n if isinstance(obj, LagrangianImmersion) else obj.m
    margin = recipes.number(recipe.get("grid", "margin", "0.01"))
    grid_spec = V.GridSpec.over(obj.domain, recipes.grid_counts(recipe, dim, grid), margin=margin)
    tols = _tolerances(recipe, tol)
    if isinstance(obj, L.LegendrianMap):
        return V.certify_legendrian(obj, grid_spec, tols, subject=recipe.name), grid_spec
    claims = [c.strip() for c in recipe.get("verify", "claims", "").split(",") if c.strip()]
    div_text = recipe.get("verify", "div_n")
    div_n = tuple(recipes.integer(x) for x in div_text.split(",")) if div_text else None
    if div_n is not None and len(div_n) != 2:
        raise RecipeError("div_n needs two integers 'n1, n2'")
    return V.certify(obj, grid_spec, tols, claims, div_n, subject=recipe.name), grid_spec


def _read_csv(path: Path) -> dict:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc.strerror}") from exc
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise InvalidInputError(f"{path} is empty")
    header, body = rows[0], rows[1:]
    try:
        data = np.array([[float(x) for x in r] for r in body if r], dtype=float).reshape(-1, len(header))
    except ValueError as exc:
        raise InvalidInputError(f"{path} has non-numeric data") from exc
    return {name: data[:, i] for i, name in enumerate(header)}


REQUIRED_COLUMNS = {
    "curve": ("re", "im"),
    "projection": ("x1", "x2"),
    "residual-heatmap": ("p1", "p2", "delta_beta"),
}


def _default_target(cols: dict) -> str:
    for target in ("residual-heatmap", "projection", "curve"):
        if all(c in cols for c in REQUIRED_COLUMNS[target]):
            return target
    if all(c in cols for c in ("re1", "im1")):
        return "curve"
    raise InvalidInputError("no plot target matches the CSV columns")


def _render(cols: dict, target: str, title: str) -> str:
    if target == "curve" and "re" not in cols and "re1" in cols:
        # a curve in C^2: both coordinate projections
        series = [(cols["re1"], cols["im1"]), (cols["re2"], cols["im2"])]
        return svgplot.curves_svg(series, title)
    missing = [c for c in REQUIRED_COLUMNS[target] if c not in cols]
    if missing:
        raise InvalidInputError(f"target {target!r} needs columns {', '.join(missing)}")
    if target == "curve":
        return svgplot.curves_svg([(cols["re"], cols["im"])], title)
    if target == "projection":
        return svgplot.curves_svg([(cols["x1"], cols["x2"])], title)
    return svgplot.heatmap_svg(cols["p1"], cols["p2"], cols["delta_beta"], title)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_generate(args) -> int:
    recipe = _load_recipe(args)
    obj = recipes.build(recipe)
    for p in _generate(recipe, obj, _out_dir(args), args.grid):
        print(p)
    return 0


def cmd_verify(args) -> int:
    recipe = _load_recipe(args)
    obj = recipes.build(recipe)
    report, grid_spec = _certify(recipe, obj, args.grid, args.tol)
    out = _out_dir(args)
    text = report.to_text()
    _write(out / f"{recipe.name}.report.txt", text)
    if isinstance(obj, LagrangianImmersion):
        _write(out / f"{recipe.name}.residuals.csv", V.residual_field_csv(obj, grid_spec))
    sys.stdout.write(text)
    return report.exit_code()


def cmd_plot(args) -> int:
    if args.target is not None and args.target not in TARGETS:
        raise InvalidInputError(f"unknown target {args.target!r}")
    out = _out_dir(args)
    if args.input:
        path = Path(args.input)
        name = path.name[:-4] if path.name.endswith(".csv") else path.stem
        cols = _read_csv(path)
    else:
        recipe = _load_recipe(args)
        obj = recipes.build(recipe)
        name = recipe.name
        if isinstance(obj, LagrangianImmersion):
            dim = obj.n
            grid_spec = V.GridSpec.over(obj.domain, recipes.grid_counts(recipe, dim, args.grid))
            data = _write(out / f"{name}.residuals.csv", V.residual_field_csv(obj, grid_spec))
        else:
            paths = _generate(recipe, obj, out, args.grid)
            data = paths[-1] if args.target == "projection" else paths[1]
        cols = _read_csv(data)
    target = args.target or _default_target(cols)
    svg = _render(cols, target, name)
    print(_write(out / f"{name}.{target}.svg", svg))
    return 0


def cmd_acceptance(args) -> int:
    numbers = None
    if args.only:
        try:
            numbers = [int(x) for x in args.only.split(",")]
        except ValueError as exc:
            raise InvalidInputError("--only takes comma-separated criterion numbers") from exc
        if any(not 1 <= k <= len(acceptance.CRITERIA) for k in numbers):
            raise InvalidInputError(f"criteria are numbered 1..{len(acceptance.CRITERIA)}")
    results = acceptance.run(numbers, seed=args.seed, echo=lambda line: print(line, flush=True))
    print(acceptance.footer(results))
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lagmin", description="H-minimal Lagrangian immersions: build and certify.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grid_help):
        p.add_argument("--recipe", help="recipe file")
        p.add_argument("--preset", help='preset string, e.g. "figure1" or "product circles 1 1"')
        p.add_argument("--out", help=f"output directory (default {DEFAULT_OUT}; LAGMIN_OUT overrides)")
        p.add_argument("--grid", type=int, help=grid_help)
        p.add_argument("--seed", type=int, default=0, help="seed for randomized checks")

    p = sub.add_parser("generate", help="write CSV samples of a construction")
    common(p, "samples per parameter axis for immersions")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("verify", help="certify a construction and write a report")
    common(p, "nodes on every grid axis (overrides the recipe)")
    p.add_argument("--tol", type=float, help="tolerance for the H-minimality check")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plot", help="render a CSV or a construction as SVG")
    common(p, "nodes per axis for the residual field")
    p.add_argument("--input", help="CSV written by generate or verify")
    p.add_argument("--target", help="curve, projection or residual-heatmap")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("acceptance", help="run the acceptance criteria")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.add_argument("--out", help="unused; accepted for symmetry")
    p.set_defaults(func=cmd_acceptance)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RecipeError as exc:
        print(f"lagmin: recipe error: {exc}", file=sys.stderr)
        return 2
    except LagminError as exc:
        print(f"lagmin: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
