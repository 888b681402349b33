"""Plain-text construction recipes and the preset mini-language.

A recipe is a list of ``[section]`` blocks holding ``key = value`` lines::

    [build]
    kind = curve-times-legendrian

    [curve]
    family = circle
    R = 1

    [legendrian]
    family = sphere
    m = 2

    [grid]
    counts = 32

Numbers accept ``pi`` and simple arithmetic (``pi/2``, ``1/3``). Unknown
sections or keys are rejected with their line and column.
"""

from __future__ import annotations

import ast
import operator
import re
from dataclasses import dataclass, field

import numpy as np

from . import constructions as K
from . import curves as C
from . import legendrian as L
from .errors import RecipeError
from .verify import DEFAULT_TOLERANCES

CURVE_KEYS = {"family", "lambda", "R", "n", "c", "r0", "theta0", "length", "domain", "shoot", "bracket"}
LEGENDRIAN_KEYS = {"family", "m", "phi", "n1", "n2", "mu", "gamma0", "t_end", "unit_speed", "domain", "z"}
SCHEMA = {
    "build": {"kind", "s_range"},
    "curve": CURVE_KEYS,
    "legendrian": LEGENDRIAN_KEYS,
    "hyperbolic": {"family", "q", "r", "delta", "domain"},
    "surface": {"family", "q", "r", "scale", "margin", "t_domain"},
    "grid": {"counts", "margin"},
    "verify": {"claims", "div_n"} | set(DEFAULT_TOLERANCES),
    "output": {"samples", "n"},
}
INDEXED = {"curve", "legendrian"}
KINDS = ("curve", "legendrian-curve", "product", "curve-times-legendrian", "cone", "surface",
         "surface-times-two-legendrians", "legendrian-join")


@dataclass
class Recipe:
    """Ordered sections of raw string values, keyed like ``curve.1``."""

    sections: dict = field(default_factory=dict)
    name: str = "recipe"

    def get(self, section: str, key: str, default=None):
        return self.sections.get(section, {}).get(key, default)

    def to_text(self) -> str:
        """Normalized form: sections and keys in sorted order."""
        out = []
        for sec in sorted(self.sections):
            out.append(f"[{sec}]")
            for k in sorted(self.sections[sec]):
                out.append(f"{k} = {self.sections[sec][k]}")
            out.append("")
        return "\n".join(out)

    def __eq__(self, other):
        return isinstance(other, Recipe) and self.sections == other.sections


def parse_recipe(text: str, name: str = "recipe") -> Recipe:
    sections: dict = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        col = len(line) - len(line.lstrip()) + 1
        stripped = line.strip()
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise RecipeError("unterminated section header", lineno, col)
            sec = stripped[1:-1].strip()
            base, _, idx = sec.partition(".")
            if base not in SCHEMA or (idx and (base not in INDEXED and base != "legendrian")):
                raise RecipeError(f"unknown section [{sec}]", lineno, col + 1)
            if sec in sections:
                raise RecipeError(f"duplicate section [{sec}]", lineno, col + 1)
            current = sec
            sections[sec] = {}
            continue
        if "=" not in stripped:
            raise RecipeError("expected 'key = value'", lineno, col)
        if current is None:
            raise RecipeError("key outside of any section", lineno, col)
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if key not in SCHEMA[current.partition(".")[0]]:
            raise RecipeError(f"unknown key {key!r} in [{current}]", lineno, col)
        if not value:
            raise RecipeError(f"empty value for {key!r}", lineno, line.index("=") + 2)
        sections[current][key] = value
    recipe = Recipe(sections, name)
    kind = recipe.get("build", "kind")
    if kind is None:
        raise RecipeError("missing [build] kind")
    if kind not in KINDS:
        raise RecipeError(f"unknown build kind {kind!r}")
    return recipe


# ---------------------------------------------------------------------------
# values
# ---------------------------------------------------------------------------

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv,
        ast.Pow: operator.pow, ast.USub: operator.neg, ast.UAdd: operator.pos}


def _eval_node(node):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return node.value
    if isinstance(node, ast.Name) and node.id == "pi":
        return np.pi
    if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_eval_node(node.operand))
    raise ValueError("unsupported expression")


def number(text: str) -> float:
    try:
        return float(_eval_node(ast.parse(text.strip(), mode="eval")))
    except (SyntaxError, ValueError, ZeroDivisionError, TypeError) as exc:
        raise RecipeError(f"not a number: {text!r}") from exc


def integer(text: str) -> int:
    v = number(text)
    if v != int(v):
        raise RecipeError(f"not an integer: {text!r}")
    return int(v)


def numbers(text: str) -> list:
    return [number(t) for t in text.strip().strip("[]").split(",") if t.strip()]


def interval(text: str) -> tuple:
    v = numbers(text)
    if len(v) != 2:
        raise RecipeError(f"expected an interval 'a, b': {text!r}")
    return (v[0], v[1])


def boolean(text: str) -> bool:
    t = text.strip().lower()
    if t not in ("true", "false"):
        raise RecipeError(f"expected true or false: {text!r}")
    return t == "true"


# ---------------------------------------------------------------------------
# ingredient builders
# ---------------------------------------------------------------------------

def build_curve(sec: dict) -> C.PlanarCurve:
    fam = sec.get("family")
    dom = interval(sec["domain"]) if "domain" in sec else None
    if fam == "cornu":
        return C.make_cornu(number(sec.get("lambda", "1")), dom or (-6.0, 6.0))
    if fam == "circle":
        return C.make_circle(number(sec.get("R", "1")), domain=dom)
    if fam == "line":
        return C.make_line(domain=dom or (-10.0, 10.0))
    if fam == "constantA":
        n, c = integer(sec.get("n", "2")), number(sec.get("c", "1"))
        theta0 = number(sec.get("theta0", "pi/2"))
        length = number(sec.get("length", "40"))
        if "shoot" in sec:
            return C.shoot_constantA(n, c, number(sec["shoot"]), interval(sec.get("bracket", "0.2, 2")),
                                     theta0, length=length)
        curve = C.make_constantA(n, c, number(sec.get("r0", "1")), theta0, length=length)
        return curve.restrict(*dom) if dom else curve
    raise RecipeError(f"unknown curve family {fam!r}")


def build_legendrian(sec: dict) -> L.LegendrianMap:
    fam = sec.get("family")
    if fam == "sphere":
        psi = L.geodesic_sphere(integer(sec.get("m", "1")))
    elif fam == "flat-torus":
        psi = L.flat_torus()
    elif fam == "gamma-phi":
        psi = L.gamma_phi(number(sec.get("phi", "pi/4")))
    elif fam == "gamma-n1n2":
        psi = L.gamma_n1n2(integer(sec.get("n1", "1")), integer(sec.get("n2", "1")))
    elif fam == "point":
        psi = L.point_map(complex(number(sec.get("z", "1"))))
    elif fam == "gammamu":
        g0 = numbers(sec.get("gamma0", "0.6, 0.8"))
        psi = L.solve_gammamu(integer(sec.get("n1", "1")), integer(sec.get("n2", "1")), number(sec.get("mu", "0")),
                              np.array(g0, dtype=complex), number(sec.get("t_end", "20")),
                              unit_speed=boolean(sec.get("unit_speed", "false")))
    else:
        raise RecipeError(f"unknown legendrian family {fam!r}")
    if "domain" in sec:
        vals = numbers(sec["domain"])
        if len(vals) != 2 * psi.m:
            raise RecipeError("legendrian domain needs two numbers per axis")
        psi = psi.restrict([(vals[2 * i], vals[2 * i + 1]) for i in range(psi.m)])
    return psi


def build_hyperbolic(sec: dict) -> L.HyperbolicLegendrianCurve:
    fam = sec.get("family", "alpha-qr")
    dom = interval(sec["domain"]) if "domain" in sec else None
    if fam == "alpha-qr":
        return L.alpha_qr(integer(sec.get("q", "1")), integer(sec.get("r", "2")), dom)
    if fam == "alpha-delta":
        return L.alpha_delta(number(sec.get("delta", "1")), dom or (0.0, 2 * np.pi))
    raise RecipeError(f"unknown hyperbolic family {fam!r}")


def build_surface(recipe: Recipe) -> K.LagrangianImmersion:
    sec = recipe.sections.get("surface", {})
    fam = sec.get("family", "torus-qr")
    if fam == "torus-qr":
        t_dom = interval(sec["t_domain"]) if "t_domain" in sec else None
        return K.torus_qr(integer(sec.get("q", "1")), integer(sec.get("r", "2")),
                          number(sec.get("margin", "0.1")), t_dom)
    if fam == "circle-orbit":
        return K.circle_orbit_surface(number(sec.get("scale", "1")), number(sec.get("margin", "0.1")))
    if fam == "product":
        return K.product_of_curves([build_curve(recipe.sections[f"curve.{i}"]) for i in (1, 2)])
    if fam == "join":
        return K.curve_join_surface(build_legendrian(recipe.sections["legendrian.gamma"]),
                                    build_hyperbolic(recipe.sections.get("hyperbolic", {})))
    raise RecipeError(f"unknown surface family {fam!r}")


def _indexed(recipe: Recipe, base: str) -> list:
    if base in recipe.sections:
        return [recipe.sections[base]]
    keys = sorted((k for k in recipe.sections if k.startswith(base + ".") and k.split(".")[1].isdigit()),
                  key=lambda k: int(k.split(".")[1]))
    return [recipe.sections[k] for k in keys]


def _section(recipe: Recipe, name: str) -> dict:
    if name not in recipe.sections:
        raise RecipeError(f"recipe needs a [{name}] section")
    return recipe.sections[name]


def build(recipe: Recipe):
    """Construct the object a recipe describes.

    Returns a PlanarCurve, LegendrianMap, HyperbolicLegendrianCurve or
    LagrangianImmersion depending on ``[build] kind``.
    """
    kind = recipe.get("build", "kind")
    if kind == "curve":
        return build_curve(_section(recipe, "curve"))
    if kind == "legendrian-curve":
        if "hyperbolic" in recipe.sections:
            return build_hyperbolic(recipe.sections["hyperbolic"])
        return build_legendrian(_section(recipe, "legendrian"))
    if kind == "product":
        secs = _indexed(recipe, "curve")
        if not secs:
            raise RecipeError("product needs [curve.1], [curve.2], ...")
        return K.product_of_curves([build_curve(s) for s in secs])
    if kind == "curve-times-legendrian":
        return K.curve_times_legendrian(build_curve(_section(recipe, "curve")),
                                        build_legendrian(_section(recipe, "legendrian")))
    if kind == "cone":
        s_range = interval(recipe.get("build", "s_range", "0.5, 2"))
        return K.cone(build_legendrian(_section(recipe, "legendrian")), s_range)
    if kind == "surface":
        return build_surface(recipe)
    if kind == "surface-times-two-legendrians":
        return K.surface_times_two_legendrians(build_surface(recipe),
                                               build_legendrian(_section(recipe, "legendrian.1")),
                                               build_legendrian(_section(recipe, "legendrian.2")))
    if kind == "legendrian-join":
        return L.join_legendrian(build_legendrian(_section(recipe, "legendrian.gamma")),
                                 build_legendrian(_section(recipe, "legendrian.1")),
                                 build_legendrian(_section(recipe, "legendrian.2")))
    raise RecipeError(f"unknown build kind {kind!r}")


def grid_counts(recipe: Recipe, dim: int, override: int | None = None) -> tuple:
    if override is not None:
        return (int(override),) * dim
    text = recipe.get("grid", "counts")
    if text is None:
        return ((128,) * dim if dim <= 2 else (32,) * dim) if dim <= 3 else (48, 48) + (6,) * (dim - 2)
    vals = [integer(t) for t in text.split(",")]
    if len(vals) == 1:
        return (vals[0],) * dim
    if len(vals) != dim:
        raise RecipeError(f"grid counts need 1 or {dim} values")
    return tuple(vals)


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

def _r(name: str, **sections) -> Recipe:
    return Recipe({k.replace("__", "."): {kk: str(vv) for kk, vv in v.items()} for k, v in sections.items()}, name)


_ATOM = re.compile(r"^([A-Za-z][\w-]*)(?:\((.*)\))?$")


def _atom(text: str):
    m = _ATOM.match(text.strip())
    if not m:
        raise RecipeError(f"cannot parse {text!r}")
    args = [a.strip() for a in m.group(2).split(",")] if m.group(2) else []
    return m.group(1), args


def _legendrian_atom(text: str) -> dict:
    name, args = _atom(text)
    if name == "sphere":
        return {"family": "sphere", "m": args[0] if args else "1"}
    if name in ("flat-torus", "point"):
        return {"family": name}
    if name == "gamma-phi":
        return {"family": "gamma-phi", "phi": args[0]}
    if name == "gamma-n1n2":
        return {"family": "gamma-n1n2", "n1": args[0], "n2": args[1]}
    if name == "gammamu":
        sec = {"family": "gammamu", "n1": args[0], "n2": args[1], "mu": args[2]}
        if len(args) > 3:
            sec["t_end"] = args[3]
        return sec
    raise RecipeError(f"unknown legendrian {text!r}")


def _curve_atom(text: str) -> dict:
    name, args = _atom(text)
    if name == "circle":
        return {"family": "circle", "R": args[0] if args else "1"}
    if name == "cornu":
        sec = {"family": "cornu", "lambda": args[0] if args else "1"}
        if len(args) == 3:
            sec["domain"] = f"{args[1]}, {args[2]}"
        return sec
    if name == "constantA":
        return {"family": "constantA", "n": args[0], "c": args[1], "r0": args[2]}
    raise RecipeError(f"unknown curve {text!r}")


def _kv(tokens) -> dict:
    out = {}
    for t in tokens:
        if "=" not in t:
            raise RecipeError(f"expected key=value, got {t!r}")
        k, _, v = t.partition("=")
        out[k] = v
    return out


def _split(text: str) -> list:
    """Whitespace split that keeps bracketed groups together."""
    tokens, depth, cur = [], 0, ""
    for ch in text.strip():
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch.isspace() and depth == 0:
            if cur:
                tokens.append(cur)
            cur = ""
        else:
            cur += ch
    if cur:
        tokens.append(cur)
    return tokens


def slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9.]+", "-", text.strip()).strip("-").lower() or "preset"


GALLERY = {
    "figure1": lambda: _r("figure1", build={"kind": "curve"},
                          curve={"family": "cornu", "lambda": 1, "domain": "-6, 6"}, output={"samples": 1201}),
    "figure2": lambda: _r("figure2", build={"kind": "curve"},
                          curve={"family": "constantA", "n": 2, "c": 5, "r0": 1, "length": 160},
                          output={"samples": 4001, "n": 2}),
    "figure3": lambda: _r("figure3", build={"kind": "curve"},
                          curve={"family": "constantA", "n": 2, "c": 1, "r0": 1, "length": 12},
                          output={"samples": 1201, "n": 2}),
    "figure4": lambda: _r("figure4", build={"kind": "curve"},
                          curve={"family": "constantA", "n": 3, "c": 1, "shoot": "1/3", "bracket": "0.3, 0.32",
                                 "length": 3},
                          output={"samples": 1201, "n": 3}),
    "figure5": lambda: _r("figure5", build={"kind": "curve"},
                          curve={"family": "constantA", "n": 3, "c": 1, "r0": 0.5, "length": 6},
                          output={"samples": 1201, "n": 3}),
}


def preset(text: str) -> Recipe:
    """Translate a preset string into a recipe."""
    tokens = _split(text)
    if not tokens:
        raise RecipeError("empty preset")
    head, rest = tokens[0], tokens[1:]
    name = slug(text)
    if head in GALLERY and not rest:
        return GALLERY[head]()
    if head == "cornu":
        kv = _kv(rest)
        return _r(name, build={"kind": "curve"},
                  curve={"family": "cornu", "lambda": kv.get("lambda", "1"),
                         "domain": ", ".join(kv.get("range", "[-6,6]").strip("[]").split(","))})
    if head == "constantA":
        kv = _kv(rest)
        return _r(name, build={"kind": "curve"},
                  curve={"family": "constantA", "n": kv.get("n", "2"), "c": kv.get("c", "1"),
                         "r0": kv.get("r0", "1"), "length": kv.get("length", "40")},
                  output={"n": kv.get("n", "2")})
    if head == "clifford" and not rest:
        return preset("product circles 1 1")
    if head == "product":
        secs, i, k = {}, 0, 1
        while i < len(rest):
            fam = rest[i]
            i += 1
            if fam == "circles":
                while i < len(rest) and re.match(r"^[-+0-9.]", rest[i]):
                    secs[f"curve__{k}"] = {"family": "circle", "R": rest[i]}
                    k, i = k + 1, i + 1
            elif fam in ("circle", "cornu"):
                if i >= len(rest):
                    raise RecipeError(f"{fam} needs a parameter")
                key = "R" if fam == "circle" else "lambda"
                secs[f"curve__{k}"] = {"family": fam, key: rest[i]}
                k, i = k + 1, i + 1
            else:
                raise RecipeError(f"unknown product factor {fam!r}")
        if k == 1:
            raise RecipeError("product needs at least one factor")
        return _r(name, build={"kind": "product"}, grid={"counts": 128 if k <= 3 else 24}, **secs)
    if head == "torus-qr":
        kv = _kv(rest)
        return _r(name, build={"kind": "surface"},
                  surface={"family": "torus-qr", "q": kv.get("q", "1"), "r": kv.get("r", "2"),
                           "t_domain": kv.get("t_domain", "0, 2")},
                  grid={"counts": 64}, verify={"div_n": kv.get("n", "2, 2")})
    if head in ("thm3", "cor5-case3"):
        kv = _kv(rest)
        if head == "cor5-case3":
            kv.setdefault("phi", "circle-orbit")
        phi_name, phi_args = _atom(kv.get("phi", "torus-qr(1,2)"))
        if phi_name == "torus-qr":
            surface = {"family": "torus-qr", "q": phi_args[0] if phi_args else "1",
                       "r": phi_args[1] if len(phi_args) > 1 else "2", "t_domain": "0, 2"}
        elif phi_name in ("circle-orbit", "cor5-case3"):
            surface = {"family": "circle-orbit", "scale": phi_args[0] if phi_args else "1"}
        else:
            raise RecipeError(f"unknown surface {phi_name!r}")
        out = _r(name, build={"kind": "surface-times-two-legendrians"}, surface=surface,
                 legendrian__1=_legendrian_atom(kv.get("psi1", "sphere(1)")),
                 legendrian__2=_legendrian_atom(kv.get("psi2", "sphere(1)")))
        if head == "cor5-case3":
            out.sections["verify"] = {"claims": "parallelH"}
        return out
    if head == "curve-times":
        kv = _kv(rest)
        return _r(name, build={"kind": "curve-times-legendrian"},
                  curve=_curve_atom(kv.get("alpha", "circle(1)")),
                  legendrian=_legendrian_atom(kv.get("psi", "sphere(1)")))
    if head == "cone":
        kv = _kv(rest)
        return _r(name, build={"kind": "cone", "s_range": kv.get("range", "0.5, 2").strip("[]")},
                  legendrian=_legendrian_atom(kv.get("psi", "flat-torus")))
    if head == "join":
        kv = _kv(rest)
        return _r(name, build={"kind": "legendrian-join"},
                  legendrian__gamma=_legendrian_atom(kv.get("gamma", "gamma-n1n2(2,2)")),
                  legendrian__1=_legendrian_atom(kv.get("psi1", "sphere(1)")),
                  legendrian__2=_legendrian_atom(kv.get("psi2", "sphere(1)")),
                  grid={"counts": 32})
    if _atom(head)[0] in ("gamma-phi", "gamma-n1n2", "gammamu") and not rest:
        return _r(name, build={"kind": "legendrian-curve"}, legendrian=_legendrian_atom(head))
    if head == "alpha-qr":
        kv = _kv(rest)
        return _r(name, build={"kind": "legendrian-curve"},
                  hyperbolic={"family": "alpha-qr", "q": kv.get("q", "1"), "r": kv.get("r", "2")})
    raise RecipeError(f"unknown preset {text!r}")


PRESET_EXAMPLES = (
    "figure1", "figure2", "figure3", "figure4", "figure5", "clifford",
    "cornu lambda=1 range=[-6,6]", "product circles 1 1", "product cornu 1 cornu -1",
    "product cornu 1 cornu 1", "torus-qr q=1 r=2", "thm3 phi=torus-qr(1,2) psi1=sphere(1) psi2=sphere(1)",
    "cor5-case3", "curve-times alpha=circle(1) psi=sphere(2)", "cone psi=flat-torus",
    "join gamma=gamma-n1n2(2,2) psi1=sphere(1) psi2=sphere(1)", "gamma-phi(0.6)", "alpha-qr q=1 r=2",
)
