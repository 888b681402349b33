from __future__ import annotations

import io

import numpy as np
import pytest

from lagmin import cli, recipes
from lagmin import constructions as K
from lagmin.errors import RecipeError
from lagmin.legendrian import curve_angle_rate

RECIPE = """\
# a comment
[build]
kind = curve-times-legendrian

[curve]
family = circle
R = 1

[legendrian]
family = sphere
m = 2

[grid]
counts = 24
"""


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_recipe_round_trip():
    r = recipes.parse_recipe(RECIPE)
    again = recipes.parse_recipe(r.to_text())
    assert again == r
    assert again.to_text() == r.to_text()


@pytest.mark.parametrize("preset", recipes.PRESET_EXAMPLES)
def test_presets_round_trip(preset):
    r = recipes.preset(preset)
    assert recipes.parse_recipe(r.to_text()) == r


@pytest.mark.parametrize("text,line,column", [
    ("[build]\nkind = curve\nflavour = x\n", 3, 1),
    ("[build]\nkind = curve\n[curvee]\n", 3, 2),
    ("[build]\nkind = curve\n  R\n", 3, 3),
    ("kind = curve\n", 1, 1),
])
def test_recipe_errors_carry_location(text, line, column):
    with pytest.raises(RecipeError) as exc:
        recipes.parse_recipe(text)
    assert exc.value.line == line and exc.value.column == column


def test_recipe_numbers():
    assert recipes.number("pi/2") == pytest.approx(np.pi / 2)
    assert recipes.number("1/3") == pytest.approx(1 / 3)
    with pytest.raises(RecipeError):
        recipes.number("__import__('os')")
    with pytest.raises(RecipeError):
        recipes.integer("1.5")


def test_unknown_preset():
    with pytest.raises(RecipeError):
        recipes.preset("nonsense")


def test_generate_cornu_kappa_column(tmp_path, capsys):
    code, out, _ = run(["generate", "--preset", "cornu lambda=1 range=[-6,6]", "--out", str(tmp_path)], capsys)
    assert code == 0
    csv_path = [p for p in out.split() if p.endswith(".csv")][0]
    data = np.genfromtxt(csv_path, delimiter=",", names=True)
    assert data.dtype.names[3] == "kappa"
    assert np.max(np.abs(data["kappa"] - data["s"])) < 1e-8
    assert data["s"][0] == -6.0 and data["s"][-1] == 6.0


def test_generate_closed_petal_and_torus(tmp_path, capsys):
    code, out, _ = run(["generate", "--preset", "figure2", "--out", str(tmp_path)], capsys)
    assert code == 0 and (tmp_path / "figure2.csv").exists()
    data = np.genfromtxt(tmp_path / "figure2.csv", delimiter=",", names=True)
    assert np.nanmax(np.abs(data["A_alpha"] - 5.0)) < 1e-6
    code, out, _ = run(["generate", "--preset", "torus-qr q=1 r=2", "--out", str(tmp_path)], capsys)
    assert code == 0
    header = (tmp_path / "torus-qr-q-1-r-2.csv").read_text().splitlines()[0]
    assert header == "p1,p2,re1,im1,re2,im2"


@pytest.mark.parametrize("preset,expected", [
    ("product circles 1 1", 0),
    ("clifford", 0),
    ("product cornu 1 cornu 1", 1),
    ("product cornu 1 cornu -1", 0),
    ("thm3 phi=torus-qr(1,2) psi1=sphere(1) psi2=sphere(1)", 0),
    ("cor5-case3", 0),
    ("join gamma=gamma-n1n2(2,2) psi1=sphere(1) psi2=sphere(1)", 0),
])
def test_verify_exit_codes(preset, expected, tmp_path, capsys):
    code, out, _ = run(["verify", "--preset", preset, "--out", str(tmp_path)], capsys)
    assert code == expected
    assert out.startswith("lagmin-report 1")
    assert ("verdict = pass" in out) == (expected == 0)


def test_verify_recipe_file_and_tol(tmp_path, capsys):
    path = tmp_path / "ring.txt"
    path.write_text(RECIPE)
    code, out, _ = run(["verify", "--recipe", str(path), "--out", str(tmp_path)], capsys)
    assert code == 0 and (tmp_path / "ring.report.txt").read_text() == out
    assert (tmp_path / "ring.residuals.csv").exists()
    code, _, _ = run(["verify", "--preset", "product cornu 1 cornu 1", "--tol", "3", "--out", str(tmp_path)],
                     capsys)
    assert code == 0


def test_parse_error_exit_2(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("[build]\nkind = curve\ncolour = red\n")
    code, _, err = run(["verify", "--recipe", str(path), "--out", str(tmp_path)], capsys)
    assert code == 2 and "line 3" in err and "column 1" in err


def test_structural_error_exit_2(tmp_path, capsys):
    code, _, err = run(["verify", "--preset", "curve-times alpha=cornu(1) psi=flat-torus", "--out", str(tmp_path)],
                       capsys)
    assert code == 2 and "OriginCrossingError" in err
    code, _, _ = run(["verify", "--preset", "figure1", "--out", str(tmp_path)], capsys)
    assert code == 2
    code, _, _ = run(["generate", "--out", str(tmp_path)], capsys)
    assert code == 2


def test_lagmin_out_overrides(tmp_path, monkeypatch, capsys):
    target = tmp_path / "env"
    monkeypatch.setenv("LAGMIN_OUT", str(target))
    code, _, _ = run(["generate", "--preset", "figure1", "--out", str(tmp_path / "flag")], capsys)
    assert code == 0
    assert (target / "figure1.csv").exists() and not (tmp_path / "flag").exists()


def test_generate_is_deterministic_and_recipe_echo_reproduces(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    run(["generate", "--preset", "curve-times alpha=circle(1) psi=sphere(2)", "--out", str(a)], capsys)
    run(["generate", "--recipe", str(a / "curve-times-alpha-circle-1-psi-sphere-2.recipe.txt"), "--out", str(b)], capsys)
    assert (a / "curve-times-alpha-circle-1-psi-sphere-2.csv").read_bytes() == \
        (b / "curve-times-alpha-circle-1-psi-sphere-2.csv").read_bytes()


def test_plot_curve_is_deterministic_svg(tmp_path, capsys):
    run(["generate", "--preset", "figure1", "--out", str(tmp_path)], capsys)
    code, out, _ = run(["plot", "--input", str(tmp_path / "figure1.csv"), "--out", str(tmp_path)], capsys)
    assert code == 0
    svg = (tmp_path / "figure1.curve.svg").read_text()
    assert svg.startswith("<?xml") and "<polyline" in svg and "http" in svg.splitlines()[1]
    assert 'width="600" height="600"' in svg
    assert "href" not in svg
    run(["plot", "--input", str(tmp_path / "figure1.csv"), "--out", str(tmp_path / "again")], capsys)
    assert (tmp_path / "again" / "figure1.curve.svg").read_text() == svg


def test_plot_heatmap_and_projection(tmp_path, capsys):
    code, _, _ = run(["plot", "--preset", "product cornu 1 cornu 1", "--grid", "16", "--out", str(tmp_path)],
                     capsys)
    assert code == 0
    svg = (tmp_path / "product-cornu-1-cornu-1.residual-heatmap.svg").read_text()
    assert svg.count("<rect") > 100
    code, _, _ = run(["plot", "--preset", "alpha-qr q=1 r=2", "--target", "projection", "--out", str(tmp_path)],
                     capsys)
    assert code == 0 and (tmp_path / "alpha-qr-q-1-r-2.projection.svg").exists()


def test_plot_column_mismatch_exit_2(tmp_path, capsys):
    run(["generate", "--preset", "figure1", "--out", str(tmp_path)], capsys)
    code, _, err = run(["plot", "--input", str(tmp_path / "figure1.csv"), "--target", "residual-heatmap",
                        "--out", str(tmp_path)], capsys)
    assert code == 2 and "delta_beta" in err


def test_acceptance_subset_is_deterministic(capsys):
    code, first, _ = run(["acceptance", "--only", "6,7"], capsys)
    assert code == 0
    code, second, _ = run(["acceptance", "--only", "6,7"], capsys)
    assert first == second
    assert len(first.strip().splitlines()) == 3


def _flipped_gamma_gs(gamma, s, n1, n2):
    s = np.asarray(s, dtype=float)
    return K._weighted_rate(curve_angle_rate(gamma, s), gamma(s), gamma.jacobian(s)[..., 0], n1, n2, "gamma", 1.0)


def test_acceptance_catches_gs_sign_mutation(monkeypatch, capsys):
    monkeypatch.setattr(K, "gamma_gs", _flipped_gamma_gs)
    code, out, _ = run(["acceptance", "--only", "9"], capsys)
    assert code == 1
    assert "[FAIL] criterion  9" in out and "failed: 9" in out


def test_acceptance_rejects_bad_selection(capsys):
    assert run(["acceptance", "--only", "13"], capsys)[0] == 2
    assert run(["acceptance", "--only", "x"], capsys)[0] == 2


def test_main_module_help():
    buf = io.StringIO()
    cli.build_parser().print_help(buf)
    assert "acceptance" in buf.getvalue()
