"""Rendering checks: every figure helper writes a valid non-empty PNG.

These are smoke tests by design; the numbers being drawn are covered by the
model suites.  Where a figure consumes a report dict, the dict comes from the
real pipeline so schema drift breaks here rather than at the CLI.
"""

import pytest

from infoam.figures import (
    calibration_figure,
    compression_figure,
    curvature_figure,
    plan_figure,
    powerlaw_figure,
    relaxation_figure,
    verify_figure,
)
from infoam.gcode import emit, parse, verify_porosity
from infoam.mech import CompressionCurve, MaxwellFit, PowerLawModel
from infoam.planner import build_toolpath, builtin_part, plan_part, plan_report

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def check_png(path):
    data = path.read_bytes()
    assert data[:8] == PNG_MAGIC
    assert len(data) > 1000  # an actual render, not a blank stub


@pytest.fixture(scope="module")
def pipeline(model):
    plan = plan_part(builtin_part("cube", size=10.0, phi=85.0), model)
    report = plan_report(plan)
    vreport = verify_porosity(parse(emit(build_toolpath(plan))), plan, model)
    return report, vreport


def test_calibration_figure(tmp_path):
    points = [(h, 0.4 * h + 0.1) for h in (2.0, 4.0, 6.0, 8.0)]
    g_points = [(x, 0.17 * x) for x in (10.0, 20.0, 30.0)]
    out = calibration_figure(points, 0.4, 0.1, g_points, 0.17,
                             tmp_path / "calib.png")
    check_png(out)


def test_plan_figure(tmp_path, pipeline):
    report, _ = pipeline
    check_png(plan_figure(report, tmp_path / "plan.png"))


def test_verify_figure_pass(tmp_path, pipeline):
    _, vreport = pipeline
    assert vreport["pass"]
    check_png(verify_figure(vreport, tmp_path / "verify.png"))


def test_verify_figure_flags_bad_layers(tmp_path, pipeline):
    _, vreport = pipeline
    bad = dict(vreport)
    bad["pass"] = False
    bad["layers"] = [dict(row, ok=False) for row in vreport["layers"]]
    check_png(verify_figure(bad, tmp_path / "verify_bad.png"))


def test_compression_figure(tmp_path):
    strain = tuple(i / 50.0 for i in range(26)) + \
        tuple((25 - i) / 50.0 for i in range(1, 26))
    stress = tuple(2e5 * e * e + 1e4 * e for e in strain[:26]) + \
        tuple(1e5 * e * e for e in strain[26:])
    curve = CompressionCurve(strain, stress, split=26)
    moduli = [(0.2, 9e4), (0.4, 1.7e5)]
    check_png(compression_figure(curve, moduli, tmp_path / "comp.png"))


def test_compression_figure_loading_only(tmp_path):
    strain = tuple(i / 50.0 for i in range(26))
    stress = tuple(2e5 * e * e for e in strain)
    curve = CompressionCurve(strain, stress)
    check_png(compression_figure(curve, [], tmp_path / "comp_lo.png"))


def test_relaxation_figure(tmp_path):
    fit = MaxwellFit(k0=0.55, k1=0.45, tau1=3.0, f_max=20.0)
    trace = [(t / 10.0, fit.force_at(t / 10.0)) for t in range(301)]
    check_png(relaxation_figure(trace, fit, tmp_path / "relax.png"))


def test_curvature_figure_circle(tmp_path):
    pts = [(0.0, 0.0), (50.0, 50.0), (0.0, 100.0)]
    check_png(curvature_figure(pts, 0.02, tmp_path / "curv.png"))


def test_curvature_figure_straight(tmp_path):
    pts = [(0.0, 0.0), (50.0, 0.0), (100.0, 0.0)]
    check_png(curvature_figure(pts, 0.0, tmp_path / "curv_line.png"))


def test_powerlaw_figure(tmp_path):
    model = PowerLawModel(c=1.35, n=2.1, p_s=5e5, property_name="modulus (Pa)")
    points = [(phi, model.p_s * model.c * (1 - phi / 100.0) ** model.n)
              for phi in (60.0, 70.0, 80.0, 90.0)]
    check_png(powerlaw_figure(points, model, tmp_path / "plaw.png"))
