"""Calibration fitting on forward-generated fixtures.

Noiseless fixtures must be recovered to float precision; noisy recovery is
checked as a fixed-seed Monte-Carlo success count so the test is
deterministic.
"""

import math
import random

import numpy as np
import pytest

from conftest import (
    CONDITIONS,
    HEIGHTS,
    NOZZLE_D,
    TRUE_G,
    TRUE_INTERCEPT,
    TRUE_SLOPE,
    make_records,
)
from infoam import calib
from infoam.errors import (
    CalibrationError,
    ExtrapolationError,
    MeasurementError,
    SchemaError,
)

VALIDITY = (2.0, 15.0)


def test_reduce_scan_recovers_generated_geometry():
    records = make_records()
    for rec in records:
        r_c, n = calib.reduce_scan(rec)
        r_true = TRUE_SLOPE * rec.h + TRUE_INTERCEPT
        n_true = TRUE_G * rec.alpha * (2 * r_true + NOZZLE_D) / \
            (2 * math.pi * r_true)
        assert r_c == pytest.approx(r_true, rel=1e-12)
        assert n == pytest.approx(n_true, rel=1e-12)


def test_fit_rc_line_noiseless_is_exact():
    # reference machine regime fixture: R_c = 0.5*H + 0.1 over the height grid
    records = make_records(slope=0.5, intercept=0.1)
    line, excluded = calib.fit_rc_vs_height(records, VALIDITY)
    assert not excluded
    assert line.slope == pytest.approx(0.5, abs=1e-12)
    assert line.intercept == pytest.approx(0.1, abs=1e-12)
    assert line.rms_residual == pytest.approx(0.0, abs=1e-12)


def test_fit_rc_line_noisy_monte_carlo():
    # 5% multiplicative radius noise on 12 points; the slope must land
    # within 10% of truth in at least 95 of 100 seeded trials
    hits = 0
    for seed in range(100):
        rng = random.Random(seed)
        records = make_records(slope=0.5, intercept=0.1, noise=0.05, rng=rng)
        line, _ = calib.fit_rc_vs_height(records, VALIDITY)
        if abs(line.slope - 0.5) <= 0.10 * 0.5:
            hits += 1
    assert hits >= 95


def test_fit_rc_line_reports_out_of_range_exclusions():
    records = make_records(heights=(1.0, 2.0, 6.0, 15.0, 20.0))
    line, excluded = calib.fit_rc_vs_height(records, VALIDITY)
    reasons = {(e.index, e.reason) for e in excluded}
    # two conditions per height: indices 0, 1 (H=1) and 8, 9 (H=20)
    assert reasons == {
        (0, "height-out-of-range"), (1, "height-out-of-range"),
        (8, "height-out-of-range"), (9, "height-out-of-range")}
    assert line.slope == pytest.approx(TRUE_SLOPE, abs=1e-12)


def test_fit_rc_line_needs_two_heights():
    records = make_records(heights=(6.0,))
    with pytest.raises(CalibrationError):
        calib.fit_rc_vs_height(records, VALIDITY)


def test_fit_g_noiseless_is_exact():
    records = make_records()
    g, rms = calib.fit_g(records)
    assert g == pytest.approx(TRUE_G, abs=1e-12)
    assert rms == pytest.approx(0.0, abs=1e-12)


def test_fit_g_matches_generic_least_squares():
    # the closed form sum(xy)/sum(xx) must agree with a generic linear
    # solver on the same through-origin design matrix
    rng = random.Random(7)
    records = make_records(noise=0.08, rng=rng)
    g, _ = calib.fit_g(records)
    xs, ys = [], []
    for rec in records:
        r_c, n = calib.reduce_scan(rec)
        w = 2.0 * r_c + rec.d
        xs.append(rec.alpha * w / (2.0 * math.pi * r_c))
        ys.append(n)
    ref, *_ = np.linalg.lstsq(
        np.asarray(xs).reshape(-1, 1), np.asarray(ys), rcond=None)
    assert g == pytest.approx(float(ref[0]), rel=1e-12)


def test_fit_g_within_free_air_band():
    # fixtures generated inside the free-air extrusion band stay in it
    for g_true in (0.155, 0.160, 0.164):
        records = make_records(g=g_true)
        g, _ = calib.fit_g(records)
        assert 0.154 <= g <= 0.165


def test_fit_g_needs_enough_records():
    records = make_records(heights=(6.0,), conditions=((18.0, 20.0),))
    with pytest.raises(CalibrationError):
        calib.fit_g(records)


def test_fit_g_with_mean_radii():
    records = make_records()
    means = {h: TRUE_SLOPE * h + TRUE_INTERCEPT for h in HEIGHTS}
    g, _ = calib.fit_g(records, rc_means=means)
    assert g == pytest.approx(TRUE_G, abs=1e-12)
    with pytest.raises(CalibrationError):
        calib.fit_g(records, rc_means={2.0: 0.9})  # missing heights


def test_shear_fit_single_speed_closed_form():
    # all records at one rotational speed: the coefficient must equal
    # speed^(-exponent) exactly (the correction normalizes to the data mean)
    records = make_records()
    means = calib._mean_radii(records)
    fit = calib.fit_shear_thinning(records, means, exponent=-0.09)
    assert fit.a == pytest.approx(360.0 ** 0.09, rel=1e-12)
    for a_h, worst in fit.per_height.values():
        assert a_h == pytest.approx(360.0 ** 0.09, rel=1e-12)
        assert worst <= 1e-12


def test_shear_fit_multi_speed_closed_form():
    # two speeds per height; with data-derived mean radii the identifiable
    # coefficient is 1 / mean_over_speeds(speed^exponent)
    exponent = -0.09
    conditions = ((18.0, 20.0), (18.0, 5.0))  # 360 and 90 rad/s
    records = make_records(conditions=conditions, shear_exponent=exponent)
    means = calib._mean_radii(records)
    fit = calib.fit_shear_thinning(records, means, exponent=exponent)
    expected = 1.0 / ((360.0 ** exponent + 90.0 ** exponent) / 2.0)
    assert fit.a == pytest.approx(expected, rel=1e-10)


def test_shear_fit_validation():
    records = make_records()
    means = calib._mean_radii(records)
    with pytest.raises(CalibrationError):
        calib.fit_shear_thinning(records, means, exponent=0.1)
    with pytest.raises(CalibrationError):
        calib.fit_shear_thinning(records, {}, exponent=-0.09)
    with pytest.raises(CalibrationError):
        calib.fit_shear_thinning([], means, exponent=-0.09)


class TestPredictRc:
    def test_reference_speed_lands_on_the_line(self, model):
        for h in (2.0, 6.0, 12.5, 15.0):
            r = calib.predict_rc(h, 18.0, 20.0, model)  # 360 rad/s
            assert r == pytest.approx(model.rc_line.radius_at(h), rel=1e-12)

    def test_doubled_speed_shrinks_by_the_thinning_factor(self, model):
        base = calib.predict_rc(6.0, 18.0, 20.0, model)
        fast = calib.predict_rc(6.0, 36.0, 20.0, model)
        # mpmath: 2^(-0.09)
        assert fast / base == pytest.approx(0.93952274921401177669, rel=1e-12)

    def test_extrapolation_is_refused(self, model):
        with pytest.raises(ExtrapolationError):
            calib.predict_rc(1.9, 18.0, 20.0, model)
        with pytest.raises(ExtrapolationError):
            calib.predict_rc(15.1, 18.0, 20.0, model)

    def test_zero_speed_is_refused(self, model):
        with pytest.raises(CalibrationError):
            calib.predict_rc(6.0, 0.0, 20.0, model)


def test_calibrate_full_pipeline_recovers_ground_truth():
    records = make_records()
    model, diag = calib.calibrate(records, validity=VALIDITY)
    assert model.rc_line.slope == pytest.approx(TRUE_SLOPE, abs=1e-10)
    assert model.rc_line.intercept == pytest.approx(TRUE_INTERCEPT, abs=1e-10)
    assert model.g == pytest.approx(TRUE_G, abs=1e-10)
    assert model.reference_speed == pytest.approx(360.0, rel=1e-12)
    assert model.d == NOZZLE_D
    assert diag.n_records == diag.n_used == len(records)
    assert not diag.exclusions


def test_calibrate_counts_exclusions():
    records = make_records(heights=(1.5, 4.0, 6.0, 8.0))
    model, diag = calib.calibrate(records, validity=VALIDITY)
    assert diag.n_records == 8
    assert diag.n_used == 6
    assert len(diag.exclusions) == 2
    assert 1.5 not in model.rc_means


def test_calibrate_rejects_mixed_nozzles():
    records = make_records() + make_records(d=0.8, heights=(6.0,))
    with pytest.raises(CalibrationError):
        calib.calibrate(records, validity=VALIDITY)


def test_scan_record_validation():
    with pytest.raises(MeasurementError):
        calib.LineScanRecord(h=6, alpha=18, v_f=20, w_measured=0.3,
                             dx_measured=1.0)
    with pytest.raises(MeasurementError):
        calib.LineScanRecord(h=6, alpha=18, v_f=20, w_measured=4.4,
                             dx_measured=0.4)


class TestScanCsv:
    HEADER = "H,alpha,V_F,W,dx,d\n"

    def test_round_trip_exact(self, tmp_path):
        records = make_records()
        path = tmp_path / "scans.csv"
        lines = [self.HEADER.strip()]
        for r in records:
            lines.append(f"{r.h!r},{r.alpha!r},{r.v_f!r},"
                         f"{r.w_measured!r},{r.dx_measured!r},{r.d!r}")
        path.write_text("\n".join(lines) + "\n")
        loaded = calib.read_scan_csv(path)
        assert loaded == records  # float repr round-trips exactly

    def test_missing_column(self, tmp_path):
        path = tmp_path / "scans.csv"
        path.write_text("H,alpha,V_F,W,dx\n6,18,20,4.4,1.2\n")
        with pytest.raises(MeasurementError, match="missing column"):
            calib.read_scan_csv(path)

    def test_bad_number_reports_line(self, tmp_path):
        path = tmp_path / "scans.csv"
        path.write_text(self.HEADER + "6,18,20,4.4,1.2,0.4\n"
                        "6,oops,20,4.4,1.2,0.4\n")
        with pytest.raises(MeasurementError, match="line 3"):
            calib.read_scan_csv(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "scans.csv"
        path.write_text(self.HEADER)
        with pytest.raises(MeasurementError, match="no data rows"):
            calib.read_scan_csv(path)


def test_save_load_round_trip(tmp_path, model):
    path = tmp_path / "calib.json"
    calib.save_calibration(path, model)
    loaded = calib.load_calibration(path)
    assert loaded.rc_line == model.rc_line
    assert loaded.g == model.g
    assert loaded.shear.a == model.shear.a
    assert dict(loaded.shear.per_height) == dict(model.shear.per_height)
    assert dict(loaded.rc_means) == dict(model.rc_means)
    assert loaded.reference_speed == model.reference_speed
    assert loaded.temperature == model.temperature
    assert loaded.d == model.d


def test_load_refuses_foreign_schema(tmp_path):
    path = tmp_path / "calib.json"
    path.write_text('{"schema": "infoam-plan/1"}')
    with pytest.raises(SchemaError):
        calib.load_calibration(path)
    path.write_text('{"schema": "infoam-calib/2"}')
    with pytest.raises(SchemaError):
        calib.load_calibration(path)
    path.write_text('{"g": 0.17}')
    with pytest.raises(SchemaError):
        calib.load_calibration(path)


def test_noisy_g_monte_carlo():
    # acceptance-grade recovery: 5% noise, 100 seeds, G within 5% in >= 95
    hits = 0
    for seed in range(100):
        rng = random.Random(1000 + seed)
        records = make_records(noise=0.05, rng=rng)
        g, _ = calib.fit_g(records)
        if abs(g - TRUE_G) <= 0.05 * TRUE_G:
            hits += 1
    assert hits >= 95
