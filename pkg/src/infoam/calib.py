"""Calibration of the coiling process from line-scan measurements.

Three artifacts come out of a calibration run:

  * the coil-radius line R_c = slope*H + intercept with its validity interval,
  * the extrusion constant G (mm of filament per rad of screw rotation),
  * the shear-thinning correction a*(alpha*V_F)^(n-1) with its exponent
    supplied externally from rheometry.

Scan records arrive as numbers (pattern width W and coil spacing dx measured
off line scans); no image processing happens here.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from . import coilcore
from .errors import CalibrationError, ExtrapolationError, MeasurementError
from .jsonio import load_document, schema_tag, write_document

__all__ = [
    "LineScanRecord",
    "RcLine",
    "ShearFit",
    "CalibrationModel",
    "FitDiagnostics",
    "Exclusion",
    "reduce_scan",
    "fit_rc_vs_height",
    "fit_g",
    "fit_shear_thinning",
    "predict_rc",
    "calibrate",
    "read_scan_csv",
    "save_calibration",
    "load_calibration",
    "DEFAULT_VALIDITY",
]

SCHEMA_FAMILY = "infoam-calib"
SCHEMA_MAJOR = 1

# Linear R_c(H) regime observed on the reference machine (mm).
DEFAULT_VALIDITY = (2.5, 15.0)

SCAN_COLUMNS = ("H", "alpha", "V_F", "W", "dx", "d")


@dataclass(frozen=True)
class LineScanRecord:
    """One measured deposition condition.

    h           nozzle height (mm)
    alpha       screw rotation per mm travelled (rad/mm)
    v_f         printhead speed (mm/s)
    w_measured  pattern width off the scan (mm)
    dx_measured coil-to-coil distance off the scan (mm)
    d           nozzle diameter (mm)
    """

    h: float
    alpha: float
    v_f: float
    w_measured: float
    dx_measured: float
    d: float = 0.4

    def __post_init__(self):
        if self.d <= 0:
            raise MeasurementError(f"nozzle diameter must be > 0, got {self.d}")
        if self.w_measured < self.d:
            raise MeasurementError(
                f"pattern width {self.w_measured} below rope width {self.d}")
        if self.dx_measured <= self.d:
            raise MeasurementError(
                f"coil spacing {self.dx_measured} must exceed rope width {self.d}")


@dataclass(frozen=True)
class RcLine:
    """Least-squares R_c(H) line with its validity interval (all mm)."""

    slope: float
    intercept: float
    h_min: float
    h_max: float
    rms_residual: float = 0.0

    def __post_init__(self):
        if self.slope <= 0:
            raise CalibrationError(f"R_c(H) slope must be > 0, got {self.slope}")
        if not self.h_min < self.h_max:
            raise CalibrationError(
                f"empty validity interval [{self.h_min}, {self.h_max}]")

    def radius_at(self, h: float) -> float:
        """Line evaluation, no validity check (predict_rc enforces that)."""
        return self.slope * h + self.intercept


@dataclass(frozen=True)
class ShearFit:
    """Correction R_c = a*(alpha*V_F)^exponent * R̂_c, exponent = n-1 <= 0.

    per_height maps height (mm) to (a_h, max relative fit error); `a` is the
    unweighted mean of the per-height values.
    """

    a: float
    exponent: float
    per_height: Mapping[float, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        if self.a <= 0:
            raise CalibrationError(f"shear coefficient must be > 0, got {self.a}")
        if self.exponent > 0:
            raise CalibrationError(
                f"shear-thinning exponent must be <= 0, got {self.exponent}")


@dataclass(frozen=True)
class Exclusion:
    """A record left out of a fit, with a machine-readable reason code."""

    index: int
    reason: str


@dataclass(frozen=True)
class CalibrationModel:
    """Everything the planner needs to turn (H, alpha, V_F) into geometry.

    reference_speed is the rotational speed alpha*V_F (rad/s) at which the
    shear correction is 1, so predictions at calibration conditions land on
    the fitted line.  rc_means keeps the per-height mean radii the shear fit
    normalized against.
    """

    rc_line: RcLine
    g: float
    shear: ShearFit
    rc_means: Mapping[float, float]
    reference_speed: float
    temperature: float = 230.0
    d: float = 0.4

    def __post_init__(self):
        if self.g <= 0:
            raise CalibrationError(f"G must be > 0, got {self.g}")
        if self.reference_speed <= 0:
            raise CalibrationError(
                f"reference speed must be > 0, got {self.reference_speed}")
        if self.d <= 0:
            raise CalibrationError(f"nozzle diameter must be > 0, got {self.d}")


@dataclass(frozen=True)
class FitDiagnostics:
    """Residuals and bookkeeping for one calibration run."""

    n_records: int
    n_used: int
    exclusions: tuple[Exclusion, ...]
    g_rms_relative: float
    rc_rms: float


def reduce_scan(rec: LineScanRecord) -> tuple[float, float]:
    """Geometry from one scan: R_c = (W - d)/2 and N from the coil spacing."""
    r_c = (rec.w_measured - rec.d) / 2.0
    n = coilcore.n_from_spacing(rec.w_measured, rec.dx_measured, rec.d)
    return r_c, n


def fit_rc_vs_height(
    records: Sequence[LineScanRecord],
    validity: tuple[float, float] = DEFAULT_VALIDITY,
) -> tuple[RcLine, list[Exclusion]]:
    """Ordinary least squares of R_c against H inside the validity interval.

    Records outside [h_min, h_max] are excluded and reported, never silently
    dropped.  Needs at least 2 distinct heights among the survivors.
    """
    h_min, h_max = validity
    if not h_min < h_max:
        raise CalibrationError(f"empty validity interval [{h_min}, {h_max}]")
    used: list[tuple[float, float]] = []
    excluded: list[Exclusion] = []
    for i, rec in enumerate(records):
        if not h_min <= rec.h <= h_max:
            excluded.append(Exclusion(i, "height-out-of-range"))
            continue
        r_c, _ = reduce_scan(rec)
        used.append((rec.h, r_c))

    heights = {h for h, _ in used}
    if len(heights) < 2:
        raise CalibrationError(
            f"need >= 2 distinct heights inside [{h_min}, {h_max}] "
            f"to fit a line, got {len(heights)}")

    n = len(used)
    mean_h = sum(h for h, _ in used) / n
    mean_r = sum(r for _, r in used) / n
    sxx = sum((h - mean_h) ** 2 for h, _ in used)
    if sxx == 0:
        raise CalibrationError("degenerate height variance; cannot fit a line")
    sxy = sum((h - mean_h) * (r - mean_r) for h, r in used)
    slope = sxy / sxx
    intercept = mean_r - slope * mean_h
    rms = math.sqrt(
        sum((r - (slope * h + intercept)) ** 2 for h, r in used) / n)
    return RcLine(slope, intercept, h_min, h_max, rms_residual=rms), excluded


def fit_g(
    records: Sequence[LineScanRecord],
    rc_means: Mapping[float, float] | None = None,
    min_records: int = 3,
) -> tuple[float, float]:
    """Extrusion constant G as the through-origin slope of N vs alpha*W/(2*pi*R_c).

    Zero rotation must lay zero coils, so the line has no intercept and the
    estimator is the closed form sum(x*y)/sum(x^2).  Returns (G, RMS relative
    residual).  When rc_means is given, the regressor uses the per-height mean
    radius instead of each record's own width (steadier against scan noise).
    """
    if len(records) < min_records:
        raise CalibrationError(
            f"need >= {min_records} records to fit G, got {len(records)}")
    xs, ys = [], []
    for rec in records:
        r_c, n = reduce_scan(rec)
        if rc_means is not None:
            if rec.h not in rc_means:
                raise CalibrationError(f"no mean radius for height {rec.h}")
            r_c = rc_means[rec.h]
        if r_c <= 0:
            raise CalibrationError(
                f"nonpositive coil radius {r_c} at H={rec.h}; cannot form regressor")
        w = coilcore.coil_width(r_c, rec.d)
        xs.append(rec.alpha * w / (2.0 * math.pi * r_c))
        ys.append(n)
    sxx = sum(x * x for x in xs)
    if sxx == 0:
        raise CalibrationError("all-zero regressor; G is unidentifiable")
    g = sum(x * y for x, y in zip(xs, ys)) / sxx
    rel = [
        (y - g * x) / y
        for x, y in zip(xs, ys)
        if y != 0
    ]
    rms_rel = math.sqrt(sum(r * r for r in rel) / len(rel)) if rel else 0.0
    if g <= 0:
        raise CalibrationError(f"fitted G must be > 0, got {g}")
    return g, rms_rel


def _mean_radii(records: Sequence[LineScanRecord]) -> dict[float, float]:
    by_h: dict[float, list[float]] = {}
    for rec in records:
        r_c, _ = reduce_scan(rec)
        by_h.setdefault(rec.h, []).append(r_c)
    return {h: sum(v) / len(v) for h, v in sorted(by_h.items())}


def fit_shear_thinning(
    records: Sequence[LineScanRecord],
    rc_means: Mapping[float, float],
    exponent: float,
) -> ShearFit:
    """Fit the coefficient a in R_c = a*(alpha*V_F)^exponent * R̂_c.

    The exponent (n-1, from rheometry) is an input, so the fit is linear in
    log space: per height, log a is the mean residual of
    log(R_c/R̂_c) - exponent*log(alpha*V_F); `a` averages the per-height
    coefficients unweighted.  Per-height maximum relative errors are reported
    so the caller can judge whether the correction holds on their data.
    """
    if exponent > 0:
        raise CalibrationError(f"exponent must be <= 0, got {exponent}")
    by_h: dict[float, list[LineScanRecord]] = {}
    for rec in records:
        by_h.setdefault(rec.h, []).append(rec)
    if not by_h:
        raise CalibrationError("no records to fit shear correction")

    per_height: dict[float, tuple[float, float]] = {}
    for h in sorted(by_h):
        if h not in rc_means:
            raise CalibrationError(f"no mean radius for height {h}")
        r_hat = rc_means[h]
        logs = []
        for rec in by_h[h]:
            r_c, _ = reduce_scan(rec)
            speed = rec.alpha * rec.v_f
            if r_c <= 0 or speed <= 0 or r_hat <= 0:
                raise CalibrationError(
                    f"log-domain failure at H={h}: R_c={r_c}, "
                    f"alpha*V_F={speed}, R̂_c={r_hat}")
            logs.append(math.log(r_c / r_hat) - exponent * math.log(speed))
        a_h = math.exp(sum(logs) / len(logs))
        worst = 0.0
        for rec in by_h[h]:
            r_c, _ = reduce_scan(rec)
            pred = a_h * (rec.alpha * rec.v_f) ** exponent * r_hat
            worst = max(worst, abs(pred - r_c) / r_c)
        per_height[h] = (a_h, worst)

    a = sum(v[0] for v in per_height.values()) / len(per_height)
    return ShearFit(a=a, exponent=exponent, per_height=per_height)


def predict_rc(h: float, alpha: float, v_f: float, model: CalibrationModel) -> float:
    """Coil radius at (H, alpha, V_F): the fitted line times the speed correction.

    The correction a*(alpha*V_F)^exponent equals 1 at the calibration's
    reference rotational speed (single-speed batches fit a to exactly
    reference_speed^-exponent; mixed-speed batches fold the normalization
    the shear fit chose into a).  Heights outside the validity interval
    raise ExtrapolationError: past the calibrated range the radius growth
    stalls and the line is meaningless.
    """
    line = model.rc_line
    if not line.h_min <= h <= line.h_max:
        raise ExtrapolationError(
            f"H={h} mm outside calibrated interval "
            f"[{line.h_min}, {line.h_max}] mm")
    speed = alpha * v_f
    if speed <= 0:
        raise CalibrationError(f"rotational speed must be > 0, got {speed}")
    correction = model.shear.a * speed ** model.shear.exponent
    return line.radius_at(h) * correction


def calibrate(
    records: Sequence[LineScanRecord],
    validity: tuple[float, float] = DEFAULT_VALIDITY,
    exponent: float = -0.09,
    temperature: float = 230.0,
) -> tuple[CalibrationModel, FitDiagnostics]:
    """Run the full pipeline on one batch of scans.

    Heights outside `validity` are excluded from every fit and accounted for
    in the diagnostics (used + excluded = input).
    """
    rc_line, excluded = fit_rc_vs_height(records, validity)
    skip = {e.index for e in excluded}
    used = [rec for i, rec in enumerate(records) if i not in skip]

    rc_means = _mean_radii(used)
    g, g_rms = fit_g(used, rc_means=rc_means)
    shear = fit_shear_thinning(used, rc_means, exponent)
    reference_speed = sum(r.alpha * r.v_f for r in used) / len(used)

    ds = {rec.d for rec in used}
    if len(ds) != 1:
        raise CalibrationError(f"mixed nozzle diameters in one batch: {sorted(ds)}")

    model = CalibrationModel(
        rc_line=rc_line,
        g=g,
        shear=shear,
        rc_means=rc_means,
        reference_speed=reference_speed,
        temperature=temperature,
        d=ds.pop(),
    )
    diag = FitDiagnostics(
        n_records=len(records),
        n_used=len(used),
        exclusions=tuple(excluded),
        g_rms_relative=g_rms,
        rc_rms=rc_line.rms_residual,
    )
    return model, diag


def read_scan_csv(path: str | Path) -> list[LineScanRecord]:
    """Load scan records from CSV with header H,alpha,V_F,W,dx,d (units mm,
    rad/mm, mm/s, mm, mm, mm)."""
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in SCAN_COLUMNS if c not in header]
        if missing:
            raise MeasurementError(
                f"{path}: missing column(s) {', '.join(missing)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                records.append(LineScanRecord(
                    h=float(row["H"]),
                    alpha=float(row["alpha"]),
                    v_f=float(row["V_F"]),
                    w_measured=float(row["W"]),
                    dx_measured=float(row["dx"]),
                    d=float(row["d"]),
                ))
            except (TypeError, ValueError) as exc:
                raise MeasurementError(f"{path} line {lineno}: {exc}") from exc
    if not records:
        raise MeasurementError(f"{path}: no data rows")
    return records


def model_to_dict(model: CalibrationModel,
                  diag: FitDiagnostics | None = None) -> dict:
    doc = {
        "schema": schema_tag(SCHEMA_FAMILY, SCHEMA_MAJOR),
        "rc_line": {
            "slope": model.rc_line.slope,
            "intercept": model.rc_line.intercept,
            "h_min": model.rc_line.h_min,
            "h_max": model.rc_line.h_max,
            "rms_residual": model.rc_line.rms_residual,
        },
        "g": model.g,
        "shear": {
            "a": model.shear.a,
            "exponent": model.shear.exponent,
            "per_height": [
                [h, a_h, err]
                for h, (a_h, err) in sorted(model.shear.per_height.items())
            ],
        },
        "rc_means": [[h, r] for h, r in sorted(model.rc_means.items())],
        "reference_speed": model.reference_speed,
        "temperature": model.temperature,
        "d": model.d,
    }
    if diag is not None:
        doc["diagnostics"] = {
            "n_records": diag.n_records,
            "n_used": diag.n_used,
            "exclusions": [[e.index, e.reason] for e in diag.exclusions],
            "g_rms_relative": diag.g_rms_relative,
            "rc_rms": diag.rc_rms,
        }
    return doc


def model_from_dict(doc: dict) -> CalibrationModel:
    line = doc["rc_line"]
    shear = doc["shear"]
    return CalibrationModel(
        rc_line=RcLine(
            slope=line["slope"],
            intercept=line["intercept"],
            h_min=line["h_min"],
            h_max=line["h_max"],
            rms_residual=line.get("rms_residual", 0.0),
        ),
        g=doc["g"],
        shear=ShearFit(
            a=shear["a"],
            exponent=shear["exponent"],
            per_height={h: (a_h, err) for h, a_h, err in shear.get("per_height", [])},
        ),
        rc_means={h: r for h, r in doc["rc_means"]},
        reference_speed=doc["reference_speed"],
        temperature=doc.get("temperature", 230.0),
        d=doc.get("d", 0.4),
    )


def save_calibration(path: str | Path, model: CalibrationModel,
                     diag: FitDiagnostics | None = None) -> None:
    write_document(path, model_to_dict(model, diag))


def load_calibration(path: str | Path) -> CalibrationModel:
    doc = load_document(path, SCHEMA_FAMILY, SCHEMA_MAJOR)
    try:
        return model_from_dict(doc)
    except (KeyError, TypeError) as exc:
        from .errors import SchemaError
        raise SchemaError(f"{path}: malformed calibration document: {exc}") from exc
