"""Command-line workflow over files; the only module with I/O side effects.

Subcommands wire the library end to end:

    calibrate  scans.csv          -> calibration JSON (+ CSV, figure)
    part       KIND               -> part spec JSON
    plan       part.json calib    -> plan JSON (+ report CSV, figure)
    gcode      plan.json          -> G-code text
    verify     gcode plan calib   -> verification report (+ CSV, figure)
    predict    PHI model.json     -> property value
    analyze    KIND data.csv      -> analysis report (+ CSV, figure)

Exit codes: 0 success, 2 validation/data errors, 3 infeasible targets,
4 verification failure.  Defaults can be overridden per-run with
`--set key=value` or persistently via a JSON file named by $INFOAM_CONFIG.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from . import calib as _calib
from . import gcode as _gcode
from . import mech as _mech
from .errors import (
    AnalysisError,
    CalibrationError,
    ExtrapolationError,
    GcodeError,
    InfeasibleTargetError,
    InfoamError,
    MeasurementError,
    PlanError,
    SchemaError,
    VerificationError,
)
from .jsonio import write_document, write_text
from .planner import (
    BUILTIN_KINDS,
    build_toolpath,
    builtin_part,
    load_part,
    load_plan,
    plan_part,
    plan_report,
    save_part,
    save_plan,
)

__all__ = ["main", "RunConfig", "CONFIG_ENV"]

CONFIG_ENV = "INFOAM_CONFIG"

EXIT_OK = 0
EXIT_DATA = 2
EXIT_INFEASIBLE = 3
EXIT_VERIFY = 4

_DATA_ERRORS = (MeasurementError, CalibrationError, SchemaError, GcodeError,
                AnalysisError, OSError, json.JSONDecodeError)
_INFEASIBLE_ERRORS = (InfeasibleTargetError, PlanError, ExtrapolationError)


@dataclass(frozen=True)
class RunConfig:
    """Run-wide defaults; every field can be overridden with --set key=value.

    Units: d mm, temperature degC, v_f mm/s, rho_bulk kg/m^3, travel_feed
    mm/min, validity_* mm; scale is E-units per screw rad; exponent is the
    shear-thinning n-1; tol_phi porosity points, tol_volume relative.
    """

    d: float = 0.4
    temperature: float = 230.0
    v_f: float = 20.0
    rho_bulk: float = 900.0
    kappa: float = 1.0
    scale: float = 1.0
    travel_feed: float = 3000.0
    exponent: float = -0.09
    validity_min: float = 2.5
    validity_max: float = 15.0
    tol_phi: float = 2.0
    tol_volume: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.d <= 0 or self.v_f <= 0 or self.rho_bulk <= 0:
            raise SchemaError("d, v_f, rho_bulk must be > 0")
        if not 0.0 < self.temperature <= 300.0:
            raise SchemaError(
                f"temperature must be in (0, 300], got {self.temperature}")
        if not 0.0 < self.kappa <= 1.0:
            raise SchemaError(f"kappa must be in (0, 1], got {self.kappa}")
        if self.scale <= 0 or self.travel_feed <= 0:
            raise SchemaError("scale and travel_feed must be > 0")
        if self.exponent > 0:
            raise SchemaError(f"exponent must be <= 0, got {self.exponent}")
        if not self.validity_min < self.validity_max:
            raise SchemaError("validity interval is empty")
        if self.tol_phi <= 0 or self.tol_volume <= 0:
            raise SchemaError("tolerances must be > 0")


def _coerce(value: str, target_type: type):
    return int(value) if target_type is int else float(value)


def load_config(set_args: list[str] | None) -> RunConfig:
    """Built-in defaults, then $INFOAM_CONFIG, then --set overrides."""
    values: dict = {}
    known = {f.name: f.type for f in fields(RunConfig)}
    config_path = os.environ.get(CONFIG_ENV)
    if config_path:
        with open(config_path, encoding="utf-8") as fh:
            doc = json.load(fh)
        if not isinstance(doc, dict):
            raise SchemaError(f"{config_path}: config must be a JSON object")
        for key, val in doc.items():
            if key not in known:
                raise SchemaError(f"{config_path}: unknown setting {key!r}")
            values[key] = val
    for item in set_args or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise SchemaError(f"--set expects key=value, got {item!r}")
        if key not in known:
            raise SchemaError(
                f"unknown setting {key!r}; known: {', '.join(sorted(known))}")
        try:
            values[key] = _coerce(val, int if key == "seed" else float)
        except ValueError:
            raise SchemaError(f"--set {key}: {val!r} is not a number") from None
    return RunConfig(**values)


def _sibling(out: Path, suffix: str) -> Path:
    return out.with_suffix(suffix)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _print(msg: str) -> None:
    print(msg)


# ---------------------------------------------------------------------------
# Subcommand bodies.

def _cmd_calibrate(args, cfg: RunConfig) -> int:
    records = _calib.read_scan_csv(args.scans)
    model, diag = _calib.calibrate(
        records,
        validity=(cfg.validity_min, cfg.validity_max),
        exponent=cfg.exponent,
        temperature=cfg.temperature,
    )
    if args.dry_run:
        _print(f"G={model.g:.6g} mm/rad, R_c = {model.rc_line.slope:.6g}*H + "
               f"{model.rc_line.intercept:.6g} on [{model.rc_line.h_min:g}, "
               f"{model.rc_line.h_max:g}] mm, a={model.shear.a:.6g}, "
               f"{diag.n_used}/{diag.n_records} records used")
        return EXIT_OK
    out = Path(args.out)
    _calib.save_calibration(out, model, diag)
    skip = {e.index for e in diag.exclusions}
    rows = []
    rc_points = []
    g_points = []
    for i, rec in enumerate(records):
        r_c, n = _calib.reduce_scan(rec)
        used = i not in skip
        rows.append([rec.h, rec.alpha, rec.v_f, r_c, n, int(used)])
        if used:
            rc_points.append((rec.h, r_c))
            w = 2.0 * r_c + rec.d
            g_points.append((rec.alpha * w / (2.0 * math.pi * r_c), n))
    _write_csv(_sibling(out, ".csv"),
               ["H", "alpha", "V_F", "R_c", "N", "used"], rows)
    if not args.no_figures:
        from . import figures
        figures.calibration_figure(
            rc_points, model.rc_line.slope, model.rc_line.intercept,
            g_points, model.g, _sibling(out, ".png"))
    _print(f"calibration written to {out} "
           f"(G={model.g:.6g} mm/rad, {diag.n_used}/{diag.n_records} records)")
    return EXIT_OK


def _cmd_part(args, cfg: RunConfig) -> int:
    params: dict = {}
    for item in args.param or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise PlanError(f"--param expects key=value, got {item!r}")
        try:
            params[key] = float(val) if "." in val or val.isdigit() else int(val)
        except ValueError:
            params[key] = val
    spec = builtin_part(args.kind, **params)
    if args.dry_run:
        _print(f"{spec.name}: bbox {spec.bbox}, {len(spec.slabs)} slabs")
        return EXIT_OK
    save_part(args.out, spec)
    _print(f"part spec written to {args.out} ({spec.name})")
    return EXIT_OK


def _cmd_plan(args, cfg: RunConfig) -> int:
    spec = load_part(args.part)
    model = _calib.load_calibration(args.calib)
    plan = plan_part(spec, model)
    report = plan_report(plan)
    totals = report["totals"]
    if args.dry_run:
        _print(json.dumps(report, indent=2, sort_keys=True))
        return EXIT_OK
    out = Path(args.out)
    save_plan(out, plan)
    _write_csv(
        _sibling(out, ".csv"),
        ["index", "z_base", "height", "kind", "mean_porosity_pct",
         "extruded_volume_mm3", "mass_g"],
        [[r["index"], r["z_base"], r["height"], r["kind"],
          r["mean_porosity_pct"], r["extruded_volume_mm3"], r["mass_g"]]
         for r in report["layers"]])
    if not args.no_figures:
        from . import figures
        figures.plan_figure(report, _sibling(out, ".png"))
    _print(f"plan written to {out}: {totals['n_layers']} layers, "
           f"{totals['height_mm']:.2f} mm, {totals['mass_g']:.3f} g, "
           f"mean porosity {totals['mean_porosity_pct']:.2f}%")
    return EXIT_OK


def _cmd_gcode(args, cfg: RunConfig) -> int:
    plan = load_plan(args.plan)
    profile = _gcode.GcodeProfile(
        scale=cfg.scale,
        temperature=plan.temperature,
        travel_feed=cfg.travel_feed,
    )
    toolpath = build_toolpath(plan, travel_feed=cfg.travel_feed)
    text = _gcode.emit(toolpath, profile)
    if args.dry_run:
        _print(f"{plan.name}: {len(toolpath.segments)} segments, "
               f"{toolpath.total_rotation:.1f} rad total")
        return EXIT_OK
    write_text(args.out, text)
    _print(f"gcode written to {args.out} ({len(toolpath.segments)} segments, "
           f"{toolpath.total_rotation:.1f} rad)")
    return EXIT_OK


def _cmd_verify(args, cfg: RunConfig) -> int:
    with open(args.gcode, encoding="utf-8") as fh:
        program = _gcode.parse(fh.read())
    plan = load_plan(args.plan)
    model = _calib.load_calibration(args.calib)
    report = _gcode.verify_porosity(
        program, plan, model=model, scale=cfg.scale,
        tol_phi=cfg.tol_phi, tol_volume=cfg.tol_volume)
    if not args.dry_run:
        out = Path(args.out)
        write_document(out, report)
        _write_csv(
            _sibling(out, ".csv"),
            ["index", "z_base", "phi_plan", "phi_recon", "deviation", "ok"],
            [[r["index"], r["z_base"], r["phi_plan"], r["phi_recon"],
              r["deviation"], int(r["ok"])] for r in report["layers"]])
        if not args.no_figures:
            from . import figures
            figures.verify_figure(report, _sibling(out, ".png"))
    totals = report["totals"]
    status = "pass" if report["pass"] else "FAIL"
    _print(f"verification {status}: total volume error "
           f"{100 * totals['relative_error']:.3f}%, "
           f"{sum(1 for r in report['layers'] if not r['ok'])} layer(s) out "
           f"of tolerance")
    return EXIT_OK if report["pass"] else EXIT_VERIFY


def _cmd_predict(args, cfg: RunConfig) -> int:
    model = _mech.load_powerlaw(args.model)
    value = _mech.property_powerlaw(args.phi, model)
    doc = {"phi": args.phi, "property": model.property_name, "value": value}
    if args.out:
        write_document(Path(args.out), doc)
    _print(f"{model.property_name} at phi={args.phi:g}%: {value:.6g}")
    return EXIT_OK


def _default_levels(curve) -> list[float]:
    strain, _ = curve.loading
    first = strain[_mech.MODULUS_WINDOW - 1]
    last = strain[-1]
    return [first + (last - first) * i / 4 for i in range(5)]


def _cmd_analyze(args, cfg: RunConfig) -> int:
    from . import figures
    out = Path(args.out)
    kind = args.kind
    report: dict
    if kind == "compression":
        curves = _mech.read_compression_csv(args.data)
        direction = args.direction or sorted(curves)[0]
        if direction not in curves:
            raise AnalysisError(
                f"no direction {direction!r} in {args.data}; "
                f"have {', '.join(sorted(curves))}")
        curve = curves[direction]
        levels = ([float(v) for v in args.levels.split(",")]
                  if args.levels else _default_levels(curve))
        moduli = _mech.segment_modulus(curve, levels)
        report = {
            "schema": "infoam-analysis/1",
            "kind": "compression",
            "direction": direction,
            "segment_modulus_pa": [[lv, m] for lv, m in moduli],
        }
        us, _ = curve.unloading
        if len(us) >= 2:
            report["dissipation_pct"] = _mech.dissipation_ratio(curve)
        csv_rows = [[lv, m] for lv, m in moduli]
        csv_header = ["strain", "modulus_pa"]
        figure = lambda p: figures.compression_figure(curve, moduli, p)
    elif kind == "force":
        trace = _mech.read_force_csv(args.data)
        fit = _mech.fit_maxwell(trace, force_unit=args.unit)
        report = {
            "schema": "infoam-analysis/1",
            "kind": "force",
            "k0": fit.k0,
            "k1": fit.k1,
            "tau1": fit.tau1 if fit.tau1_identifiable else None,
            "tau1_identifiable": fit.tau1_identifiable,
            "f_max": fit.f_max,
            "force_unit": fit.force_unit,
            "residual_rms": fit.residual_rms,
            "steady_state_force": _mech.steady_state_force(fit),
            "settling_time_s": _mech.settling_time(fit),
            "k_sum": fit.k0 + fit.k1,
        }
        csv_rows = [[t, f, fit.force_at(t)] for t, f in trace]
        csv_header = ["t", "F", "fit"]
        figure = lambda p: figures.relaxation_figure(trace, fit, p)
    elif kind == "curvature":
        points = _mech.read_points_csv(args.data)
        if len(points) != 3:
            raise AnalysisError(
                f"curvature needs exactly 3 points, got {len(points)}")
        kappa = _mech.curvature_from_points(*points)
        report = {
            "schema": "infoam-analysis/1",
            "kind": "curvature",
            "curvature_per_mm": kappa,
            "radius_mm": (1.0 / kappa) if kappa > 0 else None,
        }
        csv_rows = [[x, y] for x, y in points]
        csv_header = ["x", "y"]
        figure = lambda p: figures.curvature_figure(points, kappa, p)
    elif kind == "powerlaw":
        points = _mech.read_powerlaw_csv(args.data)
        model = _mech.fit_powerlaw(points, p_s=args.solid,
                                   property_name=args.name)
        report = _mech.powerlaw_to_dict(model)
        csv_rows = [[phi, v, _mech.property_powerlaw(phi, model)]
                    for phi, v in points]
        csv_header = ["phi", "value", "fit"]
        figure = lambda p: figures.powerlaw_figure(points, model, p)
    else:  # pragma: no cover - argparse restricts choices
        raise AnalysisError(f"unknown analysis kind {kind!r}")

    if args.dry_run:
        _print(json.dumps(report, indent=2, sort_keys=True))
        return EXIT_OK
    write_document(out, report)
    _write_csv(_sibling(out, ".csv"), csv_header, csv_rows)
    if not args.no_figures:
        figure(_sibling(out, ".png"))
    _print(f"analysis written to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument wiring.

def _add_common(parser: argparse.ArgumentParser, suppress: bool) -> None:
    # Subparsers get SUPPRESS defaults so a flag given before the subcommand
    # is not clobbered by the subparser's namespace copy-back.
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    parser.add_argument("--set", action="append", metavar="KEY=VALUE",
                        dest="set", help="override a run default "
                        "(repeatable); see RunConfig for keys", **kw)
    parser.add_argument("--dry-run", action="store_true",
                        help="print the summary without writing files", **kw)
    parser.add_argument("--no-figures", action="store_true",
                        help="skip PNG rendering next to reports", **kw)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="infoam",
        description="Liquid-rope-coiling process tools: calibrate, plan "
                    "graded-porosity parts, emit and verify G-code, analyze "
                    "foam mechanics.")
    _add_common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="fit a calibration from line scans")
    p.add_argument("scans", help="CSV with header H,alpha,V_F,W,dx,d")
    p.add_argument("--out", default="calibration.json")
    _add_common(p, suppress=True)
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("part", help="write a built-in demonstrator part spec")
    p.add_argument("kind", choices=BUILTIN_KINDS)
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="override a part parameter (repeatable)")
    p.add_argument("--out", default="part.json")
    _add_common(p, suppress=True)
    p.set_defaults(func=_cmd_part)

    p = sub.add_parser("plan", help="plan layers for a part spec")
    p.add_argument("part", help="part JSON (infoam-part/1)")
    p.add_argument("calib", help="calibration JSON (infoam-calib/1)")
    p.add_argument("--out", default="plan.json")
    _add_common(p, suppress=True)
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("gcode", help="emit G-code for a plan")
    p.add_argument("plan", help="plan JSON (infoam-plan/1)")
    p.add_argument("--out", default="out.gcode")
    _add_common(p, suppress=True)
    p.set_defaults(func=_cmd_gcode)

    p = sub.add_parser("verify", help="volume-account a G-code file "
                                      "against its plan")
    p.add_argument("gcode", help="G-code file to check")
    p.add_argument("plan", help="plan JSON it was emitted from")
    p.add_argument("calib", help="calibration JSON (provides G and d)")
    p.add_argument("--out", default="verify.json")
    _add_common(p, suppress=True)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("predict", help="evaluate a fitted property power law")
    p.add_argument("phi", type=float, help="porosity in percent")
    p.add_argument("model", help="power-law JSON (infoam-powerlaw/1)")
    p.add_argument("--out", default=None)
    _add_common(p, suppress=True)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("analyze", help="analyze experiment records")
    p.add_argument("kind",
                   choices=("compression", "force", "curvature", "powerlaw"))
    p.add_argument("data", help="input CSV (format depends on kind)")
    p.add_argument("--out", default="analysis.json")
    p.add_argument("--levels", default=None,
                   help="comma-separated strain levels (compression)")
    p.add_argument("--direction", default=None,
                   help="curve direction tag to analyze (compression)")
    p.add_argument("--unit", default="N", choices=("N", "gf"),
                   help="force unit tag (force)")
    p.add_argument("--solid", type=float, default=1.0,
                   help="solid reference value p_s (powerlaw)")
    p.add_argument("--name", default="property",
                   help="property name (powerlaw)")
    _add_common(p, suppress=True)
    p.set_defaults(func=_cmd_analyze)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.set)
        return args.func(args, cfg)
    except VerificationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except _INFEASIBLE_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except _DATA_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except InfoamError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
