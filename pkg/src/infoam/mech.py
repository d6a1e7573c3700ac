"""Foam mechanics: porosity power laws, segment modulus, hysteresis
dissipation, stress relaxation, and bending curvature.

All analyses follow the same measurement conventions as the process model:
porosity in percent, strain dimensionless, stress in Pa, forces tagged with
their unit (newton or gram-force), time in seconds, lengths in mm.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares

from .errors import AnalysisError
from .jsonio import load_document, schema_tag, write_document

__all__ = [
    "PowerLawModel",
    "CompressionCurve",
    "MaxwellFit",
    "property_powerlaw",
    "fit_powerlaw",
    "segment_modulus",
    "dissipation_ratio",
    "fit_maxwell",
    "settling_time",
    "steady_state_force",
    "curvature_from_points",
    "shore_a_modulus",
    "read_compression_csv",
    "read_force_csv",
    "read_points_csv",
    "read_powerlaw_csv",
    "powerlaw_to_dict",
    "powerlaw_from_dict",
    "save_powerlaw",
    "load_powerlaw",
]

POWERLAW_SCHEMA_FAMILY = "infoam-powerlaw"
POWERLAW_SCHEMA_MAJOR = 1

# Points in the local window the segment-modulus quadratic is fitted to.
MODULUS_WINDOW = 12

# Fraction of the steady-state force defining "settled".
SETTLING_FRACTION = 0.05


@dataclass(frozen=True)
class PowerLawModel:
    """Property vs porosity: p = p_s * c * (1 - phi/100)^n.

    p_s is the solid (bulk) reference value in the property's own unit;
    c and n are dimensionless.  The density law is the special case
    c = 1, n = 1 with p_s the bulk density.
    """

    c: float
    n: float
    p_s: float
    property_name: str = "property"
    r_squared: float = 1.0
    n_points: int = 0

    def __post_init__(self):
        if self.c <= 0:
            raise AnalysisError(f"power-law coefficient must be > 0, got {self.c}")
        if self.p_s <= 0:
            raise AnalysisError(f"solid reference must be > 0, got {self.p_s}")


@dataclass(frozen=True)
class CompressionCurve:
    """Loading/unloading stress-strain record for one direction.

    strain and stress are equal-length series; samples [0:split) are the
    loading branch (strictly increasing strain), [split:] the unloading
    branch.  split == len(strain) means no unloading data.
    """

    strain: tuple[float, ...]
    stress: tuple[float, ...]
    direction: str = "z"
    split: int | None = None

    def __post_init__(self):
        if len(self.strain) != len(self.stress):
            raise AnalysisError(
                f"strain and stress lengths differ: "
                f"{len(self.strain)} vs {len(self.stress)}")
        if len(self.strain) < 2:
            raise AnalysisError("need at least 2 samples")
        split = len(self.strain) if self.split is None else self.split
        if not 2 <= split <= len(self.strain):
            raise AnalysisError(f"bad branch split index {self.split}")
        object.__setattr__(self, "split", split)
        loading = self.strain[:split]
        if any(b <= a for a, b in zip(loading, loading[1:])):
            raise AnalysisError("loading strain must be strictly increasing")

    @property
    def loading(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        return self.strain[:self.split], self.stress[:self.split]

    @property
    def unloading(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        return self.strain[self.split:], self.stress[self.split:]


@dataclass(frozen=True)
class MaxwellFit:
    """One-term relaxation F(t) = (k0 + k1*exp(-t/tau1)) * f_max.

    force_unit tags f_max ("N" or "gf"); tau1_identifiable is False for
    traces with no decaying component (k1 = 0), where tau1 is reported as
    infinity.
    """

    k0: float
    k1: float
    tau1: float
    f_max: float
    force_unit: str = "N"
    residual_rms: float = 0.0
    tau1_identifiable: bool = True

    def __post_init__(self):
        if self.k0 <= 0:
            raise AnalysisError(f"k0 must be > 0, got {self.k0}")
        if self.k1 < 0:
            raise AnalysisError(f"k1 must be >= 0, got {self.k1}")
        if not self.tau1 > 0:
            raise AnalysisError(f"tau1 must be > 0, got {self.tau1}")

    def force_at(self, t: float) -> float:
        decay = math.exp(-t / self.tau1) if math.isfinite(self.tau1) else 1.0
        return (self.k0 + self.k1 * decay) * self.f_max


def property_powerlaw(phi: float, model: PowerLawModel) -> float:
    """Evaluate p_s * c * (1 - phi/100)^n at a porosity in percent."""
    if not 0.0 <= phi <= 100.0:
        raise AnalysisError(f"porosity must be in [0, 100], got {phi}")
    rel = 1.0 - phi / 100.0
    if rel == 0.0 and model.n < 0:
        raise AnalysisError(
            f"relative density 0 with negative exponent {model.n}")
    return model.p_s * model.c * rel ** model.n


def fit_powerlaw(points: Sequence[tuple[float, float]], p_s: float,
                 property_name: str = "property") -> PowerLawModel:
    """Fit c and n by least squares in log-log space.

    points are (phi percent, property value); values must be positive and
    phi < 100 (log of relative density).  Needs >= 3 points.
    """
    if len(points) < 3:
        raise AnalysisError(f"need >= 3 points to fit, got {len(points)}")
    if p_s <= 0:
        raise AnalysisError(f"solid reference must be > 0, got {p_s}")
    xs, ys = [], []
    for phi, value in points:
        if not 0.0 <= phi < 100.0:
            raise AnalysisError(f"porosity must be in [0, 100), got {phi}")
        if value <= 0:
            raise AnalysisError(f"property values must be > 0, got {value}")
        xs.append(math.log(1.0 - phi / 100.0))
        ys.append(math.log(value / p_s))
    n_pts = len(xs)
    mean_x = sum(xs) / n_pts
    mean_y = sum(ys) / n_pts
    sxx = sum((x - mean_x) ** 2 for x in xs)
    if sxx == 0:
        raise AnalysisError("all porosities equal; exponent is unidentifiable")
    n = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys)) / sxx
    log_c = mean_y - n * mean_x
    ss_res = sum((y - (log_c + n * x)) ** 2 for x, y in zip(xs, ys))
    ss_tot = sum((y - mean_y) ** 2 for y in ys)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return PowerLawModel(c=math.exp(log_c), n=n, p_s=p_s,
                         property_name=property_name, r_squared=r2,
                         n_points=n_pts)


def segment_modulus(curve: CompressionCurve,
                    strain_levels: Sequence[float]) -> list[tuple[float, float]]:
    """Local stiffness at each strain level from a windowed quadratic.

    At each level the last MODULUS_WINDOW loading samples at or below the
    level are fitted with a quadratic (least squares); the modulus is the
    fitted curve's derivative evaluated at the level.  Exact for stress
    curves that are polynomials of degree <= 2.
    """
    strain, stress = curve.loading
    out: list[tuple[float, float]] = []
    for level in strain_levels:
        if level > strain[-1] or level < strain[0]:
            raise AnalysisError(
                f"strain level {level} outside loading range "
                f"[{strain[0]}, {strain[-1]}]")
        # samples preceding the level (inclusive: strain is strictly increasing)
        idx = sum(1 for s in strain if s <= level)
        if idx < MODULUS_WINDOW:
            raise AnalysisError(
                f"level {level} has only {idx} preceding samples; "
                f"need {MODULUS_WINDOW}")
        xs = np.asarray(strain[idx - MODULUS_WINDOW:idx])
        ys = np.asarray(stress[idx - MODULUS_WINDOW:idx])
        # centre the window for a well-conditioned normal system
        x0 = xs.mean()
        coeffs = np.polynomial.polynomial.polyfit(xs - x0, ys, 2)
        modulus = coeffs[1] + 2.0 * coeffs[2] * (level - x0)
        out.append((level, float(modulus)))
    return out


def dissipation_ratio(curve: CompressionCurve) -> float:
    """Hysteresis loss in percent: loop area over loading area.

    Areas are trapezoidal over the strain range both branches share; the
    unloading branch is interpolated onto the loading grid when the grids
    differ.  0 means the branches coincide, 100 means the unloading branch
    returns no work.
    """
    l_strain, l_stress = curve.loading
    u_strain, u_stress = curve.unloading
    if len(u_strain) < 2:
        raise AnalysisError("no unloading branch recorded")
    u = sorted(zip(u_strain, u_stress))
    u_strain = [p[0] for p in u]
    u_stress = [p[1] for p in u]
    lo = max(l_strain[0], u_strain[0])
    hi = min(l_strain[-1], u_strain[-1])
    if hi <= lo:
        raise AnalysisError("loading and unloading branches share no strain range")

    grid = [s for s in l_strain if lo <= s <= hi]
    if grid[0] > lo:
        grid.insert(0, lo)
    if grid[-1] < hi:
        grid.append(hi)
    load_g = np.interp(grid, l_strain, l_stress)
    unload_g = np.interp(grid, u_strain, u_stress)
    area_load = float(np.trapezoid(load_g, grid))
    area_loop = float(np.trapezoid(load_g - unload_g, grid))
    if area_load <= 0:
        raise AnalysisError("loading branch encloses no positive area")
    return 100.0 * area_loop / area_load


def fit_maxwell(trace: Sequence[tuple[float, float]],
                force_unit: str = "N") -> MaxwellFit:
    """Fit (k0, k1, tau1) to a relaxation trace starting at the force peak.

    trace rows are (seconds after the maximum force, force); the first
    sample defines f_max.  The optimizer is bounded nonlinear least squares
    multi-started over a decade grid of tau1 (single-exponential fits are
    multimodal in tau1), initialized on k0 + k1 = 1.
    """
    if len(trace) < 10:
        raise AnalysisError(f"need >= 10 samples, got {len(trace)}")
    t = np.asarray([p[0] for p in trace], dtype=float)
    f = np.asarray([p[1] for p in trace], dtype=float)
    if t[0] != 0.0:
        raise AnalysisError("trace must start at t=0 (the force maximum)")
    if np.any(np.diff(t) <= 0):
        raise AnalysisError("time must be strictly increasing")
    if np.any(f <= 0):
        raise AnalysisError("forces must be > 0")
    f_max = float(f[0])

    span = float(f.max() - f.min())
    if span <= 1e-12 * f_max:
        # nothing decays: k1 = 0 and tau1 drops out of the model
        return MaxwellFit(k0=1.0, k1=0.0, tau1=math.inf, f_max=f_max,
                          force_unit=force_unit, residual_rms=0.0,
                          tau1_identifiable=False)

    y = f / f_max
    k0_init = float(f[-1]) / f_max
    k1_init = max(1.0 - k0_init, 1e-6)
    horizon = float(t[-1])

    def residuals(params):
        k0, k1, tau1 = params
        return (k0 + k1 * np.exp(-t / tau1)) - y

    best = None
    for tau_seed in (horizon / 100, horizon / 30, horizon / 10,
                     horizon / 3, horizon, 3 * horizon):
        res = least_squares(
            residuals, x0=[k0_init, k1_init, tau_seed],
            bounds=([1e-12, 0.0, 1e-9], [np.inf, np.inf, np.inf]))
        if best is None or res.cost < best.cost:
            best = res
    if best is None or not best.success:
        raise AnalysisError("relaxation fit did not converge")
    k0, k1, tau1 = (float(v) for v in best.x)
    rms = float(np.sqrt(np.mean(residuals(best.x) ** 2))) * f_max
    return MaxwellFit(k0=k0, k1=k1, tau1=tau1, f_max=f_max,
                      force_unit=force_unit, residual_rms=rms,
                      tau1_identifiable=True)


def settling_time(fit: MaxwellFit) -> float:
    """Seconds after the peak until the force is within 5% of steady state.

    Closed form t_s = tau1 * ln(k1 / (0.05 * k0)) from
    0.05*k0 = k1*exp(-t_s/tau1); 0 when the decaying term never exceeds
    the 5% band (k1 <= 0.05*k0).
    """
    threshold = SETTLING_FRACTION * fit.k0
    if fit.k1 <= threshold:
        return 0.0
    if not math.isfinite(fit.tau1):
        raise AnalysisError("tau1 is not finite but k1 > 0; cannot settle")
    return fit.tau1 * math.log(fit.k1 / threshold)


def steady_state_force(fit: MaxwellFit) -> float:
    """Force the relaxation levels out at: k0 * f_max (same unit as f_max)."""
    return fit.k0 * fit.f_max


def curvature_from_points(p1: Sequence[float], p2: Sequence[float],
                          p3: Sequence[float]) -> float:
    """Curvature (1/mm) of the circle through three points (mm).

    Collinear points give 0 (a straight pose); coincident points are an
    error.  Symmetric in the three points, invariant under rigid motions,
    and scales as 1/s under uniform scaling by s.
    """
    ax, ay = p1[0], p1[1]
    bx, by = p2[0], p2[1]
    cx, cy = p3[0], p3[1]
    ab = math.hypot(bx - ax, by - ay)
    bc = math.hypot(cx - bx, cy - by)
    ca = math.hypot(ax - cx, ay - cy)
    if ab == 0.0 or bc == 0.0 or ca == 0.0:
        raise AnalysisError("curvature needs three distinct points")
    cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return 2.0 * abs(cross) / (ab * bc * ca)


def shore_a_modulus(shore_a: float) -> float:
    """Elastic modulus (Pa) from a Shore-A hardness reading.

    Standard durometer conversion E = 0.486 * exp(0.0345 * ShoreA) MPa,
    used as the solid reference for foam modulus power laws.
    """
    if not 0 < shore_a <= 100:
        raise AnalysisError(f"Shore-A must be in (0, 100], got {shore_a}")
    return 0.486 * math.exp(0.0345 * shore_a) * 1e6


# ---------------------------------------------------------------------------
# File formats.

def read_compression_csv(path: str | Path) -> dict[str, CompressionCurve]:
    """Load curves from CSV `strain,stress,direction,branch`, one curve per
    direction; branch is `loading` or `unloading` and loading rows must come
    first within a direction."""
    series: dict[str, dict[str, list[tuple[float, float]]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        need = {"strain", "stress", "direction", "branch"}
        have = set(reader.fieldnames or [])
        if not need <= have:
            raise AnalysisError(
                f"{path}: missing column(s) {', '.join(sorted(need - have))}")
        for lineno, row in enumerate(reader, start=2):
            branch = row["branch"].strip().lower()
            if branch not in ("loading", "unloading"):
                raise AnalysisError(
                    f"{path} line {lineno}: branch must be loading or "
                    f"unloading, got {row['branch']!r}")
            try:
                pair = (float(row["strain"]), float(row["stress"]))
            except ValueError as exc:
                raise AnalysisError(f"{path} line {lineno}: {exc}") from exc
            series.setdefault(row["direction"].strip(), {
                "loading": [], "unloading": []})[branch].append(pair)
    if not series:
        raise AnalysisError(f"{path}: no data rows")
    curves = {}
    for direction, branches in series.items():
        loading = branches["loading"]
        unloading = branches["unloading"]
        if not loading:
            raise AnalysisError(f"{path}: direction {direction} has no "
                                f"loading rows")
        strain = tuple(p[0] for p in loading + unloading)
        stress = tuple(p[1] for p in loading + unloading)
        curves[direction] = CompressionCurve(
            strain=strain, stress=stress, direction=direction,
            split=len(loading))
    return curves


def read_force_csv(path: str | Path) -> list[tuple[float, float]]:
    """Load a relaxation trace from CSV `t,F` (seconds, force)."""
    return _read_pairs(path, ("t", "F"))


def read_powerlaw_csv(path: str | Path) -> list[tuple[float, float]]:
    """Load (porosity percent, property value) points from CSV `phi,value`."""
    return _read_pairs(path, ("phi", "value"))


def read_points_csv(path: str | Path) -> list[tuple[float, float]]:
    """Load 2D points from CSV `x,y` (mm)."""
    return _read_pairs(path, ("x", "y"))


def _read_pairs(path, columns):
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        have = set(reader.fieldnames or [])
        missing = [c for c in columns if c not in have]
        if missing:
            raise AnalysisError(
                f"{path}: missing column(s) {', '.join(missing)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                rows.append(tuple(float(row[c]) for c in columns))
            except (TypeError, ValueError) as exc:
                raise AnalysisError(f"{path} line {lineno}: {exc}") from exc
    if not rows:
        raise AnalysisError(f"{path}: no data rows")
    return rows


def powerlaw_to_dict(model: PowerLawModel) -> dict:
    return {
        "schema": schema_tag(POWERLAW_SCHEMA_FAMILY, POWERLAW_SCHEMA_MAJOR),
        "c": model.c,
        "n": model.n,
        "p_s": model.p_s,
        "property": model.property_name,
        "r_squared": model.r_squared,
        "n_points": model.n_points,
    }


def powerlaw_from_dict(doc: dict) -> PowerLawModel:
    try:
        return PowerLawModel(
            c=doc["c"], n=doc["n"], p_s=doc["p_s"],
            property_name=doc.get("property", "property"),
            r_squared=doc.get("r_squared", 1.0),
            n_points=doc.get("n_points", 0),
        )
    except KeyError as exc:
        raise AnalysisError(f"malformed power-law document: missing {exc}") from exc


def save_powerlaw(path: str | Path, model: PowerLawModel) -> None:
    write_document(path, powerlaw_to_dict(model))


def load_powerlaw(path: str | Path) -> PowerLawModel:
    return powerlaw_from_dict(
        load_document(path, POWERLAW_SCHEMA_FAMILY, POWERLAW_SCHEMA_MAJOR))
