"""Figure rendering for report commands.

Every report-producing CLI path writes a PNG next to its JSON/CSV output;
these helpers do the drawing.  The Agg backend is forced so rendering works
headless; figures are closed after saving to keep long batch runs flat in
memory.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

__all__ = [
    "calibration_figure",
    "plan_figure",
    "verify_figure",
    "compression_figure",
    "relaxation_figure",
    "curvature_figure",
    "powerlaw_figure",
]

_DPI = 130


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def calibration_figure(points: Sequence[tuple[float, float]],
                       slope: float, intercept: float,
                       g_points: Sequence[tuple[float, float]], g: float,
                       path: str | Path) -> Path:
    """Two panels: R_c vs H with the fitted line, and coil density vs the
    extrusion regressor with the fitted G slope."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    hs = [p[0] for p in points]
    rcs = [p[1] for p in points]
    ax1.plot(hs, rcs, "o", ms=4, label="scans")
    if hs:
        lo, hi = min(hs), max(hs)
        ax1.plot([lo, hi], [slope * lo + intercept, slope * hi + intercept],
                 "-", label=f"{slope:.3g}*H + {intercept:.3g}")
    ax1.set_xlabel("nozzle height H (mm)")
    ax1.set_ylabel("coil radius R_c (mm)")
    ax1.legend(fontsize=8)

    xs = [p[0] for p in g_points]
    ns = [p[1] for p in g_points]
    ax2.plot(xs, ns, "o", ms=4, label="scans")
    if xs:
        hi = max(xs)
        ax2.plot([0, hi], [0, g * hi], "-", label=f"G = {g:.4g} mm/rad")
    ax2.set_xlabel("alpha*W / (2*pi*R_c) (rad/mm)")
    ax2.set_ylabel("coil density N")
    ax2.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def plan_figure(report: Mapping, path: str | Path) -> Path:
    """Porosity and extruded volume per layer against height."""
    layers = report["layers"]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    z = [row["z_base"] + row["height"] / 2 for row in layers]
    phi = [row["mean_porosity_pct"] for row in layers]
    vol = [row["extruded_volume_mm3"] for row in layers]
    h = [row["height"] for row in layers]
    ax1.barh(z, phi, height=h, align="center", edgecolor="none")
    ax1.set_xlabel("layer mean porosity (%)")
    ax1.set_ylabel("z (mm)")
    ax1.set_xlim(0, 100)
    ax2.barh(z, vol, height=h, align="center", color="#cc7722",
             edgecolor="none")
    ax2.set_xlabel("extruded volume (mm^3)")
    ax2.set_ylabel("z (mm)")
    fig.suptitle(report.get("name", ""), fontsize=10)
    fig.tight_layout()
    return _save(fig, path)


def verify_figure(report: Mapping, path: str | Path) -> Path:
    """Planned vs reconstructed porosity per layer."""
    layers = report["layers"]
    idx = [row["index"] for row in layers]
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.plot(idx, [row["phi_plan"] for row in layers], "o-", ms=4,
            label="planned")
    ax.plot(idx, [row["phi_recon"] for row in layers], "x--", ms=5,
            label="from G-code")
    bad = [row for row in layers if not row["ok"]]
    if bad:
        ax.plot([row["index"] for row in bad],
                [row["phi_recon"] for row in bad], "rs", ms=9, mfc="none",
                label="out of tolerance")
    ax.set_xlabel("layer")
    ax.set_ylabel("porosity (%)")
    ax.legend(fontsize=8)
    ax.set_title("pass" if report.get("pass") else "FAIL", fontsize=10)
    fig.tight_layout()
    return _save(fig, path)


def compression_figure(curve, moduli: Sequence[tuple[float, float]],
                       path: str | Path) -> Path:
    """Stress-strain branches plus the segment-modulus profile."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    ls, lsig = curve.loading
    ax1.plot(ls, lsig, "-", label="loading")
    us, usig = curve.unloading
    if us:
        ax1.plot(us, usig, "--", label="unloading")
    ax1.set_xlabel("strain")
    ax1.set_ylabel("stress (Pa)")
    ax1.legend(fontsize=8)
    if moduli:
        ax2.plot([m[0] for m in moduli], [m[1] for m in moduli], "o-", ms=4)
    ax2.set_xlabel("strain level")
    ax2.set_ylabel("segment modulus (Pa)")
    fig.tight_layout()
    return _save(fig, path)


def relaxation_figure(trace: Sequence[tuple[float, float]], fit,
                      path: str | Path) -> Path:
    """Force trace with the fitted relaxation overlaid."""
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ts = [p[0] for p in trace]
    ax.plot(ts, [p[1] for p in trace], ".", ms=3, label="trace")
    ax.plot(ts, [fit.force_at(t) for t in ts], "-",
            label=f"k0={fit.k0:.3g}, k1={fit.k1:.3g}, tau1={fit.tau1:.3g}s")
    ax.set_xlabel("time after peak (s)")
    ax.set_ylabel(f"force ({fit.force_unit})")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def curvature_figure(points: Sequence[tuple[float, float]], curvature: float,
                     path: str | Path) -> Path:
    """The three sample points and, when curved, the fitted circle."""
    import math

    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    ax.plot(xs, ys, "o", ms=6)
    if curvature > 0:
        # circumcenter from the perpendicular bisector intersection
        (ax1, ay1), (bx, by), (cx, cy) = points[0], points[1], points[2]
        dd = 2 * (ax1 * (by - cy) + bx * (cy - ay1) + cx * (ay1 - by))
        ux = ((ax1 ** 2 + ay1 ** 2) * (by - cy) + (bx ** 2 + by ** 2) * (cy - ay1)
              + (cx ** 2 + cy ** 2) * (ay1 - by)) / dd
        uy = ((ax1 ** 2 + ay1 ** 2) * (cx - bx) + (bx ** 2 + by ** 2) * (ax1 - cx)
              + (cx ** 2 + cy ** 2) * (bx - ax1)) / dd
        r = 1.0 / curvature
        angles = [i * 2 * math.pi / 256 for i in range(257)]
        ax.plot([ux + r * math.cos(a) for a in angles],
                [uy + r * math.sin(a) for a in angles], "-", lw=1)
    ax.set_aspect("equal")
    ax.set_xlabel("x (mm)")
    ax.set_ylabel("y (mm)")
    ax.set_title(f"curvature {curvature:.4g} 1/mm", fontsize=10)
    fig.tight_layout()
    return _save(fig, path)


def powerlaw_figure(points: Sequence[tuple[float, float]], model,
                    path: str | Path) -> Path:
    """Property vs relative density in log-log with the fitted power law."""
    fig, ax = plt.subplots(figsize=(6, 3.6))
    rel = [1.0 - p[0] / 100.0 for p in points]
    vals = [p[1] for p in points]
    ax.loglog(rel, vals, "o", ms=4, label="data")
    lo, hi = min(rel), max(rel)
    grid = [lo * (hi / lo) ** (i / 63) for i in range(64)]
    ax.loglog(grid, [model.p_s * model.c * r ** model.n for r in grid], "-",
              label=f"C={model.c:.3g}, n={model.n:.3g}")
    ax.set_xlabel("relative density (1 - phi/100)")
    ax.set_ylabel(model.property_name)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)
