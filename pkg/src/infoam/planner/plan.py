"""Layer-by-layer planning: porosity targets to coil and dense passes.

The whole part uses one scaffold condition (nozzle height H, extrusion
multiplier alpha) solved for the highest scaffold porosity, so every coil
layer has the same height and the z accounting is exact.  Regions wanting
less porosity than the scaffold get a dense plotting pass after the coils,
sized by the missing solid volume:

    coil volume per region  = (1 - phi_s/100) * area * h
    fill volume per region  = (phi_s - phi_r)/100 * area * h

which sums to exactly (1 - phi_r/100) * area * h, the solid volume a region
of porosity phi_r must hold.  Slabs with no scaffold region are printed as
plain dense layers of height d.

Each pass carries its exact total screw rotation; the toolpath distributes
it along the path, so row-count rounding inside a region never changes the
deposited volume.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .. import calib as _calib
from .. import coilcore
from ..coilcore import CoilPattern
from ..errors import InfeasibleTargetError, PlanError
from ..jsonio import load_document, schema_tag, write_document
from .parts import PartSpec, Region
from .shapes import fill_path

__all__ = [
    "CoilPass",
    "DensePass",
    "LayerPlan",
    "PartPlan",
    "RegimeDecision",
    "check_coiling_regime",
    "plan_part",
    "plan_report",
    "plan_to_dict",
    "plan_from_dict",
    "save_plan",
    "load_plan",
]

SCHEMA_FAMILY = "infoam-plan"
SCHEMA_MAJOR = 1


@dataclass(frozen=True)
class CoilPass:
    """One coiled serpentine over a region.

    z is the nozzle height during the pass (layer base + H); rotation is the
    pass's total screw rotation in rad, exact for the region's area at the
    scaffold porosity.
    """

    path: tuple[tuple[float, float], ...]
    z: float
    h: float
    alpha: float
    v_f: float
    rotation: float
    area: float
    phi: float
    pattern: CoilPattern


@dataclass(frozen=True)
class DensePass:
    """One plotting pass, nozzle lowered to the layer base + d."""

    path: tuple[tuple[float, float], ...]
    z: float
    v_f: float
    rotation: float
    area: float
    phi: float
    fill_volume: float


@dataclass(frozen=True)
class LayerPlan:
    """One physical layer: coil passes first, then dense passes.

    regions keeps (area, phi) per region for the volume-accounting check in
    the G-code verifier; kind is "coil" for scaffold layers (height h_c) and
    "dense" for plotted layers (height d).
    """

    index: int
    z_base: float
    height: float
    kind: str
    coil_passes: tuple[CoilPass, ...]
    dense_passes: tuple[DensePass, ...]
    regions: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class PartPlan:
    """Complete plan for a part plus the process constants it was built with."""

    name: str
    layers: tuple[LayerPlan, ...]
    g: float
    d: float
    v_f: float
    temperature: float
    rho_bulk: float
    kappa: float
    h: float | None = None
    alpha: float | None = None
    pattern: CoilPattern | None = None
    layer_height: float | None = None


@dataclass(frozen=True)
class RegimeDecision:
    """Outcome of the coiling-regime guard with the binding constraint."""

    ok: bool
    constraint: str | None
    h: float
    kappa: float
    n: float
    h_c: float


def check_coiling_regime(h: float, pattern: CoilPattern,
                         kappa: float = 1.0) -> RegimeDecision:
    """Reject patterns that stack to the nozzle or are too sparse to connect.

    Violations: h_c >= kappa*H (the coil stack reaches the nozzle and the
    pattern degenerates into a pile) and N < 1 (less than one coil per coil
    diameter cannot form a connected row).
    """
    if h <= 0:
        raise PlanError(f"nozzle height must be > 0, got {h}")
    if pattern.n < 1.0:
        return RegimeDecision(False, "connectivity", h, kappa,
                              pattern.n, pattern.h_c)
    if pattern.h_c >= kappa * h:
        return RegimeDecision(False, "clearance", h, kappa,
                              pattern.n, pattern.h_c)
    return RegimeDecision(True, None, h, kappa, pattern.n, pattern.h_c)


def _round_half_up(x: float) -> int:
    return max(1, math.floor(x + 0.5))


def _reference_rc(model: _calib.CalibrationModel, h: float) -> float:
    # Radius at the calibration's reference rotational speed (correction 1).
    return _calib.predict_rc(
        h, model.reference_speed, 1.0, model)


def _solve_condition(model: _calib.CalibrationModel, h: float, phi_s: float,
                     v_f: float, kappa: float) -> tuple[float, CoilPattern, float]:
    """Self-consistent (alpha, pattern, R_c) for the scaffold porosity at H.

    R_c depends on the rotational speed alpha*V_F through the shear
    correction while alpha depends on R_c through the porosity inversion, so
    the pair is solved by fixed-point iteration, started at the reference
    speed where the correction is 1.
    """
    alpha = model.reference_speed / v_f
    for _ in range(80):
        r_c = _calib.predict_rc(h, alpha, v_f, model)
        new_alpha, pattern = coilcore.solve_alpha_for_porosity(
            phi_s, r_c, model.d, model.g, n_min=1.0, h_c_max=kappa * h)
        if abs(new_alpha - alpha) <= 1e-12 * max(1.0, abs(new_alpha)):
            return new_alpha, pattern, r_c
        alpha = new_alpha
    raise PlanError(
        f"extrusion/shear coupling did not converge at H={h}, phi={phi_s}")


def _select_height(spec: PartSpec, model: _calib.CalibrationModel,
                   phis: list[float]) -> float:
    """Part-wide nozzle height: target_h when the part pins one, else the
    smallest calibrated height whose feasible porosity interval covers
    every scaffold target."""
    defaults = spec.defaults
    if defaults.target_h is not None:
        return defaults.target_h

    line = model.rc_line
    candidates = sorted(
        h for h in model.rc_means if line.h_min <= h <= line.h_max)
    if not candidates:
        raise PlanError("calibration has no usable heights inside its "
                        "validity interval")
    tried: list[str] = []
    for h in candidates:
        r_c = _reference_rc(model, h)
        lo, hi = coilcore.feasible_phi_interval(
            r_c, model.d, model.g, n_min=1.0, h_c_max=defaults.kappa * h)
        if all(lo <= phi <= hi for phi in phis):
            return h
        tried.append(f"H={h:g}: [{lo:.3f}, {hi:.3f}]")
    raise InfeasibleTargetError(
        max(phis), float("nan"), float("nan"),
        detail="no calibrated height covers the scaffold targets "
               f"{phis}; feasible intervals were " + "; ".join(tried))


def _coil_volume_rate(g: float, d: float) -> float:
    """Extruded rope volume per screw radian (mm^3/rad)."""
    return g * math.pi * d * d / 4.0


def _fill_axis(index: int, alternate: bool) -> str:
    return "y" if alternate and index % 2 == 1 else "x"


def _dense_pass(region: Region, volume: float, z: float, v_f: float,
                d: float, g: float, axis: str) -> DensePass:
    if region.shape.min_feature < d:
        raise PlanError(
            f"region of minimum feature {region.shape.min_feature:.3f} mm is "
            f"thinner than the {d} mm plotting bead")
    path = tuple(fill_path(region.shape, d, axis))
    rotation = volume / _coil_volume_rate(g, d)
    return DensePass(path=path, z=z, v_f=v_f, rotation=rotation,
                     area=region.shape.area, phi=region.phi,
                     fill_volume=volume)


def plan_part(spec: PartSpec, model: _calib.CalibrationModel) -> PartPlan:
    """Plan every layer of a part against a calibration model.

    Raises InfeasibleTargetError when no nozzle height reaches the scaffold
    porosity, and PlanError for geometric misfits (regions thinner than the
    coil width W or the plotting bead d, porosities above the scaffold's).
    """
    defaults = spec.defaults
    if abs(defaults.d - model.d) > 1e-9:
        raise PlanError(
            f"part expects nozzle d={defaults.d} mm but the calibration "
            f"was made with d={model.d} mm")
    meta = dict(g=model.g, d=model.d, v_f=defaults.v_f,
                temperature=defaults.temperature, rho_bulk=defaults.rho_bulk,
                kappa=defaults.kappa)
    if not spec.slabs:
        return PartPlan(name=spec.name, layers=(), **meta)

    phis = spec.scaffold_porosities()
    h = alpha = pattern = h_layer = None
    if phis:
        phi_s = max(phis)
        h = _select_height(spec, model, phis)
        alpha, pattern, _ = _solve_condition(
            model, h, phi_s, defaults.v_f, defaults.kappa)
        decision = check_coiling_regime(h, pattern, defaults.kappa)
        if not decision.ok:
            raise PlanError(
                f"scaffold pattern violates the coiling regime at H={h}: "
                f"{decision.constraint} (N={decision.n:.3f}, "
                f"h_c={decision.h_c:.3f} mm)")
        h_layer = pattern.h_c

    layers: list[LayerPlan] = []
    z = 0.0
    index = 0
    for slab in spec.slabs:
        if slab.has_scaffold:
            count = _round_half_up(slab.thickness / h_layer)
            for _ in range(count):
                axis = _fill_axis(index, defaults.alternate_directions)
                coil: list[CoilPass] = []
                dense: list[DensePass] = []
                for region in slab.regions:
                    if region.phi > phi_s + 1e-9:
                        raise PlanError(
                            f"region porosity {region.phi}% exceeds the "
                            f"scaffold porosity {phi_s}%; adding material can "
                            f"only lower porosity")
                    if region.shape.min_feature < pattern.w:
                        raise PlanError(
                            f"region of minimum feature "
                            f"{region.shape.min_feature:.3f} mm is thinner "
                            f"than the coil width W={pattern.w:.3f} mm")
                    area = region.shape.area
                    coil.append(CoilPass(
                        path=tuple(fill_path(region.shape, pattern.w, axis)),
                        z=z + h, h=h, alpha=alpha, v_f=defaults.v_f,
                        rotation=alpha * area / pattern.w,
                        area=area, phi=phi_s, pattern=pattern))
                    fill_frac = (phi_s - region.phi) / 100.0
                    if fill_frac > 1e-12:
                        dense.append(_dense_pass(
                            region, fill_frac * area * h_layer,
                            z + model.d, defaults.v_f, model.d, model.g, axis))
                layers.append(LayerPlan(
                    index=index, z_base=z, height=h_layer, kind="coil",
                    coil_passes=tuple(coil), dense_passes=tuple(dense),
                    regions=tuple((r.shape.area, r.phi) for r in slab.regions)))
                z += h_layer
                index += 1
        else:
            count = _round_half_up(slab.thickness / model.d)
            for _ in range(count):
                axis = _fill_axis(index, defaults.alternate_directions)
                dense = [
                    _dense_pass(
                        region,
                        (1.0 - region.phi / 100.0) * region.shape.area * model.d,
                        z + model.d, defaults.v_f, model.d, model.g, axis)
                    for region in slab.regions
                ]
                layers.append(LayerPlan(
                    index=index, z_base=z, height=model.d, kind="dense",
                    coil_passes=(), dense_passes=tuple(dense),
                    regions=tuple((r.shape.area, r.phi) for r in slab.regions)))
                z += model.d
                index += 1

    return PartPlan(name=spec.name, layers=tuple(layers),
                    h=h, alpha=alpha, pattern=pattern, layer_height=h_layer,
                    **meta)


def _path_length(path: tuple[tuple[float, float], ...]) -> float:
    return sum(
        math.hypot(path[i + 1][0] - path[i][0], path[i + 1][1] - path[i][1])
        for i in range(len(path) - 1))


def plan_report(plan: PartPlan) -> dict:
    """Machine-readable accounting summary per layer and in total.

    Masses are in grams (mm^3 times kg/m^3 is 1e-6 g); the time estimate is
    extrusion path length over the printhead speed, travels excluded.
    """
    vol_per_rad = _coil_volume_rate(plan.g, plan.d)
    rows = []
    for layer in plan.layers:
        rotation = sum(p.rotation for p in layer.coil_passes) + \
            sum(p.rotation for p in layer.dense_passes)
        volume = rotation * vol_per_rad
        spanned = sum(area for area, _ in layer.regions) * layer.height
        length = sum(_path_length(p.path) for p in layer.coil_passes) + \
            sum(_path_length(p.path) for p in layer.dense_passes)
        rows.append({
            "index": layer.index,
            "z_base": layer.z_base,
            "height": layer.height,
            "kind": layer.kind,
            "extruded_volume_mm3": volume,
            "extruded_length_mm": rotation * plan.g,
            "path_length_mm": length,
            "mean_porosity_pct": 100.0 * (1.0 - volume / spanned),
            "mass_g": volume * plan.rho_bulk * 1e-6,
        })
    total_volume = sum(r["extruded_volume_mm3"] for r in rows)
    total_spanned = sum(
        sum(area for area, _ in layer.regions) * layer.height
        for layer in plan.layers)
    total_path = sum(r["path_length_mm"] for r in rows)
    return {
        "name": plan.name,
        "layers": rows,
        "totals": {
            "n_layers": len(rows),
            "height_mm": sum(r["height"] for r in rows),
            "extruded_volume_mm3": total_volume,
            "extruded_length_mm": sum(r["extruded_length_mm"] for r in rows),
            "path_length_mm": total_path,
            "mass_g": total_volume * plan.rho_bulk * 1e-6,
            "mean_porosity_pct": (
                100.0 * (1.0 - total_volume / total_spanned)
                if total_spanned > 0 else 0.0),
            "print_time_s": total_path / plan.v_f if plan.v_f > 0 else 0.0,
        },
    }


def _pattern_to_dict(pattern: CoilPattern | None):
    if pattern is None:
        return None
    return {"r_c": pattern.r_c, "w": pattern.w, "n": pattern.n,
            "theta": pattern.theta, "h_c": pattern.h_c}


def _pattern_from_dict(doc) -> CoilPattern | None:
    if doc is None:
        return None
    return CoilPattern(r_c=doc["r_c"], w=doc["w"], n=doc["n"],
                       theta=doc["theta"], h_c=doc["h_c"])


def plan_to_dict(plan: PartPlan) -> dict:
    return {
        "schema": schema_tag(SCHEMA_FAMILY, SCHEMA_MAJOR),
        "name": plan.name,
        "g": plan.g,
        "d": plan.d,
        "v_f": plan.v_f,
        "temperature": plan.temperature,
        "rho_bulk": plan.rho_bulk,
        "kappa": plan.kappa,
        "h": plan.h,
        "alpha": plan.alpha,
        "pattern": _pattern_to_dict(plan.pattern),
        "layer_height": plan.layer_height,
        "layers": [
            {
                "index": layer.index,
                "z_base": layer.z_base,
                "height": layer.height,
                "kind": layer.kind,
                "regions": [[area, phi] for area, phi in layer.regions],
                "coil_passes": [
                    {
                        "path": [[x, y] for x, y in p.path],
                        "z": p.z, "h": p.h, "alpha": p.alpha, "v_f": p.v_f,
                        "rotation": p.rotation, "area": p.area, "phi": p.phi,
                        "pattern": _pattern_to_dict(p.pattern),
                    }
                    for p in layer.coil_passes
                ],
                "dense_passes": [
                    {
                        "path": [[x, y] for x, y in p.path],
                        "z": p.z, "v_f": p.v_f, "rotation": p.rotation,
                        "area": p.area, "phi": p.phi,
                        "fill_volume": p.fill_volume,
                    }
                    for p in layer.dense_passes
                ],
            }
            for layer in plan.layers
        ],
    }


def plan_from_dict(doc: dict) -> PartPlan:
    try:
        layers = tuple(
            LayerPlan(
                index=ld["index"],
                z_base=ld["z_base"],
                height=ld["height"],
                kind=ld["kind"],
                regions=tuple((a, p) for a, p in ld["regions"]),
                coil_passes=tuple(
                    CoilPass(
                        path=tuple((x, y) for x, y in p["path"]),
                        z=p["z"], h=p["h"], alpha=p["alpha"], v_f=p["v_f"],
                        rotation=p["rotation"], area=p["area"], phi=p["phi"],
                        pattern=_pattern_from_dict(p["pattern"]),
                    )
                    for p in ld["coil_passes"]
                ),
                dense_passes=tuple(
                    DensePass(
                        path=tuple((x, y) for x, y in p["path"]),
                        z=p["z"], v_f=p["v_f"], rotation=p["rotation"],
                        area=p["area"], phi=p["phi"],
                        fill_volume=p["fill_volume"],
                    )
                    for p in ld["dense_passes"]
                ),
            )
            for ld in doc["layers"]
        )
        return PartPlan(
            name=doc.get("name", "part"),
            layers=layers,
            g=doc["g"], d=doc["d"], v_f=doc["v_f"],
            temperature=doc.get("temperature", 230.0),
            rho_bulk=doc.get("rho_bulk", 900.0),
            kappa=doc.get("kappa", 1.0),
            h=doc.get("h"), alpha=doc.get("alpha"),
            pattern=_pattern_from_dict(doc.get("pattern")),
            layer_height=doc.get("layer_height"),
        )
    except (KeyError, IndexError, TypeError) as exc:
        raise PlanError(f"malformed plan document: {exc}") from exc


def save_plan(path: str | Path, plan: PartPlan) -> None:
    write_document(path, plan_to_dict(plan))


def load_plan(path: str | Path) -> PartPlan:
    return plan_from_dict(load_document(path, SCHEMA_FAMILY, SCHEMA_MAJOR))
