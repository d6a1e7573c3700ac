"""Declarative graded-porosity part descriptions and the built-in demonstrators.

A part is a stack of slabs (design strata with a thickness); each slab lists
non-overlapping regions carrying a target porosity and a role.  Regions with
role "scaffold" are realized as coiled foam; every other role marks a zone
densified by plotting.  A slab with no scaffold region at all is printed as
plain dense layers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from ..errors import PlanError
from ..jsonio import load_document, schema_tag, write_document
from .shapes import (
    Annulus,
    Disc,
    Rect,
    Shape,
    shape_from_dict,
    shape_to_dict,
    shapes_overlap,
)

__all__ = [
    "ROLES",
    "Region",
    "Slab",
    "PartDefaults",
    "PartSpec",
    "builtin_part",
    "part_to_dict",
    "part_from_dict",
    "save_part",
    "load_part",
    "BUILTIN_KINDS",
]

SCHEMA_FAMILY = "infoam-part"
SCHEMA_MAJOR = 1

ROLES = ("scaffold", "spacer", "substrate", "skin")

_TOL = 1e-6


@dataclass(frozen=True)
class Region:
    """A planar zone with a porosity target.

    role "scaffold" means coiled foam; "spacer"/"substrate"/"skin" are
    plotted-dense zones (this is how phi = 0 is representable at all: mark
    the region with a non-scaffold role).
    """

    shape: Shape
    phi: float
    role: str = "scaffold"

    def __post_init__(self):
        if not 0.0 <= self.phi < 100.0:
            raise PlanError(f"region porosity must be in [0, 100), got {self.phi}")
        if self.role not in ROLES:
            raise PlanError(f"unknown role {self.role!r}; expected one of {ROLES}")
        if self.role == "scaffold" and self.phi == 0.0:
            raise PlanError(
                "a zero-porosity region cannot be coiled; give it a dense role")


@dataclass(frozen=True)
class Slab:
    """One design stratum: thickness (mm) and its regions."""

    thickness: float
    regions: tuple[Region, ...]

    def __post_init__(self):
        if self.thickness <= 0:
            raise PlanError(f"slab thickness must be > 0, got {self.thickness}")
        if not self.regions:
            raise PlanError("slab has no regions")

    @property
    def has_scaffold(self) -> bool:
        return any(r.role == "scaffold" for r in self.regions)


@dataclass(frozen=True)
class PartDefaults:
    """Process defaults the planner applies part-wide.

    target_h pins the nozzle height (mm); None lets the planner pick the
    smallest calibrated height whose feasible porosity interval covers every
    scaffold target.  kappa scales the nozzle-clearance guard h_c < kappa*H.
    """

    d: float = 0.4
    temperature: float = 230.0
    v_f: float = 20.0
    target_h: float | None = None
    kappa: float = 1.0
    rho_bulk: float = 900.0
    alternate_directions: bool = False

    def __post_init__(self):
        if self.d <= 0 or self.v_f <= 0 or self.rho_bulk <= 0:
            raise PlanError("d, v_f, rho_bulk must all be > 0")
        if not 0 < self.kappa <= 1.0:
            raise PlanError(f"kappa must be in (0, 1], got {self.kappa}")
        if self.target_h is not None and self.target_h <= 0:
            raise PlanError(f"target_h must be > 0, got {self.target_h}")


@dataclass(frozen=True)
class PartSpec:
    """Validated part description.

    bbox is (x, y, z) extents in mm with the part at the origin corner.
    Slab thicknesses must sum to the bbox height; regions must sit inside
    the bbox footprint and must not overlap within a slab.
    """

    name: str
    bbox: tuple[float, float, float]
    slabs: tuple[Slab, ...]
    defaults: PartDefaults = field(default_factory=PartDefaults)

    def __post_init__(self):
        bx, by, bz = self.bbox
        if not (bx > 0 and by > 0 and bz > 0):
            raise PlanError(f"bounding box must be positive, got {self.bbox}")
        if self.slabs:
            total = sum(s.thickness for s in self.slabs)
            if abs(total - bz) > _TOL:
                raise PlanError(
                    f"slab thicknesses sum to {total} mm but the bounding box "
                    f"is {bz} mm tall")
        for si, slab in enumerate(self.slabs):
            for ri, region in enumerate(slab.regions):
                x0, y0, x1, y1 = region.shape.bbox
                if (x0 < -_TOL or y0 < -_TOL
                        or x1 > bx + _TOL or y1 > by + _TOL):
                    raise PlanError(
                        f"slab {si} region {ri} extends outside the "
                        f"{bx}x{by} mm footprint")
            for ri in range(len(slab.regions)):
                for rj in range(ri + 1, len(slab.regions)):
                    if shapes_overlap(slab.regions[ri].shape,
                                      slab.regions[rj].shape):
                        raise PlanError(
                            f"slab {si}: regions {ri} and {rj} overlap")

    def scaffold_porosities(self) -> list[float]:
        return sorted({
            r.phi for slab in self.slabs for r in slab.regions
            if r.role == "scaffold"
        })


def part_to_dict(spec: PartSpec) -> dict:
    d = spec.defaults
    return {
        "schema": schema_tag(SCHEMA_FAMILY, SCHEMA_MAJOR),
        "name": spec.name,
        "bbox": list(spec.bbox),
        "defaults": {
            "d": d.d,
            "temperature": d.temperature,
            "v_f": d.v_f,
            "target_h": d.target_h,
            "kappa": d.kappa,
            "rho_bulk": d.rho_bulk,
            "alternate_directions": d.alternate_directions,
        },
        "layers": [
            {
                "thickness": slab.thickness,
                "regions": [
                    {"shape": shape_to_dict(r.shape), "phi": r.phi, "role": r.role}
                    for r in slab.regions
                ],
            }
            for slab in spec.slabs
        ],
    }


def part_from_dict(doc: dict) -> PartSpec:
    try:
        dd = doc.get("defaults", {})
        defaults = PartDefaults(
            d=dd.get("d", 0.4),
            temperature=dd.get("temperature", 230.0),
            v_f=dd.get("v_f", 20.0),
            target_h=dd.get("target_h"),
            kappa=dd.get("kappa", 1.0),
            rho_bulk=dd.get("rho_bulk", 900.0),
            alternate_directions=dd.get("alternate_directions", False),
        )
        slabs = tuple(
            Slab(
                thickness=layer["thickness"],
                regions=tuple(
                    Region(
                        shape=shape_from_dict(reg["shape"]),
                        phi=reg["phi"],
                        role=reg.get("role", "scaffold"),
                    )
                    for reg in layer["regions"]
                ),
            )
            for layer in doc.get("layers", [])
        )
        bbox = doc["bbox"]
        return PartSpec(
            name=doc.get("name", "part"),
            bbox=(bbox[0], bbox[1], bbox[2]),
            slabs=slabs,
            defaults=defaults,
        )
    except (KeyError, IndexError, TypeError) as exc:
        raise PlanError(f"malformed part document: {exc}") from exc


def save_part(path: str | Path, spec: PartSpec) -> None:
    write_document(path, part_to_dict(spec))


def load_part(path: str | Path) -> PartSpec:
    return part_from_dict(load_document(path, SCHEMA_FAMILY, SCHEMA_MAJOR))


# ---------------------------------------------------------------------------
# Built-in demonstrator parts.


def _cube(size: float = 25.0, phi: float = 85.0) -> PartSpec:
    return PartSpec(
        name=f"cube-{size:g}-phi{phi:g}",
        bbox=(size, size, size),
        slabs=(Slab(size, (Region(Rect(0, 0, size, size), phi, "scaffold"),)),),
    )


def _strip_positions(length: float, width: float, count: int) -> list[float]:
    gap = (length - count * width) / (count + 1)
    if gap <= 0:
        raise PlanError(
            f"{count} strips of {width} mm do not fit in {length} mm")
    return [gap + i * (width + gap) for i in range(count)]


def _body_with_transverse_spacers(length, width, phi, spacer_phi,
                                  spacer_width, n_spacers):
    """Regions for a slab: spacer strips across the width, scaffold between."""
    xs = _strip_positions(length, spacer_width, n_spacers)
    regions: list[Region] = []
    cursor = 0.0
    for x in xs:
        if x > cursor:
            regions.append(Region(Rect(cursor, 0, x, width), phi, "scaffold"))
        regions.append(
            Region(Rect(x, 0, x + spacer_width, width), spacer_phi, "spacer"))
        cursor = x + spacer_width
    if cursor < length:
        regions.append(Region(Rect(cursor, 0, length, width), phi, "scaffold"))
    return tuple(regions)


def _bending(length: float = 75.0, width: float = 15.0, height: float = 8.0,
             phi: float = 83.8, substrate: float = 1.0,
             spacer_phi: float | None = None, spacer_width: float = 5.0,
             n_spacers: int = 4) -> PartSpec:
    if not 0 < substrate < height:
        raise PlanError(f"substrate {substrate} must be inside (0, {height})")
    body = height - substrate
    substrate_slab = Slab(
        substrate, (Region(Rect(0, 0, length, width), 0.0, "substrate"),))
    if spacer_phi is None:
        body_regions = (Region(Rect(0, 0, length, width), phi, "scaffold"),)
        name = f"bending-phi{phi:g}"
    else:
        body_regions = _body_with_transverse_spacers(
            length, width, phi, spacer_phi, spacer_width, n_spacers)
        name = f"bending-spacers-phi{phi:g}"
    return PartSpec(
        name=name,
        bbox=(length, width, height),
        slabs=(substrate_slab, Slab(body, body_regions)),
    )


def _twisting(length: float = 75.0, width: float = 15.0, height: float = 8.0,
              phi: float = 83.8, spacer_phi: float = 15.0, cell: float = 5.0,
              period: int = 5, substrate: float = 1.0) -> PartSpec:
    """Diagonal spacer stripes built as staircases of cell x cell squares.

    Cell (i, j) is a spacer when (i + j) % period == 0, which lays the dense
    zones along 45-degree lines across the part.
    """
    nx, ny = round(length / cell), round(width / cell)
    if abs(nx * cell - length) > _TOL or abs(ny * cell - width) > _TOL:
        raise PlanError(
            f"cell size {cell} must divide both {length} and {width}")
    if period < 2:
        raise PlanError(f"stripe period must be >= 2, got {period}")
    regions: list[Region] = []
    for j in range(ny):
        y0, y1 = j * cell, (j + 1) * cell
        cursor = 0.0
        for i in range(nx):
            if (i + j) % period == 0:
                x0 = i * cell
                if x0 > cursor:
                    regions.append(
                        Region(Rect(cursor, y0, x0, y1), phi, "scaffold"))
                regions.append(
                    Region(Rect(x0, y0, x0 + cell, y1), spacer_phi, "spacer"))
                cursor = x0 + cell
        if cursor < length:
            regions.append(Region(Rect(cursor, y0, length, y1), phi, "scaffold"))
    if not 0 < substrate < height:
        raise PlanError(f"substrate {substrate} must be inside (0, {height})")
    return PartSpec(
        name=f"twisting-phi{phi:g}",
        bbox=(length, width, height),
        slabs=(
            Slab(substrate,
                 (Region(Rect(0, 0, length, width), 0.0, "substrate"),)),
            Slab(height - substrate, tuple(regions)),
        ),
    )


def _contraction(diameter: float = 25.0, ring: float = 4.0,
                 phi_high: float = 85.0, phi_low: float = 15.0,
                 t_high: float = 3.0, t_low: float = 1.0,
                 pairs: int = 3) -> PartSpec:
    """Stack of porous discs ringed by a dense annulus, separated by dense discs."""
    if pairs < 1:
        raise PlanError(f"need >= 1 disc pair, got {pairs}")
    r_out = diameter / 2.0
    if not 0 < ring < r_out:
        raise PlanError(f"ring width {ring} must be inside (0, {r_out})")
    c = r_out
    porous = Slab(t_high, (
        Region(Disc(c, c, r_out - ring), phi_high, "scaffold"),
        Region(Annulus(c, c, r_out - ring, r_out), phi_low, "skin"),
    ))
    dense = Slab(t_low, (Region(Disc(c, c, r_out), phi_low, "spacer"),))
    slabs: list[Slab] = []
    for _ in range(pairs):
        slabs.extend([porous, dense])
    return PartSpec(
        name=f"contraction-phi{phi_high:g}",
        bbox=(diameter, diameter, pairs * (t_high + t_low)),
        slabs=tuple(slabs),
    )


def _screw(length: float = 75.0, width: float = 15.0, height: float = 8.0,
           phi: float = 81.0, spacer_phi: float = 15.0, strip: float = 5.0,
           n_spacers: int = 4, substrate: float = 1.0) -> PartSpec:
    """Two dense-spacer sections at right angles to each other in sequence:
    a longitudinal strip in the lower body, transverse strips in the upper."""
    if not 0 < substrate < height:
        raise PlanError(f"substrate {substrate} must be inside (0, {height})")
    if strip >= width:
        raise PlanError(f"strip width {strip} must be below part width {width}")
    body = (height - substrate) / 2.0
    y0 = (width - strip) / 2.0
    longitudinal = (
        Region(Rect(0, 0, length, y0), phi, "scaffold"),
        Region(Rect(0, y0, length, y0 + strip), spacer_phi, "spacer"),
        Region(Rect(0, y0 + strip, length, width), phi, "scaffold"),
    )
    transverse = _body_with_transverse_spacers(
        length, width, phi, spacer_phi, strip, n_spacers)
    return PartSpec(
        name=f"screw-phi{phi:g}",
        bbox=(length, width, height),
        slabs=(
            Slab(substrate,
                 (Region(Rect(0, 0, length, width), 0.0, "substrate"),)),
            Slab(body, longitudinal),
            Slab(body, transverse),
        ),
    )


_BUILTINS = {
    "cube": _cube,
    "bending": _bending,
    "bending_spacers": lambda **kw: _bending(spacer_phi=kw.pop("spacer_phi", 15.0), **kw),
    "twisting": _twisting,
    "contraction": _contraction,
    "screw": _screw,
}

BUILTIN_KINDS = tuple(sorted(_BUILTINS))


def builtin_part(kind: str, **params) -> PartSpec:
    """Demonstrator part specs by name; params override per-kind defaults."""
    try:
        make = _BUILTINS[kind]
    except KeyError:
        raise PlanError(
            f"unknown part kind {kind!r}; available: {', '.join(BUILTIN_KINDS)}"
        ) from None
    try:
        return make(**params)
    except TypeError as exc:
        raise PlanError(f"bad parameters for {kind}: {exc}") from exc
