"""Graded-porosity toolpath planning: shapes, part specs, layer plans,
and toolpath flattening."""

from .parts import (
    BUILTIN_KINDS,
    PartDefaults,
    PartSpec,
    Region,
    Slab,
    builtin_part,
    load_part,
    part_from_dict,
    part_to_dict,
    save_part,
)
from .plan import (
    CoilPass,
    DensePass,
    LayerPlan,
    PartPlan,
    RegimeDecision,
    check_coiling_regime,
    load_plan,
    plan_from_dict,
    plan_part,
    plan_report,
    plan_to_dict,
    save_plan,
)
from .shapes import (
    Annulus,
    Disc,
    Rect,
    fill_path,
    shape_from_dict,
    shape_to_dict,
    shapes_overlap,
)
from .toolpath import COIL, PLOT, TRAVEL, Segment, Toolpath, build_toolpath

__all__ = [
    "Annulus",
    "BUILTIN_KINDS",
    "COIL",
    "CoilPass",
    "DensePass",
    "Disc",
    "LayerPlan",
    "PLOT",
    "PartDefaults",
    "PartPlan",
    "PartSpec",
    "Rect",
    "Region",
    "RegimeDecision",
    "Segment",
    "Slab",
    "TRAVEL",
    "Toolpath",
    "build_toolpath",
    "builtin_part",
    "check_coiling_regime",
    "fill_path",
    "load_part",
    "load_plan",
    "part_from_dict",
    "part_to_dict",
    "plan_from_dict",
    "plan_part",
    "plan_report",
    "plan_to_dict",
    "save_part",
    "save_plan",
    "shape_from_dict",
    "shape_to_dict",
    "shapes_overlap",
]
