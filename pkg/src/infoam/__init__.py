"""Porous-by-construction extrusion printing with liquid rope coiling.

The package turns a porosity target into machine instructions and back:

  coilcore  coil geometry and the porosity inversion
  calib     fitting the process model from line-scan measurements
  planner   part specs, layer plans, toolpaths
  gcode     emission, parsing, and independent volume verification
  mech      foam mechanics: moduli, damping, relaxation, curvature
  figures   matplotlib renderings of the reports
  cli       the `infoam` command

Lengths are mm, angles rad, forces N, porosities percent throughout.
"""

from .calib import (
    CalibrationModel,
    DEFAULT_VALIDITY,
    Exclusion,
    FitDiagnostics,
    LineScanRecord,
    RcLine,
    ShearFit,
    calibrate,
    fit_g,
    fit_rc_vs_height,
    fit_shear_thinning,
    load_calibration,
    predict_rc,
    read_scan_csv,
    reduce_scan,
    save_calibration,
)
from .coilcore import (
    CoilPattern,
    PorosityTarget,
    ProcessParams,
    coil_height,
    coil_pattern,
    coil_width,
    density_from_porosity,
    feasible_phi_interval,
    n_from_extrusion,
    n_from_spacing,
    porosity_estimate,
    porosity_for_alpha,
    porosity_from_density,
    solve_alpha_for_porosity,
    spacing_from_n,
    stacking_angle,
)
from .data import builtin_calibration, cube_measurements
from .errors import (
    AnalysisError,
    CalibrationError,
    ExtrapolationError,
    GcodeError,
    GcodeParseError,
    InfeasibleTargetError,
    InfoamError,
    MeasurementError,
    OverExtrusionError,
    PlanError,
    SchemaError,
    VerificationError,
)
from .gcode import (
    GcodeProfile,
    Move,
    ParsedProgram,
    emit,
    parse,
    reemit,
    verify_porosity,
    z_band_totals,
)
from .mech import (
    CompressionCurve,
    MaxwellFit,
    PowerLawModel,
    curvature_from_points,
    dissipation_ratio,
    fit_maxwell,
    fit_powerlaw,
    load_powerlaw,
    property_powerlaw,
    save_powerlaw,
    segment_modulus,
    settling_time,
    shore_a_modulus,
    steady_state_force,
)
from .planner import (
    Annulus,
    BUILTIN_KINDS,
    CoilPass,
    DensePass,
    Disc,
    LayerPlan,
    PartDefaults,
    PartPlan,
    PartSpec,
    Rect,
    Region,
    RegimeDecision,
    Slab,
    Toolpath,
    build_toolpath,
    builtin_part,
    check_coiling_regime,
    load_part,
    load_plan,
    plan_part,
    plan_report,
    save_part,
    save_plan,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "InfoamError", "MeasurementError", "OverExtrusionError",
    "InfeasibleTargetError", "CalibrationError", "ExtrapolationError",
    "PlanError", "GcodeError", "GcodeParseError", "VerificationError",
    "AnalysisError", "SchemaError",
    # coil geometry
    "ProcessParams", "CoilPattern", "PorosityTarget", "coil_width",
    "spacing_from_n", "n_from_spacing", "n_from_extrusion", "stacking_angle",
    "coil_height", "coil_pattern", "porosity_estimate", "porosity_for_alpha",
    "solve_alpha_for_porosity", "feasible_phi_interval",
    "density_from_porosity", "porosity_from_density",
    # calibration
    "LineScanRecord", "RcLine", "ShearFit", "CalibrationModel",
    "FitDiagnostics", "Exclusion", "reduce_scan", "fit_rc_vs_height", "fit_g",
    "fit_shear_thinning", "predict_rc", "calibrate", "read_scan_csv",
    "save_calibration", "load_calibration", "DEFAULT_VALIDITY",
    # planning
    "Rect", "Disc", "Annulus", "Region", "Slab", "PartSpec", "PartDefaults",
    "builtin_part", "BUILTIN_KINDS", "save_part", "load_part", "CoilPass",
    "DensePass", "LayerPlan", "PartPlan", "RegimeDecision",
    "check_coiling_regime", "plan_part", "plan_report", "save_plan",
    "load_plan", "Toolpath", "build_toolpath",
    # gcode
    "GcodeProfile", "Move", "ParsedProgram", "emit", "parse", "reemit",
    "z_band_totals", "verify_porosity",
    # mechanics
    "PowerLawModel", "CompressionCurve", "MaxwellFit", "property_powerlaw",
    "fit_powerlaw", "segment_modulus", "dissipation_ratio", "fit_maxwell",
    "settling_time", "steady_state_force", "curvature_from_points",
    "shore_a_modulus", "save_powerlaw", "load_powerlaw",
    # shipped data
    "builtin_calibration", "cube_measurements",
]
