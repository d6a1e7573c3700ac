"""Accessors for the data files shipped inside the package.

Two fixtures travel with the library: a reference calibration for the
stock 0.4 mm nozzle machine, and the measured cube porosity matrix that
anchors the model's accuracy claim.
"""

from __future__ import annotations

import csv
from importlib.resources import as_file, files

from .calib import CalibrationModel, load_calibration
from .errors import MeasurementError

__all__ = ["builtin_calibration", "cube_measurements"]


def _resource(name: str):
    return files("infoam").joinpath("data").joinpath(name)


def builtin_calibration() -> CalibrationModel:
    """Reference calibration: R_c = 0.4*H + 0.1 mm on H in [2, 15] mm,
    G = 0.17 mm/rad, d = 0.4 mm, reference speed 360 rad/s."""
    with as_file(_resource("calibration.json")) as path:
        return load_calibration(path)


def cube_measurements() -> list[tuple[float, float, float]]:
    """Measured cube porosities as (H mm, N coils per dx, phi percent)."""
    rows: list[tuple[float, float, float]] = []
    with as_file(_resource("cube_porosity.csv")) as path:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            for lineno, row in enumerate(reader, start=2):
                try:
                    rows.append((float(row["H"]), float(row["N"]),
                                 float(row["phi_measured"])))
                except (KeyError, TypeError, ValueError) as exc:
                    raise MeasurementError(
                        f"cube_porosity.csv line {lineno}: {exc}") from exc
    if not rows:
        raise MeasurementError("cube_porosity.csv has no data rows")
    return rows
