"""Shared fixtures and forward-generation helpers for the test suite."""

from __future__ import annotations

import math
import random

import pytest

from infoam import builtin_calibration
from infoam.calib import LineScanRecord

# Ground truth behind most synthetic fixtures (mm, mm/rad).
TRUE_SLOPE = 0.4
TRUE_INTERCEPT = 0.1
TRUE_G = 0.17
NOZZLE_D = 0.4

HEIGHTS = (2.0, 4.0, 6.0, 8.0, 10.0, 15.0)
# Two extrusion conditions per height, both at 360 rad/s rotational speed.
CONDITIONS = ((18.0, 20.0), (36.0, 10.0))


def make_records(
    slope: float = TRUE_SLOPE,
    intercept: float = TRUE_INTERCEPT,
    g: float = TRUE_G,
    d: float = NOZZLE_D,
    heights=HEIGHTS,
    conditions=CONDITIONS,
    noise: float = 0.0,
    rng: random.Random | None = None,
    shear_a: float = 1.0,
    shear_exponent: float = 0.0,
) -> list[LineScanRecord]:
    """Forward-generate scan records from a known process model.

    W and dx are produced exactly from the coiling geometry; `noise` applies
    multiplicative Gaussian perturbation (sigma as a fraction) to the coil
    radius before building the measured quantities.  shear_a/shear_exponent
    generate speed-dependent radii R_c = a * (alpha*V_F)^exponent * line(H).
    """
    records = []
    for h in heights:
        for alpha, v_f in conditions:
            r_c = slope * h + intercept
            if shear_exponent != 0.0 or shear_a != 1.0:
                r_c = shear_a * (alpha * v_f) ** shear_exponent * r_c
            if noise:
                r_c *= 1.0 + rng.gauss(0.0, noise)
            w = 2.0 * r_c + d
            n = g * alpha * w / (2.0 * math.pi * r_c)
            dx = math.sqrt((w / n) ** 2 + d * d)
            records.append(LineScanRecord(
                h=h, alpha=alpha, v_f=v_f, w_measured=w, dx_measured=dx, d=d))
    return records


@pytest.fixture(scope="session")
def model():
    """The calibration fixture shipped inside the package."""
    return builtin_calibration()
