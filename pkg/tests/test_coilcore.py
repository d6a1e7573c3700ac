"""Coil geometry and porosity inversion against extended-precision oracles.

Frozen literals were computed once with mpmath at 40 significant digits
from the same closed forms, on exactly representable inputs.
"""

import math

import pytest

from infoam import coilcore
from infoam.errors import (
    InfeasibleTargetError,
    MeasurementError,
    OverExtrusionError,
)


def test_coil_width_is_diameter_plus_rope():
    assert coilcore.coil_width(1.5, 0.4) == 3.4
    assert coilcore.coil_width(0.0, 0.4) == 0.4


def test_coil_width_rejects_bad_inputs():
    with pytest.raises(ValueError):
        coilcore.coil_width(-0.1, 0.4)
    with pytest.raises(ValueError):
        coilcore.coil_width(1.0, 0.0)


def test_n_from_spacing_frozen_oracle():
    # mpmath: sqrt(4.4^2 / (1.2^2 - 0.4^2))
    assert coilcore.n_from_spacing(4.4, 1.2, 0.4) == pytest.approx(
        3.8890872965260113842, rel=1e-14)


def test_n_from_extrusion_frozen_oracle():
    # mpmath: 0.17*18*4.4 / (2*pi*2)
    assert coilcore.n_from_extrusion(18.0, 4.4, 2.0, 0.17) == pytest.approx(
        1.0714310768946394004, rel=1e-14)


def test_spacing_n_round_trip():
    for n in (0.5, 1.0, 3.3, 12.75):
        dx = coilcore.spacing_from_n(4.4, n, 0.4)
        assert coilcore.n_from_spacing(4.4, dx, 0.4) == pytest.approx(
            n, rel=1e-12)


def test_n_from_spacing_rejects_unresolvable_spacing():
    with pytest.raises(MeasurementError):
        coilcore.n_from_spacing(4.4, 0.4, 0.4)
    with pytest.raises(MeasurementError):
        coilcore.n_from_spacing(4.4, 0.39, 0.4)


def test_stacking_angle_frozen_oracle():
    # mpmath: atan(6.3*0.4 / 4.4)
    assert coilcore.stacking_angle(4.4, 6.3, 0.4) == pytest.approx(
        0.52012458751546946216, rel=1e-14)
    assert coilcore.stacking_angle(4.4, 0.0, 0.4) == 0.0


def test_coil_height_frozen_oracle():
    # mpmath: w*sin(theta) + (1 - sin(theta))*d at (4.4, 6.3, 0.4)
    assert coilcore.coil_height(4.4, 6.3, 0.4) == pytest.approx(
        2.3879530136905234903, rel=1e-14)


def test_coil_height_limits():
    # flat rope at n=0; approaches the pattern width as the stack tilts up
    assert coilcore.coil_height(4.4, 0.0, 0.4) == 0.4
    assert coilcore.coil_height(4.4, 1e9, 0.4) == pytest.approx(4.4, rel=1e-6)
    for n in (0.1, 1.0, 5.0, 50.0):
        h_c = coilcore.coil_height(4.4, n, 0.4)
        assert 0.4 < h_c < 4.4


def test_porosity_estimate_frozen_oracle():
    # mpmath: 100*(1 - 0.17*18*pi*0.4^2 / (4*4.4*2.0))
    assert coilcore.porosity_estimate(18.0, 0.17, 0.4, 4.4, 2.0) == \
        pytest.approx(95.630330218188742132, rel=1e-14)


def test_porosity_estimate_rejects_over_extrusion():
    with pytest.raises(OverExtrusionError):
        coilcore.porosity_estimate(2000.0, 0.17, 0.4, 4.4, 2.0)


def test_porosity_for_alpha_matches_manual_composition():
    alpha, r_c, d, g = 18.0, 2.5, 0.4, 0.17
    pat = coilcore.coil_pattern(alpha, r_c, d, g)
    assert coilcore.porosity_for_alpha(alpha, r_c, d, g) == \
        coilcore.porosity_estimate(alpha, g, d, pat.w, pat.h_c)


def test_coil_pattern_fields_are_consistent():
    pat = coilcore.coil_pattern(18.0, 2.5, 0.4, 0.17)
    assert pat.w == coilcore.coil_width(pat.r_c, 0.4)
    assert pat.n == coilcore.n_from_extrusion(18.0, pat.w, 2.5, 0.17)
    assert pat.theta == coilcore.stacking_angle(pat.w, pat.n, 0.4)
    assert pat.h_c == coilcore.coil_height(pat.w, pat.n, 0.4)


class TestSolveAlpha:
    R_C, D, G = 1.7, 0.4, 0.17  # radius at 4 mm height on the reference line

    def test_round_trip_identity(self):
        for phi in (5.0, 25.0, 46.0, 65.0, 85.0, 95.0, 99.0):
            alpha, pat = coilcore.solve_alpha_for_porosity(
                phi, self.R_C, self.D, self.G)
            back = coilcore.porosity_for_alpha(alpha, self.R_C, self.D, self.G)
            assert back == pytest.approx(phi, abs=1e-9)
            assert pat.h_c == coilcore.coil_height(pat.w, pat.n, self.D)

    def test_full_porosity_means_no_extrusion(self):
        alpha, pat = coilcore.solve_alpha_for_porosity(
            100.0, self.R_C, self.D, self.G)
        assert alpha == 0.0
        assert pat.n == 0.0
        assert pat.h_c == self.D

    def test_against_bisection_oracle(self):
        # independent scalar bisection on the same strictly-monotone map,
        # run to a 1e-12 bracket: the Newton path must land inside it
        phi = 85.0
        w = coilcore.coil_width(self.R_C, self.D)
        k = self.G * math.pi * self.D ** 2 / (4.0 * w)
        lo, hi = 0.0, (1.0 - phi / 100.0) * w / k
        while hi - lo > 1e-12:
            mid = 0.5 * (lo + hi)
            if coilcore.porosity_for_alpha(mid, self.R_C, self.D, self.G) > phi:
                lo = mid
            else:
                hi = mid
        alpha, _ = coilcore.solve_alpha_for_porosity(
            phi, self.R_C, self.D, self.G)
        assert lo - 1e-12 <= alpha <= hi + 1e-12

    def test_infeasible_above_connectivity_bound(self):
        # sparser than one coil per diameter would be needed
        lo, hi = coilcore.feasible_phi_interval(
            self.R_C, self.D, self.G, n_min=1.0)
        with pytest.raises(InfeasibleTargetError) as err:
            coilcore.solve_alpha_for_porosity(
                hi + 0.5, self.R_C, self.D, self.G, n_min=1.0)
        assert err.value.phi_max == pytest.approx(hi)
        assert err.value.phi_min <= err.value.phi_max

    def test_infeasible_below_clearance_bound(self):
        r_c, h = 0.9, 2.0  # radius at 2 mm height, clearance at the nozzle
        lo, hi = coilcore.feasible_phi_interval(
            r_c, self.D, self.G, n_min=1.0, h_c_max=h)
        assert lo > 0.0
        with pytest.raises(InfeasibleTargetError) as err:
            coilcore.solve_alpha_for_porosity(
                lo - 0.5, r_c, self.D, self.G, n_min=1.0, h_c_max=h)
        assert err.value.phi_min == pytest.approx(lo)

    def test_bad_targets_rejected(self):
        with pytest.raises(ValueError):
            coilcore.solve_alpha_for_porosity(-1.0, self.R_C, self.D, self.G)
        with pytest.raises(ValueError):
            coilcore.solve_alpha_for_porosity(100.5, self.R_C, self.D, self.G)
        with pytest.raises(ValueError):
            coilcore.solve_alpha_for_porosity(85.0, 0.0, self.D, self.G)


class TestFeasibleInterval:
    def test_bounds_are_attained_by_the_bound_patterns(self):
        r_c, d, g, h = 0.9, 0.4, 0.17, 2.0
        lo, hi = coilcore.feasible_phi_interval(r_c, d, g, n_min=1.0,
                                                h_c_max=h)
        w = coilcore.coil_width(r_c, d)
        # upper bound: the sparsest connected pattern
        alpha_lo = 2.0 * math.pi * r_c / (g * w)
        assert coilcore.porosity_for_alpha(alpha_lo, r_c, d, g) == \
            pytest.approx(hi, abs=1e-9)
        # interior targets solve cleanly
        for phi in (lo + 0.1, 0.5 * (lo + hi), hi - 0.1, hi):
            coilcore.solve_alpha_for_porosity(phi, r_c, d, g, n_min=1.0,
                                              h_c_max=h)

    def test_clearance_above_width_never_binds(self):
        r_c, d, g = 1.7, 0.4, 0.17
        w = coilcore.coil_width(r_c, d)
        lo, _ = coilcore.feasible_phi_interval(r_c, d, g, n_min=1.0,
                                               h_c_max=w + 1.0)
        assert lo == 0.0

    def test_degenerate_clearance_is_an_error(self):
        with pytest.raises(InfeasibleTargetError):
            coilcore.feasible_phi_interval(0.9, 0.4, 0.17, h_c_max=0.4)


def test_density_from_porosity_reference_value():
    # 89% porosity leaves 11% of the bulk 900 kg/m^3
    assert coilcore.density_from_porosity(89.0, 900.0) == 99.0


def test_density_porosity_round_trip():
    for phi in (0.0, 12.5, 46.0, 89.0, 100.0):
        rho = coilcore.density_from_porosity(phi, 900.0)
        assert coilcore.porosity_from_density(rho, 900.0) == \
            pytest.approx(phi, abs=1e-12)


def test_density_validation():
    with pytest.raises(ValueError):
        coilcore.density_from_porosity(101.0, 900.0)
    with pytest.raises(ValueError):
        coilcore.density_from_porosity(50.0, 0.0)
    with pytest.raises(ValueError):
        coilcore.porosity_from_density(901.0, 900.0)


def test_process_params_speed_and_validation():
    p = coilcore.ProcessParams(h=6.0, alpha=18.0, v_f=20.0)
    assert p.rotational_speed == 360.0
    assert p.d == 0.4 and p.temperature == 230.0
    with pytest.raises(ValueError):
        coilcore.ProcessParams(h=-1.0, alpha=18.0, v_f=20.0)
    with pytest.raises(ValueError):
        coilcore.ProcessParams(h=6.0, alpha=18.0, v_f=0.0)


def test_porosity_target_bounds():
    coilcore.PorosityTarget(0.0)
    coilcore.PorosityTarget(99.999)
    with pytest.raises(ValueError):
        coilcore.PorosityTarget(100.0)
    with pytest.raises(ValueError):
        coilcore.PorosityTarget(-0.1)
