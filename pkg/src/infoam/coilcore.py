"""Closed-form geometry of the circular coiling pattern and its porosity.

All lengths are millimetres, angles radians, porosity percent.  The key
quantities:

    R_c   coil radius, set by the nozzle height
    W     pattern width, W = 2*R_c + d
    N     coil density: coils laid per outer coil diameter W
    h_c   coil-row height, modelled as a tilted rounded rectangle
    G     extruded filament length per radian of screw rotation (mm/rad)
    alpha screw rotation per mm of printhead travel (rad/mm)

``G*alpha`` is the dimensionless extruded-length-per-travel ratio; every
formula here depends on G and alpha only through that product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InfeasibleTargetError, OverExtrusionError

__all__ = [
    "ProcessParams",
    "CoilPattern",
    "PorosityTarget",
    "coil_width",
    "spacing_from_n",
    "n_from_spacing",
    "n_from_extrusion",
    "stacking_angle",
    "coil_height",
    "coil_pattern",
    "porosity_estimate",
    "porosity_for_alpha",
    "solve_alpha_for_porosity",
    "feasible_phi_interval",
    "density_from_porosity",
    "porosity_from_density",
]


@dataclass(frozen=True)
class ProcessParams:
    """User-settable printer state for one deposition condition.

    h           nozzle height above the deposition surface (mm)
    alpha       extrusion multiplier: screw rotation per mm travelled (rad/mm)
    v_f         printhead speed (mm/s)
    d           nozzle diameter (mm)
    temperature nozzle temperature (degC)
    """

    h: float
    alpha: float
    v_f: float
    d: float = 0.4
    temperature: float = 230.0

    def __post_init__(self):
        if self.h < 0:
            raise ValueError(f"nozzle height must be >= 0, got {self.h}")
        if self.alpha < 0:
            raise ValueError(f"extrusion multiplier must be >= 0, got {self.alpha}")
        if self.v_f <= 0:
            raise ValueError(f"printhead speed must be > 0, got {self.v_f}")
        if self.d <= 0:
            raise ValueError(f"nozzle diameter must be > 0, got {self.d}")

    @property
    def rotational_speed(self) -> float:
        """Screw rotational speed alpha*V_F (rad/s)."""
        return self.alpha * self.v_f


@dataclass(frozen=True)
class CoilPattern:
    """Derived coil geometry for one deposition condition.

    r_c    coil radius (mm)
    w      pattern width 2*R_c + d (mm)
    n      coil density (coils per outer coil diameter, dimensionless)
    theta  stacking angle arctan(N*d/W) (rad)
    h_c    coil-row height (mm), within [d, W + d)
    """

    r_c: float
    w: float
    n: float
    theta: float
    h_c: float


@dataclass(frozen=True)
class PorosityTarget:
    """Void fraction target in percent, 0 <= phi < 100."""

    phi: float

    def __post_init__(self):
        if not 0.0 <= self.phi < 100.0:
            raise ValueError(f"porosity must be in [0, 100), got {self.phi}")


def coil_width(r_c: float, d: float) -> float:
    """Pattern width W = 2*R_c + d (mm)."""
    if r_c < 0:
        raise ValueError(f"coil radius must be >= 0, got {r_c}")
    if d <= 0:
        raise ValueError(f"nozzle diameter must be > 0, got {d}")
    return 2.0 * r_c + d


def spacing_from_n(w: float, n: float, d: float) -> float:
    """Coil-to-coil distance implied by a coil density: dx = sqrt(W^2/N^2 + d^2)."""
    if w <= 0 or d <= 0 or n <= 0:
        raise ValueError("w, n, d must all be > 0")
    return math.sqrt(w * w / (n * n) + d * d)


def n_from_spacing(w: float, dx: float, d: float) -> float:
    """Coil density from a measured coil spacing: N = sqrt(W^2 / (dx^2 - d^2)).

    Raises MeasurementError when dx <= d: coils closer than the rope width
    cannot be resolved (and the formula would divide by zero).
    """
    from .errors import MeasurementError

    if w < 0 or d <= 0:
        raise ValueError("w must be >= 0 and d > 0")
    if dx <= d:
        raise MeasurementError(
            f"coil spacing dx={dx} must exceed the rope width d={d}")
    return math.sqrt(w * w / (dx * dx - d * d))


def n_from_extrusion(alpha: float, w: float, r_c: float, g: float) -> float:
    """Coil density from the extrusion ratio: N = G*alpha*W / (2*pi*R_c).

    Moving a distance W extrudes G*alpha*W of filament; dividing by the coil
    circumference 2*pi*R_c counts the coils laid within that width.
    """
    if r_c <= 0:
        raise ValueError(f"coil radius must be > 0, got {r_c}")
    if alpha < 0 or w < 0 or g < 0:
        raise ValueError("alpha, w, g must be >= 0")
    return g * alpha * w / (2.0 * math.pi * r_c)


def stacking_angle(w: float, n: float, d: float) -> float:
    """Stacking angle theta = arctan(N*d / W) of the tilted coil stack (rad)."""
    if w <= 0 or d <= 0 or n < 0:
        raise ValueError("w, d must be > 0 and n >= 0")
    return math.atan2(n * d, w)


def coil_height(w: float, n: float, d: float) -> float:
    """Coil-row height h_c = W*sin(theta) + (1 - sin(theta))*d (mm).

    h_c grows from d (flat, N=0) towards W as the stack tilts upright.
    """
    theta = stacking_angle(w, n, d)
    s = math.sin(theta)
    return w * s + (1.0 - s) * d


def coil_pattern(alpha: float, r_c: float, d: float, g: float) -> CoilPattern:
    """Full coil geometry for an extrusion multiplier at a given coil radius."""
    w = coil_width(r_c, d)
    if r_c <= 0:
        raise ValueError(f"coil radius must be > 0, got {r_c}")
    n = n_from_extrusion(alpha, w, r_c, g)
    theta = stacking_angle(w, n, d)
    return CoilPattern(r_c=r_c, w=w, n=n, theta=theta, h_c=coil_height(w, n, d))


def _porosity_raw(alpha, g, d, w, h_c):
    # porosity_estimate without the sign guard (the solver needs to
    # evaluate past the over-extrusion boundary).
    return 100.0 * (1.0 - g * alpha * math.pi * d * d / (4.0 * w * h_c))


def porosity_estimate(alpha: float, g: float, d: float, w: float, h_c: float) -> float:
    """Porosity percent: 100*(1 - G*alpha*pi*d^2 / (4*W*h_c)).

    Extruded volume per unit travel (a rope of diameter d, length G*alpha)
    divided by the spanned volume per unit travel (a bar W wide, h_c tall).
    h_c must be consistent with alpha; use porosity_for_alpha or
    solve_alpha_for_porosity for the coupled computation.
    """
    if w <= 0 or h_c <= 0 or d <= 0:
        raise ValueError("w, h_c, d must be > 0")
    if alpha < 0 or g < 0:
        raise ValueError("alpha, g must be >= 0")
    phi = _porosity_raw(alpha, g, d, w, h_c)
    if phi < 0:
        raise OverExtrusionError(
            f"extruded volume exceeds spanned volume (phi={phi:.3f}%): "
            f"alpha={alpha}, W={w}, h_c={h_c}")
    return phi


def porosity_for_alpha(alpha: float, r_c: float, d: float, g: float) -> float:
    """Porosity of the self-consistent pattern produced by alpha at radius R_c."""
    pat = coil_pattern(alpha, r_c, d, g)
    return porosity_estimate(alpha, g, d, pat.w, pat.h_c)


def _phi_of_alpha(alpha, k, c2, w, d):
    # phi(alpha) with h_c folded in; k = G*pi*d^2/(4*W), c2 = d/W * dN/dalpha.
    t = c2 * alpha
    s = t / math.hypot(1.0, t)
    h = d + (w - d) * s
    return 100.0 * (1.0 - k * alpha / h), h


def solve_alpha_for_porosity(
    phi: float,
    r_c: float,
    d: float,
    g: float,
    n_min: float | None = None,
    h_c_max: float | None = None,
    tol: float = 1e-12,
    max_iter: int = 100,
) -> tuple[float, CoilPattern]:
    """Invert the porosity estimate: find alpha giving the target phi at R_c.

    The coupled map alpha -> N -> theta -> h_c -> phi is strictly decreasing,
    so the root is unique.  Solved by damped Newton with an analytic
    derivative, falling back to bisection inside a maintained bracket;
    converges to |phi(alpha) - phi| <= tol (porosity points).

    Optional regime bounds make the solution printable, not just algebraic:
    n_min rejects patterns sparser than n_min coils per diameter, h_c_max
    rejects stacks at or above the nozzle clearance.  Violations raise
    InfeasibleTargetError carrying the feasible porosity interval.
    """
    if not 0.0 <= phi <= 100.0:
        raise ValueError(f"porosity target must be in [0, 100], got {phi}")
    if r_c <= 0:
        raise ValueError(f"coil radius must be > 0, got {r_c}")
    if d <= 0 or g <= 0:
        raise ValueError("d and g must be > 0")

    w = coil_width(r_c, d)
    k = g * math.pi * d * d / (4.0 * w)
    c2 = g * d / (2.0 * math.pi * r_c)  # d(N*d/W)/dalpha

    if phi == 100.0:
        alpha = 0.0
    else:
        v = 1.0 - phi / 100.0
        lo, f_lo = 0.0, -v * d            # f(alpha) = k*alpha - v*h_c(alpha)
        hi = v * w / k                    # h_c < W  =>  f(hi) > 0
        alpha = hi
        for _ in range(max_iter):
            cur, h = _phi_of_alpha(alpha, k, c2, w, d)
            err = cur - phi
            if abs(err) <= tol:
                break
            if err > 0:       # porosity still too high -> alpha too small
                lo = alpha
            else:
                hi = alpha
            # Newton step on f(alpha) = k*alpha - v*h_c(alpha)
            t = c2 * alpha
            u = math.hypot(1.0, t)
            ds = c2 / (u * u * u)         # d(sin theta)/dalpha
            fprime = k - v * (w - d) * ds
            f = k * alpha - v * h
            if fprime > 0:
                step = alpha - f / fprime
            else:
                step = lo + 0.5 * (hi - lo)
            if not (lo < step < hi):
                step = lo + 0.5 * (hi - lo)
            alpha = step

    pat = coil_pattern(alpha, r_c, d, g)
    # the N = n_min endpoint is reachable, so give the connectivity check
    # 1e-9 relative slack: a root found to tol can land an ulp under n_min
    if (n_min is not None and pat.n < n_min * (1.0 - 1e-9)) or (
            h_c_max is not None and pat.h_c >= h_c_max):
        p_lo, p_hi = feasible_phi_interval(
            r_c, d, g, n_min=n_min if n_min is not None else 0.0,
            h_c_max=h_c_max)
        raise InfeasibleTargetError(phi, p_lo, p_hi)
    return alpha, pat


def feasible_phi_interval(
    r_c: float,
    d: float,
    g: float,
    n_min: float = 1.0,
    h_c_max: float | None = None,
) -> tuple[float, float]:
    """Porosity interval reachable at radius R_c under the regime bounds.

    The upper end comes from the sparsest connected pattern (N = n_min); the
    lower end from the tallest stack clearing the nozzle (h_c < h_c_max), or
    0 when the stack can never reach that height (h_c < W always).
    """
    w = coil_width(r_c, d)
    if h_c_max is not None and h_c_max <= d:
        raise InfeasibleTargetError(
            float("nan"), float("nan"), float("nan"),
            detail=f"clearance {h_c_max} mm leaves no room above the rope "
                   f"width d={d}")
    alpha_lo = n_min * 2.0 * math.pi * r_c / (g * w) if n_min > 0 else 0.0
    phi_hi = _porosity_raw(alpha_lo, g, d, w, coil_height(w, n_min, d)) \
        if n_min > 0 else 100.0

    if h_c_max is None or h_c_max >= w:
        phi_lo = 0.0
    else:
        s = (h_c_max - d) / (w - d)       # sin(theta) at the clearance height
        n_max = w * s / (d * math.sqrt(1.0 - s * s))
        alpha_hi = n_max * 2.0 * math.pi * r_c / (g * w)
        phi_lo = max(0.0, _porosity_raw(alpha_hi, g, d, w, h_c_max))
    if phi_lo > phi_hi:
        raise InfeasibleTargetError(
            float("nan"), phi_lo, phi_hi,
            detail="regime bounds leave no feasible porosity")
    return phi_lo, phi_hi


def density_from_porosity(phi: float, rho_bulk: float) -> float:
    """Structure density rho_bulk*(1 - phi/100) (same unit as rho_bulk)."""
    if not 0.0 <= phi <= 100.0:
        raise ValueError(f"porosity must be in [0, 100], got {phi}")
    if rho_bulk <= 0:
        raise ValueError(f"bulk density must be > 0, got {rho_bulk}")
    # clamp: rho_bulk*100/100 can land one ulp above rho_bulk at phi = 0
    return min(rho_bulk * (100.0 - phi) / 100.0, rho_bulk)


def porosity_from_density(rho: float, rho_bulk: float) -> float:
    """Exact inverse of density_from_porosity: phi = 100*(1 - rho/rho_bulk)."""
    if rho_bulk <= 0:
        raise ValueError(f"bulk density must be > 0, got {rho_bulk}")
    if not 0.0 <= rho <= rho_bulk:
        raise ValueError(f"density must be in [0, {rho_bulk}], got {rho}")
    return 100.0 * (1.0 - rho / rho_bulk)
