"""Critical lines and asymptotic validators.

The iid-REM magnetic transition line, the hierarchical magnetic transition
line and the secondary line, plus the log-log exponent fit used to verify
the small-field critical exponents.
"""
from __future__ import annotations

import math

import numpy as np

from .model import ConcaveHull, UnsupportedModelError
from . import hull as hull_mod
from . import pressure, solve
from .scalar import arcosh_half_exp


class InsufficientDataError(ValueError):
    """Exponent fit needs at least five positive points inside the window."""


def gamma_c_rem(beta: float, h: float) -> float:
    """Magnetic transition line of the iid REM:
    sqrt(arcosh(exp(Phi_REM)/2)^2 / beta^2 - h^2)."""
    if beta <= 0.0:
        raise ValueError("gamma_c_rem needs beta > 0")
    if h < 0.0:
        raise ValueError("h must be >= 0")
    arc = arcosh_half_exp(pressure.phi_rem(beta, h))
    val = (arc / beta) ** 2 - h * h
    # mathematically >= 0; clamp float dust near the h -> infinity asymptote
    return math.sqrt(max(val, 0.0))


def gamma_c_hier(hull: ConcaveHull, beta: float, h: float) -> float:
    """Hierarchical magnetic transition line:
    arcosh(exp(phi(beta, y(beta,h)))/2) / beta, with y(beta, 0) = 0."""
    if not hull.smooth:
        raise UnsupportedModelError(
            "gamma_c_hier requires continuously differentiable concave A"
        )
    if beta <= 0.0:
        raise ValueError("gamma_c_hier needs beta > 0")
    if h < 0.0:
        raise ValueError("h must be >= 0")
    if h == 0.0:
        phi_y = solve.phi_zero_field(hull, beta, 0.0)
    else:
        y_star = solve.y_maximizer(hull, h, beta)
        phi_y = solve.phi_zero_field(hull, beta, y_star)
    return arcosh_half_exp(phi_y) / beta


def gamma_c_secondary(hull: ConcaveHull, beta: float) -> float:
    """Second magnetic transition arcosh(exp(s(beta))/2) / beta; zero when
    the hull flattens out (abar at the right endpoint vanishes)."""
    if beta <= 0.0:
        raise ValueError("gamma_c_secondary needs beta > 0")
    if hull_mod.slope_at_end(hull) <= 0.0:
        return 0.0
    s_val = solve.phi_zero_field(hull, beta, hull.domain_length)
    return arcosh_half_exp(s_val) / beta


def exponent_fit(
    curve: list[tuple[float, float]], window: tuple[float, float]
) -> tuple[float, float, float]:
    """Least-squares power-law fit value = exp(prefactor_log) * h**exponent.

    Fits on log-log scale over the points with h inside the window; returns
    (exponent, prefactor_log, r_squared).
    """
    h_min, h_max = window
    pts = [(h, v) for h, v in curve if h_min <= h <= h_max]
    if len(pts) < 5:
        raise InsufficientDataError(
            f"need >= 5 points in [{h_min}, {h_max}], got {len(pts)}"
        )
    if any(v <= 0.0 or h <= 0.0 for h, v in pts):
        raise InsufficientDataError("power-law fit needs positive h and values")
    lx = np.log([h for h, _ in pts])
    ly = np.log([v for _, v in pts])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0
    return float(slope), float(intercept), r2
