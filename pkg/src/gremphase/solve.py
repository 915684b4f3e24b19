"""Self-consistency and maximizer equations.

beta_c for a segment slope and field law, the REM freezing line beta_c(h),
the hierarchical maximizers y(beta, h), z(beta, Gamma), the diagonal
maximizer sigma(beta, Gamma, h), and the AT line for smooth concave hulls.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .model import (
    LN2,
    ConcaveHull,
    DegenerateSlopeError,
    FieldLaw,
    UnsupportedModelError,
)
from . import hull as hull_mod
from .scalar import binary_entropy_r, field_moment, k_inverse_slope

_XTOL = 1e-14
_RTOL = 1e-12
_BETA_MAX = 1e6

SQRT_2LN2 = math.sqrt(2.0 * LN2)


@dataclass(frozen=True)
class SelfConsistencyProblem:
    slope: float
    field_law: FieldLaw


def beta_c_general(problem: SelfConsistencyProblem) -> float:
    """Unique beta > 0 with (slope/2) beta^2 = ln2 + E[ln cosh b h] - b E[h tanh b h].

    With slope = abar(x) this is beta_c(x); with a hull-segment slope it is
    the per-segment critical temperature.
    """
    slope, law = problem.slope, problem.field_law
    if slope < 0.0:
        raise ValueError(f"slope must be >= 0, got {slope}")
    if slope == 0.0:
        raise DegenerateSlopeError("slope 0 has beta_c = inf; use the unfrozen branch")

    def f(beta: float) -> float:
        rhs = (
            LN2
            + field_moment(law, "ln_cosh", beta)
            - beta * field_moment(law, "h_tanh", beta)
        )
        return 0.5 * slope * beta * beta - rhs

    hi = 1.0
    while f(hi) < 0.0:
        hi *= 2.0
        if hi > _BETA_MAX:
            raise RuntimeError("beta_c bracket expansion failed")
    return brentq(f, 1e-12, hi, xtol=_XTOL, rtol=_RTOL)


def beta_c_rem(h: float) -> float:
    """REM freezing line: the root of beta^2 = 2 r(tanh(beta h))."""
    if h < 0.0:
        raise ValueError("field strength must be >= 0")
    if h == 0.0:
        return SQRT_2LN2

    def f(beta: float) -> float:
        return beta * beta - 2.0 * binary_entropy_r(math.tanh(beta * h))

    # the root sits in (0, sqrt(2 ln 2)]: r <= ln 2 and r(tanh beta h) decreasing
    return brentq(f, 1e-300, SQRT_2LN2, xtol=_XTOL, rtol=_RTOL)


def phi_zero_field(hull: ConcaveHull, beta: float, x: float) -> float:
    """Density of the field-free cut form at x (ground-state branch below x(beta))."""
    a = hull_mod.abar_inclusive(hull, x)
    c = 2.0 * LN2 / (beta * beta)
    if a > c:
        return beta * math.sqrt(2.0 * LN2 * a)
    return 0.5 * beta * beta * a + LN2


def _require_smooth(hull: ConcaveHull, what: str) -> None:
    if not hull.smooth:
        raise UnsupportedModelError(
            f"{what} requires continuously differentiable concave A "
            "(step profiles are not supported here)"
        )


def y_maximizer(hull: ConcaveHull, h: float, beta: float) -> float:
    """Unique y in (0, 1) with y = k(phi(beta, y) / (beta h)), smooth hulls only."""
    _require_smooth(hull, "y_maximizer")
    if h <= 0.0 or beta <= 0.0:
        raise ValueError("y_maximizer needs h > 0 and beta > 0")

    def g(y: float) -> float:
        return y - k_inverse_slope(phi_zero_field(hull, beta, y) / (beta * h))

    # g(0) = -k(.) < 0 and g(1) = 1 - k(positive) > 0
    return brentq(g, 0.0, 1.0, xtol=_XTOL, rtol=8.9e-16)


def z_maximizer(hull: ConcaveHull, b_law: FieldLaw, beta: float) -> float:
    """Largest z with phi(beta, z) >= paramagnet pressure (field-free density).

    Exact at hull breakpoints for piecewise hulls, bisection on analytic ones.
    """
    if beta <= 0.0:
        raise ValueError("z_maximizer needs beta > 0")
    p = ln_2cosh_mean(b_law, beta)
    return z_from_pressure(hull, beta, p)


def ln_2cosh_mean(b_law: FieldLaw, beta: float) -> float:
    """E[ln 2 cosh(beta b)] for the transversal law."""
    return LN2 + field_moment(b_law, "ln_cosh", beta)


def z_from_pressure(hull: ConcaveHull, beta: float, p: float) -> float:
    """Generalized inverse of the field-free density at level p (maximal z)."""
    length = hull.domain_length
    if length == 0.0:
        return 0.0
    s_val = phi_zero_field(hull, beta, length)
    t_val = phi_zero_field(hull, beta, 0.0)
    if p <= s_val:
        return length
    if p >= t_val:
        return 0.0
    if hull.analytic:
        lo, hi = 0.0, length
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if phi_zero_field(hull, beta, mid) >= p:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)
    out = 0.0
    for i in range(len(hull.slopes)):
        if phi_zero_field(hull, beta, hull.breakpoints[i]) >= p:
            out = hull.breakpoints[i + 1]
    return out


def sigma_diag(h: float, b_law: FieldLaw, beta: float) -> float:
    """Diagonal maximizer sigma = k(p(beta Gamma) / (beta h))."""
    if h <= 0.0 or beta <= 0.0:
        raise ValueError("sigma_diag needs h > 0 and beta > 0")
    return k_inverse_slope(ln_2cosh_mean(b_law, beta) / (beta * h))


def at_line(hull: ConcaveHull, h: float) -> float:
    """AT line beta_c(h) = inf { beta : x(beta) > k(2 ln 2 / (beta h)) }.

    Returns math.inf when no crossing occurs below the bracket cap (possible
    only in pathological hulls; for abar(1) = 0 the crossing always exists).
    """
    _require_smooth(hull, "at_line")
    if h <= 0.0:
        raise ValueError("at_line needs h > 0")
    a0 = hull_mod.abar_inclusive(hull, 0.0)
    if a0 <= 0.0:
        raise DegenerateSlopeError("abar(0) = 0 never freezes")
    beta_c0 = math.sqrt(2.0 * LN2 / a0)

    def d(beta: float) -> float:
        x_b = hull_mod.freezing_threshold(hull, beta)
        return x_b - k_inverse_slope(2.0 * LN2 / (beta * h))

    lo, hi = beta_c0, 2.0 * beta_c0
    while d(hi) <= 0.0:
        lo = hi
        hi *= 2.0
        if hi > _BETA_MAX:
            return math.inf
    return brentq(d, lo, hi, xtol=_XTOL, rtol=_RTOL)
