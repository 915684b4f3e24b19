"""Concave envelopes of covariance profiles and the freezing thresholds.

Builds the least concave majorant of a profile A (upper hull of its graph),
answers right-derivative queries, produces doubly-cut profiles
A_cut(x) = A(x + y) - A(y) on [0, z - y] with their hulls, and computes the
freezing threshold x(beta) = sup { x : abar(x) > 2 ln 2 / beta^2 }.
"""
from __future__ import annotations

import math

from .model import (
    LN2,
    ConcaveHull,
    DistributionFn,
    Sampled,
    SkCaricature,
    Step,
)
from .scalar import gamma

# piecewise hulls from a Sampled profile count as smooth when the grid is
# already concave and reasonably fine (exponent fits need >= 1e4 points)
_SMOOTH_MIN_SEGMENTS = 8


def sk_abar(x: float) -> float:
    """Right derivative of the SK-caricature profile: d/dx gamma(x)^2."""
    if x <= 0.0:
        return 2.0 * LN2
    if x >= 1.0:
        return 0.0
    g = gamma(x)
    if g >= 1.0:
        return 0.0
    if g < 1e-8:
        return 2.0 * LN2 * (1.0 - g * g / 3.0)
    return 2.0 * g * LN2 / math.atanh(g)


def sk_value(x: float) -> float:
    """SK-caricature profile A(x) = gamma(x)^2."""
    g = gamma(x)
    return g * g


def _upper_hull(xs: list[float], vs: list[float]) -> tuple[list[float], list[float]]:
    """Monotone-chain upper concave hull of points sorted by x."""
    hx: list[float] = []
    hv: list[float] = []
    for x, v in zip(xs, vs):
        while len(hx) >= 2:
            # drop the middle point when it lies on or below the outer chord
            x0, v0 = hx[-2], hv[-2]
            x1, v1 = hx[-1], hv[-1]
            if (v1 - v0) * (x - x1) <= (v - v1) * (x1 - x0):
                hx.pop()
                hv.pop()
            else:
                break
        hx.append(x)
        hv.append(v)
    return hx, hv


def _piecewise_hull(xs: list[float], vs: list[float], smooth_if_exact: bool) -> ConcaveHull:
    hx, hv = _upper_hull(xs, vs)
    slopes = tuple(
        (hv[i + 1] - hv[i]) / (hx[i + 1] - hx[i]) for i in range(len(hx) - 1)
    )
    smooth = (
        smooth_if_exact
        and len(slopes) >= _SMOOTH_MIN_SEGMENTS
        and len(hx) == len(xs)
    )
    return ConcaveHull(
        breakpoints=tuple(hx), values=tuple(hv), slopes=slopes, smooth=smooth
    )


def build_concave_hull(a: DistributionFn) -> ConcaveHull:
    """Concave hull of a full profile on [0, 1]."""
    if isinstance(a, Step):
        xs = [0.0]
        vs = [0.0]
        acc = 0.0
        for x, inc in zip(a.points, a.increments):
            acc += inc
            xs.append(x)
            vs.append(acc)
        return _piecewise_hull(xs, vs, smooth_if_exact=False)
    if isinstance(a, SkCaricature):
        return ConcaveHull(
            breakpoints=(0.0, 1.0), values=(0.0, 1.0), sk_offset=0.0, smooth=True
        )
    if isinstance(a, Sampled):
        xs = [x for x, _ in a.grid]
        vs = [v for _, v in a.grid]
        return _piecewise_hull(xs, vs, smooth_if_exact=True)
    raise TypeError(f"unknown profile {type(a).__name__}")


def _segment_index(hull: ConcaveHull, x: float) -> int:
    """Index of the hull segment whose half-open interval contains x."""
    bp = hull.breakpoints
    lo, hi = 0, len(bp) - 2
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if bp[mid] <= x:
            lo = mid
        else:
            hi = mid - 1
    return lo


def right_derivative(hull: ConcaveHull, x: float) -> float:
    """abar(x) on [0, domain_length); raises at the right endpoint."""
    if x < 0.0 or x >= hull.domain_length:
        raise ValueError(
            f"right derivative defined on [0, {hull.domain_length}), got {x}"
        )
    if hull.analytic:
        return sk_abar(hull.sk_offset + x)
    return hull.slopes[_segment_index(hull, x)]


def slope_at_end(hull: ConcaveHull) -> float:
    """Left limit abar(L-) of the slope at the right endpoint."""
    if hull.analytic:
        return sk_abar(hull.sk_offset + hull.domain_length)
    return hull.slopes[-1] if hull.slopes else 0.0


def abar_inclusive(hull: ConcaveHull, x: float) -> float:
    """abar(x), extending to the right endpoint by its left limit.

    The densities integrate over [0, L] and the z = 1 boundary test needs the
    value the integrand approaches, so the last segment's slope is used at L.
    """
    if x >= hull.domain_length:
        return slope_at_end(hull)
    return right_derivative(hull, x)


def hull_value(hull: ConcaveHull, x: float) -> float:
    """Hull value Abar(x) for x in [0, domain_length]."""
    if x < 0.0 or x > hull.domain_length + 1e-15:
        raise ValueError(f"hull value defined on [0, {hull.domain_length}], got {x}")
    x = min(x, hull.domain_length)
    if hull.analytic:
        off = hull.sk_offset
        return sk_value(off + x) - sk_value(off)
    i = _segment_index(hull, x)
    return hull.values[i] + hull.slopes[i] * (x - hull.breakpoints[i])


def cut_distribution(
    a: DistributionFn, y: float, z: float
) -> tuple[DistributionFn | None, ConcaveHull]:
    """Doubly-cut profile A(x + y) - A(y) on [0, z - y] and its hull.

    Returns the (unnormalized) cut profile where it has a finite
    representation (Step/Sampled) and None for the analytic caricature, whose
    cut is fully described by the returned hull.
    """
    if not (0.0 <= y <= z <= 1.0):
        raise ValueError(f"cut requires 0 <= y <= z <= 1, got ({y}, {z})")
    if z == y:
        empty = ConcaveHull(breakpoints=(0.0,), values=(0.0,), slopes=())
        if isinstance(a, Step):
            return Step(points=(), increments=()), empty
        return None, empty

    if isinstance(a, Step):
        pts = []
        inc = []
        for x, w in zip(a.points, a.increments):
            if y < x <= z:
                pts.append(x - y)
                inc.append(w)
        xs = [0.0] + pts
        vs = [0.0]
        acc = 0.0
        for w in inc:
            acc += w
            vs.append(acc)
        if not pts or pts[-1] < z - y:
            xs.append(z - y)
            vs.append(acc)
        return Step(points=tuple(pts), increments=tuple(inc)), _piecewise_hull(
            xs, vs, smooth_if_exact=False
        )

    if isinstance(a, SkCaricature):
        length = z - y
        mass = sk_value(z) - sk_value(y)
        return None, ConcaveHull(
            breakpoints=(0.0, length),
            values=(0.0, mass),
            sk_offset=y,
            smooth=True,
        )

    if isinstance(a, Sampled):
        gx = [x for x, _ in a.grid]
        gv = [v for _, v in a.grid]

        def interp(x0: float) -> float:
            if x0 <= gx[0]:
                return gv[0]
            if x0 >= gx[-1]:
                return gv[-1]
            for i in range(len(gx) - 1):
                if gx[i] <= x0 <= gx[i + 1]:
                    t = (x0 - gx[i]) / (gx[i + 1] - gx[i])
                    return gv[i] + t * (gv[i + 1] - gv[i])
            return gv[-1]

        base = interp(y)
        xs = [0.0]
        vs = [0.0]
        for x, v in zip(gx, gv):
            if y < x < z:
                xs.append(x - y)
                vs.append(v - base)
        xs.append(z - y)
        vs.append(interp(z) - base)
        cut = Sampled(grid=tuple(zip(xs, vs)))
        return cut, _piecewise_hull(xs, vs, smooth_if_exact=True)

    raise TypeError(f"unknown profile {type(a).__name__}")


def threshold_for_slope(hull: ConcaveHull, c: float) -> float:
    """sup { x : abar(x) > c }, 0 for the empty set.

    A segment whose slope ties c exactly is counted in (the two density
    branches coincide there, so only the reported threshold cares).
    """
    if hull.domain_length == 0.0:
        return 0.0
    if hull.analytic:
        off = hull.sk_offset
        length = hull.domain_length
        if sk_abar(off) <= c:
            return 0.0
        if sk_abar(off + length) > c:
            return length
        lo, hi = 0.0, length
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if sk_abar(off + mid) > c:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)
    out = 0.0
    for i, s in enumerate(hull.slopes):
        if s >= c:
            out = hull.breakpoints[i + 1]
    return out


def freezing_threshold(hull: ConcaveHull, beta: float) -> float:
    """x(beta) = sup { x : abar(x) > 2 ln 2 / beta^2 }, 0 for the empty set."""
    if beta <= 0.0:
        raise ValueError("freezing threshold needs beta > 0")
    return threshold_for_slope(hull, 2.0 * LN2 / (beta * beta))
