"""Limiting pressure formulas and magnetizations.

The iid-field density and its branch structure, the full iid-field pressure
(1-d supremum over z), the REM closed form, the classical per-segment sum,
field-free cut densities, the hierarchical-field pressure (2-d supremum in
both variational forms), its closed form for smooth concave profiles, the
step-profile quantum enumeration, and the longitudinal REM magnetization.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from functools import lru_cache

from scipy.integrate import quad

from .model import (
    LN2,
    ConcaveHull,
    DistributionFn,
    FieldLaw,
    Hierarchical,
    IidField,
    MagneticEta,
    ModelSpec,
    Phase,
    PointMass,
    PressureResult,
    Step,
    StepEta,
    UnsupportedModelError,
)
from . import hull as hull_mod
from . import solve
from .scalar import field_moment, gamma, ln_2cosh, ln_cosh, paramagnet_pressure

# absolute tolerance 1e-11: the integrands carry ~1e-12 noise from the
# bisection-based gamma evaluations, so pushing further only trips the
# quadrature's roundoff detection
_QUAD_KW = dict(epsabs=1e-11, epsrel=1e-11, limit=200)


# ---------------------------------------------------------------------------
# iid-field density
# ---------------------------------------------------------------------------

class DensityHandle:
    """One (hull, field-law) pair with per-slope critical temperatures cached."""

    def __init__(self, hull: ConcaveHull, law: FieldLaw):
        self.hull = hull
        self.law = law
        self._beta_c: dict[float, float] = {}

    def beta_c_for_slope(self, slope: float) -> float:
        if slope <= 0.0:
            return math.inf
        bc = self._beta_c.get(slope)
        if bc is None:
            bc = solve.beta_c_general(solve.SelfConsistencyProblem(slope, self.law))
            self._beta_c[slope] = bc
        return bc

    def frozen_threshold(self, beta: float) -> float:
        """sup { x : beta > beta_c(x) }, the frozen region's right edge."""
        if beta <= 0.0:
            return 0.0
        g = (
            LN2
            + field_moment(self.law, "ln_cosh", beta)
            - beta * field_moment(self.law, "h_tanh", beta)
        )
        # beta > beta_c(x) iff abar(x) > 2 g(beta) / beta^2
        return hull_mod.threshold_for_slope(self.hull, 2.0 * g / (beta * beta))


def density_phi_iid(handle: DensityHandle, beta: float, x: float) -> float:
    """Density at x: unfrozen below beta_c(x), linear-in-beta branch above.

    The right endpoint uses the last segment's slope (left limit) so the
    z = 1 boundary test matches the integrand it bounds.
    """
    if beta < 0.0:
        raise ValueError("beta must be >= 0")
    a = hull_mod.abar_inclusive(handle.hull, x)
    bc = handle.beta_c_for_slope(a)
    if beta <= bc:
        return LN2 + 0.5 * a * beta * beta + field_moment(handle.law, "ln_cosh", beta)
    return beta * (a * bc + field_moment(handle.law, "h_tanh", bc))


def _analytic_splits(hull: ConcaveHull, x1: float, kink: float) -> list[float]:
    """Quadrature split points on [0, x1]: the branch kink plus a geometric
    grading into the domain end, where the slope decays only logarithmically."""
    length = hull.domain_length
    splits = {0.0, x1}
    if 0.0 < kink < x1:
        splits.add(kink)
    eps = length * 1e-10
    while eps < length * 0.02:
        node = length - eps
        if 0.0 < node < x1:
            splits.add(node)
        eps *= 4.0
    return sorted(splits)


def _integral_density_iid(handle: DensityHandle, beta: float, x1: float) -> float:
    """Integral of the iid density over [0, x1]."""
    hull = handle.hull
    if x1 <= 0.0:
        return 0.0
    if not hull.analytic:
        total = 0.0
        for i, s in enumerate(hull.slopes):
            lo = hull.breakpoints[i]
            hi = min(hull.breakpoints[i + 1], x1)
            if hi <= lo:
                break
            total += (hi - lo) * density_phi_iid(handle, beta, lo)
        return total
    splits = _analytic_splits(hull, x1, handle.frozen_threshold(beta))
    total = 0.0
    for a, b in zip(splits[:-1], splits[1:]):
        val, _ = quad(lambda x: density_phi_iid(handle, beta, x), a, b, **_QUAD_KW)
        total += val
    return total


# ---------------------------------------------------------------------------
# field-free (cut) density
# ---------------------------------------------------------------------------

def density_phi_cut(
    a: DistributionFn, y: float, z: float, beta: float, x: float
) -> float:
    """Cut density at x in [0, z - y]: ground-state branch below the threshold."""
    _, cut_hull = hull_mod.cut_distribution(a, y, z)
    if x < 0.0 or x > cut_hull.domain_length:
        raise ValueError(f"x must be in [0, {cut_hull.domain_length}], got {x}")
    return solve.phi_zero_field(cut_hull, beta, x)


def _integral_zero_field(hull: ConcaveHull, beta: float, x1: float) -> float:
    """Integral of the field-free density over [0, x1]."""
    if x1 <= 0.0:
        return 0.0
    if not hull.analytic:
        total = 0.0
        for i, s in enumerate(hull.slopes):
            lo = hull.breakpoints[i]
            hi = min(hull.breakpoints[i + 1], x1)
            if hi <= lo:
                break
            total += (hi - lo) * solve.phi_zero_field(hull, beta, lo)
        return total
    splits = _analytic_splits(hull, x1, hull_mod.freezing_threshold(hull, beta))
    total = 0.0
    for a, b in zip(splits[:-1], splits[1:]):
        val, _ = quad(lambda x: solve.phi_zero_field(hull, beta, x), a, b, **_QUAD_KW)
        total += val
    return total


class _CumulativeZeroField:
    """Prefix integral of the field-free density on a fixed (hull, beta).

    Piecewise hulls integrate exactly per segment.  The analytic hull uses
    composite 8-point Gauss-Legendre on a fine grid split at the freezing
    threshold and geometrically graded into the right endpoint, where the
    slope decays only logarithmically; evaluation then costs one partial
    cell.
    """

    _GL_X = (
        -0.9602898564975363,
        -0.7966664774136267,
        -0.525532409916329,
        -0.18343464249564978,
        0.18343464249564978,
        0.525532409916329,
        0.7966664774136267,
        0.9602898564975363,
    )
    _GL_W = (
        0.10122853629037669,
        0.22238103445337448,
        0.31370664587788744,
        0.36268378337836193,
        0.36268378337836193,
        0.31370664587788744,
        0.22238103445337448,
        0.10122853629037669,
    )

    def __init__(self, hull: ConcaveHull, beta: float, cells: int = 2000):
        self.hull = hull
        self.beta = beta
        if not hull.analytic:
            self.grid = None
            return
        length = hull.domain_length
        xf = hull_mod.freezing_threshold(hull, beta)
        nodes = {0.0, length}
        if 0.0 < xf < length:
            nodes.add(xf)
        eps = length * 1e-12
        while eps < length * 0.02:
            nodes.add(length - eps)
            eps *= 2.0
        grid: list[float] = []
        snodes = sorted(nodes)
        for a, b in zip(snodes[:-1], snodes[1:]):
            m = max(1, int(round(cells * (b - a) / length)))
            grid.extend(a + (b - a) * i / m for i in range(m))
        grid.append(length)
        self.grid = grid
        self.prefix = [0.0]
        acc = 0.0
        for a, b in zip(grid[:-1], grid[1:]):
            acc += self._cell(a, b)
            self.prefix.append(acc)

    def _cell(self, a: float, b: float) -> float:
        if b <= a:
            return 0.0
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        return half * sum(
            w * solve.phi_zero_field(self.hull, self.beta, mid + half * t)
            for t, w in zip(self._GL_X, self._GL_W)
        )

    def __call__(self, x: float) -> float:
        x = min(max(x, 0.0), self.hull.domain_length)
        if self.grid is None:
            return _integral_zero_field(self.hull, self.beta, x)
        i = bisect_right(self.grid, x) - 1
        i = min(i, len(self.grid) - 2)
        return self.prefix[i] + self._cell(self.grid[i], x)


@lru_cache(maxsize=64)
def _cumulative_zero_field(hull: ConcaveHull, beta: float) -> _CumulativeZeroField:
    return _CumulativeZeroField(hull, beta)


# ---------------------------------------------------------------------------
# full iid-field pressure (1-d supremum over z)
# ---------------------------------------------------------------------------

def _ln2_result() -> PressureResult:
    return PressureResult(
        phi=LN2,
        y_star=0.0,
        z_star=1.0,
        phase=Phase.UNFROZEN_CLASSICAL,
        m_z=0.0,
        m_x=0.0,
    )


def pressure_qcremh(spec: ModelSpec, beta: float) -> PressureResult:
    """Pressure of the iid-field model: sup_z of the density integral plus
    the quantum-paramagnet tail."""
    if not isinstance(spec.longitudinal, IidField):
        raise UnsupportedModelError("pressure_qcremh needs an iid longitudinal field")
    if beta < 0.0:
        raise ValueError("beta must be >= 0")
    if beta == 0.0:
        return _ln2_result()
    law = spec.longitudinal.law
    hull = hull_mod.build_concave_hull(spec.distribution)
    p = paramagnet_pressure(law, spec.transversal, beta)
    handle = DensityHandle(hull, law)

    t_val = density_phi_iid(handle, beta, 0.0)
    s_val = density_phi_iid(handle, beta, hull.domain_length)
    if p <= s_val:
        z_star = hull.domain_length
    elif p >= t_val:
        z_star = 0.0
    elif not hull.analytic:
        z_star = 0.0
        for i in range(len(hull.slopes)):
            if density_phi_iid(handle, beta, hull.breakpoints[i]) >= p:
                z_star = hull.breakpoints[i + 1]
    else:
        lo, hi = 0.0, hull.domain_length
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if density_phi_iid(handle, beta, mid) >= p:
                lo = mid
            else:
                hi = mid
        z_star = 0.5 * (lo + hi)

    phi = _integral_density_iid(handle, beta, z_star) + (1.0 - z_star) * p
    x_frz = handle.frozen_threshold(beta)
    if z_star == 0.0:
        phase = Phase.QUANTUM_PARAMAGNET
    elif x_frz > 0.0:
        phase = Phase.FROZEN_GLASS
    else:
        phase = Phase.UNFROZEN_CLASSICAL
    return PressureResult(
        phi=phi,
        y_star=0.0,
        z_star=z_star,
        phase=phase,
        m_z=math.nan,
        m_x=math.nan,
    )


# ---------------------------------------------------------------------------
# REM closed form
# ---------------------------------------------------------------------------

def phi_rem(beta: float, h: float) -> float:
    """Classical REM pressure with a constant longitudinal field."""
    if beta < 0.0 or h < 0.0:
        raise ValueError("beta and h must be >= 0")
    if beta == 0.0:
        return LN2
    bc = solve.beta_c_rem(h)
    if beta <= bc:
        return LN2 + 0.5 * beta * beta + ln_cosh(beta * h)
    return beta * (bc + h * math.tanh(bc * h))


def pressure_qrem(h: float, gamma_field: float, beta: float) -> PressureResult:
    """REM with constant fields: max of the classical pressure and the
    quantum-paramagnet pressure, with both magnetizations."""
    if beta < 0.0 or h < 0.0 or gamma_field < 0.0:
        raise ValueError("beta, h, Gamma must be >= 0")
    if beta == 0.0:
        return _ln2_result()
    rem = phi_rem(beta, h)
    hyp = math.hypot(h, gamma_field)
    p = ln_2cosh(beta * hyp)
    if rem >= p:
        bc = solve.beta_c_rem(h)
        phase = Phase.FROZEN_GLASS if beta > bc else Phase.UNFROZEN_CLASSICAL
        return PressureResult(
            phi=rem,
            y_star=0.0,
            z_star=1.0,
            phase=phase,
            m_z=math.tanh(min(beta, bc) * h),
            m_x=0.0,
        )
    frac = math.tanh(beta * hyp) / hyp if hyp > 0.0 else 0.0
    return PressureResult(
        phi=p,
        y_star=0.0,
        z_star=0.0,
        phase=Phase.QUANTUM_PARAMAGNET,
        m_z=h * frac,
        m_x=gamma_field * frac,
    )


def magnetization_z_iid(h: float, gamma_field: float, beta: float) -> float:
    """Longitudinal REM magnetization; classical branch on the line itself."""
    from . import critical  # local import: critical builds on this module

    if beta <= 0.0:
        return 0.0
    if gamma_field > critical.gamma_c_rem(beta, h):
        hyp = math.hypot(h, gamma_field)
        return h * math.tanh(beta * hyp) / hyp if hyp > 0.0 else 0.0
    return math.tanh(min(beta, solve.beta_c_rem(h)) * h)


# ---------------------------------------------------------------------------
# classical GREM (sum of per-segment partial pressures)
# ---------------------------------------------------------------------------

def partial_pressure(
    slope: float, length: float, law: FieldLaw, beta: float, bc: float | None = None
) -> float:
    """One hull segment's contribution (mass = slope * length)."""
    mass = slope * length
    if beta == 0.0 or mass == 0.0:
        return length * (LN2 + field_moment(law, "ln_cosh", beta))
    if bc is None:
        bc = solve.beta_c_general(solve.SelfConsistencyProblem(slope, law))
    if beta <= bc:
        return 0.5 * mass * beta * beta + length * (
            LN2 + field_moment(law, "ln_cosh", beta)
        )
    return beta * (mass * bc + length * field_moment(law, "h_tanh", bc))


def pressure_grem_classical(a: Step, law: FieldLaw, beta: float) -> float:
    """Classical pressure of a step GREM: sum of partial pressures over the
    concave-hull segments."""
    if not isinstance(a, Step):
        raise UnsupportedModelError("pressure_grem_classical needs a step profile")
    if beta < 0.0:
        raise ValueError("beta must be >= 0")
    if beta == 0.0:
        return LN2
    h = hull_mod.build_concave_hull(a)
    return sum(
        partial_pressure(s, ell, law, beta) for s, ell in zip(h.slopes, h.lengths)
    )


# ---------------------------------------------------------------------------
# step-profile quantum enumeration
# ---------------------------------------------------------------------------

def pressure_nlevel_quantum(
    a: Step, h_law: FieldLaw, b_law: FieldLaw, beta: float
) -> PressureResult:
    """Quantum step-GREM pressure by enumeration over hull breakpoints."""
    if not isinstance(a, Step):
        raise UnsupportedModelError("pressure_nlevel_quantum needs a step profile")
    if beta < 0.0:
        raise ValueError("beta must be >= 0")
    if beta == 0.0:
        return _ln2_result()
    h = hull_mod.build_concave_hull(a)
    p = paramagnet_pressure(h_law, b_law, beta)
    best_phi = -math.inf
    best_k = 0
    acc = 0.0
    cums = [0.0]
    for s, ell in zip(h.slopes, h.lengths):
        acc += partial_pressure(s, ell, h_law, beta)
        cums.append(acc)
    for k, y_k in enumerate(h.breakpoints):
        val = cums[k] + (1.0 - y_k) * p
        if val > best_phi or (val == best_phi and y_k > h.breakpoints[best_k]):
            best_phi = val
            best_k = k
    z_star = h.breakpoints[best_k]
    handle = DensityHandle(h, h_law)
    x_frz = handle.frozen_threshold(beta)
    if z_star == 0.0:
        phase = Phase.QUANTUM_PARAMAGNET
    elif x_frz > 0.0:
        phase = Phase.FROZEN_GLASS
    else:
        phase = Phase.UNFROZEN_CLASSICAL
    return PressureResult(
        phi=best_phi,
        y_star=0.0,
        z_star=z_star,
        phase=phase,
        m_z=math.nan,
        m_x=math.nan,
    )


# ---------------------------------------------------------------------------
# hierarchical-field pressure (2-d supremum)
# ---------------------------------------------------------------------------

def _step_eta_value(eta: StepEta, y: float) -> float:
    """eta(y) for a right-continuous step overlap; eta(1) = last value."""
    if y >= eta.points[-1]:
        return eta.values[-1]
    for q, v in zip(eta.points, eta.values):
        if y < q:
            return v
    return eta.values[-1]


def _hier_candidates_step(eta: StepEta) -> list[float]:
    return [0.0] + [q for q in eta.points[:-1]] + [1.0]


def _hier_step_eta(
    a: DistributionFn, eta: StepEta, beta: float, p: float, form: str
) -> PressureResult:
    best = (-math.inf, 0.0, 0.0)
    for y in _hier_candidates_step(eta):
        ev = beta * _step_eta_value(eta, y)
        if form == "cut_one":
            _, cut_hull = hull_mod.cut_distribution(a, y, 1.0)
            if cut_hull.domain_length == 0.0:
                val, z = ev + (1.0 - y) * p, y
            else:
                zeta = solve.z_from_pressure(cut_hull, beta, p)
                val = (
                    ev
                    + _integral_zero_field(cut_hull, beta, zeta)
                    + (1.0 - y - zeta) * p
                )
                z = y + zeta
            if val > best[0] or (val == best[0] and z > best[2]):
                best = (val, y, z)
        else:  # cut_z: rebuild the cut per z candidate
            zs = {y, 1.0}
            if isinstance(a, Step):
                zs.update(x for x in a.points if y < x <= 1.0)
            z_sorted = sorted(zs)
            cands = []
            for z0, z1 in zip(z_sorted[:-1], z_sorted[1:]):
                cands.extend(z0 + (z1 - z0) * i / 8.0 for i in range(8))
            cands.append(1.0)
            for z in cands:
                _, cut_hull = hull_mod.cut_distribution(a, y, z)
                val = (
                    ev
                    + _integral_zero_field(cut_hull, beta, cut_hull.domain_length)
                    + (1.0 - z) * p
                )
                if val > best[0] or (val == best[0] and z > best[2]):
                    best = (val, y, z)
    phi, y_star, z_star = best
    _, cut_hull = hull_mod.cut_distribution(a, y_star, 1.0)
    frozen = (
        cut_hull.domain_length > 0.0
        and hull_mod.freezing_threshold(cut_hull, beta) > 0.0
    )
    if z_star <= y_star:
        phase = Phase.QUANTUM_PARAMAGNET
    elif frozen:
        phase = Phase.FROZEN_GLASS
    else:
        phase = Phase.UNFROZEN_CLASSICAL
    return PressureResult(
        phi=phi,
        y_star=y_star,
        z_star=z_star,
        phase=phase,
        m_z=math.nan,
        m_x=math.nan,
    )


def _golden_max(f, a: float, b: float, iters: int = 90):
    """Golden-section maximum of a unimodal f on [a, b]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
    x = 0.5 * (a + b)
    return x, f(x)


def _hier_magnetic_smooth(
    full: ConcaveHull, h: float, beta: float, p: float, b_law: FieldLaw
) -> PressureResult:
    cum = _cumulative_zero_field(full, beta)
    z_bar = solve.z_from_pressure(full, beta, p)

    if h == 0.0:
        phi = cum(z_bar) + (1.0 - z_bar) * p
        y_star, z_star = 0.0, z_bar
    else:
        def f_glass(y: float) -> float:
            return beta * h * gamma(y) + (cum(z_bar) - cum(y)) + (1.0 - z_bar) * p

        def f_diag(y: float) -> float:
            return beta * h * gamma(y) + (1.0 - y) * p

        best = (-math.inf, 0.0, 0.0)
        if z_bar > 0.0:
            y1, v1 = _golden_max(f_glass, 0.0, z_bar)
            if v1 > best[0]:
                best = (v1, y1, z_bar)
        y2, v2 = _golden_max(f_diag, z_bar, 1.0)
        if v2 > best[0]:
            best = (v2, y2, y2)
        phi, y_star, z_star = best

    x_b = hull_mod.freezing_threshold(full, beta)
    if z_star <= y_star:
        phase = Phase.QUANTUM_PARAMAGNET
    elif y_star < min(x_b, z_star):
        phase = Phase.FROZEN_GLASS
    else:
        phase = Phase.UNFROZEN_CLASSICAL
    m_z = gamma(y_star) if h > 0.0 else 0.0
    m_x = (
        (1.0 - z_star) * math.tanh(beta * b_law.value)
        if isinstance(b_law, PointMass)
        else math.nan
    )
    return PressureResult(
        phi=phi, y_star=y_star, z_star=z_star, phase=phase, m_z=m_z, m_x=m_x
    )


def _hier_magnetic_grid(
    a: DistributionFn, h: float, beta: float, p: float
) -> PressureResult:
    """Non-concave profile with the entropy-matched field: dense scan over y
    with exact inner z per cut, then local refinement.  Flagged approximate."""

    def value_at(y: float) -> tuple[float, float]:
        _, cut_hull = hull_mod.cut_distribution(a, y, 1.0)
        if cut_hull.domain_length == 0.0:
            return beta * h * gamma(y) + (1.0 - y) * p, y
        zeta = solve.z_from_pressure(cut_hull, beta, p)
        val = (
            beta * h * gamma(y)
            + _integral_zero_field(cut_hull, beta, zeta)
            + (1.0 - y - zeta) * p
        )
        return val, y + zeta

    n = 2000
    ys = [i / n for i in range(n + 1)]
    vals = [value_at(y)[0] for y in ys]
    i_best = max(range(len(ys)), key=lambda i: vals[i])
    lo = ys[max(0, i_best - 1)]
    hi = ys[min(n, i_best + 1)]
    y_star, phi = _golden_max(lambda y: value_at(y)[0], lo, hi, iters=70)
    _, z_star = value_at(y_star)

    _, cut_hull = hull_mod.cut_distribution(a, y_star, 1.0)
    frozen = (
        cut_hull.domain_length > 0.0
        and hull_mod.freezing_threshold(cut_hull, beta) > 0.0
    )
    if z_star <= y_star:
        phase = Phase.QUANTUM_PARAMAGNET
    elif frozen:
        phase = Phase.FROZEN_GLASS
    else:
        phase = Phase.UNFROZEN_CLASSICAL
    return PressureResult(
        phi=phi,
        y_star=y_star,
        z_star=z_star,
        phase=phase,
        m_z=gamma(y_star),
        m_x=math.nan,
        approximate=True,
    )


def pressure_hier(spec: ModelSpec, beta: float, form: str = "auto") -> PressureResult:
    """Hierarchical-field pressure: 2-d supremum over 0 <= y <= z <= 1.

    Step overlaps enumerate y over their jump points exactly; the
    entropy-matched field uses the translation form on smooth concave
    profiles and a dense scan (flagged approximate) otherwise.  ``form``
    selects between the two equal variational forms for step overlaps.
    """
    if not isinstance(spec.longitudinal, Hierarchical):
        raise UnsupportedModelError("pressure_hier needs a hierarchical field")
    if form not in ("auto", "cut_one", "cut_z"):
        raise ValueError(f"unknown form {form!r}")
    if beta < 0.0:
        raise ValueError("beta must be >= 0")
    if beta == 0.0:
        return _ln2_result()
    p = solve.ln_2cosh_mean(spec.transversal, beta)
    ov = spec.longitudinal.overlap
    if isinstance(ov, StepEta):
        return _hier_step_eta(
            spec.distribution, ov, beta, p, "cut_one" if form == "auto" else form
        )
    if not isinstance(ov, MagneticEta):
        raise UnsupportedModelError(f"unknown overlap {type(ov).__name__}")
    full = hull_mod.build_concave_hull(spec.distribution)
    if full.smooth:
        return _hier_magnetic_smooth(full, ov.strength, beta, p, spec.transversal)
    return _hier_magnetic_grid(spec.distribution, ov.strength, beta, p)


# ---------------------------------------------------------------------------
# closed form for smooth concave profiles (entropy-matched field)
# ---------------------------------------------------------------------------

def pressure_hier_closed(
    h: float, gamma_field: float, beta: float, hull: ConcaveHull
) -> PressureResult:
    """Closed-form hierarchical pressure: glass branch through the maximizers
    y(beta, h) and z(beta, Gamma), diagonal branch through sigma."""
    if not hull.smooth:
        raise UnsupportedModelError(
            "pressure_hier_closed requires continuously differentiable concave A"
        )
    if h <= 0.0 or gamma_field <= 0.0 or beta <= 0.0:
        raise ValueError("pressure_hier_closed needs h > 0, Gamma > 0, beta > 0")
    p = ln_2cosh(beta * gamma_field)
    y_star = solve.y_maximizer(hull, h, beta)
    phi_y = solve.phi_zero_field(hull, beta, y_star)
    tanh_bg = math.tanh(beta * gamma_field)
    if p < phi_y:
        z_star = solve.z_from_pressure(hull, beta, p)
        phi = (
            beta * h * gamma(y_star)
            + _integral_zero_field(hull, beta, z_star)
            - _integral_zero_field(hull, beta, y_star)
            + (1.0 - z_star) * p
        )
        x_b = hull_mod.freezing_threshold(hull, beta)
        phase = (
            Phase.FROZEN_GLASS
            if y_star < min(x_b, z_star)
            else Phase.UNFROZEN_CLASSICAL
        )
        return PressureResult(
            phi=phi,
            y_star=y_star,
            z_star=z_star,
            phase=phase,
            m_z=gamma(y_star),
            m_x=(1.0 - z_star) * tanh_bg,
        )
    sigma = solve.sigma_diag(h, PointMass(gamma_field), beta)
    phi = beta * h * gamma(sigma) + (1.0 - sigma) * p
    return PressureResult(
        phi=phi,
        y_star=sigma,
        z_star=sigma,
        phase=Phase.QUANTUM_PARAMAGNET,
        m_z=gamma(sigma),
        m_x=(1.0 - sigma) * tanh_bg,
    )
