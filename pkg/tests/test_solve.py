import math

import numpy as np
import pytest

from gremphase import hull, solve
from gremphase.model import (
    LN2,
    DegenerateSlopeError,
    PointMass,
    SkCaricature,
    Step,
    SymmetricTwoPoint,
    UnsupportedModelError,
)
from gremphase.scalar import k_inverse_slope, ln_2cosh

SQRT_2LN2 = math.sqrt(2.0 * LN2)
SK = hull.build_concave_hull(SkCaricature())

# frozen from the bisection oracle on [0.5, 1.5] for
# beta^2/2 = ln2 + ln cosh(beta) - beta tanh(beta)
BETA_C_H1 = 0.9024711129010354


def _bisect(f, lo, hi, iters=80):
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_beta_c_general_anchors():
    p = solve.SelfConsistencyProblem(1.0, PointMass(0.0))
    assert solve.beta_c_general(p) == pytest.approx(SQRT_2LN2, abs=1e-12)
    p = solve.SelfConsistencyProblem(2.0 * LN2, PointMass(0.0))
    assert solve.beta_c_general(p) == pytest.approx(1.0, abs=1e-10)
    p = solve.SelfConsistencyProblem(1.0, PointMass(1.0))
    assert solve.beta_c_general(p) == pytest.approx(BETA_C_H1, abs=1e-10)


def test_beta_c_general_bisection_oracle():
    law = SymmetricTwoPoint(0.8)
    slope = 0.7
    from gremphase.scalar import field_moment

    def f(b):
        rhs = LN2 + field_moment(law, "ln_cosh", b) - b * field_moment(law, "h_tanh", b)
        return 0.5 * slope * b * b - rhs

    oracle = _bisect(f, 0.1, 5.0)
    got = solve.beta_c_general(solve.SelfConsistencyProblem(slope, law))
    assert got == pytest.approx(oracle, abs=1e-10)


def test_beta_c_general_degenerate_slope():
    with pytest.raises(DegenerateSlopeError):
        solve.beta_c_general(solve.SelfConsistencyProblem(0.0, PointMass(0.0)))


def test_beta_c_general_decreasing_in_slope():
    law = PointMass(0.5)
    betas = [
        solve.beta_c_general(solve.SelfConsistencyProblem(s, law))
        for s in (0.5, 1.0, 1.5, 2.0)
    ]
    assert all(b1 < b0 for b0, b1 in zip(betas, betas[1:]))


def test_beta_c_rem_anchors_and_monotone():
    assert solve.beta_c_rem(0.0) == SQRT_2LN2
    hs = (0.0, 0.3, 0.8, 1.5, 3.0)
    vals = [solve.beta_c_rem(h) for h in hs]
    assert all(v1 < v0 for v0, v1 in zip(vals, vals[1:]))
    assert all(0.0 < v <= SQRT_2LN2 for v in vals)


def test_beta_c_rem_small_field_expansion():
    h = 0.05
    assert abs(solve.beta_c_rem(h) - SQRT_2LN2 * (1.0 - h * h / 2.0)) < 1e-4


def test_beta_c_rem_lambert_asymptotics():
    h = 1e3
    bc = solve.beta_c_rem(h)
    assert 0.9 < h * bc / math.log(h) < 1.1


def test_beta_c_equivalence_rem_vs_general():
    # the self-consistency right side equals r(tanh(beta h)) for point masses
    for h in (0.0, 0.5, 1.0, 2.0, 5.0):
        a = solve.beta_c_rem(h)
        b = solve.beta_c_general(solve.SelfConsistencyProblem(1.0, PointMass(h)))
        assert abs(a - b) < 1e-10


def test_y_maximizer_fixed_point_residual():
    for beta in (0.6, 1.0, 1.7):
        for h in (0.05, 0.4, 2.0):
            y = solve.y_maximizer(SK, h, beta)
            resid = y - k_inverse_slope(
                solve.phi_zero_field(SK, beta, y) / (beta * h)
            )
            assert abs(resid) < 1e-10
            assert 0.0 < y < 1.0


def test_y_maximizer_small_field_limit():
    assert solve.y_maximizer(SK, 1e-6, 1.3) < 1e-9


def test_y_maximizer_small_field_expansion():
    h = 1e-3
    beta = 0.6  # below the freezing point beta_c = 1
    expect = (beta**2 / (2 * LN2)) * (1 + beta**2) ** -2
    assert abs(solve.y_maximizer(SK, h, beta) / h**2 / expect - 1.0) < 0.01
    beta = 1.7  # frozen branch
    expect = 1.0 / (8.0 * LN2)
    assert abs(solve.y_maximizer(SK, h, beta) / h**2 / expect - 1.0) < 0.01


def test_y_maximizer_increasing_in_h():
    ys = [solve.y_maximizer(SK, h, 1.2) for h in (0.1, 0.3, 0.9, 2.7)]
    assert all(y1 > y0 for y0, y1 in zip(ys, ys[1:]))


def test_y_maximizer_rejects_step_hulls():
    h = hull.build_concave_hull(Step((0.5, 1.0), (0.6, 0.4)))
    with pytest.raises(UnsupportedModelError):
        solve.y_maximizer(h, 0.5, 1.0)


def test_z_maximizer_boundaries():
    # Gamma = 0 gives p = ln 2 <= s(beta) when abar(1) = 0: z = 1
    assert solve.z_maximizer(SK, PointMass(0.0), 1.3) == 1.0
    # huge Gamma: p above the density at 0: z = 0
    assert solve.z_maximizer(SK, PointMass(50.0), 1.3) == 0.0


def test_z_maximizer_interior_grid_scan_oracle():
    beta = 1.5
    s_val = solve.phi_zero_field(SK, beta, 1.0)
    t_val = solve.phi_zero_field(SK, beta, 0.0)
    p_target = 0.5 * (s_val + t_val)
    # pick Gamma so the paramagnet pressure hits the midpoint
    g = _bisect(lambda g: ln_2cosh(beta * g) - p_target, 0.0, 50.0)
    z = solve.z_maximizer(SK, PointMass(g), beta)
    # 1e4-point grid scan of the density
    xs = np.linspace(0.0, 1.0, 10_001)
    phis = np.array([solve.phi_zero_field(SK, beta, x) for x in xs])
    z_grid = xs[phis >= ln_2cosh(beta * g)].max()
    assert z == pytest.approx(float(z_grid), abs=2e-4)
    assert 0.0 < z < 1.0


def test_z_maximizer_non_increasing_in_gamma():
    zs = [solve.z_maximizer(SK, PointMass(g), 1.4) for g in (0.1, 0.6, 1.2, 1.8)]
    assert all(z1 <= z0 + 1e-12 for z0, z1 in zip(zs, zs[1:]))


def test_z_maximizer_step_hull_exact_breakpoints():
    h = hull.build_concave_hull(Step((0.4, 1.0), (0.7, 0.3)))
    beta = 1.5
    # z jumps across segment pressures; values are breakpoints
    for g in (0.0, 0.4, 0.9, 2.0, 10.0):
        z = solve.z_maximizer(h, PointMass(g), beta)
        assert z in h.breakpoints


def test_sigma_diag_anchors_and_golden_oracle():
    # huge h drives the argument of k to zero: sigma -> 1
    assert solve.sigma_diag(1e8, PointMass(0.5), 1.0) == pytest.approx(1.0, abs=1e-6)
    # beta h = p(beta Gamma) gives exactly k(1)
    beta, g = 1.2, 0.8
    p = ln_2cosh(beta * g)
    h = p / beta
    k1 = 3.0 / 5.0 - math.log(5.0 / 4.0) / LN2
    assert solve.sigma_diag(h, PointMass(g), beta) == pytest.approx(k1, abs=1e-12)

    # independent 1-d search: golden section plus a parabolic vertex polish
    from gremphase.scalar import gamma as gamma_fn

    beta, g, h = 1.2, 0.8, 0.9
    p = ln_2cosh(beta * g)

    def f(y):
        return beta * h * gamma_fn(y) + (1.0 - y) * p

    lo, hi = 0.0, 1.0
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1, x2 = hi - invphi * (hi - lo), lo + invphi * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(40):
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = f(x1)
    # parabolic vertex through three points beats the sqrt(eps) golden floor
    c = 0.5 * (lo + hi)
    d = 1e-5
    fm, fc, fp = f(c - d), f(c), f(c + d)
    vertex = c + 0.5 * d * (fm - fp) / (fm - 2.0 * fc + fp)
    assert solve.sigma_diag(h, PointMass(g), beta) == pytest.approx(vertex, abs=1e-8)


def test_at_line_limits():
    assert abs(solve.at_line(SK, 1e-4) - 1.0) < 1e-3
    assert solve.at_line(SK, 100.0) > 10.0


def test_at_line_monotone_in_h():
    vals = [solve.at_line(SK, h) for h in (0.01, 0.1, 0.5, 2.0, 10.0)]
    assert all(v1 >= v0 for v0, v1 in zip(vals, vals[1:]))


def test_at_line_rejects_step_hulls():
    h = hull.build_concave_hull(Step((1.0,), (1.0,)))
    with pytest.raises(UnsupportedModelError):
        solve.at_line(h, 0.5)
