import math

import numpy as np
import pytest

from gremphase import critical, hull, pressure, solve
from gremphase.model import (
    LN2,
    SkCaricature,
    Step,
    UnsupportedModelError,
)

SQRT_2LN2 = math.sqrt(2.0 * LN2)
SK = hull.build_concave_hull(SkCaricature())


def test_gamma_c_rem_high_temperature_limit():
    for h in (0.0, 1.0, 5.0):
        assert critical.gamma_c_rem(1e-4, h) == pytest.approx(1.0, abs=1e-3)


def test_gamma_c_rem_zero_temperature_limit():
    # h = 0: arcosh(exp(beta sqrt(2 ln2))/2)/beta -> sqrt(2 ln 2)
    assert critical.gamma_c_rem(60.0, 0.0) == pytest.approx(SQRT_2LN2, abs=1e-10)
    # matches the stated ground-state form at finite h
    h = 0.7
    bc = solve.beta_c_rem(h)
    expect = math.sqrt((bc + math.tanh(bc * h) * h) ** 2 - h * h)
    assert critical.gamma_c_rem(200.0, h) == pytest.approx(expect, abs=1e-6)


def test_gamma_c_rem_large_field_asymptotics():
    h = 1e3
    bc = solve.beta_c_rem(h)
    assert 0.9 < critical.gamma_c_rem(1.0, h) / math.sqrt(h * bc) < 1.1


def test_gamma_c_rem_strictly_increasing_in_h():
    vals = [critical.gamma_c_rem(1.3, h) for h in (0.0, 0.4, 1.0, 2.5, 6.0)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_gamma_c_rem_phase_line_consistency():
    from gremphase.model import Phase

    for beta, h in ((0.8, 0.3), (1.6, 0.9), (2.5, 0.0)):
        gc = critical.gamma_c_rem(beta, h)
        below = pressure.pressure_qrem(h, gc * (1 - 1e-8), beta)
        above = pressure.pressure_qrem(h, gc * (1 + 1e-8), beta)
        assert below.phase is not Phase.QUANTUM_PARAMAGNET
        assert above.phase is Phase.QUANTUM_PARAMAGNET


def test_gamma_c_hier_limits():
    # h -> 0 recovers the zero-field line
    g0 = critical.gamma_c_hier(SK, 2.0, 0.0)
    assert critical.gamma_c_hier(SK, 2.0, 1e-5) == pytest.approx(g0, abs=1e-4)
    # zero-temperature magnetic transition of the SK caricature
    assert critical.gamma_c_hier(SK, 1e3, 0.0) == pytest.approx(2.0 * LN2, abs=1e-6)


def test_gamma_c_hier_non_increasing_in_h():
    vals = [critical.gamma_c_hier(SK, 1.7, h) for h in (0.0, 0.2, 0.7, 1.5, 4.0)]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


def test_gamma_c_hier_rejects_step_profiles():
    h = hull.build_concave_hull(Step((1.0,), (1.0,)))
    with pytest.raises(UnsupportedModelError):
        critical.gamma_c_hier(h, 1.0, 0.5)


def test_gamma_c_secondary_cases():
    assert critical.gamma_c_secondary(SK, 2.0) == 0.0
    # hull with terminal slope 0.5: s(beta) from the density, here frozen
    h = hull.build_concave_hull(Step((0.5, 1.0), (0.75, 0.25)))
    beta = 2.0
    s_val = solve.phi_zero_field(h, beta, 1.0)
    assert s_val == pytest.approx(beta * math.sqrt(2 * LN2 * 0.5), abs=1e-12)
    expect = math.acosh(0.5 * math.exp(s_val)) / beta
    assert critical.gamma_c_secondary(h, beta) == pytest.approx(expect, abs=1e-12)


def test_gamma_c_secondary_small_beta_series():
    # as beta -> 0 the line tends to sqrt(abar(1)) via arcosh(1+u) ~ sqrt(2u)
    h = hull.build_concave_hull(Step((0.5, 1.0), (0.75, 0.25)))
    beta = 1e-5
    s_val = solve.phi_zero_field(h, beta, 1.0)
    u = math.expm1(s_val - LN2)
    series = math.sqrt(2 * u) / beta
    assert critical.gamma_c_secondary(h, beta) == pytest.approx(series, rel=1e-4)
    assert critical.gamma_c_secondary(h, beta) == pytest.approx(
        math.sqrt(0.5), abs=1e-4
    )


def test_gamma_c_hier_on_fine_sampled_profile():
    # a finely sampled concave grid counts as smooth and tracks the analytic line
    from gremphase.model import Sampled
    from gremphase.scalar import gamma

    xs = np.linspace(0.0, 1.0, 20_001)
    vals = np.asarray(gamma(xs)) ** 2
    vals[-1] = 1.0
    sampled_hull = hull.build_concave_hull(Sampled(tuple(zip(xs, vals))))
    assert sampled_hull.smooth
    for beta, h in ((1.5, 0.0), (2.0, 0.4)):
        a = critical.gamma_c_hier(sampled_hull, beta, h)
        b = critical.gamma_c_hier(SK, beta, h)
        assert a == pytest.approx(b, abs=2e-3)


def test_exponent_fit_exact_power_law():
    hs = np.logspace(-3, -1, 30)
    curve = [(h, 3.0 * h * h) for h in hs]
    exponent, pre, r2 = critical.exponent_fit(curve, (1e-3, 1e-1))
    assert exponent == pytest.approx(2.0, abs=1e-6)
    assert pre == pytest.approx(math.log(3.0), abs=1e-6)
    assert r2 > 1 - 1e-12


def test_exponent_fit_dominated_correction():
    hs = np.logspace(-3, -2, 20)
    curve = [(h, 3.0 * h * h + h**4) for h in hs]
    exponent, _, _ = critical.exponent_fit(curve, (1e-3, 1e-2))
    assert exponent == pytest.approx(2.0, abs=1e-3)


def test_exponent_fit_insufficient_data():
    with pytest.raises(critical.InsufficientDataError):
        critical.exponent_fit([(0.1, 1.0)] * 3, (0.01, 1.0))
    with pytest.raises(critical.InsufficientDataError):
        critical.exponent_fit([(h, -1.0) for h in (0.1, 0.2, 0.3, 0.4, 0.5)], (0.05, 1.0))
