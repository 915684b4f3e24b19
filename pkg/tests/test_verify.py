import math

import numpy as np
import pytest

from gremphase import _kernels, pressure, verify
from gremphase.model import (
    LN2,
    BudgetExceededError,
    Hierarchical,
    IidField,
    MagneticEta,
    ModelSpec,
    PointMass,
    SizeGuardError,
    Step,
    StepEta,
    SymmetricTwoPoint,
    UnsupportedModelError,
)
REM = Step((1.0,), (1.0,))


def rem_spec(h=0.0, g=0.0, law=None):
    return ModelSpec(REM, IidField(law or PointMass(h)), PointMass(g))


# ---------------------------------------------------------------------------
# overlaps and hierarchical fields
# ---------------------------------------------------------------------------

def test_overlap_examples():
    assert verify.lexicographic_overlap([1, -1, 1], [1, -1, 1]) == 1.0
    assert verify.lexicographic_overlap([-1, 1, 1, 1], [1, 1, 1, 1]) == 0.25
    assert verify.lexicographic_overlap([1, 1, -1, 1], [1, 1, 1, 1]) == 0.75
    with pytest.raises(ValueError):
        verify.lexicographic_overlap([1, 1], [1, 1, 1])


def test_eval_hier_field_reference_and_flip():
    ov = StepEta((0.5, 1.0), (0.2, 0.9))
    n = 8
    ref = [1] * n
    assert verify.eval_hier_field(ov, ref, n) == pytest.approx(n * 0.9)
    flipped = [-1] + [1] * (n - 1)
    # overlap 1/8 < 0.5 so the first step value applies
    assert verify.eval_hier_field(ov, flipped, n) == pytest.approx(n * 0.2)


def test_eval_hier_field_magnetic_gamma_oracle():
    from gremphase.scalar import gamma_inverse

    def gamma_bisect(target):
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if gamma_inverse(mid) < target:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    n = 8
    # first disagreement at spin 4: overlap exactly 0.5, field 16 gamma(0.5)
    sigma = [1, 1, 1, -1, 1, 1, 1, 1]
    got = verify.eval_hier_field(MagneticEta(2.0), sigma, n)
    assert got == pytest.approx(16.0 * gamma_bisect(0.5), abs=1e-10)
    sigma = [1, 1, 1, 1, -1, 1, 1, 1]  # first disagreement at spin 5: q = 5/8
    got = verify.eval_hier_field(MagneticEta(2.0), sigma, n)
    assert got == pytest.approx(n * 2.0 * gamma_bisect(5.0 / 8.0), abs=1e-10)


# ---------------------------------------------------------------------------
# realizations
# ---------------------------------------------------------------------------

def test_realization_rem_shape_and_determinism():
    spec = rem_spec()
    r1 = verify.sample_realization(spec, 10, 42)
    r2 = verify.sample_realization(spec, 10, 42)
    assert r1.level_bits == (10,)
    assert len(r1.level_gaussians[0]) == 1024
    assert np.array_equal(r1.level_gaussians[0], r2.level_gaussians[0])
    assert np.array_equal(r1.b_weights, r2.b_weights)
    r3 = verify.sample_realization(spec, 10, 43)
    assert not np.array_equal(r1.level_gaussians[0], r3.level_gaussians[0])


def test_realization_covariance_identity_two_level():
    # symbolic expansion of shared-prefix terms: the constructed covariance
    # equals N * A(m/N) with m the shared prefix length, exactly per pair
    a = Step((0.5, 1.0), (0.3, 0.7))
    n = 4
    r = verify.sample_realization(ModelSpec(a, IidField(PointMass(0.0)), PointMass(0.0)), n, 0)

    def a_of(x):
        return sum(inc for pt, inc in zip(a.points, a.increments) if pt <= x + 1e-12)

    for s in range(1 << n):
        for t in range(1 << n):
            cov = n * sum(
                inc
                for k, inc in enumerate(a.increments)
                if (s >> (n - r.level_bits[k])) == (t >> (n - r.level_bits[k]))
            )
            shared = n
            for i in range(n):
                if ((s >> (n - 1 - i)) & 1) != ((t >> (n - 1 - i)) & 1):
                    shared = i
                    break
            assert cov == pytest.approx(n * a_of(shared / n), abs=1e-12)


def test_realization_block_partition_ceiling():
    a = Step((0.3, 0.7, 1.0), (0.2, 0.5, 0.3))
    r = verify.sample_realization(ModelSpec(a, IidField(PointMass(0.0)), PointMass(0.0)), 10, 1)
    assert r.level_bits == (3, 7, 10)
    assert [len(g) for g in r.level_gaussians] == [8, 128, 1024]


def test_realization_memory_guard(monkeypatch):
    monkeypatch.setenv("GREMPHASE_MAX_DIM", "1000")
    with pytest.raises(SizeGuardError):
        verify.sample_realization(rem_spec(), 12, 0)
    monkeypatch.setenv("GREMPHASE_MAX_DIM", "10000")
    verify.sample_realization(rem_spec(), 12, 0)


def test_realization_field_draws_follow_laws():
    from gremphase.model import FiniteMixture, GaussianLaw

    spec = ModelSpec(
        REM,
        IidField(GaussianLaw(0.5, 2.0)),
        FiniteMixture(((1.0, 0.25), (-2.0, 0.75))),
    )
    r = verify.sample_realization(spec, 14, 8)
    assert r.h_weights.shape == (14,)
    assert set(np.round(r.b_weights, 12)) <= {1.0, -2.0}
    # large-sample check of the gaussian law's moments
    big = verify.sample_realization(spec, 14, 8)
    assert np.array_equal(big.h_weights, r.h_weights)  # deterministic
    spec_wide = ModelSpec(Step((1.0,), (1.0,)), IidField(GaussianLaw(0.5, 2.0)), PointMass(0.0))
    draws = np.concatenate(
        [verify.sample_realization(spec_wide, 20, s).h_weights for s in range(500)]
    )
    assert abs(draws.mean() - 0.5) < 0.05
    assert abs(draws.std() - 2.0) < 0.05


def test_realization_requires_step_profile():
    from gremphase.model import SkCaricature

    with pytest.raises(UnsupportedModelError):
        verify.sample_realization(
            ModelSpec(SkCaricature(), IidField(PointMass(0.0)), PointMass(0.0)), 8, 0
        )


# ---------------------------------------------------------------------------
# exact classical sums
# ---------------------------------------------------------------------------

def test_classical_beta_zero_exact():
    r = verify.sample_realization(rem_spec(), 12, 3)
    assert verify.classical_pressure_exact(r, 0.0) == LN2


def test_classical_two_spin_hand_computation():
    # N = 2 REM with prescribed tree values: a 4-term log-sum-exp by hand
    spec = rem_spec(law=PointMass(0.5))
    r = verify.sample_realization(spec, 2, 0)
    r.level_gaussians[0][:] = np.array([0.3, -1.1, 0.7, 0.2])
    beta = 1.3
    coef = math.sqrt(2.0)
    # s = 0 (+1,+1), 1 (+1,-1), 2 (-1,+1), 3 (-1,-1); h weights are 0.5 each
    hs = {0: 1.0, 1: 0.0, 2: 0.0, 3: -1.0}
    terms = [
        math.exp(beta * (hs[s] - coef * r.level_gaussians[0][s])) for s in range(4)
    ]
    expect = math.log(sum(terms)) / 2.0
    assert verify.classical_pressure_exact(r, beta) == pytest.approx(expect, abs=1e-12)


def test_classical_matches_python_brute_force_iid():
    a = Step((0.5, 1.0), (0.6, 0.4))
    spec = ModelSpec(a, IidField(SymmetricTwoPoint(0.7)), PointMass(0.0))
    n = 8
    r = verify.sample_realization(spec, n, 5)
    beta = 1.1
    total = 0.0
    for s in range(1 << n):
        u = sum(
            c * r.level_gaussians[k][s >> (n - r.level_bits[k])]
            for k, c in enumerate(r.level_coefs)
        )
        h = sum(
            r.h_weights[j] * (1 - 2 * ((s >> (n - 1 - j)) & 1)) for j in range(n)
        )
        total += math.exp(beta * (h - u))
    expect = math.log(total) / n
    assert verify.classical_pressure_exact(r, beta) == pytest.approx(expect, abs=1e-12)


def test_classical_matches_python_brute_force_hier():
    a = Step((0.5, 1.0), (0.6, 0.4))
    ov = StepEta((0.25, 1.0), (0.4, 1.1))
    spec = ModelSpec(a, Hierarchical(ov), PointMass(0.0))
    n = 8
    r = verify.sample_realization(spec, n, 9)
    beta = 0.9
    total = 0.0
    for s in range(1 << n):
        u = sum(
            c * r.level_gaussians[k][s >> (n - r.level_bits[k])]
            for k, c in enumerate(r.level_coefs)
        )
        sigma = [1 - 2 * ((s >> (n - 1 - j)) & 1) for j in range(n)]
        h = verify.eval_hier_field(ov, sigma, n)
        total += math.exp(beta * (h - u))
    expect = math.log(total) / n
    assert verify.classical_pressure_exact(r, beta) == pytest.approx(expect, abs=1e-12)


def test_classical_backends_agree():
    spec = rem_spec(law=PointMass(0.4))
    r = verify.sample_realization(spec, 14, 2)
    xcat, offs, shifts, coefs = r.tree_arrays()
    v_np = _kernels.lse_iid_numpy(xcat, offs, shifts, coefs, r.h_weights, 1.2, 14)
    if _kernels.lse_iid_numba is not None:
        v_nb = _kernels.lse_iid_numba(xcat, offs, shifts, coefs, r.h_weights, 1.2, 14)
        assert v_np == pytest.approx(v_nb, abs=1e-12)
    tab = verify._hier_table(MagneticEta(0.7), 14)
    h_np = _kernels.lse_hier_numpy(xcat, offs, shifts, coefs, tab, 1.2, 14)
    if _kernels.lse_hier_numba is not None:
        h_nb = _kernels.lse_hier_numba(xcat, offs, shifts, coefs, tab, 1.2, 14)
        assert h_np == pytest.approx(h_nb, abs=1e-12)


def test_classical_mode_checks():
    r = verify.sample_realization(rem_spec(), 6, 0)
    with pytest.raises(UnsupportedModelError):
        verify.classical_pressure_exact(r, 1.0, mode="hier")
    with pytest.raises(ValueError):
        verify.classical_pressure_exact(r, 1.0, mode="bogus")


def test_classical_size_guard():
    with pytest.raises(SizeGuardError):
        spec = rem_spec()
        real = verify.Realization(
            spec=spec,
            n_spins=29,
            seed=0,
            level_bits=(29,),
            level_gaussians=(np.zeros(1),),
            level_coefs=(1.0,),
            h_weights=np.zeros(29),
            b_weights=np.zeros(29),
        )
        verify.classical_pressure_exact(real, 1.0)


# ---------------------------------------------------------------------------
# quantum pressure
# ---------------------------------------------------------------------------

def test_ed_single_spin_exact():
    r = verify.sample_realization(rem_spec(), 1, 5)
    r.level_gaussians[0][:] = 0.0
    r.b_weights[:] = 2.0
    res = verify.quantum_pressure_ed(r, 1.3)
    assert res.method == "dense"
    assert res.phi == pytest.approx(math.log(2.0 * math.cosh(2.6)), abs=1e-12)


def test_ed_two_spin_product_structure():
    spec = rem_spec(law=PointMass(0.7), g=1.1)
    r = verify.sample_realization(spec, 2, 5)
    r.level_gaussians[0][:] = 0.0
    expect = math.log((2.0 * math.cosh(0.9 * math.hypot(0.7, 1.1))) ** 2) / 2.0
    assert verify.quantum_pressure_ed(r, 0.9).phi == pytest.approx(expect, abs=1e-10)


def test_ed_diagonal_consistency_with_classical():
    spec = ModelSpec(
        Step((0.5, 1.0), (0.6, 0.4)), IidField(PointMass(0.5)), PointMass(0.0)
    )
    r = verify.sample_realization(spec, 10, 7)
    a = verify.quantum_pressure_ed(r, 1.2).phi
    b = verify.classical_pressure_exact(r, 1.2)
    assert abs(a - b) < 1e-9


def test_ed_gauge_invariance_single_sign_flip():
    spec = rem_spec(h=0.3, g=0.5)
    r = verify.sample_realization(spec, 8, 3)
    base = verify.quantum_pressure_ed(r, 0.8).phi
    for j in (0, 3, 7):
        r.b_weights[j] *= -1.0
        assert abs(verify.quantum_pressure_ed(r, 0.8).phi - base) < 1e-9
        r.b_weights[j] *= -1.0


def test_ed_hierarchical_diagonal():
    spec = ModelSpec(REM, Hierarchical(MagneticEta(0.8)), PointMass(0.0))
    r = verify.sample_realization(spec, 8, 11)
    a = verify.quantum_pressure_ed(r, 1.1).phi
    b = verify.classical_pressure_exact(r, 1.1)
    assert abs(a - b) < 1e-9


def test_slq_matches_dense():
    spec = rem_spec(h=0.3, g=0.5)
    r = verify.sample_realization(spec, 10, 1)
    dense = verify.quantum_pressure_ed(r, 0.8, method="dense")
    est = verify.quantum_pressure_ed(r, 0.8, method="slq", probes=30, steps=60)
    assert est.stderr is not None
    assert abs(est.phi - dense.phi) < max(5.0 * est.stderr, 1e-4)


def test_ed_size_guards():
    spec = rem_spec()
    r = verify.sample_realization(spec, 13, 0)
    with pytest.raises(SizeGuardError):
        verify.quantum_pressure_ed(r, 1.0, method="dense")
    assert verify.quantum_pressure_ed(r, 1.0).method == "slq"


def test_ed_seed_determinism():
    spec = rem_spec(h=0.2, g=0.4)
    a = verify.quantum_pressure_ed(verify.sample_realization(spec, 8, 21), 1.0).phi
    b = verify.quantum_pressure_ed(verify.sample_realization(spec, 8, 21), 1.0).phi
    assert a == b


# ---------------------------------------------------------------------------
# occupation counting
# ---------------------------------------------------------------------------

def test_occupation_trivial_point():
    spec = rem_spec(law=PointMass(1.0))
    r = verify.sample_realization(spec, 16, 1)
    emp, ana, feas = verify.occupation_entropy_check(r, verify.LDPoint((0.0,), (0.0,)))
    assert feas
    assert ana == pytest.approx(LN2, abs=1e-12)
    assert emp is not None and abs(emp - LN2) < 0.12


def test_occupation_matches_python_brute_force():
    a = Step((0.5, 1.0), (0.6, 0.4))
    spec = ModelSpec(a, IidField(PointMass(1.0)), PointMass(0.0))
    n = 10
    r = verify.sample_realization(spec, n, 4)
    pt = verify.LDPoint((0.3, 0.2), (0.1, 0.05))
    emp, ana, feas = verify.occupation_entropy_check(r, pt)
    count = 0
    for s in range(1 << n):
        ok = True
        prev = 0
        for k, nb in enumerate(r.level_bits):
            x_val = r.level_gaussians[k][s >> (n - nb)]
            if math.sqrt(a.increments[k]) * x_val > -math.sqrt(n) * pt.energies[k]:
                ok = False
                break
            block = sum(
                r.h_weights[j] * (1 - 2 * ((s >> (n - 1 - j)) & 1))
                for j in range(prev, nb)
            )
            if block > -n * pt.fields[k]:
                ok = False
                break
            prev = nb
        count += ok
    if count == 0:
        assert emp is None
    else:
        assert emp == pytest.approx(math.log(count) / n, abs=1e-12)


def test_occupation_infeasible_point_zero_count():
    spec = rem_spec(law=PointMass(1.0))
    pt = verify.LDPoint((1.1,), (0.8,))
    for seed in range(3):
        r = verify.sample_realization(spec, 18, seed)
        emp, ana, feas = verify.occupation_entropy_check(r, pt)
        assert emp is None
        assert not feas
        assert ana < 0


def test_occupation_analytic_entropy_value():
    from gremphase.scalar import RateFunction

    spec = rem_spec(law=PointMass(1.0))
    r = verify.sample_realization(spec, 8, 0)
    pt = verify.LDPoint((0.4,), (0.3,))
    _, ana, feas = verify.occupation_entropy_check(r, pt)
    rate = RateFunction(PointMass(1.0))
    assert ana == pytest.approx(LN2 - 0.4**2 / 2 - rate(0.3), abs=1e-12)
    assert feas


# ---------------------------------------------------------------------------
# variational oracle
# ---------------------------------------------------------------------------

def test_oracle_rem_frozen_boundary():
    got = verify.variational_oracle(REM, PointMass(0.0), 2.0)
    assert got == pytest.approx(2.0 * math.sqrt(2.0 * LN2), abs=1e-8)


def test_oracle_rem_interior_optimum():
    got = verify.variational_oracle(REM, PointMass(0.0), 1.0)
    assert got == pytest.approx(LN2 + 0.5, abs=1e-10)


def test_oracle_two_level_with_field():
    a = Step((0.5, 1.0), (0.6, 0.4))
    for beta in (0.7, 1.3, 2.5):
        vo = verify.variational_oracle(a, PointMass(1.0), beta)
        pc = pressure.pressure_grem_classical(a, PointMass(1.0), beta)
        assert abs(vo - pc) < 1e-6


def test_oracle_budget_guard():
    a = Step((0.2, 0.4, 0.6, 0.8, 1.0), (0.2,) * 5)
    with pytest.raises(BudgetExceededError):
        verify.variational_oracle(a, PointMass(0.0), 1.0)


def test_oracle_four_levels_supported():
    a = Step((0.25, 0.5, 0.75, 1.0), (0.4, 0.3, 0.2, 0.1))
    vo = verify.variational_oracle(a, PointMass(0.5), 1.5)
    pc = pressure.pressure_grem_classical(a, PointMass(0.5), 1.5)
    assert abs(vo - pc) < 1e-6
