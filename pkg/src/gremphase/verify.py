"""Finite-N and brute-force oracles.

Reproducible GREM tree realizations (counter-based RNG keyed by seed and
level), exact classical sums over the cube, dense exact diagonalization with
an optional stochastic Lanczos trace estimator, occupation-number entropy
counting, and the constrained variational oracle for the classical pressure.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal, eigvalsh
from scipy.special import logsumexp

from .model import (
    LN2,
    BudgetExceededError,
    FieldLaw,
    FiniteMixture,
    GaussianLaw,
    HierarchicalOverlap,
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
from . import _kernels
from .scalar import RateFunction, gamma as gamma_fn

_MAX_CLASSICAL_N = 28
_MAX_DENSE_N = 12
_MAX_SLQ_N = 20
_MAX_OCCUPATION_N = 24
_FIELD_TAG_H = 1_000_003
_FIELD_TAG_B = 1_000_033
_SLQ_TAG = 1_000_067


def _max_entries() -> int:
    val = os.environ.get("GREMPHASE_MAX_DIM")
    return int(val) if val else 1 << 26


def _stream(seed: int, tag: int) -> np.random.Generator:
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(tag)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _draw_field(law: FieldLaw, n: int, rng: np.random.Generator) -> np.ndarray:
    if isinstance(law, PointMass):
        return np.full(n, law.value)
    if isinstance(law, SymmetricTwoPoint):
        signs = rng.integers(0, 2, size=n) * 2 - 1
        return law.magnitude * signs.astype(np.float64)
    if isinstance(law, FiniteMixture):
        vals = np.array([v for v, _ in law.atoms])
        wts = np.array([w for _, w in law.atoms])
        idx = rng.choice(len(vals), size=n, p=wts / wts.sum())
        return vals[idx]
    if isinstance(law, GaussianLaw):
        return law.mean + law.std * rng.standard_normal(n)
    raise TypeError(f"unknown field law {type(law).__name__}")


@dataclass
class Realization:
    """One finite-N draw of the tree Gaussians and field weights.

    Bit-identical reproducible from (spec, n_spins, seed); the level-k tree
    array holds one standard Gaussian per k-prefix of the spin string.
    """

    spec: ModelSpec
    n_spins: int
    seed: int
    level_bits: tuple[int, ...]
    level_gaussians: tuple[np.ndarray, ...]
    level_coefs: tuple[float, ...]
    h_weights: np.ndarray | None
    b_weights: np.ndarray

    @property
    def level_increments(self) -> tuple[float, ...]:
        a = self.spec.distribution
        return a.increments

    def tree_arrays(self):
        """(concatenated gaussians, offsets, shifts, coefs) for the kernels."""
        xcat = np.concatenate(self.level_gaussians)
        sizes = [len(g) for g in self.level_gaussians]
        offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)
        shifts = np.array(
            [self.n_spins - nb for nb in self.level_bits], dtype=np.int64
        )
        coefs = np.array(self.level_coefs)
        return xcat, offsets, shifts, coefs


def _ceil_block(x: float, n: int) -> int:
    return int(math.ceil(x * n - 1e-9))


def sample_realization(spec: ModelSpec, n_spins: int, seed: int) -> Realization:
    """Draw a GREM tree realization plus field weights; step profiles only."""
    a = spec.distribution
    if not isinstance(a, Step):
        raise UnsupportedModelError("finite-N realizations need a step profile")
    if n_spins < 1:
        raise ValueError("n_spins must be >= 1")
    level_bits = tuple(_ceil_block(x, n_spins) for x in a.points)
    total_entries = sum(1 << nb for nb in level_bits)
    if total_entries > _max_entries():
        raise SizeGuardError(
            f"tree would hold {total_entries} gaussians; raise GREMPHASE_MAX_DIM "
            "to allow this size"
        )
    gaussians = []
    for lvl, nb in enumerate(level_bits):
        rng = _stream(seed, lvl)
        gaussians.append(rng.standard_normal(1 << nb))
    coefs = tuple(math.sqrt(inc * n_spins) for inc in a.increments)
    h_weights = None
    if isinstance(spec.longitudinal, IidField):
        h_weights = _draw_field(
            spec.longitudinal.law, n_spins, _stream(seed, _FIELD_TAG_H)
        )
    b_weights = _draw_field(spec.transversal, n_spins, _stream(seed, _FIELD_TAG_B))
    return Realization(
        spec=spec,
        n_spins=n_spins,
        seed=seed,
        level_bits=level_bits,
        level_gaussians=tuple(gaussians),
        level_coefs=coefs,
        h_weights=h_weights,
        b_weights=b_weights,
    )


# ---------------------------------------------------------------------------
# overlaps and hierarchical fields
# ---------------------------------------------------------------------------

def lexicographic_overlap(sigma, sigma_prime) -> float:
    """1 for equal vectors, else (first disagreeing 1-based index) / N."""
    s1 = np.asarray(sigma)
    s2 = np.asarray(sigma_prime)
    if s1.shape != s2.shape or s1.ndim != 1 or len(s1) < 1:
        raise ValueError("spin vectors must share a length N >= 1")
    n = len(s1)
    diff = np.nonzero(s1 != s2)[0]
    if len(diff) == 0:
        return 1.0
    return (int(diff[0]) + 1) / n


def eta_value(overlap: HierarchicalOverlap, q: float) -> float:
    """Overlap function value eta(q), right-continuous for step overlaps."""
    if isinstance(overlap, MagneticEta):
        return overlap.strength * float(gamma_fn(q))
    if not isinstance(overlap, StepEta):
        raise TypeError(f"unknown overlap {type(overlap).__name__}")
    if q >= overlap.points[-1]:
        return overlap.values[-1]
    for pt, v in zip(overlap.points, overlap.values):
        if q < pt:
            return v
    return overlap.values[-1]


def eval_hier_field(overlap: HierarchicalOverlap, sigma, n_spins: int) -> float:
    """Hierarchical field N * eta(q(sigma, all-plus reference))."""
    ref = np.ones(n_spins, dtype=np.asarray(sigma).dtype)
    q = lexicographic_overlap(sigma, ref)
    return n_spins * eta_value(overlap, q)


def _hier_table(overlap: HierarchicalOverlap, n_spins: int) -> np.ndarray:
    """h(sigma) indexed by the first disagreement j = 1..N (j = N covers the
    reference state itself since q = 1 either way)."""
    tab = np.zeros(n_spins + 1)
    for j in range(1, n_spins + 1):
        tab[j] = n_spins * eta_value(overlap, j / n_spins)
    return tab


# ---------------------------------------------------------------------------
# exact classical sums
# ---------------------------------------------------------------------------

def classical_pressure_exact(
    realization: Realization, beta: float, mode: str | None = None
) -> float:
    """(1/N) ln sum over the cube of exp(-beta (U - h)), exact log-sum-exp."""
    n = realization.n_spins
    if n > _MAX_CLASSICAL_N:
        raise SizeGuardError(f"classical sum capped at N = {_MAX_CLASSICAL_N}")
    if (1 << n) > _max_entries():
        raise SizeGuardError("enumeration exceeds GREMPHASE_MAX_DIM")
    longitudinal = realization.spec.longitudinal
    inferred = "iid" if isinstance(longitudinal, IidField) else "hier"
    aliases = {"iidField": "iid", "hierField": "hier", "iid": "iid", "hier": "hier"}
    if mode is None:
        mode = inferred
    elif mode in aliases:
        mode = aliases[mode]
    else:
        raise ValueError(f"mode must be 'iidField' or 'hierField', got {mode!r}")
    if mode != inferred:
        raise UnsupportedModelError(
            f"realization was sampled for a {inferred!r} longitudinal field"
        )
    xcat, offsets, shifts, coefs = realization.tree_arrays()
    if mode == "iid":
        return float(
            _kernels.lse_iid(
                xcat, offsets, shifts, coefs, realization.h_weights, beta, n
            )
        )
    tab = _hier_table(longitudinal.overlap, n)
    return float(_kernels.lse_hier(xcat, offsets, shifts, coefs, tab, beta, n))


def config_energies(realization: Realization) -> np.ndarray:
    """Diagonal energies U - h for every configuration (small N only)."""
    n = realization.n_spins
    if n > _MAX_SLQ_N:
        raise SizeGuardError(f"dense energy table capped at N = {_MAX_SLQ_N}")
    xcat, offsets, shifts, coefs = realization.tree_arrays()
    s_arr = np.arange(1 << n, dtype=np.int64)
    u = _kernels._tree_energy_chunk(s_arr, xcat, offsets, shifts, coefs)
    if isinstance(realization.spec.longitudinal, IidField):
        h = np.zeros(1 << n)
        for j in range(1, n + 1):
            bit = (s_arr >> (n - j)) & 1
            h += np.where(bit == 1, -realization.h_weights[j - 1], realization.h_weights[j - 1])
    else:
        tab = _hier_table(realization.spec.longitudinal.overlap, n)
        _, exp2 = np.frexp(s_arr.astype(np.float64))
        j_first = np.where(s_arr == 0, n, n - (exp2 - 1))
        h = tab[j_first]
    return u - h


# ---------------------------------------------------------------------------
# quantum pressure: dense ED and stochastic Lanczos quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EdResult:
    phi: float
    stderr: float | None
    method: str


def dense_hamiltonian(realization: Realization) -> np.ndarray:
    n = realization.n_spins
    if n > _MAX_DENSE_N:
        raise SizeGuardError(f"dense ED capped at N = {_MAX_DENSE_N}")
    dim = 1 << n
    ham = np.zeros((dim, dim))
    idx = np.arange(dim)
    ham[idx, idx] = config_energies(realization)
    for j in range(1, n + 1):
        ham[idx, idx ^ (1 << (n - j))] = -realization.b_weights[j - 1]
    return ham


def _apply_hamiltonian(diag: np.ndarray, b_weights: np.ndarray, n: int, x: np.ndarray) -> np.ndarray:
    y = diag * x
    for j in range(1, n + 1):
        b = n - j
        flipped = x.reshape(-1, 2, 1 << b)[:, ::-1, :].reshape(-1)
        y -= b_weights[j - 1] * flipped
    return y


def _slq_pressure(realization: Realization, beta: float, probes: int, steps: int):
    n = realization.n_spins
    dim = 1 << n
    diag = config_energies(realization)
    b_w = realization.b_weights
    rng = _stream(realization.seed, _SLQ_TAG)
    steps = min(steps, dim)
    probe_logs = np.empty(probes)
    for pi in range(probes):
        v = (rng.integers(0, 2, size=dim) * 2 - 1).astype(np.float64)
        q = v / math.sqrt(dim)
        alphas, betas = [], []
        q_prev = np.zeros(dim)
        beta_prev = 0.0
        qk = q
        for k in range(steps):
            w = _apply_hamiltonian(diag, b_w, n, qk) - beta_prev * q_prev
            alpha = float(qk @ w)
            w -= alpha * qk
            alphas.append(alpha)
            beta_k = float(np.linalg.norm(w))
            if k + 1 < steps:
                if beta_k < 1e-12:
                    break
                betas.append(beta_k)
                q_prev, qk, beta_prev = qk, w / beta_k, beta_k
        theta, vecs = eigh_tridiagonal(np.array(alphas), np.array(betas[: len(alphas) - 1]))
        weights = vecs[0, :] ** 2
        # v^T e^{-beta H} v = dim * sum_i w_i e^{-beta theta_i}, kept in logs
        probe_logs[pi] = n * LN2 + logsumexp(-beta * theta, b=weights)
    log_trace = logsumexp(probe_logs) - math.log(probes)
    phi = log_trace / n
    rel = np.exp(probe_logs - probe_logs.max())
    se_rel = float(rel.std(ddof=1) / (rel.mean() * math.sqrt(probes)))
    return phi, se_rel / n


def quantum_pressure_ed(
    realization: Realization,
    beta: float,
    method: str = "auto",
    probes: int = 30,
    steps: int = 60,
) -> EdResult:
    """(1/N) ln Tr exp(-beta H): dense eigendecomposition up to N = 12, a
    Rademacher-probe Lanczos quadrature estimate (with standard error) up to
    N = 20."""
    n = realization.n_spins
    if method == "auto":
        method = "dense" if n <= _MAX_DENSE_N else "slq"
    if method == "dense":
        eigs = eigvalsh(dense_hamiltonian(realization))
        phi = float(logsumexp(-beta * eigs)) / n
        return EdResult(phi=phi, stderr=None, method="dense")
    if method != "slq":
        raise ValueError(f"unknown method {method!r}")
    if n > _MAX_SLQ_N:
        raise SizeGuardError(f"stochastic trace estimate capped at N = {_MAX_SLQ_N}")
    phi, se = _slq_pressure(realization, beta, probes, steps)
    return EdResult(phi=phi, stderr=se, method="slq")


# ---------------------------------------------------------------------------
# occupation-number entropy counting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LDPoint:
    energies: tuple[float, ...]
    fields: tuple[float, ...]


def entropy_analytic(a: Step, law: FieldLaw, point: LDPoint) -> float:
    """ln 2 minus the per-level Gaussian and field large-deviation costs."""
    rate = RateFunction(law)
    xs = (0.0,) + a.points
    total = LN2
    for j, (inc, e_j, y_j) in enumerate(zip(a.increments, point.energies, point.fields)):
        length = xs[j + 1] - xs[j]
        if inc > 0.0:
            total -= 0.5 * e_j * e_j / inc
        elif e_j > 0.0:
            return -math.inf
        xi = y_j / length if length > 0.0 else (0.0 if y_j == 0.0 else math.inf)
        cost = rate(xi) if math.isfinite(xi) else math.inf
        if not math.isfinite(cost):
            return -math.inf
        total -= length * cost
    return total


def point_feasible(a: Step, law: FieldLaw, point: LDPoint) -> bool:
    """Strict membership in the open constraint set (every prefix cost below
    its cap)."""
    rate = RateFunction(law)
    xs = (0.0,) + a.points
    acc = 0.0
    for j, (inc, e_j, y_j) in enumerate(zip(a.increments, point.energies, point.fields)):
        length = xs[j + 1] - xs[j]
        if inc > 0.0:
            acc += 0.5 * e_j * e_j / inc
        elif e_j > 0.0:
            return False
        xi = y_j / length if length > 0.0 else (0.0 if y_j == 0.0 else math.inf)
        cost = rate(xi) if math.isfinite(xi) else math.inf
        if not math.isfinite(cost):
            return False
        acc += length * cost
        if not acc < xs[j + 1] * LN2:
            return False
    return True


def occupation_entropy_check(realization: Realization, point: LDPoint):
    """Count configurations meeting all level thresholds.

    Returns (empirical entropy or None when the count is 0, analytic entropy,
    strict feasibility).  Thresholds are sqrt(a_k) X <= -sqrt(N) E_k and
    block field h_k <= -N y_k, both non-strict as in the counting definition.
    """
    n = realization.n_spins
    if n > _MAX_OCCUPATION_N:
        raise SizeGuardError(f"occupation counting capped at N = {_MAX_OCCUPATION_N}")
    if not isinstance(realization.spec.longitudinal, IidField):
        raise UnsupportedModelError("occupation counting needs an iid longitudinal field")
    a = realization.spec.distribution
    law = realization.spec.longitudinal.law
    if len(point.energies) != len(a.points) or len(point.fields) != len(a.points):
        raise ValueError("point must carry one (E, y) pair per level")

    passed = np.ones(1, dtype=bool)
    prev_bits = 0
    for k, (inc, nb) in enumerate(zip(a.increments, realization.level_bits)):
        e_k = point.energies[k]
        y_k = point.fields[k]
        x_k = realization.level_gaussians[k]
        if inc > 0.0:
            # sqrt(a_k) X <= -sqrt(N) E_k with X standard normal
            pass_x = x_k <= -math.sqrt(n / inc) * e_k
        else:
            pass_x = np.full(len(x_k), e_k <= 0.0)
        width = nb - prev_bits
        if width > 0:
            block = _kernels._low_field_sums(
                realization.h_weights[prev_bits:nb], width, width
            )
            pass_h = block <= -n * y_k
        else:
            pass_h = np.array([y_k <= 0.0])
        prefix = np.arange(1 << nb, dtype=np.int64)
        parent_ok = passed[prefix >> width] if width > 0 else passed[prefix]
        block_idx = prefix & ((1 << width) - 1)
        passed = parent_ok & pass_x & pass_h[block_idx]
        prev_bits = nb
    count = int(passed.sum())
    empirical = math.log(count) / n if count > 0 else None
    analytic = entropy_analytic(a, law, point)
    return empirical, analytic, point_feasible(a, law, point)


# ---------------------------------------------------------------------------
# constrained variational oracle
# ---------------------------------------------------------------------------

class _RateTable:
    """Tabulated rate function with both directions interpolated.

    Used only to steer the search; the reported oracle value is re-evaluated
    with the exact rate function at the final configuration.
    """

    def __init__(self, rate: RateFunction, points: int = 2049):
        self.rate = rate
        self.m_abs = rate.abs_first
        if self.m_abs == 0.0:
            self.max_cost = 0.0
            return
        xi = np.linspace(0.0, self.m_abs * (1.0 - 1e-12), points)
        costs = np.array([rate(x) for x in xi])
        from scipy.interpolate import PchipInterpolator

        self._fwd = PchipInterpolator(xi, costs)
        cu, idx = np.unique(costs, return_index=True)
        self._inv = PchipInterpolator(cu, xi[idx])
        self.max_cost = float(costs[-1])

    def cost(self, xi: float) -> float:
        if self.m_abs == 0.0:
            return 0.0 if xi == 0.0 else math.inf
        if xi >= self.m_abs:
            return math.inf if xi > self.m_abs else self.max_cost
        return float(self._fwd(xi))

    def xi_for_cost(self, c: float) -> float:
        if self.m_abs == 0.0 or c <= 0.0:
            return 0.0
        if c >= self.max_cost:
            return self.m_abs * (1.0 - 1e-12)
        return float(self._inv(c))


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_argmax(f, lo: float, hi: float, iters: int = 48) -> float:
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = f(x1)
    return 0.5 * (lo + hi)


class _LevelAllocator:
    """Best reward of one level at a given large-deviation cost budget."""

    def __init__(self, inc: float, length: float, table: _RateTable, beta: float):
        self.inc = inc
        self.length = length
        self.table = table
        self.beta = beta

    def field_cost(self, y: float) -> float:
        if self.length == 0.0:
            return 0.0 if y == 0.0 else math.inf
        return self.length * self.table.cost(y / self.length)

    def split_value(self, cost_e: float, cost_y: float):
        e_val = math.sqrt(2.0 * self.inc * cost_e) if self.inc > 0.0 else 0.0
        y_val = self.length * self.table.xi_for_cost(cost_y / self.length) if self.length > 0.0 else 0.0
        spent = (0.5 * e_val * e_val / self.inc if self.inc > 0.0 else 0.0) + self.field_cost(y_val)
        return self.beta * (e_val + y_val) - spent, e_val, y_val

    def best_at_cost(self, cost: float):
        if cost <= 0.0:
            return 0.0, 0.0, 0.0
        if self.inc == 0.0:
            return self.split_value(0.0, cost)
        if self.length == 0.0 or self.table.m_abs == 0.0:
            return self.split_value(cost, 0.0)
        ce = _golden_argmax(lambda c: self.split_value(c, cost - c)[0], 0.0, cost)
        return self.split_value(ce, cost - ce)


def variational_oracle(a: Step, law: FieldLaw, beta: float, grid_points: int = 64) -> float:
    """Maximize beta (sum E + sum y) + S(E, y) over the closed constraint set.

    Coarse stage: vectorized grid over per-level cost budgets with the prefix
    caps enforced.  Refinement: golden-section reallocation of cost between
    levels (the objective is concave, the feasible set convex), then an exact
    polish of the (E, y) configuration with the true rate function.
    Independent of the per-segment pressure formulas it cross-checks.
    """
    if not isinstance(a, Step):
        raise UnsupportedModelError("variational oracle needs a step profile")
    n = len(a.points)
    if n > 4:
        raise BudgetExceededError("variational oracle budget capped at 4 levels")
    if beta < 0.0:
        raise ValueError("beta must be >= 0")
    rate = RateFunction(law)
    table = _RateTable(rate)
    xs = (0.0,) + a.points
    lengths = tuple(xs[j + 1] - xs[j] for j in range(n))
    caps = tuple(x * LN2 for x in a.points)
    levels = [
        _LevelAllocator(a.increments[j], lengths[j], table, beta) for j in range(n)
    ]

    # --- coarse stage: grid over level cost budgets ---
    pts = grid_points if n <= 3 else 40
    cost_grid = np.linspace(0.0, caps[-1], pts)
    level_vals = np.array(
        [[lvl.best_at_cost(c)[0] for c in cost_grid] for lvl in levels]
    )
    shape = [1] * n
    total_val = np.zeros([1] * n)
    cum_cost = np.zeros([1] * n)
    feasible = np.ones([1] * n, dtype=bool)
    for j in range(n):
        sh = shape.copy()
        sh[j] = pts
        total_val = total_val + level_vals[j].reshape(sh)
        cum_cost = cum_cost + cost_grid.reshape(sh)
        feasible = feasible & (cum_cost <= caps[j] + 1e-12)
    total_val = np.where(feasible, total_val, -np.inf)
    best_idx = np.unravel_index(np.argmax(total_val), total_val.shape)
    level_costs = [float(cost_grid[i]) for i in best_idx]

    # --- refinement: reallocate cost between levels ---
    def total_value(costs) -> float:
        acc = 0.0
        run = 0.0
        for k in range(n):
            run += costs[k]
            if run > caps[k] + 1e-12:
                return -math.inf
        for lvl, c in zip(levels, costs):
            acc += lvl.best_at_cost(c)[0]
        return acc

    def headroom(costs, j: int) -> float:
        room = math.inf
        acc = 0.0
        for k in range(n):
            acc += costs[k]
            if k >= j:
                room = min(room, caps[k] - acc)
        return max(room, 0.0)

    current = total_value(level_costs)
    for _ in range(25):
        improved = False
        for j in range(n):
            hi = level_costs[j] + headroom(level_costs, j)
            c_j = _golden_argmax(
                lambda c: total_value(level_costs[:j] + [c] + level_costs[j + 1 :]),
                0.0,
                hi,
            )
            trial = level_costs[:j] + [c_j] + level_costs[j + 1 :]
            v = total_value(trial)
            if v > current + 1e-14:
                level_costs, current = trial, v
                improved = True
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                pool = level_costs[i] + level_costs[j]
                if pool == 0.0:
                    continue

                def shifted(ci: float) -> float:
                    trial = list(level_costs)
                    trial[i], trial[j] = ci, pool - ci
                    return total_value(trial)

                ci = _golden_argmax(shifted, 0.0, pool)
                v = shifted(ci)
                if v > current + 1e-14:
                    level_costs[i], level_costs[j] = ci, pool - ci
                    current = v
                    improved = True
        if not improved:
            break

    # --- exact polish of the configuration with the true rate function ---
    e_cfg = []
    y_cfg = []
    for lvl, c in zip(levels, level_costs):
        _, e_v, y_v = lvl.best_at_cost(c)
        e_cfg.append(e_v)
        y_cfg.append(y_v)

    def exact_cost(j: int, e_v: float, y_v: float) -> float:
        c = 0.5 * e_v * e_v / a.increments[j] if a.increments[j] > 0.0 else (
            0.0 if e_v == 0.0 else math.inf
        )
        if lengths[j] > 0.0:
            c += lengths[j] * rate(y_v / lengths[j])
        elif y_v != 0.0:
            c = math.inf
        return c

    def budget(j: int) -> float:
        """Cap headroom for level j's cost, holding the other levels fixed."""
        room = math.inf
        acc = 0.0
        for k in range(n):
            if k != j:
                acc += exact_cost(k, e_cfg[k], y_cfg[k])
            else:
                acc += 0.0
            if k >= j:
                room = min(room, caps[k] - acc)
        return max(room, 0.0)

    for _ in range(4):
        for j in range(n):
            if a.increments[j] <= 0.0:
                e_cfg[j] = 0.0
                continue
            room = budget(j)
            y_cost = lengths[j] * rate(y_cfg[j] / lengths[j]) if lengths[j] > 0.0 else 0.0
            e_room = max(room - y_cost, 0.0)
            e_cfg[j] = min(beta * a.increments[j], math.sqrt(2.0 * a.increments[j] * e_room))
        for j in range(n):
            if lengths[j] == 0.0 or table.m_abs == 0.0:
                y_cfg[j] = 0.0
                continue
            room = budget(j)
            e_cost = 0.5 * e_cfg[j] ** 2 / a.increments[j] if a.increments[j] > 0.0 else 0.0
            y_room = max(room - e_cost, 0.0)
            y_hi_cap = lengths[j] * table.m_abs * (1.0 - 1e-12)
            if lengths[j] * rate(y_hi_cap / lengths[j]) <= y_room:
                y_hi = y_hi_cap
            else:
                lo, hi = 0.0, y_hi_cap
                for _ in range(60):
                    mid = 0.5 * (lo + hi)
                    if lengths[j] * rate(mid / lengths[j]) <= y_room:
                        lo = mid
                    else:
                        hi = mid
                y_hi = lo
            y_cfg[j] = _golden_argmax(
                lambda y: beta * y - lengths[j] * rate(y / lengths[j]), 0.0, y_hi
            )

    value = 0.0
    for j in range(n):
        value += beta * (e_cfg[j] + y_cfg[j]) - exact_cost(j, e_cfg[j], y_cfg[j])
    return LN2 + value
