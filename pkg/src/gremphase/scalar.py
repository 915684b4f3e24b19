"""Special functions and field-law moments used by every formula.

Covers the modified binary entropy r, the entropy-matched gamma family
(gamma, its inverse and derivative, and the inverse slope k), expectations
E[ln cosh t*h] / E[h tanh t*h] / E|h| for the four field laws, the pure
quantum-paramagnet pressure, and the large-deviation rate function I.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .model import (
    LN2,
    FieldLaw,
    FiniteMixture,
    GaussianLaw,
    PointMass,
    SymmetricTwoPoint,
)

_GAMMA_BISECT_ITERS = 47  # interval 2^-47 ~ 7e-15 < 1e-13 target


def ln_cosh(t: float) -> float:
    """ln cosh t, overflow-safe for any magnitude; exactly 0 at t = 0."""
    t = abs(t)
    if t == 0.0:
        return 0.0
    if t < 20.0:
        return math.log(math.cosh(t))
    return t - LN2 + math.log1p(math.exp(-2.0 * t))


def ln_2cosh(t: float) -> float:
    """ln(2 cosh t); exactly ln 2 at t = 0."""
    return LN2 + ln_cosh(t)


def binary_entropy_r(x: float) -> float:
    """Modified binary entropy r(x) on [-1, 1]; r(+-1) = 0 by continuity."""
    if abs(x) > 1.0:
        raise ValueError(f"binary entropy argument must be in [-1, 1], got {x}")
    q = 0.5 * (1.0 - abs(x))
    if q == 0.0:
        return 0.0
    # ln((1+x)/2) = log1p(-q) keeps accuracy near the endpoints
    return -(q * math.log(q) + (1.0 - q) * math.log1p(-q))


def gamma_inverse(a: float) -> float:
    """gamma^{-1}(a) = 1 - r(a)/ln 2 on [0, 1], strictly increasing."""
    if a < 0.0 or a > 1.0:
        raise ValueError(f"gamma_inverse argument must be in [0, 1], got {a}")
    return 1.0 - binary_entropy_r(a) / LN2


def gamma(x):
    """gamma(x): inverse of gamma_inverse, by bisection (abs tol < 1e-13).

    Accepts a scalar or an ndarray.
    """
    if np.ndim(x) == 0:
        xv = float(x)
        if xv < 0.0 or xv > 1.0:
            raise ValueError(f"gamma argument must be in [0, 1], got {xv}")
        if xv == 0.0:
            return 0.0
        if xv == 1.0:
            return 1.0
        lo, hi = 0.0, 1.0
        for _ in range(_GAMMA_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            if gamma_inverse(mid) < xv:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("gamma arguments must be in [0, 1]")
    lo = np.zeros_like(arr)
    hi = np.ones_like(arr)
    for _ in range(_GAMMA_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        q = 0.5 * (1.0 - mid)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = -(q * np.log(q) + (1.0 - q) * np.log1p(-q))
        r = np.where(q == 0.0, 0.0, r)
        ginv = 1.0 - r / LN2
        below = ginv < arr
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = 0.5 * (lo + hi)
    out = np.where(arr == 0.0, 0.0, out)
    out = np.where(arr == 1.0, 1.0, out)
    return out


def gamma_prime(x: float) -> float:
    """gamma'(x) = ln 2 / artanh(gamma(x)) on (0, 1]; 0 at x = 1 by limit."""
    if x <= 0.0 or x > 1.0:
        raise ValueError(f"gamma_prime argument must be in (0, 1], got {x}")
    if x == 1.0:
        return 0.0
    g = gamma(x)
    if g >= 1.0:
        return 0.0
    return LN2 / math.atanh(g)


def k_inverse_slope(x: float) -> float:
    """Inverse function k of gamma' : k(gamma'(y)) = y, k(0) = 1."""
    if x < 0.0:
        raise ValueError(f"k argument must be >= 0, got {x}")
    if x == 0.0:
        return 1.0
    u = LN2 / x
    return (u * math.tanh(u) - ln_cosh(u)) / LN2


def arcosh_half_exp(t: float) -> float:
    """arcosh(exp(t)/2) for t >= ln 2, stable near both ends.

    Near t = ln 2 the argument is 1 + u with tiny u; plain acosh loses half
    the digits there, so a series in u is used instead.
    """
    if t > 40.0:
        return t  # correction is exp(2 ln2 - 2t)/4 < 1e-33
    u = math.expm1(t - LN2)
    if u < 0.0:
        if u > -1e-12:
            u = 0.0
        else:
            raise ValueError(f"arcosh_half_exp requires t >= ln 2, got {t}")
    if u < 1e-6:
        return math.sqrt(2.0 * u) * (1.0 - u / 12.0 + 3.0 * u * u / 160.0)
    return math.acosh(0.5 * math.exp(t))


# ---------------------------------------------------------------------------
# Field-law moments
# ---------------------------------------------------------------------------

def _atoms(law: FieldLaw):
    """(values, weights) for atomic laws, None for continuous ones."""
    if isinstance(law, PointMass):
        return (law.value,), (1.0,)
    if isinstance(law, SymmetricTwoPoint):
        return (law.magnitude, -law.magnitude), (0.5, 0.5)
    if isinstance(law, FiniteMixture):
        return tuple(v for v, _ in law.atoms), tuple(w for _, w in law.atoms)
    return None


def _hermite_nodes(law: GaussianLaw):
    xi, wi = np.polynomial.hermite.hermgauss(law.quadrature_nodes)
    vals = law.mean + math.sqrt(2.0) * law.std * xi
    return vals, wi / math.sqrt(math.pi)


def _abs_first_moment(law: FieldLaw) -> float:
    atoms = _atoms(law)
    if atoms is not None:
        vals, wts = atoms
        return sum(w * abs(v) for v, w in zip(vals, wts))
    # folded-normal mean: closed form beats quadrature of the |.| kink
    mu, s = law.mean, law.std
    if s == 0.0:
        return abs(mu)
    return s * math.sqrt(2.0 / math.pi) * math.exp(-0.5 * (mu / s) ** 2) + mu * math.erf(
        mu / (s * math.sqrt(2.0))
    )


# The Hermite rule cannot resolve the |x|-kink that ln cosh(t x) develops:
# its error is already ~1e-6 at |t| std = 2.  Beyond |t| std = 1 both moments
# are computed from the exact decomposition ln cosh u = |u| - ln2 +
# log1p(e^{-2|u|}) with an adaptive quadrature for the concentrated remainder.
_GAUSS_DIRECT_T = 1.0


def _folded_density(law: GaussianLaw, x: float) -> float:
    s = law.std
    a = (x - law.mean) / s
    b = (x + law.mean) / s
    return (math.exp(-0.5 * a * a) + math.exp(-0.5 * b * b)) / (
        s * math.sqrt(2.0 * math.pi)
    )


def _gauss_lncosh_tail(law: GaussianLaw, t: float) -> float:
    from scipy.integrate import quad

    ta = abs(t)
    val, _ = quad(
        lambda x: _folded_density(law, x) * math.log1p(math.exp(-2.0 * ta * x)),
        0.0,
        np.inf,
        epsabs=1e-13,
        epsrel=1e-12,
        limit=200,
    )
    return ta * _abs_first_moment(law) - LN2 + val


def _gauss_htanh_tail(law: GaussianLaw, t: float) -> float:
    from scipy.integrate import quad

    ta = abs(t)
    val, _ = quad(
        lambda x: _folded_density(law, x) * x * (1.0 - math.tanh(ta * x)),
        0.0,
        np.inf,
        epsabs=1e-13,
        epsrel=1e-12,
        limit=200,
    )
    return math.copysign(1.0, t) * (_abs_first_moment(law) - val)


def field_moment(law: FieldLaw, kind: str, t: float = 0.0) -> float:
    """E[ln cosh(t h)], E[h tanh(t h)] or E|h| for a field law.

    kind is "ln_cosh", "h_tanh" or "abs_first" (t ignored for the last).
    Atomic laws are summed exactly; Gaussian laws use Gauss-Hermite
    quadrature, switching to the asymptotic tail expansion once |t| std is
    too large for the rule.
    """
    if kind == "abs_first":
        return _abs_first_moment(law)
    if kind not in ("ln_cosh", "h_tanh"):
        raise ValueError(f"unknown moment kind {kind!r}")

    atoms = _atoms(law)
    if atoms is not None:
        vals, wts = atoms
        if kind == "ln_cosh":
            return sum(w * ln_cosh(t * v) for v, w in zip(vals, wts))
        return sum(w * v * math.tanh(t * v) for v, w in zip(vals, wts))

    if law.std == 0.0:
        v = law.mean
        return ln_cosh(t * v) if kind == "ln_cosh" else v * math.tanh(t * v)

    if t == 0.0:
        return 0.0

    if abs(t) * law.std > _GAUSS_DIRECT_T:
        if kind == "ln_cosh":
            return _gauss_lncosh_tail(law, t)
        return _gauss_htanh_tail(law, t)

    vals, wts = _hermite_nodes(law)
    u = t * vals
    if kind == "ln_cosh":
        au = np.abs(u)
        f = np.where(au < 20.0, np.log(np.cosh(np.minimum(au, 20.0))), au - LN2 + np.log1p(np.exp(-2.0 * au)))
        f = np.where(u == 0.0, 0.0, f)
    else:
        f = vals * np.tanh(u)
    return float(np.dot(wts, f))


def _gauss_ln2cosh_hypot(law: GaussianLaw, beta: float, other: float) -> float:
    """E[ln 2 cosh(beta sqrt(X^2 + other^2))] for Gaussian X, adaptive.

    For other = 0 this is the kink-decomposed 1-d moment; otherwise the
    integrand is smooth and an adaptive rule handles any beta.
    """
    if other == 0.0:
        return LN2 + field_moment(law, "ln_cosh", beta)
    from scipy.integrate import quad

    val, _ = quad(
        lambda x: _folded_density(law, x) * ln_2cosh(beta * math.hypot(x, other)),
        0.0,
        np.inf,
        epsabs=1e-13,
        epsrel=1e-12,
        limit=200,
    )
    return val


def paramagnet_pressure(h_law: FieldLaw, b_law: FieldLaw, beta: float) -> float:
    """E[ln 2 cosh(beta sqrt(b^2 + h^2))] over the product of the two laws.

    Exact double sums for atomic laws; one Gaussian side integrates each atom
    of the other adaptively; two Gaussian sides fall back to the tensor
    Hermite rule (accurate while beta times the joint scale stays moderate).
    """
    if beta < 0.0:
        raise ValueError("beta must be >= 0")
    if beta == 0.0:
        return LN2

    def _atomic(law):
        atoms = _atoms(law)
        if atoms is not None:
            return atoms
        if law.std == 0.0:
            return (law.mean,), (1.0,)
        return None

    ha = _atomic(h_law)
    ba = _atomic(b_law)
    if ha is not None and ba is not None:
        return sum(
            wb * wh * ln_2cosh(beta * math.hypot(vb, vh))
            for vb, wb in zip(*ba)
            for vh, wh in zip(*ha)
        )
    if ha is not None or ba is not None:
        vals, wts = ha if ha is not None else ba
        gauss = b_law if ha is not None else h_law
        return sum(
            w * _gauss_ln2cosh_hypot(gauss, beta, v) for v, w in zip(vals, wts)
        )
    hv, hw = _hermite_nodes(h_law)
    bv, bw = _hermite_nodes(b_law)
    arg = beta * np.hypot(np.asarray(bv)[:, None], np.asarray(hv)[None, :])
    f = LN2 + np.where(
        arg < 20.0,
        np.log(np.cosh(np.minimum(arg, 20.0))),
        arg - LN2 + np.log1p(np.exp(-2.0 * arg)),
    )
    f = np.where(arg == 0.0, LN2, f)
    return float(np.asarray(bw) @ f @ np.asarray(hw))


# ---------------------------------------------------------------------------
# Large-deviation rate function
# ---------------------------------------------------------------------------

_RATE_T_MAX = 1e6


@dataclass
class RateFunction:
    """I(z) = sup_t { z t - E[ln cosh t h] }; +inf outside [-E|h|, E|h|]."""

    law: FieldLaw
    abs_first: float = field(init=False)
    _zero_mass: float = field(init=False)

    def __post_init__(self):
        self.abs_first = _abs_first_moment(self.law)
        atoms = _atoms(self.law)
        self._zero_mass = (
            sum(w for v, w in zip(*atoms) if v == 0.0) if atoms is not None else 0.0
        )

    def _mean_tanh(self, t: float) -> float:
        return field_moment(self.law, "h_tanh", t)

    def __call__(self, z: float) -> float:
        za = abs(z)
        m = self.abs_first
        if za > m:
            return math.inf
        if m == 0.0:
            return 0.0
        if za == 0.0:
            # symmetric laws have t* = 0; shifted ones still satisfy I(0) >= 0
            pass
        if za >= m * (1.0 - 1e-14):
            # boundary by monotone limit: residual entropy of the nonzero atoms
            return (1.0 - self._zero_mass) * LN2
        # E[h tanh(t h)] increases from 0 to E|h| on t >= 0: bracket then solve
        hi = 1.0
        while self._mean_tanh(hi) < za:
            hi *= 2.0
            if hi > _RATE_T_MAX:
                return za * _RATE_T_MAX - field_moment(self.law, "ln_cosh", _RATE_T_MAX)
        if za == 0.0:
            t_star = 0.0
        else:
            t_star = brentq(
                lambda t: self._mean_tanh(t) - za, 0.0, hi, xtol=1e-14, rtol=8.9e-16
            )
        return za * t_star - field_moment(self.law, "ln_cosh", t_star)
