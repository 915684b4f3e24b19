"""Domain types shared by every module.

All types are immutable value objects.  Construction never validates;
``validate`` returns a list of human-readable violations instead of raising,
so a caller (e.g. the CLI) can report every problem in a model file at once.
Energies and pressures are in natural-log units (nats per spin) throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

LN2 = math.log(2.0)


class UnsupportedModelError(ValueError):
    """Operation requires a model capability the given spec does not have."""


class SizeGuardError(RuntimeError):
    """A brute-force routine would exceed its configured memory/size budget."""


class DegenerateSlopeError(ValueError):
    """Self-consistency equation has no finite root (slope 0 means beta_c = inf)."""


class BudgetExceededError(RuntimeError):
    """Search budget of the variational oracle exceeded (too many levels)."""


# ---------------------------------------------------------------------------
# Field laws (scalar random field weights)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PointMass:
    value: float


@dataclass(frozen=True)
class SymmetricTwoPoint:
    """+magnitude / -magnitude with probability 1/2 each."""

    magnitude: float


@dataclass(frozen=True)
class FiniteMixture:
    """Atoms as (value, weight) pairs; weights must sum to 1."""

    atoms: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class GaussianLaw:
    mean: float
    std: float
    quadrature_nodes: int = 64


FieldLaw = Union[PointMass, SymmetricTwoPoint, FiniteMixture, GaussianLaw]


# ---------------------------------------------------------------------------
# Covariance profiles A on [0,1]
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Step:
    """A(x) = sum of increments[k] over points[k] <= x; points end at 1."""

    points: tuple[float, ...]
    increments: tuple[float, ...]


@dataclass(frozen=True)
class SkCaricature:
    """Analytic profile A(x) = gamma(x)^2 with entropy-matched gamma."""


@dataclass(frozen=True)
class Sampled:
    """Piecewise-linear A through the given (x, A(x)) grid."""

    grid: tuple[tuple[float, float], ...]


DistributionFn = Union[Step, SkCaricature, Sampled]


# ---------------------------------------------------------------------------
# Longitudinal-field modes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IidField:
    law: FieldLaw


@dataclass(frozen=True)
class StepEta:
    """Step overlap function: eta(x) = values[k] on [points[k-1], points[k])."""

    points: tuple[float, ...]
    values: tuple[float, ...]


@dataclass(frozen=True)
class MagneticEta:
    """Entropy-matched field of strength h: eta = h * gamma."""

    strength: float


HierarchicalOverlap = Union[StepEta, MagneticEta]


@dataclass(frozen=True)
class Hierarchical:
    overlap: HierarchicalOverlap


LongitudinalMode = Union[IidField, Hierarchical]


@dataclass(frozen=True)
class ModelSpec:
    distribution: DistributionFn
    longitudinal: LongitudinalMode
    transversal: FieldLaw


# ---------------------------------------------------------------------------
# Concave hull of a profile (possibly cut / unnormalized)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConcaveHull:
    """Least concave majorant of a profile on [0, domain_length].

    Piecewise-linear hulls carry per-segment slopes; the analytic hull of the
    SK caricature stores the left cut point ``sk_offset`` instead (slopes are
    evaluated on demand).  ``smooth`` marks hulls that come from a
    continuously differentiable concave A; only those support the closed-form
    maximizer equations.
    """

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]
    slopes: tuple[float, ...] = ()
    sk_offset: float | None = None
    smooth: bool = False

    @property
    def analytic(self) -> bool:
        return self.sk_offset is not None

    @property
    def domain_length(self) -> float:
        return self.breakpoints[-1]

    @property
    def total_mass(self) -> float:
        return self.values[-1]

    @property
    def lengths(self) -> tuple[float, ...]:
        return tuple(
            self.breakpoints[i + 1] - self.breakpoints[i]
            for i in range(len(self.breakpoints) - 1)
        )

    @property
    def increments(self) -> tuple[float, ...]:
        return tuple(
            self.values[i + 1] - self.values[i] for i in range(len(self.values) - 1)
        )


# ---------------------------------------------------------------------------
# Result record for one (beta, Gamma, h) point
# ---------------------------------------------------------------------------

class Phase(str, Enum):
    UNFROZEN_CLASSICAL = "unfrozen_classical"
    FROZEN_GLASS = "frozen_glass"
    QUANTUM_PARAMAGNET = "quantum_paramagnet"


@dataclass(frozen=True)
class PressureResult:
    phi: float
    y_star: float
    z_star: float
    phase: Phase
    m_z: float
    m_x: float
    approximate: bool = False


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

_NORM_TOL = 1e-12


def _finite(*xs: float) -> bool:
    return all(math.isfinite(x) for x in xs)


def _validate_law(law: FieldLaw, name: str) -> list[str]:
    bad = []
    if isinstance(law, PointMass):
        if not _finite(law.value):
            bad.append(f"{name}: point mass value must be finite")
    elif isinstance(law, SymmetricTwoPoint):
        if not _finite(law.magnitude) or law.magnitude < 0:
            bad.append(f"{name}: two-point magnitude must be finite and >= 0")
    elif isinstance(law, FiniteMixture):
        if not law.atoms:
            bad.append(f"{name}: mixture needs at least one atom")
        else:
            vals = [v for v, _ in law.atoms]
            wts = [w for _, w in law.atoms]
            if not _finite(*vals, *wts):
                bad.append(f"{name}: mixture atoms must be finite")
            elif any(w < 0 for w in wts):
                bad.append(f"{name}: mixture weights must be >= 0")
            elif abs(sum(wts) - 1.0) > _NORM_TOL:
                bad.append(
                    f"{name}: mixture weights must sum to 1 "
                    f"(got {sum(wts)!r}, normalization violated)"
                )
    elif isinstance(law, GaussianLaw):
        if not _finite(law.mean, law.std) or law.std < 0:
            bad.append(f"{name}: gaussian needs finite mean and std >= 0")
        if law.quadrature_nodes < 1:
            bad.append(f"{name}: gaussian quadrature node count must be >= 1")
    else:
        bad.append(f"{name}: unknown field law {type(law).__name__}")
    return bad


def _validate_distribution(a: DistributionFn) -> list[str]:
    bad = []
    if isinstance(a, Step):
        pts, inc = a.points, a.increments
        if len(pts) != len(inc) or not pts:
            bad.append("distribution: points and increments must be non-empty and equal length")
            return bad
        if not _finite(*pts, *inc):
            bad.append("distribution: points and increments must be finite")
            return bad
        if any(x <= 0 for x in pts) or any(
            pts[i] >= pts[i + 1] for i in range(len(pts) - 1)
        ):
            bad.append("distribution: points must be strictly increasing in (0, 1]")
        if abs(pts[-1] - 1.0) > _NORM_TOL:
            bad.append("distribution: last point must be 1")
        if any(x < 0 for x in inc):
            bad.append("distribution: increments must be >= 0")
        if abs(sum(inc) - 1.0) > _NORM_TOL:
            bad.append(
                f"distribution: increments must sum to 1, i.e. A(1)=1 "
                f"(got {sum(inc)!r}, normalization violated)"
            )
    elif isinstance(a, SkCaricature):
        pass
    elif isinstance(a, Sampled):
        g = a.grid
        if len(g) < 2:
            bad.append("distribution: sampled grid needs at least 2 points")
            return bad
        xs = [x for x, _ in g]
        vs = [v for _, v in g]
        if not _finite(*xs, *vs):
            bad.append("distribution: sampled grid must be finite")
            return bad
        if any(xs[i] >= xs[i + 1] for i in range(len(xs) - 1)):
            bad.append("distribution: sampled grid x-values must be strictly increasing")
        if abs(xs[0]) > _NORM_TOL or abs(xs[-1] - 1.0) > _NORM_TOL:
            bad.append("distribution: sampled grid must span [0, 1]")
        if any(v < -_NORM_TOL or v > 1 + _NORM_TOL for v in vs):
            bad.append("distribution: sampled values must lie in [0, 1]")
        if any(vs[i] > vs[i + 1] + _NORM_TOL for i in range(len(vs) - 1)):
            bad.append("distribution: sampled values must be non-decreasing")
        if abs(vs[0]) > _NORM_TOL:
            bad.append("distribution: sampled A(0) must be 0")
        if abs(vs[-1] - 1.0) > _NORM_TOL:
            bad.append("distribution: sampled A(1) must be 1 (normalization violated)")
    else:
        bad.append(f"distribution: unknown profile {type(a).__name__}")
    return bad


def _validate_longitudinal(mode: LongitudinalMode) -> list[str]:
    bad = []
    if isinstance(mode, IidField):
        bad += _validate_law(mode.law, "longitudinal")
    elif isinstance(mode, Hierarchical):
        ov = mode.overlap
        if isinstance(ov, StepEta):
            if len(ov.points) != len(ov.values) or not ov.points:
                bad.append("longitudinal: step overlap needs equal-length non-empty points/values")
            elif not _finite(*ov.points, *ov.values):
                bad.append("longitudinal: step overlap must be finite")
            else:
                if any(
                    ov.points[i] >= ov.points[i + 1] for i in range(len(ov.points) - 1)
                ) or ov.points[0] <= 0:
                    bad.append("longitudinal: overlap points must be strictly increasing in (0, 1]")
                if abs(ov.points[-1] - 1.0) > _NORM_TOL:
                    bad.append("longitudinal: last overlap point must be 1")
        elif isinstance(ov, MagneticEta):
            if not _finite(ov.strength) or ov.strength < 0:
                bad.append("longitudinal: hierarchical field strength must be finite and >= 0")
        else:
            bad.append(f"longitudinal: unknown overlap {type(ov).__name__}")
    else:
        bad.append(f"longitudinal: unknown mode {type(mode).__name__}")
    return bad


def validate(spec: ModelSpec) -> list[str]:
    """Return every violated invariant of ``spec``; empty list means usable."""
    bad = _validate_distribution(spec.distribution)
    bad += _validate_longitudinal(spec.longitudinal)
    bad += _validate_law(spec.transversal, "transversal")
    return bad
