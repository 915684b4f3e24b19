"""Exact infinite-volume pressure, magnetizations and critical lines of the
quantum REM/GREM with longitudinal and transversal fields, cross-validated
against finite-N brute-force oracles."""

from .model import (
    ConcaveHull,
    DistributionFn,
    FieldLaw,
    FiniteMixture,
    GaussianLaw,
    Hierarchical,
    HierarchicalOverlap,
    IidField,
    MagneticEta,
    ModelSpec,
    Phase,
    PointMass,
    PressureResult,
    Sampled,
    SkCaricature,
    Step,
    StepEta,
    SymmetricTwoPoint,
    validate,
)

__all__ = [
    "ConcaveHull",
    "DistributionFn",
    "FieldLaw",
    "FiniteMixture",
    "GaussianLaw",
    "Hierarchical",
    "HierarchicalOverlap",
    "IidField",
    "MagneticEta",
    "ModelSpec",
    "Phase",
    "PointMass",
    "PressureResult",
    "Sampled",
    "SkCaricature",
    "Step",
    "StepEta",
    "SymmetricTwoPoint",
    "validate",
]

__version__ = "0.1.0"
