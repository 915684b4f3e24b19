import math

from gremphase.model import (
    FiniteMixture,
    GaussianLaw,
    Hierarchical,
    IidField,
    MagneticEta,
    ModelSpec,
    PointMass,
    Sampled,
    SkCaricature,
    Step,
    StepEta,
    SymmetricTwoPoint,
    validate,
)
from gremphase.cli import spec_from_dict, spec_to_dict


def rem_spec(h=0.0, g=0.0):
    return ModelSpec(
        Step((1.0,), (1.0,)), IidField(PointMass(h)), PointMass(g)
    )


def test_wellformed_step_spec_is_valid():
    assert validate(rem_spec()) == []


def test_step_increments_must_normalize():
    spec = ModelSpec(
        Step((1.0,), (0.9,)), IidField(PointMass(0.0)), PointMass(0.0)
    )
    bad = validate(spec)
    assert len(bad) == 1
    assert "A(1)=1" in bad[0]


def test_mixture_weights_must_normalize():
    spec = ModelSpec(
        Step((1.0,), (1.0,)),
        IidField(FiniteMixture(atoms=((0.0, 0.5), (1.0, 0.6)))),
        PointMass(0.0),
    )
    bad = validate(spec)
    assert len(bad) == 1
    assert "sum to 1" in bad[0]


def test_every_variant_validates():
    specs = [
        ModelSpec(SkCaricature(), Hierarchical(MagneticEta(2.0)), GaussianLaw(0.0, 1.0)),
        ModelSpec(
            Step((0.4, 1.0), (0.5, 0.5)),
            Hierarchical(StepEta((0.5, 1.0), (0.1, 0.7))),
            SymmetricTwoPoint(1.5),
        ),
        ModelSpec(
            Sampled(((0.0, 0.0), (0.5, 0.6), (1.0, 1.0))),
            IidField(PointMass(1.0)),
            PointMass(0.0),
        ),
    ]
    for spec in specs:
        assert validate(spec) == []


def test_nonfinite_values_rejected():
    spec = ModelSpec(
        Step((1.0,), (1.0,)), IidField(PointMass(math.nan)), PointMass(math.inf)
    )
    bad = validate(spec)
    assert len(bad) == 2


def test_negative_gaussian_std_rejected():
    spec = ModelSpec(
        Step((1.0,), (1.0,)), IidField(GaussianLaw(0.0, -1.0)), PointMass(0.0)
    )
    assert any("std" in v for v in validate(spec))


def test_step_points_must_be_increasing_to_one():
    spec = ModelSpec(
        Step((0.7, 0.4, 1.0), (0.3, 0.3, 0.4)),
        IidField(PointMass(0.0)),
        PointMass(0.0),
    )
    assert any("increasing" in v for v in validate(spec))
    spec2 = ModelSpec(
        Step((0.5, 0.9), (0.5, 0.5)), IidField(PointMass(0.0)), PointMass(0.0)
    )
    assert any("last point" in v for v in validate(spec2))


def test_shipped_model_files_are_valid():
    import pathlib

    from gremphase.cli import load_spec

    models = pathlib.Path(__file__).parent.parent / "models"
    files = sorted(models.glob("*.json"))
    assert len(files) == 3
    for path in files:
        assert validate(load_spec(str(path))) == []


def test_serialization_round_trip_identity():
    specs = [
        rem_spec(1.0, 0.5),
        ModelSpec(SkCaricature(), Hierarchical(MagneticEta(0.3)), PointMass(1.0)),
        ModelSpec(
            Step((0.25, 0.5, 1.0), (0.2, 0.3, 0.5)),
            Hierarchical(StepEta((0.5, 1.0), (0.0, 0.4))),
            GaussianLaw(0.1, 2.0, 32),
        ),
        ModelSpec(
            Sampled(((0.0, 0.0), (0.3, 0.1), (1.0, 1.0))),
            IidField(FiniteMixture(((0.5, 0.25), (-0.5, 0.75)))),
            SymmetricTwoPoint(0.7),
        ),
    ]
    for spec in specs:
        assert spec_from_dict(spec_to_dict(spec)) == spec
