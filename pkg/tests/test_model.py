import numpy as np
import pytest
from hypothesis import given, strategies as st

from killdiff.model import (
    BoundaryBehavior,
    BoundaryKind,
    DiffusionModel,
    Domain1D,
    InitialCondition,
    KillingKind,
    KillingMeasure,
    interval,
    require_valid,
    validate_problem,
)


def test_interval_constructor_defaults():
    m = interval(2.0)
    assert m.domain.length == 2.0
    assert m.domain.left.kind is BoundaryKind.ABSORBING
    assert m.domain.right.kind is BoundaryKind.ABSORBING
    assert m.diffusion == 1.0
    assert m.drift == 0.0


def test_interval_injection_carries_flux():
    m = interval(1.0, "absorbing", "injection", phi=2.5)
    assert m.domain.right.kind is BoundaryKind.INJECTION
    assert m.domain.right.phi == 2.5
    assert m.domain.left.phi == 0.0


def test_valid_problem_reports_ok():
    report = validate_problem(interval(1.0), KillingMeasure.uniform(1.0), InitialCondition.point(0.5))
    assert report.ok
    assert report.violations == ()


@pytest.mark.parametrize(
    "model,killing,expect",
    [
        (interval(-1.0), KillingMeasure.zero(), "length"),
        (interval(1.0, diffusion=0.0), KillingMeasure.zero(), "diffusion"),
        (interval(1.0), KillingMeasure.uniform(-1.0), "non-negative"),
        (interval(1.0), KillingMeasure.uniform(0.0), "zero killing instead"),
        (interval(1.0), KillingMeasure.dirac([(1.5, 1.0)]), "inside the interval"),
        (interval(1.0), KillingMeasure.dirac([(0.5, -1.0)]), "non-negative"),
        (interval(1.0), KillingMeasure.dirac([]), "at least one spot"),
        (interval(1.0), KillingMeasure.piecewise([0.5], [1.0]), "one rate per interval"),
        (interval(1.0), KillingMeasure.piecewise([0.6, 0.4], [1.0, 1.0, 1.0]), "increasing"),
        (interval(1.0, "absorbing", "injection", phi=0.0), KillingMeasure.zero(), "flux"),
    ],
)
def test_invalid_problems_are_flagged(model, killing, expect):
    report = validate_problem(model, killing)
    assert not report.ok
    assert any(expect in v for v in report.violations)


def test_validation_never_raises_and_collects_everything():
    report = validate_problem(interval(-1.0, diffusion=-2.0), KillingMeasure.uniform(-3.0))
    assert len(report.violations) >= 3


def test_point_ic_on_boundary_rejected():
    report = validate_problem(interval(1.0), KillingMeasure.zero(), InitialCondition.point(0.0))
    assert not report.ok


def test_density_grid_mass_capped():
    vals = tuple(np.full(11, 2.0))
    report = validate_problem(
        interval(1.0), KillingMeasure.zero(), InitialCondition.density_grid(vals)
    )
    assert any("mass" in v for v in report.violations)


def test_require_valid_raises_with_all_violations():
    with pytest.raises(ValueError, match="invalid problem"):
        require_valid(interval(-1.0), KillingMeasure.uniform(-1.0))


def test_two_injection_boundaries_rejected():
    dom = Domain1D(1.0, BoundaryBehavior.injection(1.0), BoundaryBehavior.injection(1.0))
    report = validate_problem(DiffusionModel(dom, 1.0), KillingMeasure.zero())
    assert any("at most one" in v for v in report.violations)


@given(
    length=st.floats(0.1, 100.0),
    y=st.floats(0.01, 0.99),
    v0=st.floats(0.01, 50.0),
)
def test_valid_triples_always_pass(length, y, v0):
    report = validate_problem(
        interval(length), KillingMeasure.uniform(v0), InitialCondition.point(y * length)
    )
    assert report.ok


@given(xs=st.lists(st.floats(0.05, 0.95), min_size=1, max_size=4, unique=True))
def test_interior_spots_always_pass(xs):
    killing = KillingMeasure.dirac([(x, 1.0) for x in xs])
    assert validate_problem(interval(1.0), killing).ok


def test_piecewise_rate_lookup():
    killing = KillingMeasure.piecewise([0.5], [0.5, 2.0])
    x = np.array([0.1, 0.49, 0.51, 0.9])
    assert np.allclose(killing.smooth_rate(x), [0.5, 0.5, 2.0, 2.0])


def test_dirac_measure_has_no_smooth_rate():
    killing = KillingMeasure.dirac([(0.5, 3.0)])
    assert np.all(killing.smooth_rate(np.linspace(0.1, 0.9, 5)) == 0.0)
    assert killing.kind is KillingKind.DIRAC
    assert not killing.is_zero
