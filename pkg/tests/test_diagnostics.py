import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alphapatch.curve import circle, resample
from alphapatch.diagnostics import (
    blowup_integrand,
    collect,
    h2_norm_sq,
    interpolation_check,
    min_patch_distance,
    quartic_quotient,
    records_to_csv,
)
from alphapatch.dynamics import PatchSystem, rhs
from alphapatch.errors import BadExponent, NegativeInput, NonpositiveInput


def grid(n):
    return -np.pi + 2 * np.pi * np.arange(n) / n


def test_distance_between_side_by_side_circles():
    sys = PatchSystem((circle(256, 1.0, (2.0, 0.0)), circle(256, 1.0, (-2.0, 0.0))), (1.0, 1.0))
    rep = min_patch_distance(sys)
    assert abs(rep.delta - 2.0) < 1e-3
    assert not rep.single_patch


def test_distance_single_patch_is_infinite():
    rep = min_patch_distance(PatchSystem((circle(64),), (1.0,)))
    assert rep.single_patch and math.isinf(rep.delta)


def test_distance_concentric_circles():
    sys = PatchSystem((circle(256, 1.0), circle(256, 3.0)), (1.0, -1.0))
    assert abs(min_patch_distance(sys).delta - 2.0) < 1e-3


def test_integrand_closed_form_for_unit_circle():
    sys = PatchSystem((circle(128),), (1.0,), alpha=0.5)
    s = math.sqrt(2 * math.pi)
    expected = (s + math.pi / 2) * s * (math.pi / 2) ** 2.5
    assert abs(blowup_integrand(sys, 2.0) - expected) < 1e-9 * expected


@pytest.mark.parametrize("p", [2.0, 3.0])
def test_integrand_scaling(p):
    # ||x''||_p scales like R, sup F like 1/R
    alpha = 0.5
    i1 = blowup_integrand(PatchSystem((circle(128, 1.0),), (1.0,), alpha=alpha), p)
    i2 = blowup_integrand(PatchSystem((circle(128, 2.0),), (1.0,), alpha=alpha), p)
    d2 = (2 * math.pi) ** (1 / p)
    f = math.pi / 2
    ref1 = (d2 + f) * d2 * f ** (2 + alpha)
    ref2 = (2 * d2 + f / 2) * 2 * d2 * (f / 2) ** (2 + alpha)
    assert abs(i2 / i1 - ref2 / ref1) < 1e-10


def test_interpolation_check_constant():
    assert interpolation_check(np.ones(64), 0.5) <= 0.0


@pytest.mark.parametrize("f,sigma", [
    (lambda g: 1 + np.cos(g), 0.5),
    (lambda g: (1 + np.cos(g)) ** 2, 1.0),
    (lambda g: (1 + np.cos(g)) ** 2, 0.0),
])
def test_interpolation_check_examples(f, sigma):
    assert interpolation_check(f(grid(256)), sigma) <= 0.0


def test_interpolation_check_rejects_negative():
    with pytest.raises(NegativeInput):
        interpolation_check(np.cos(grid(32)), 0.5)
    with pytest.raises(BadExponent):
        interpolation_check(np.ones(32), 1.5)


@given(st.integers(0, 2 ** 31 - 1), st.sampled_from([0.0, 0.5, 1.0]))
@settings(max_examples=30, deadline=None)
def test_interpolation_check_random_squares(seed, sigma):
    rng = np.random.default_rng(seed)
    k = rng.integers(1, 8)
    coef = rng.normal(size=k + 1) + 1j * rng.normal(size=k + 1)
    g = grid(128)
    f = np.abs(np.exp(1j * np.outer(g, np.arange(k + 1))) @ coef) ** 2 + rng.uniform(0, 1)
    assert interpolation_check(f, sigma) <= 0.0


def test_quartic_quotient_constant_is_zero():
    assert quartic_quotient(np.full(32, 2.0), 2.0) == 0.0


def test_quartic_quotient_matches_refined_quadrature():
    f = lambda g: 2 + np.cos(g)  # noqa: E731
    v = quartic_quotient(f(grid(64)), 2.0)
    fine = quartic_quotient(f(grid(256)), 2.0)
    assert math.isfinite(v) and abs(v - fine) < 1e-8
    assert h2_norm_sq(f(grid(64))) > 0


def test_quartic_quotient_errors():
    with pytest.raises(NonpositiveInput):
        quartic_quotient(np.cos(grid(32)), 2.0)
    with pytest.raises(BadExponent):
        quartic_quotient(np.full(32, 2.0), 1.0)


def test_record_for_steady_circle():
    sys = PatchSystem((circle(256),), (1.0,), alpha=0.5)
    rec = collect(sys, rhs(sys), p=2.0)
    pd = rec.patches[0]
    assert abs(pd.area - math.pi) < 1e-12
    assert abs(pd.sup_F - math.pi / 2) < 1e-10
    assert abs(pd.d2_l2 - math.sqrt(2 * math.pi)) < 1e-10
    assert abs(pd.d1_inf - 1.0) < 1e-12
    assert pd.lambda_inf < 1e-8
    assert pd.d3_l2 is not None
    assert not rec.warnings


def test_record_two_patches_and_low_resolution():
    sys = PatchSystem((circle(64, 1.0, (2.0, 0.0)), circle(64, 0.5, (-2.0, 0.0))), (1.0, 1.0))
    rec = collect(sys, rhs(sys))
    assert math.isfinite(rec.delta)
    assert rec.patches[0].area != rec.patches[1].area
    assert rec.patches[0].d3_l2 is None  # third derivative needs >= 128 nodes


def test_record_flags_low_p():
    sys = PatchSystem((circle(64),), (1.0,), alpha=1.0)
    rec = collect(sys, rhs(sys), p=1.5)
    assert any("p=1.5" in w for w in rec.warnings)


def test_csv_has_schema_line_and_rows():
    sys = PatchSystem((circle(64),), (1.0,))
    rec = collect(sys, rhs(sys))
    text = records_to_csv([rec, rec])
    lines = text.splitlines()
    assert lines[0].startswith("# schema=")
    assert lines[1].startswith("time,")
    assert len(lines) == 4
