import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, mpf, sqrt as msqrt
from scipy.optimize import minimize_scalar

from deformqm.errors import DegenerateRescale, NoRealRoot, NotAdmissible, ParameterRange
from deformqm.quad_algebra import (
    ExpectationContext,
    QuadraticAlgebraParams,
    SmallParameterWarning,
    kempf_admissible,
    minimal_uncertainties,
    normalize_complex_kappa,
    rotate_to_canonical,
    uncertainty_lower_bound,
)

small = st.floats(min_value=1e-4, max_value=0.09)


@st.composite
def admissible(draw):
    a, b = draw(small), draw(small)
    frac = draw(st.floats(min_value=-0.99, max_value=0.99))
    return a, b, frac * math.sqrt(a * b)


def test_rejects_large_parameters():
    with pytest.raises(ParameterRange):
        QuadraticAlgebraParams(1.2, 0.01)
    with pytest.raises(ParameterRange):
        QuadraticAlgebraParams(0.01, 0.01, 0.8, 0.8)


def test_warns_above_small_parameter_regime():
    with pytest.warns(SmallParameterWarning):
        QuadraticAlgebraParams(0.5, 0.01)


@pytest.mark.parametrize(
    "kappa_im, expected",
    [
        (0.0, (0.02, 0.01, 0.005)),
        (0.1, (0.02 / 1.1, 0.01 / 1.1, 0.005 / 1.1)),
    ],
)
def test_normalize_complex_kappa(kappa_im, expected):
    out = normalize_complex_kappa(QuadraticAlgebraParams(0.02, 0.01, 0.005, kappa_im))
    assert (out.alpha, out.beta, out.kappa_re, out.kappa_im) == pytest.approx((*expected, 0.0), rel=1e-15)
    assert out.operator_scale == pytest.approx(math.sqrt(1 + kappa_im))


def test_normalize_imaginary_only_matches_high_precision():
    mp.dps = 40
    out = normalize_complex_kappa(QuadraticAlgebraParams(0.02, 0.01, 0.0, 0.1))
    assert out.alpha == pytest.approx(float(mpf("0.02") / mpf("1.1")), rel=1e-15)
    assert out.beta == pytest.approx(float(mpf("0.01") / mpf("1.1")), rel=1e-15)


def test_degenerate_rescale():
    with pytest.raises(DegenerateRescale):
        QuadraticAlgebraParams(0.02, 0.01, 0.0, -1.0)


def test_rotation_example_high_precision():
    mp.dps = 40
    a, b, k = mpf("0.02"), mpf("0.01"), mpf("0.005")
    d = msqrt((a - b) ** 2 + 4 * k * k)
    cos2, sin2 = (a - b) / d, -2 * k / d
    ap = (a + b) / 2 + (a - b) / 2 * cos2 - k * sin2
    bp = (a + b) / 2 - (a - b) / 2 * cos2 + k * sin2
    r = rotate_to_canonical(0.02, 0.01, 0.005)
    assert r.alpha_p == pytest.approx(float(ap), abs=1e-16)
    assert r.beta_p == pytest.approx(float(bp), abs=1e-16)
    assert r.alpha_p == pytest.approx(0.0220711, abs=1e-7)
    assert r.beta_p == pytest.approx(0.0079289, abs=1e-7)
    assert abs(r.kappa_p) < 1e-14
    assert r.alpha_p * r.beta_p == pytest.approx(1.75e-4, rel=1e-12)


def test_rotation_equal_diagonal_branch():
    r = rotate_to_canonical(0.01, 0.01, 0.002)
    assert r.phi == math.pi / 4
    assert (r.alpha_p, r.beta_p) == pytest.approx((0.008, 0.012), abs=1e-16)
    assert r.sigma == 1


def test_rotation_identity_without_kappa():
    r = rotate_to_canonical(0.02, 0.01, 0.0)
    assert r.phi == 0.0
    assert (r.alpha_p, r.beta_p, r.kappa_p) == (0.02, 0.01, 0.0)


@settings(max_examples=300, deadline=None)
@given(admissible())
def test_rotation_invariants_property(abk):
    a, b, k = abk
    r = rotate_to_canonical(a, b, k)
    assert abs(r.kappa_p) < 1e-14
    assert abs(r.alpha_p + r.beta_p - (a + b)) < 1e-12
    assert abs(r.alpha_p * r.beta_p - (a * b - k * k)) < 1e-12
    assert r.alpha_p > 0 and r.beta_p > 0
    assert -math.pi / 4 < r.phi <= math.pi / 4


@pytest.mark.parametrize(
    "abk, ok, violation",
    [
        ((0.02, 0.01, 0.005), True, None),
        ((0.02, 0.01, 0.02), False, "kappa bound"),
        ((-0.01, 0.01, 0.0), False, "alpha > 0"),
    ],
)
def test_kempf_admissible(abk, ok, violation):
    rep = kempf_admissible(*abk)
    assert bool(rep) is ok
    if violation:
        assert violation in rep.violations


def test_minimal_uncertainties_kempf_value():
    mu = minimal_uncertainties(QuadraticAlgebraParams(0.01, 0.01))
    assert mu.dx0 == pytest.approx(math.sqrt(0.01 / (1 - 1e-4)), rel=1e-14)
    assert mu.dx0 == pytest.approx(0.1000050, abs=1e-7)


def test_minimal_uncertainties_with_kappa():
    mu = minimal_uncertainties(QuadraticAlgebraParams(0.01, 0.01, 0.005), ExpectationContext(0.0, 0.0))
    mp.dps = 40
    oracle = msqrt(mpf("0.01") / (mpf("1.005") ** 2 - mpf("0.0001")))
    assert mu.dx0 == pytest.approx(float(oracle), rel=1e-14)
    assert mu.dx0 == pytest.approx(0.0995074, abs=1e-7)
    assert mu.dx_min == mu.dx0


def test_minimal_uncertainties_not_admissible():
    with pytest.raises(NotAdmissible):
        minimal_uncertainties(QuadraticAlgebraParams(0.02, 0.01, 0.02))


@settings(max_examples=200, deadline=None)
@given(admissible(), st.floats(-3, 3), st.floats(-3, 3))
def test_uncertainty_invariants(abk, mx, mp_):
    p = QuadraticAlgebraParams(*abk)
    ctx = ExpectationContext(mx, mp_)
    mu = minimal_uncertainties(p, ctx)
    assert mu.gamma_exp >= 0
    assert mu.dx0 <= mu.dx_min and mu.dp0 <= mu.dp_min
    denom = (1 + abs(p.kappa_re)) ** 2 - p.alpha * p.beta
    assert abs(mu.dx0**2 * denom - p.beta) < 1e-12
    assert abs(mu.dp0**2 * denom - p.alpha) < 1e-12


def test_bound_example_quadratic_root():
    b = uncertainty_lower_bound(QuadraticAlgebraParams(0.01, 0.01, 0.005), None, 1.0)
    expected = (2.01 - math.sqrt(2.01**2 - 4 * 0.01 * 1.01)) / (2 * 0.01)
    assert b.dx == pytest.approx(expected, rel=1e-13)
    assert b.dx == pytest.approx(0.503750, abs=1e-6)
    assert not b.in_gap


def test_bound_linear_limit():
    b = uncertainty_lower_bound(QuadraticAlgebraParams(1e-12, 0.01), ExpectationContext(), 2.0)
    assert b.dx == pytest.approx((1 + 0.01 * 4) / 4, rel=1e-9)


def test_bound_gap_reports_vertex_or_raises():
    p = QuadraticAlgebraParams(0.05, 0.05)
    dp = 0.5 * minimal_uncertainties(p).dp_min
    b = uncertainty_lower_bound(p, None, dp)
    assert b.in_gap and math.isnan(b.dx_lower) and b.dx == b.vertex
    with pytest.raises(NoRealRoot):
        uncertainty_lower_bound(p, None, dp, strict=True)


@pytest.mark.parametrize("abk", [(0.01, 0.01, 0.005), (0.02, 0.01, 0.0), (0.03, 0.005, -0.01)])
@pytest.mark.parametrize("means", [(0.0, 0.0), (1.0, -2.0)])
def test_bound_minimum_equals_dx_min(abk, means):
    p = QuadraticAlgebraParams(*abk)
    ctx = ExpectationContext(*means)
    mu = minimal_uncertainties(p, ctx)

    def lower_branch(dp):
        b = uncertainty_lower_bound(p, ctx, dp)
        return math.inf if b.in_gap else b.dx

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = minimize_scalar(lower_branch, bounds=(mu.dp_min * 1.0000001, 50 * mu.dp_min + 10), method="bounded",
                              options={"xatol": 1e-12})
    assert abs(res.fun - mu.dx_min) < 1e-10


def test_complex_path_with_zero_kappa_is_bitwise_identical():
    p_real = QuadraticAlgebraParams(0.02, 0.01)
    p_cplx = QuadraticAlgebraParams(0.02, 0.01, 0.0, 0.0)
    assert normalize_complex_kappa(p_cplx) == p_real
    assert minimal_uncertainties(p_cplx) == minimal_uncertainties(p_real)


def test_complex_kappa_uses_effective_coupling():
    p = QuadraticAlgebraParams(0.02, 0.01, 0.004, 0.05)
    mu = minimal_uncertainties(p)
    m = 1 + 0.05 + 0.004
    assert mu.dx0 == pytest.approx(math.sqrt(0.01 / (m * m - 0.02 * 0.01)), rel=1e-14)


def test_rotation_vectorised_sweep_is_fast():
    rng = np.random.default_rng(3)
    a = rng.uniform(1e-4, 0.05, 2000)
    b = rng.uniform(1e-4, 0.05, 2000)
    k = rng.uniform(-0.99, 0.99, 2000) * np.sqrt(a * b)
    worst = max(abs(rotate_to_canonical(*t).kappa_p) for t in zip(a, b, k))
    assert worst < 1e-14
