import math

import mpmath
import numpy as np
import pytest
import scipy.sparse as sps
from hypothesis import given, settings
from hypothesis import strategies as st

from deformqm.errors import DomainViolation, IndefiniteKinetic, ParameterRange, RangeUnsupported
from deformqm.exact_spectra import morse_spectrum, pt_hyp_spectrum, pt_trig_spectrum
from deformqm.fdeform import stencil_matrix
from deformqm.numerics import (
    GridSpec,
    ToleranceProfile,
    assemble_hamiltonian,
    bessel_j,
    cap_grid,
    dispersion_laplacian,
    eigensolve,
    gamma_real,
    lgamma_real,
    log_bessel_j,
    pt_kinetic_cap,
    spectrum_compare,
)

# ------------------------------------------------------------------ Bessel


@pytest.mark.parametrize("z", [1.0, 5.0, 20.0])
def test_bessel_half_integer_closed_form(z):
    assert bessel_j(0.5, z) == pytest.approx(math.sqrt(2 / (math.pi * z)) * math.sin(z), rel=1e-12)
    assert bessel_j(1.5, z) == pytest.approx(
        math.sqrt(2 / (math.pi * z)) * (math.sin(z) / z - math.cos(z)), rel=1e-11
    )


@settings(max_examples=150, deadline=None)
@given(st.floats(0.0, 300.0), st.floats(0.05, 500.0))
def test_bessel_matches_mpmath(nu, z):
    ref = float(mpmath.besselj(nu, z))
    amplitude = math.sqrt(2 / (math.pi * max(z, nu, 1.0)))
    assert abs(bessel_j(nu, z) - ref) <= 1e-10 * abs(ref) + 1e-13 * amplitude


@settings(max_examples=100, deadline=None)
@given(st.floats(1.0, 800.0), st.floats(0.1, 5000.0))
def test_bessel_three_term_recurrence(nu, z):
    jm, j0, jp = bessel_j(nu - 1, z), bessel_j(nu, z), bessel_j(nu + 1, z)
    scale = max(abs(jm), abs(jp), abs(2 * nu / z * j0), 1e-300)
    assert abs(jm + jp - 2 * nu / z * j0) <= 1e-9 * scale


@pytest.mark.parametrize("nu, z", [(100.0, 3.0), (500.0, 10.0), (50.0, 9000.0)])
def test_log_bessel_extreme_values(nu, z):
    la, sg = log_bessel_j(nu, z)
    mp_val = mpmath.besselj(nu, z)
    assert la == pytest.approx(float(mpmath.log(abs(mp_val))), rel=1e-11)
    assert sg == float(mpmath.sign(mp_val))


def test_bessel_at_origin():
    assert bessel_j(0.0, 0.0) == 1.0
    assert bessel_j(2.5, 0.0) == 0.0
    z = 1e-8
    assert bessel_j(2.5, z) == pytest.approx((z / 2) ** 2.5 / math.gamma(3.5), rel=1e-12)


def test_bessel_vectorised():
    z = np.array([0.5, 2.0, 40.0, 900.0])
    np.testing.assert_array_equal(bessel_j(3.3, z), [bessel_j(3.3, v) for v in z])


@pytest.mark.parametrize("nu, z", [(1001.0, 1.0), (1.0, 1.0001e4), (-0.5, 1.0), (1.0, -1.0)])
def test_bessel_range(nu, z):
    with pytest.raises(RangeUnsupported):
        bessel_j(nu, z)


# ------------------------------------------------------------------- Gamma


def test_gamma_values():
    assert gamma_real(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    for n in range(1, 11):
        assert gamma_real(n + 1) == pytest.approx(math.factorial(n), rel=1e-14)
    assert gamma_real(2.5) == pytest.approx(1.5 * 0.5 * math.sqrt(math.pi), rel=1e-14)


@pytest.mark.parametrize("x", [0.1, 3.7, 55.5, 169.0, 400.0, 1e4])
def test_lgamma_matches_mpmath(x):
    assert lgamma_real(x) == pytest.approx(float(mpmath.loggamma(x)), rel=1e-13, abs=1e-14)


# -------------------------------------------------------------- eigensolver


def test_eigensolve_diagonal():
    d = np.array([3.0, -1.0, 7.0, 0.5, 2.0])
    res = eigensolve(sps.diags(d), 3)
    np.testing.assert_array_equal(res.eigenvalues, [-1.0, 0.5, 2.0])
    np.testing.assert_allclose(np.abs(res.eigenvectors[[1, 3, 4], [0, 1, 2]]), 1.0)
    assert res.backward_stable


def test_eigensolve_laplacian_dispersion():
    n = 400
    h = math.pi / (n + 1)
    H = -0.5 * stencil_matrix(2, n, h)
    res = eigensolve(H, 6)
    k = np.arange(1, 7)
    np.testing.assert_allclose(res.eigenvalues, dispersion_laplacian(k, math.pi, n + 2), rtol=1e-12)
    err = np.abs(res.eigenvalues - 0.5 * k**2)
    # classical estimate k^4 h^2 / 24
    np.testing.assert_allclose(err, k**4 * h**2 / 24, rtol=1e-3)
    assert res.backward_stable


def test_eigensolve_deterministic():
    H = assemble_hamiltonian("pt-hyp", {"A": 2.5, "beta": 0.0}, GridSpec(-10, 10, 801))
    a, b = eigensolve(H, 3), eigensolve(H, 3)
    np.testing.assert_array_equal(a.eigenvalues, b.eigenvalues)
    np.testing.assert_array_equal(a.eigenvectors, b.eigenvectors)


def test_eigensolve_orthonormal_vectors():
    H = assemble_hamiltonian("pt-hyp", {"A": 4.0, "beta": 0.0}, GridSpec(-10, 10, 1001))
    res = eigensolve(H, 4)
    np.testing.assert_allclose(res.eigenvectors.T @ res.eigenvectors, np.eye(4), atol=1e-10)
    assert np.all(res.residuals <= 1e-10 * res.matrix_norm)


def test_eigensolve_rejects_bad_k():
    with pytest.raises(ParameterRange):
        eigensolve(sps.identity(4), 0)


# ------------------------------------------------------------ Hamiltonians


def test_undeformed_pt_is_standard_matrix():
    grid = GridSpec(-8, 8, 301)
    H = assemble_hamiltonian("pt-hyp", {"A": 2.0, "beta": 0.0}, grid)
    ref = -0.5 * stencil_matrix(2, 301, grid.h) + sps.diags(-3.0 / np.cosh(grid.x) ** 2)
    assert abs(H.matrix - ref).max() < 1e-12


def test_pt_kinetic_cap():
    cap = pt_kinetic_cap(0.01)
    assert cap == pytest.approx(math.acosh(math.sqrt((300 - 1) / 2)), rel=1e-14)
    assert cap == pytest.approx(3.19, abs=0.01)
    assert math.isinf(pt_kinetic_cap(0.0))
    grid = cap_grid(GridSpec(-12, 12, 4001), cap)
    assert grid.x_hi < cap and grid.x_lo > -cap and grid.h == pytest.approx(24 / 4000, rel=1e-12)


def test_pt_kinetic_indefinite_beyond_cap():
    with pytest.raises(IndefiniteKinetic) as exc:
        assemble_hamiltonian("pt-hyp", {"A": 2.0, "beta": 0.01}, GridSpec(-8, 8, 1601))
    assert abs(exc.value.details["x_first_bad"]) > 3.1


def test_pt_trig_domain():
    with pytest.raises(DomainViolation):
        assemble_hamiltonian("pt-trig", {"A": 2.0, "beta": 0.01}, GridSpec(-2, 2, 101))


@pytest.mark.parametrize("accuracy", [2, 4])
@pytest.mark.parametrize(
    "system, params, grid",
    [
        ("pt-hyp", {"A": 2.0, "beta": 0.01}, GridSpec(-3, 3, 301)),
        ("pt-trig", {"A": 2.0, "beta": 0.01}, GridSpec(-1.5, 1.5, 301)),
        ("morse-first-order", {"A": 2.0, "B": 1.0, "beta": 0.01}, GridSpec(-3, 5, 301)),
        ("morse-exact", {"A": 2.0, "B": 1.0, "beta": 0.01}, GridSpec(-3, 20, 301)),
    ],
)
def test_hamiltonians_symmetric_and_banded(system, params, grid, accuracy):
    H = assemble_hamiltonian(system, params, grid, accuracy=accuracy)
    assert H.is_exactly_symmetric()
    assert H.bandwidth <= 5


def test_generic_system_matches_named():
    grid = GridSpec(-3, 3, 201)
    named = assemble_hamiltonian("pt-hyp", {"A": 2.0, "beta": 0.01}, grid)
    generic = assemble_hamiltonian(
        "generic", {"family": "pt-tanh", "beta": 0.01, "potential": lambda u: -3.0 / np.cosh(u) ** 2}, grid
    )
    assert abs(named.matrix - generic.matrix).max() == 0


def test_unknown_system():
    with pytest.raises(ParameterRange):
        assemble_hamiltonian("harmonic", {}, GridSpec(0, 1, 32))


# -------------------------------------------------------- grid vs analytic


def test_morse_exact_two_bound_states():
    H = assemble_hamiltonian("morse-exact", {"A": 2.0, "B": 1.0, "beta": 0.01}, GridSpec(-5, 30, 6000))
    res = eigensolve(H, 3)
    assert np.count_nonzero(res.eigenvalues < 0) == 2
    assert res.eigenvalues[0] == pytest.approx(-1.994990, abs=1e-4)


@pytest.mark.parametrize("accuracy, order", [(2, 4.0), (4, 16.0)])
def test_h_refinement_undeformed_pt(accuracy, order):
    errs = []
    for n in (801, 1601):
        H = assemble_hamiltonian("pt-hyp", {"A": 2.0, "beta": 0.0}, GridSpec(-12, 12, n), accuracy=accuracy)
        errs.append(abs(eigensolve(H, 1, vectors=False).eigenvalues[0] + 2.0))
    assert errs[0] / errs[1] == pytest.approx(order, rel=0.2)


def test_pt_trig_first_order_on_grid():
    beta = 1e-3
    edge = math.pi / 2 - 1e-3
    H = assemble_hamiltonian("pt-trig", {"A": 2.0, "beta": beta}, GridSpec(-edge, edge, 4001))
    res = eigensolve(H, 2)
    table = spectrum_compare(pt_trig_spectrum(2.0, beta, 2), res, ToleranceProfile.nominal(1e-4, 1e-3, beta),
                             target="first_order")
    assert table.passed


# ---------------------------------------------------------------- compare


def test_tolerance_profile_tightens_fourfold():
    prof = ToleranceProfile.nominal(5e-4, 0.006, 0.01)
    assert prof.budget == pytest.approx(5e-4, rel=1e-14)
    assert prof.at(0.003, 0.005).budget == pytest.approx(1.25e-4, rel=1e-14)
    exact = ToleranceProfile.nominal(1e-4, 0.006, 0.01, exact_representation=True)
    assert exact.representation_budget == 0.0
    assert exact.at(0.003, 0.5).budget == pytest.approx(2.5e-5, rel=1e-14)


def test_spectrum_compare_rows():
    report = pt_hyp_spectrum(2.0, 0.0)
    H = assemble_hamiltonian("pt-hyp", {"A": 2.0, "beta": 0.0}, GridSpec(-12, 12, 2001))
    res = eigensolve(H, 2)
    table = spectrum_compare(report, res, ToleranceProfile.nominal(1e-4, H.grid.h, 0.0))
    assert table.passed and [r.n for r in table.rows] == [0, 1]
    assert table.rows[0].analytic == -2.0
    strict = spectrum_compare(report, res, ToleranceProfile.nominal(1e-9, H.grid.h, 0.0))
    assert not strict.passed


def test_spectrum_compare_morse_exact():
    _, report = morse_spectrum(2.0, 1.0, 0.01)
    H = assemble_hamiltonian("morse-exact", {"A": 2.0, "B": 1.0, "beta": 0.01}, GridSpec(-5, 30, 6000), accuracy=4)
    table = spectrum_compare(report, eigensolve(H, 2),
                             ToleranceProfile.nominal(1e-6, H.grid.h, 0.01, exact_representation=True))
    assert table.passed
