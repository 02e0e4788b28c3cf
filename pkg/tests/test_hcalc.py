import numpy as np
import pytest
from hypothesis import given, strategies as st

from oplab.hcalc import (
    AnalyticFn,
    Contour,
    ContourError,
    OperatorFn,
    SectorialError,
    SimilarityError,
    TruncationError,
    blowup_test,
    cl_rep,
    contour_calc,
    fit_slope,
    hinf_norm,
    make_sectorial,
    op_valued_calc,
    parse_preset,
    phi_integral_check,
    power_is_ratios,
    similarity_selfadjoint,
    spectral_calc,
    uniform_profile,
    verify_kw,
)
from oplab.rademacher import RBoundConfig

JORDAN = np.array([[1.0, 1.0], [0.0, 1.0]])
F_JORDAN = AnalyticFn.rational([0], [-2, -2], 1.0)


def random_sectorial(rng, d, spread=1.0):
    V = np.eye(d) + 0.3 * (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
    lam = rng.uniform(0.1, 10, d) * np.exp(1j * rng.uniform(-spread, spread, d))
    return V @ np.diag(lam) @ np.linalg.inv(V)


def test_jordan_block_closed_form():
    # f(J) = [[f(1), f'(1)], [0, f(1)]] with f(1) = 1/9, f'(1) = 1/27
    res = contour_calc(F_JORDAN, JORDAN)
    np.testing.assert_allclose(res.matrix, [[1 / 9, 1 / 27], [0, 1 / 9]], atol=1e-10)
    assert res.error < 1e-9


def test_diagonal_matrix():
    f = AnalyticFn.rational([0], [-1, -1], 4.0)
    res = contour_calc(f, np.diag([1.0, 2.0]))
    np.testing.assert_allclose(res.matrix, np.diag([1.0, 8 / 9]), atol=1e-10)


@pytest.mark.parametrize("preset", ["rational:zeros=0;poles=-1,-1;scale=4", "rational:zeros=0,0;poles=-1,-1,-1",
                                    "rational:zeros=0;poles=-1+1j,-1-1j"])
def test_contour_matches_spectral(rng, preset):
    f = parse_preset(preset)
    for d in (1, 3, 6):
        A = random_sectorial(rng, d)
        np.testing.assert_allclose(contour_calc(f, A).matrix, spectral_calc(f, A), atol=1e-8)


def test_constant_zero_and_resolvent():
    A = np.diag([1.0, 3.0])
    assert np.all(contour_calc(AnalyticFn.constant(0), A).matrix == 0)
    np.testing.assert_allclose(spectral_calc(AnalyticFn.resolvent(-1), A), np.linalg.inv(-np.eye(2) - A))


def test_operator_valued_scalar_multiple(rng):
    A = random_sectorial(rng, 3)
    B = np.linalg.matrix_power(A, 2) + A
    F = OperatorFn.scalar_times(F_JORDAN, B)
    np.testing.assert_allclose(op_valued_calc(F, A).matrix, B @ spectral_calc(F_JORDAN, A), atol=1e-9)


def test_non_commuting_operator_function_is_rejected():
    F = OperatorFn.scalar_times(F_JORDAN, np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        op_valued_calc(F, np.diag([1.0, 2.0]))


def test_missing_decay_is_rejected():
    with pytest.raises(ContourError, match="decay"):
        contour_calc(AnalyticFn.power_is(1.0), np.eye(2))


def test_short_contour_raises_with_suggestion():
    A = make_sectorial(np.diag([1.0, 2.0]))
    with pytest.raises(TruncationError) as e:
        contour_calc(F_JORDAN, A, Contour(np.pi / 2, 1e-2, 1e2))
    lo, hi = e.value.suggested
    assert lo < 1e-2 and hi > 1e2 and e.value.bound > 1e-10
    res = contour_calc(F_JORDAN, A, Contour(np.pi / 2, lo, hi))
    np.testing.assert_allclose(res.matrix, np.diag([1 / 9, 2 / 16]), atol=1e-9)


def test_non_sectorial_matrices():
    with pytest.raises(SectorialError):
        make_sectorial(np.diag([-1.0, 1.0]))
    with pytest.raises(SectorialError, match="semisimple"):
        make_sectorial(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert make_sectorial(np.diag([0.0, 1.0])).omega == 0.0


def test_sup_norms():
    h = AnalyticFn.rational([0], [-1, -1], 4.0)
    assert hinf_norm(h, 0.0) == pytest.approx(1.0, abs=1e-9)
    # on the ray arg = pi/2, |4 i r / (1 + i r)^2| = 4 r / (1 + r^2) peaks at 2
    assert hinf_norm(h, np.pi / 2) == pytest.approx(2.0, rel=1e-6)
    assert hinf_norm(AnalyticFn.power_is(2.0), 0.0) == pytest.approx(1.0)


def test_power_is_ratios_on_jordan_block():
    # f_s(J) = [[1, i s], [0, 1]], whose norm is (s + sqrt(s^2 + 4)) / 2
    s = np.array([0.0, 5.0, 20.0])
    np.testing.assert_allclose(power_is_ratios(JORDAN, s), (s + np.sqrt(s**2 + 4)) / 2, rtol=1e-8)


def test_blowup_dichotomy():
    assert blowup_test(JORDAN, np.linspace(0, 50, 6))["detected"]
    out = blowup_test(np.diag([1.0, 2.0, 5.0]), np.linspace(0, 50, 6))
    assert not out["detected"] and np.max(out["ratios"]) < 1.1


def test_fit_slope_exact_line():
    fit = fit_slope([0, 1, 2], [1, 3, 5])
    assert fit.slope == pytest.approx(2) and fit.r2 == pytest.approx(1)


def test_uniform_profile_of_positive_diagonal():
    prof = uniform_profile(np.diag([1.0, 2.0, 5.0]))
    assert prof.M[0] == pytest.approx(1.0, abs=1e-8)
    assert np.all(prof.M <= 1 + 1e-8)


def test_kw_bound_for_scalar_function():
    F = OperatorFn.scalar_times(F_JORDAN, np.eye(2))
    r = verify_kw(np.diag([1.0, 3.0]), F, [0.5, 1.0, 2.0], RBoundConfig(sizes=(1, 2)))
    assert not r.violation


def test_cauchy_reconstruction():
    A = make_sectorial(np.diag([1.0, 3.0]))
    F = OperatorFn.scalar_times(F_JORDAN, np.eye(2))
    c = Contour(np.pi / 2, 1e-8, 1e8, panels=128)
    rep = phi_integral_check(F, c, [1e-9, 0.5, 2.0, 1e9], r_hat=False)
    assert list(rep.trusted) == [False, True, True, False]
    assert rep.max_deviation < 1e-8


def test_spectral_mapping(rng):
    A = random_sectorial(rng, 4)
    psi, rep = cl_rep(A, lambda z: np.exp(-z))
    assert rep.max_error < 1e-9 and rep.resolvent_error < 1e-9


def test_continuous_calculus_rejects_jordan_block():
    with pytest.raises(SectorialError, match="Jordan"):
        cl_rep(JORDAN, np.exp)


def test_similarity_to_selfadjoint():
    A = np.array([[1.0, 1.0], [0.0, 2.0]])
    S = similarity_selfadjoint(A)
    B = np.linalg.solve(S, A @ S)
    np.testing.assert_allclose(B, B.conj().T, atol=1e-10)
    for M, why in [(JORDAN, "jordan_block"), (np.array([[0.0, -1.0], [1.0, 0.0]]), "complex_eigenvalue")]:
        with pytest.raises(SimilarityError) as e:
            similarity_selfadjoint(M)
        assert e.value.obstruction == why


@given(st.floats(0.2, 20), st.floats(0.2, 20))
def test_calculus_is_multiplicative_on_diagonals(a, b):
    A = np.diag([a, b])
    f = AnalyticFn.rational([0], [-1, -1], 1.0)
    g = AnalyticFn.rational([0], [-2, -2], 1.0)
    fg = AnalyticFn.rational([0, 0], [-1, -1, -2, -2], 1.0)
    np.testing.assert_allclose(contour_calc(fg, A).matrix, contour_calc(f, A).matrix @ contour_calc(g, A).matrix,
                               atol=1e-9)
