import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oplab.rademacher import (
    AverageConfig,
    EnumerationLimitError,
    RadFamily,
    RBoundConfig,
    gauss_norm,
    r_bound,
    r_bound_of_map,
    rad_norm,
)
from oplab.spaces import INF, OperatorMatrix, SearchConfig, lp, op_norm

from conftest import cnormal

FAST = RBoundConfig(sizes=(1, 2, 4), restarts=4, iterations=120)


def brute_rad(X, x):
    # all 2^k sign vectors, no symmetry tricks
    k = len(x)
    vals = [X.norm(np.array(s) @ x) ** 2 for s in itertools.product([-1, 1], repeat=k)]
    return np.sqrt(np.mean(vals))


@pytest.mark.parametrize("p", [1, 3, INF])
def test_exact_average_matches_brute_force(rng, p):
    X = lp(3, p)
    x = cnormal(rng, (5, 3))
    assert rad_norm(RadFamily(X, x)).value == pytest.approx(brute_rad(X, x), rel=1e-13)


def test_single_member_is_its_norm(rng):
    X = lp(4, 1)
    x = cnormal(rng, (1, 4))
    assert rad_norm(RadFamily(X, x)).value == pytest.approx(X.norm(x[0]), rel=1e-14)


def test_l1_two_unit_vectors():
    # ||e1 + e2||_1 = ||e1 - e2||_1 = 2
    assert rad_norm(RadFamily(lp(2, 1), np.eye(2))).value == pytest.approx(2.0)


def test_exact_mode_refuses_long_families():
    fam = RadFamily(lp(2, 2), np.ones((16, 2)))
    with pytest.raises(EnumerationLimitError, match="monte_carlo"):
        rad_norm(fam, AverageConfig(mode="exact"))


def test_monte_carlo_is_seeded_and_covers_the_exact_value(rng):
    X = lp(3, 1)
    fam = RadFamily(X, cnormal(rng, (8, 3)))
    exact = rad_norm(fam).value
    a = rad_norm(fam, AverageConfig(mode="monte_carlo", seed=4, samples=20000))
    b = rad_norm(fam, AverageConfig(mode="monte_carlo", seed=4, samples=20000))
    assert a.value == b.value and a.mode == "monte_carlo"
    assert abs(a.value - exact) < 5 * a.stderr


def test_gaussian_average_on_hilbert_space(rng):
    x = cnormal(rng, (4, 3))
    g = gauss_norm(RadFamily(lp(3, 2), x), AverageConfig(gaussian_samples=40000, seed=1))
    assert abs(g.value - np.linalg.norm(x)) < 5 * g.stderr


@given(st.integers(1, 8), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_hilbert_isometry(k, d, seed):
    r = np.random.default_rng(seed)
    x = cnormal(r, (k, d))
    assert rad_norm(RadFamily(lp(d, 2), x)).value == pytest.approx(np.linalg.norm(x), rel=1e-12)


@given(st.integers(1, 7), st.sampled_from([1, 2, INF]), st.integers(0, 2**32 - 1))
def test_contraction_principle(k, p, seed):
    r = np.random.default_rng(seed)
    X = lp(3, p)
    x = cnormal(r, (k, 3))
    base = rad_norm(RadFamily(X, x)).value
    s = r.choice([-1.0, 1.0], size=k)
    assert rad_norm(RadFamily(X, s[:, None] * x)).value == pytest.approx(base, rel=1e-12)
    a = r.random(k) * np.exp(2j * np.pi * r.random(k))
    assert rad_norm(RadFamily(X, a[:, None] * x)).value <= 2 * np.max(np.abs(a)) * base * (1 + 1e-12)


def test_singleton_r_bound_is_the_operator_norm(rng):
    X = lp(3, 3)
    T = OperatorMatrix.on(X, cnormal(rng, (3, 3)))
    est = r_bound([T], FAST)
    ref = op_norm(T, SearchConfig(32, 800)).value
    assert est.value == pytest.approx(ref, rel=1e-2)
    assert est.witness_ratio() == pytest.approx(est.value, rel=1e-12)


def test_hilbert_r_bound_is_the_largest_norm(rng):
    X = lp(3, 2)
    tau = [OperatorMatrix.on(X, cnormal(rng, (3, 3))) for _ in range(3)]
    assert r_bound(tau, FAST).value == pytest.approx(max(op_norm(T).value for T in tau), rel=1e-10)


def test_plus_minus_identity():
    X = lp(3, 1)
    tau = [OperatorMatrix.on(X, s * np.eye(3)) for s in (1, -1)]
    assert r_bound(tau, FAST).value == pytest.approx(1.0, abs=1e-9)


def test_circle_on_l1_exceeds_one_and_obeys_contraction():
    # {z I : |z| <= 1} on l^1_4: between 1 and the complex contraction constant 2
    X = lp(4, 1)
    est = r_bound_of_map(np.eye(4)[None], lp(1, 2), X, FAST)
    assert 1.3 < est.value <= 2.0


def test_errors_on_bad_sets():
    with pytest.raises(ValueError, match="empty"):
        r_bound([])
    with pytest.raises(ValueError, match="common space"):
        r_bound([OperatorMatrix.on(lp(2, 2), np.eye(2)), OperatorMatrix.on(lp(2, 1), np.eye(2))])


def test_r_bound_is_deterministic(rng):
    X = lp(2, 1)
    tau = [OperatorMatrix.on(X, cnormal(rng, (2, 2))) for _ in range(2)]
    assert r_bound(tau, FAST).value == r_bound(tau, FAST).value
