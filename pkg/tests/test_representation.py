import numpy as np
import pytest
from hypothesis import given, strategies as st

from oplab.rademacher import RBoundConfig
from oplab.representation import (
    CommutationError,
    FiniteRepresentation,
    RepresentationError,
    RTensor,
    apply_rep,
    check_commutant,
    coordinate_projections,
    dot_extension,
    product_rep,
    random_commutant,
    rep_norm,
    similar_system,
    skew_pair,
    tensor_function,
    verify_extension,
)
from oplab.spaces import INF, SearchConfig, lp, weighted_atoms

from conftest import cnormal

FAST = RBoundConfig(sizes=(1, 2, 4), restarts=4, iterations=120)


def test_coordinate_projections_have_norm_one():
    u = coordinate_projections(lp(4, 2), [1, 3]).validate()
    est = rep_norm(u)
    assert est.value == 1.0 and est.kind == "exact"


def test_coordinate_projections_on_lp_have_norm_one():
    u = coordinate_projections(lp(3, 3), [2, 1])
    assert rep_norm(u).value == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_skew_pair_norm(t):
    # u(1, -1) = [[1, 2t], [0, -1]] has norm t + sqrt(1 + t^2)
    u = skew_pair(t)
    assert rep_norm(u).value == pytest.approx(t + np.sqrt(1 + t * t), rel=1e-9)


def test_invalid_systems_are_rejected():
    P = np.array([[[1, 0], [0, 0]], [[1, 0], [0, 1]]], dtype=complex)
    with pytest.raises(RepresentationError, match="disjoint") as e:
        FiniteRepresentation(lp(2, 2), P).validate()
    assert "disjoint" in e.value.residuals
    with pytest.raises(ValueError):
        FiniteRepresentation(lp(3, 2), P)


def test_non_unital_system():
    P = np.array([[[1, 0], [0, 0]]], dtype=complex)
    FiniteRepresentation(lp(2, 2), P, unital=False).validate()
    with pytest.raises(RepresentationError, match="unital"):
        FiniteRepresentation(lp(2, 2), P).validate()


def test_json_round_trip(rng):
    u = similar_system(weighted_atoms(3, 3, [1, 2, 3]), [1, 2], np.eye(3) + 0.3 * cnormal(rng, (3, 3)))
    v = FiniteRepresentation.loads(u.dumps())
    assert v.space == u.space
    np.testing.assert_array_equal(v.idempotents, u.idempotents)


def test_commutant_check(rng):
    u = coordinate_projections(lp(3, 2), [1, 2])
    good = random_commutant(rng, [1, 2], np.eye(3), 2)
    check_commutant(u, good)
    with pytest.raises(CommutationError) as e:
        check_commutant(u, [np.ones((3, 3))])
    assert e.value.pair == (0, 0)


@pytest.mark.parametrize("p", [2, 3, 1, INF])
def test_extension_inequality_holds(rng, p):
    X = lp(4, p)
    S = np.eye(4) + 0.5 * cnormal(rng, (4, 4))
    u = similar_system(X, [2, 2], S)
    x = RTensor(cnormal(rng, (3, 2)), random_commutant(rng, [2, 2], S, 3))
    r = verify_extension(u, x, FAST)
    assert not r.violation
    assert r.lhs <= r.rhs * (1 + 1e-6)


def test_zero_tensor():
    u = coordinate_projections(lp(2, 2), [1, 1])
    r = verify_extension(u, RTensor(np.zeros((1, 2)), np.eye(2)[None]), FAST)
    assert r.lhs == 0 and r.r_norm == 0 and not r.violation


def test_dot_extension_identity_map(rng):
    u = coordinate_projections(lp(3, 1), [1, 2])
    F = np.exp(2j * np.pi * rng.random((2, 1)))
    op, rep = dot_extension(u, np.eye(3)[None], lp(1, 2), F, FAST)
    np.testing.assert_allclose(op.entries, apply_rep(u, F[:, 0]).entries, atol=1e-14)
    assert not rep.violation


def test_product_representation():
    u = coordinate_projections(lp(4, 2), [2, 2])
    v = coordinate_projections(lp(4, 2), [1, 1, 1, 1])
    w = product_rep(u, v)
    assert w.N == 8
    w.validate()
    f, g = np.array([1, 2]), np.array([1, 10, 100, 1000])
    np.testing.assert_allclose(apply_rep(w, tensor_function(f, g)).entries,
                               apply_rep(u, f).entries @ apply_rep(v, g).entries)


@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), min_size=2, max_size=2),
       st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), min_size=2, max_size=2))
def test_representation_is_multiplicative(f, g):
    u = skew_pair(1.5)
    lhs = apply_rep(u, np.multiply(f, g)).entries
    rhs = apply_rep(u, f).entries @ apply_rep(u, g).entries
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)
