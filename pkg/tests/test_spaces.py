import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from metricfactor.spaces import (
    INF,
    Budget,
    NormedOperator,
    NormedSpace,
    SeparatedBasisWitness,
    basis_constant,
    block_sum,
    convex_separation,
    estimate_witness,
    identity,
    lp,
    modulus_of_convexity,
    normalize,
    operator_norm,
    parse_space,
)

SMALL = Budget(16, 200)
finite = st.floats(-1e3, 1e3, allow_nan=False)
vec3 = arrays(np.float64, 3, elements=finite)

SPACES = [
    lp(3, 1),
    lp(3, 2),
    lp(3, INF),
    lp(3, 3.5),
    NormedSpace(3, 2.0, "weighted", weights=(1.0, 4.0, 0.25)),
    block_sum((1, 2), 2.0, 1.0),
    block_sum((2, 1), 1.0, INF),
]


def signs(k):
    return np.array(list(itertools.product((-1.0, 1.0), repeat=k)))


# --- norms ------------------------------------------------------------------


@pytest.mark.parametrize("p", [1, 2, 3.5, INF])
def test_lp_matches_numpy(p):
    x = np.random.default_rng(0).normal(size=(50, 4))
    assert np.allclose(lp(4, p).norm(x), np.linalg.norm(x, ord=p, axis=-1), rtol=1e-13)


def test_large_p_no_overflow():
    assert lp(2, 400).norm([1e300, 1e300]) == pytest.approx(1e300 * 2 ** (1 / 400))


def test_weighted_and_block_norms():
    w = NormedSpace(2, 2.0, "weighted", weights=(4.0, 1.0))
    assert w.norm([1.0, 0.0]) == pytest.approx(2.0)
    b = block_sum((1, 2), 2.0, 1.0)
    assert b.norm([3.0, 3.0, 4.0]) == pytest.approx(8.0)
    assert block_sum((1, 2), 2.0, INF).norm([3.0, 3.0, 4.0]) == pytest.approx(5.0)


@pytest.mark.parametrize("space", SPACES, ids=lambda s: s.label)
@settings(max_examples=40, deadline=None)
@given(x=vec3, y=vec3, c=st.floats(-10, 10))
def test_norm_axioms(space, x, y, c):
    nx, ny = space.norm(x), space.norm(y)
    assert space.norm(x + y) <= (nx + ny) * (1 + 1e-12) + 1e-12
    assert space.norm(c * x) == pytest.approx(abs(c) * nx, rel=1e-12, abs=1e-12)
    assert (nx == 0) == (not np.any(x))


@pytest.mark.parametrize("space", SPACES, ids=lambda s: s.label)
@settings(max_examples=40, deadline=None)
@given(x=vec3, y=vec3)
def test_norming_functional_and_duality(space, x, y):
    w = space.norming_functional(x)
    assert space.dual_norm(w) <= 1 + 1e-12
    assert w @ x == pytest.approx(space.norm(x), rel=1e-10, abs=1e-9)
    # Hölder
    assert abs(y @ x) <= space.dual_norm(y) * space.norm(x) * (1 + 1e-12) + 1e-9


@pytest.mark.parametrize("space", SPACES, ids=lambda s: s.label)
def test_unit_basis_and_json(space):
    e = space.unit_basis()
    assert e.shape == (6, 3)
    assert np.allclose(space.norm(e), 1.0)
    assert NormedSpace.from_json(space.to_json()) == space


def test_parse_space():
    assert parse_space("l2:3") == lp(3, 2)
    assert parse_space("linf:2") == lp(2, INF)
    assert parse_space("lp:3:5") == lp(5, 3)
    for bad in ("l2", "l3:2", "lp:0.5:2", "l2:x"):
        with pytest.raises(ValueError):
            parse_space(bad)


def test_bad_spaces():
    with pytest.raises(ValueError):
        NormedSpace(0)
    with pytest.raises(ValueError):
        block_sum((1, 0))
    with pytest.raises(ValueError):
        lp(3).norm([1.0, 2.0])
    with pytest.raises(ValueError):
        NormedOperator(np.eye(2), lp(3), lp(2))


# --- operator norms ---------------------------------------------------------


@pytest.mark.parametrize("seed", range(3))
def test_operator_norm_closed_forms(seed):
    M = np.random.default_rng(seed).normal(size=(3, 4))
    one = operator_norm(NormedOperator(M, lp(4, 1), lp(3, 1)))
    assert one.exact and one.upper == pytest.approx(np.abs(M).sum(0).max())
    inf = operator_norm(NormedOperator(M, lp(4, INF), lp(3, INF)))
    assert inf.upper == pytest.approx(np.abs(M).sum(1).max())
    two = operator_norm(NormedOperator(M, lp(4, 2), lp(3, 2)))
    assert two.upper == pytest.approx(np.linalg.norm(M, 2)) and two.lower <= two.upper


@pytest.mark.parametrize("seed", range(3))
def test_operator_norm_search_from_l1(seed):
    # the l1 ball is the hull of ±e_i: the norm is the largest column norm
    M = np.random.default_rng(seed).normal(size=(3, 4))
    est = operator_norm(NormedOperator(M, lp(4, 1), lp(3, 2)), SMALL, seed)
    oracle = np.linalg.norm(M, axis=0).max()
    assert est.exact and est.upper == pytest.approx(oracle, rel=1e-14)


@pytest.mark.parametrize("seed", range(3))
def test_operator_norm_search_from_linf(seed):
    # the linf ball is the hull of sign vectors
    M = np.random.default_rng(seed).normal(size=(3, 4))
    est = operator_norm(NormedOperator(M, lp(4, INF), lp(3, 2)), SMALL, seed)
    oracle = np.linalg.norm(signs(4) @ M.T, axis=1).max()
    assert est.exact and est.upper == pytest.approx(oracle, rel=1e-14)


@pytest.mark.parametrize("seed", range(3))
def test_operator_norm_search_general(seed):
    # l2 -> l1: by duality the norm is max over sign vectors s of ||M^T s||_2
    M = np.random.default_rng(seed).normal(size=(3, 4))
    est = operator_norm(NormedOperator(M, lp(4, 2), lp(3, 1)), SMALL, seed)
    oracle = np.linalg.norm(signs(3) @ M, axis=1).max()
    assert not est.exact
    assert est.lower <= est.upper <= oracle * (1 + 1e-12)
    assert est.upper == pytest.approx(oracle, rel=1e-6)


def test_zero_operator_and_normalize():
    Z = NormedOperator(np.zeros((2, 2)), lp(2), lp(2))
    assert operator_norm(Z).upper == 0.0
    A = identity(lp(2)).scaled(3.0)
    assert operator_norm(normalize(A)).upper == pytest.approx(1.0)
    assert np.array_equal(normalize(identity(lp(2))).matrix, np.eye(2))


def test_operator_json_round_trip():
    A = NormedOperator(np.arange(6.0).reshape(2, 3), lp(3, 1), block_sum((1, 1)))
    B = NormedOperator.from_json(A.to_json())
    assert np.array_equal(A.matrix, B.matrix) and A.domain == B.domain and A.codomain == B.codomain


# --- modulus of convexity -----------------------------------------------------


@pytest.mark.parametrize("eps", [0.2, 0.5, 0.8])
def test_l2_modulus_formula(eps):
    est = modulus_of_convexity(identity(lp(2)), eps, SMALL)
    assert est.delta == pytest.approx(1 - math.sqrt(1 - eps**2), abs=1e-6)
    # the reported pair is a genuine witness
    dom = lp(2)
    assert dom.norm(est.x1) <= 1 + 1e-12 and dom.norm(est.x2) <= 1 + 1e-12
    assert dom.norm((est.x1 - est.x2) / 2) >= eps * (1 - 1e-12)
    assert 1 - dom.norm((est.x1 + est.x2) / 2) == pytest.approx(est.delta)


@pytest.mark.parametrize("eps", [0.3, 0.9])
def test_l4_modulus_formula(eps):
    # regression: at eps = 0.9 a one-ulp norm overshoot once discarded the best pair
    est = modulus_of_convexity(identity(lp(2, 4)), eps)
    assert est.delta == pytest.approx(1 - (1 - eps**4) ** 0.25, abs=1e-5)


@pytest.mark.parametrize("p", [1, INF])
def test_flat_spaces_have_zero_modulus(p):
    est = modulus_of_convexity(identity(lp(2, p)), 0.5, SMALL)
    assert est.delta == pytest.approx(0.0, abs=1e-12) and est.feasible


def test_scaled_operator_modulus():
    # ||2h|| = eps means ||h|| = eps / 2
    est = modulus_of_convexity(identity(lp(2)).scaled(2.0), 0.5, SMALL)
    assert est.delta == pytest.approx(1 - math.sqrt(1 - 0.0625), abs=1e-6)


def test_infeasible_modulus_is_one():
    assert modulus_of_convexity(identity(lp(2)), 1.5, SMALL).delta == 1.0
    zero = NormedOperator(np.zeros((2, 2)), lp(2), lp(2))
    est = modulus_of_convexity(zero, 0.1, SMALL)
    assert est.delta == 1.0 and not est.feasible and est.x1 is None


def test_modulus_rejects_nonpositive_eps():
    with pytest.raises(ValueError):
        modulus_of_convexity(identity(lp(2)), 0.0)


def test_modulus_deterministic():
    a = modulus_of_convexity(identity(lp(2, 3)), 0.4, SMALL, seed=5)
    b = modulus_of_convexity(identity(lp(2, 3)), 0.4, SMALL, seed=5)
    assert a.delta == b.delta and np.array_equal(a.x1, b.x1)


# --- convex separation --------------------------------------------------------


@pytest.mark.parametrize("k", [1, 2, 5, 16])
def test_disjoint_l1_units_separation(k):
    res = convex_separation(np.eye(k), lp(k, 1))
    assert res.value == pytest.approx(1.0, abs=1e-6) and res.lower <= res.value


def test_separation_examples():
    assert convex_separation([[1.0, 0.0], [-1.0, 0.0]], lp(2)).value == pytest.approx(0.0, abs=1e-9)
    assert convex_separation(np.eye(2), lp(2)).value == pytest.approx(1 / math.sqrt(2), abs=1e-6)
    # orthonormal in l2: the centroid, 1/sqrt(k)
    assert convex_separation(np.eye(9), lp(9)).value == pytest.approx(1 / 3, abs=1e-6)
    assert convex_separation(np.eye(4), lp(4, INF)).value == pytest.approx(0.25, abs=1e-6)


def test_separation_lower_bound_is_certified():
    Y = np.random.default_rng(3).normal(size=(6, 3)) + [2.0, 0.0, 0.0]
    res = convex_separation(Y, lp(3, 1.5))
    assert res.lower <= res.value <= res.lower * (1 + 1e-6)
    # no weight vector does better than the certified bound
    W = np.random.default_rng(4).dirichlet(np.ones(6), size=5000)
    assert lp(3, 1.5).norm(W @ Y).min() >= res.lower - 1e-12


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 10))
def test_separation_permutation_and_scale(seed, c):
    rng = np.random.default_rng(seed)
    Y = rng.normal(size=(5, 3))
    sp = lp(3, 2)
    base = convex_separation(Y, sp).value
    assert convex_separation(Y[rng.permutation(5)], sp).value == pytest.approx(base, rel=1e-5, abs=1e-9)
    assert convex_separation(c * Y, sp).value == pytest.approx(c * base, rel=1e-5, abs=1e-9)


# --- basis constants and witnesses --------------------------------------------


def test_basis_constant_oblique_pair():
    bc = basis_constant([[1.0, 0.0], [1.0, 1.0]], lp(2))
    assert bc.c >= math.sqrt(2) - 1e-3 and bc.c <= math.sqrt(2) + 1e-9


@pytest.mark.parametrize("p", [1, 2, INF])
def test_basis_constant_of_unit_vectors_is_one(p):
    assert basis_constant(np.eye(4), lp(4, p), SMALL).c == pytest.approx(1.0, abs=1e-9)


def test_summing_basis_in_l1():
    # s_i = e_1 + ... + e_i; prefix projections of sum a_i s_i in l1
    Y = np.tril(np.ones((3, 3)))
    bc = basis_constant(Y, lp(3, 1), SMALL)
    assert bc.c > 1.5


def test_basis_constant_dependent():
    with pytest.raises(ValueError, match="dependent"):
        basis_constant([[1.0, 1.0], [2.0, 2.0]], lp(2))


def test_witness_check_and_json():
    w = estimate_witness(np.eye(4), lp(4, 1), SMALL)
    assert w.psi == pytest.approx(1.0, abs=1e-6) and w.c == pytest.approx(1.0)
    again = SeparatedBasisWitness.from_json(w.to_json())
    assert again.check(lp(4, 1), budget=SMALL)
    assert not SeparatedBasisWitness(np.eye(4), 0.9, 1.0).check(lp(4, 2), budget=SMALL)
