import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from psumlab.operators import (
    LinearMap,
    apply,
    compose,
    diagonal,
    identity,
    op_norm,
    op_norm_upper_bound,
    sign_vectors,
    witness_ratio,
    zero,
)
from psumlab.spaces import Vector, grid_c, lp, lp_norm, sup_seq


def power_iteration(M, iters=5000, seed=0):
    """Largest singular value from iterating M^T M; independent of any SVD."""
    x = np.random.default_rng(seed).standard_normal(M.shape[1])
    A = M.T @ M
    for _ in range(iters):
        y = A @ x
        ny = np.linalg.norm(y)
        if ny == 0:
            return 0.0
        x = y / ny
    return math.sqrt(x @ A @ x)


def brute_linf(M, p_cod):
    """sup over the cube from all 2^n vertices."""
    n = M.shape[1]
    return max(lp_norm(M @ np.array(s), p_cod) for s in itertools.product([-1, 1], repeat=n))


# ---------------------------------------------------------------- examples


def test_apply_examples():
    v = Vector([1.0, 2.0, -3.0], lp(3, 2))
    assert np.array_equal(apply(identity(lp(3, 2)), v).coords, v.coords)
    S = diagonal([1, 1 / 2, 1 / 3], sup_seq(3), lp(3, 2))
    assert np.allclose(apply(S, Vector([1, 1, 1], sup_seq(3))).coords, [1, 1 / 2, 1 / 3])
    assert not np.any(apply(zero(lp(3, 2), lp(2, 1)), v).coords)


def test_apply_rejects_wrong_space():
    with pytest.raises(ValueError):
        apply(identity(lp(3, 2)), Vector([1, 2], lp(2, 2)))


def test_op_norm_examples():
    for n in (1, 3, 7):
        r = op_norm(identity(lp(n, 2)))
        assert r.value == pytest.approx(1) and r.exact
    N = 9
    r = op_norm(diagonal(1 / np.arange(1, N + 1), lp(N, 2)))
    assert r.value == pytest.approx(1)
    r = op_norm(LinearMap(np.ones((2, 2)), lp(2, math.inf), lp(2, 1)))
    assert r.value == 4 and r.exact


def test_compose_examples():
    A = LinearMap(np.arange(6.0).reshape(2, 3), lp(3, 2), lp(2, 1))
    C = compose(A, identity(lp(3, 2)))
    assert np.array_equal(C.matrix, A.matrix) and C.domain == A.domain and C.codomain == A.codomain
    with pytest.raises(ValueError):
        compose(A, identity(lp(2, 2)))


def test_compose_with_diagonal_extraction():
    from psumlab.experiments import thm8_operators

    N = 4
    S, P, T = thm8_operators(N)
    K = np.arange(N * N, dtype=float).reshape(N, N) + 1
    assert np.allclose(T.matrix @ K.ravel(), np.diag(K) / np.arange(1, N + 1))


def test_zero_map_norm_is_zero():
    r = op_norm(zero(lp(4, math.inf), lp(3, 2)))
    assert r.value == 0 and r.exact


def test_complex_linf_domain_rejected():
    T = LinearMap(np.eye(2) * 1j, lp(2, math.inf, "complex"), lp(2, 2, "complex"))
    with pytest.raises(ValueError):
        op_norm(T)


def test_sign_vectors_half_cube():
    S = sign_vectors(4)
    assert S.shape == (8, 4)
    assert np.all(S[:, 0] == 1)
    assert len({tuple(r) for r in S}) == 8


# ---------------------------------------------------------------- oracles


@pytest.mark.parametrize("p_cod", [1.0, 2.0, 3.0, math.inf])
def test_linf_domain_matches_vertex_enumeration(p_cod):
    rng = np.random.default_rng(11)
    for _ in range(10):
        M = rng.standard_normal((3, 5))
        r = op_norm(LinearMap(M, lp(5, math.inf), lp(3, p_cod)))
        assert r.exact
        assert r.value == pytest.approx(brute_linf(M, p_cod), rel=1e-12)


@pytest.mark.parametrize("p_cod", [1.0, 1.5, 2.0, math.inf])
def test_l1_domain_column_rule(p_cod):
    rng = np.random.default_rng(2)
    M = rng.standard_normal((4, 6))
    r = op_norm(LinearMap(M, lp(6, 1), lp(4, p_cod)))
    assert r.exact
    assert r.value == pytest.approx(max(lp_norm(c, p_cod) for c in M.T), rel=1e-12)


def test_l2_matches_power_iteration():
    rng = np.random.default_rng(5)
    for shape in [(3, 3), (5, 2), (2, 7), (8, 8)]:
        M = rng.standard_normal(shape)
        r = op_norm(LinearMap(M, lp(shape[1], 2), lp(shape[0], 2)))
        assert r.value == pytest.approx(power_iteration(M), rel=1e-9)


def test_l2_to_l1_regime_exact_by_duality():
    rng = np.random.default_rng(8)
    M = rng.standard_normal((4, 3))
    T = LinearMap(M, lp(3, 2), lp(4, 1))
    r = op_norm(T)
    # ||M||_{2->1} = max over signs s of ||M^T s||_2
    oracle = max(np.linalg.norm(M.T @ np.array(s)) for s in itertools.product([-1, 1], repeat=4))
    assert r.exact and r.value == pytest.approx(oracle, rel=1e-12)
    assert witness_ratio(T, r) == pytest.approx(r.value, rel=1e-12)


def test_grid_codomain_row_rule():
    M = np.array([[1.0, -2.0], [0.5, 0.5], [3.0, 1.0]])
    r = op_norm(LinearMap(M, lp(2, 2), grid_c(3)))
    assert r.exact and r.value == pytest.approx(math.sqrt(10))


def test_inexact_regime_brackets():
    rng = np.random.default_rng(4)
    M = rng.standard_normal((4, 4))
    T = LinearMap(M, lp(4, 3), lp(4, 1.5))
    r = op_norm(T)
    assert r.value <= r.upper * (1 + 1e-12)
    assert witness_ratio(T, r) == pytest.approx(r.value, rel=1e-9)
    # a dense random search never beats the certified upper bound
    X = rng.standard_normal((20000, 4))
    ratios = np.array([lp_norm(M @ x, 1.5) / lp_norm(x, 3) for x in X])
    assert ratios.max() <= r.upper * (1 + 1e-12)
    assert r.value >= ratios.max() * (1 - 1e-9)


def test_upper_bound_is_exact_where_known():
    M = np.random.default_rng(0).standard_normal((3, 3))
    assert op_norm_upper_bound(M, 2.0, 2.0) == pytest.approx(np.linalg.norm(M, 2), rel=1e-12)
    assert op_norm_upper_bound(M, 1.0, 1.0) == pytest.approx(np.abs(M).sum(0).max(), rel=1e-12)


def test_serialisation_round_trip():
    T = LinearMap(np.arange(6.0).reshape(2, 3) + 0.5j, lp(3, 2, "complex"), lp(2, 2, "complex"))
    U = LinearMap.from_dict(T.to_dict())
    assert np.array_equal(U.matrix, T.matrix) and U.domain == T.domain


# ---------------------------------------------------------------- properties

spaces_p = st.sampled_from([1.0, 2.0, math.inf])


@settings(max_examples=40, deadline=None)
@given(arrays(float, (3, 3), elements=st.floats(-5, 5)), arrays(float, (3, 3), elements=st.floats(-5, 5)),
       spaces_p, spaces_p, spaces_p)
def test_submultiplicative(a, b, p, q, r):
    A = LinearMap(a, lp(3, q), lp(3, r))
    B = LinearMap(b, lp(3, p), lp(3, q))
    ra, rb, rc = op_norm(A), op_norm(B), op_norm(compose(A, B))
    if ra.exact and rb.exact and rc.exact:
        assert rc.value <= ra.value * rb.value * (1 + 1e-9) + 1e-12


@settings(max_examples=40, deadline=None)
@given(arrays(float, (3, 4), elements=st.floats(-5, 5)), st.sampled_from([1.0, 1.5, 2.0, 4.0, math.inf]),
       st.sampled_from([1.0, 1.5, 2.0, 4.0, math.inf]))
def test_witness_feasible(m, p, q):
    T = LinearMap(m, lp(4, p), lp(3, q))
    r = op_norm(T)
    assert lp_norm(r.witness.coords, p) <= 1 + 1e-9
    assert witness_ratio(T, r) == pytest.approx(r.value, rel=1e-9, abs=1e-12)
    assert r.value <= r.upper * (1 + 1e-9) + 1e-12
