import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from psumlab.experiments import tents, y_star
from psumlab.operators import LinearMap, op_norm
from psumlab.spaces import TensorSpace, Vector, grid_c, grid_lp, grid_nodes, l2_inner, lp, lp_norm
from psumlab.tensor import (
    Tensor2,
    Tensor3,
    ZNormBounds,
    eps3_grouped,
    eps_norm,
    eps_norm3_assoc,
    hash_operator,
    proj_norm,
    proj_result,
    verify_z_bounds,
    z_eps,
    z_eps_dual,
    z_eps_dual_majorant,
    z_norm_bounds,
    z_pairing,
    z_pi,
    z_pi_dual,
)

INF = math.inf


def dual_vertices(n, p):
    """Vertices of the dual ball of l_p^n for p in {1, inf}: the cube or the cross."""
    if p == 1:
        return [np.array(s) for s in itertools.product([-1.0, 1.0], repeat=n)]
    return [s * e for e in np.eye(n) for s in (1.0, -1.0)]


def brute_eps(c, px, py):
    return max(abs(a @ c @ b) for a in dual_vertices(c.shape[0], px) for b in dual_vertices(c.shape[1], py))


# ---------------------------------------------------------------- eps / pi


def test_eps_examples():
    I2 = Tensor2(np.eye(2), lp(2, 2), lp(2, 2))
    assert eps_norm(I2) == pytest.approx(1)
    rng = np.random.default_rng(0)
    for X, Y in [(lp(3, 2), lp(4, 2)), (lp(3, 1), lp(4, INF)), (lp(3, INF), lp(2, 1.5)), (grid_c(5), lp(3, 1))]:
        x, y = rng.standard_normal(X.dim), rng.standard_normal(Y.dim)
        u = Tensor2.rank_one(x, y, X, Y)
        assert eps_norm(u) == pytest.approx(lp_norm(x, X.p) * lp_norm(y, Y.p), rel=1e-9)


def test_eps_isometry_of_trig_family():
    m = 1025
    idx = np.arange(-4, 5)
    eps = np.exp(2j * np.pi * np.outer(grid_nodes(m), idx))
    rng = np.random.default_rng(1)
    mu = rng.standard_normal(len(idx)) + 1j * rng.standard_normal(len(idx))
    u = Tensor2(eps * mu, grid_c(m, "complex"), lp(len(idx), 2, "complex"))
    assert eps_norm(u) == pytest.approx(np.linalg.norm(mu), rel=1e-3)


@pytest.mark.parametrize("px,py", [(1.0, 1.0), (INF, 1.0), (1.0, INF), (INF, INF)])
def test_eps_matches_vertex_enumeration(px, py):
    rng = np.random.default_rng(5)
    for _ in range(5):
        c = rng.standard_normal((3, 4))
        u = Tensor2(c, lp(3, px), lp(4, py))
        assert eps_norm(u) == pytest.approx(brute_eps(c, px, py), rel=1e-12)


def test_proj_examples():
    assert proj_norm(Tensor2(np.eye(2), lp(2, 2), lp(2, 2))) == pytest.approx(2)
    rng = np.random.default_rng(2)
    for X, Y in [(lp(3, 2), lp(2, 2)), (lp(3, 1), lp(4, INF)), (lp(2, INF), lp(2, 1))]:
        x, y = rng.standard_normal(X.dim), rng.standard_normal(Y.dim)
        r = proj_result(Tensor2.rank_one(x, y, X, Y))
        assert r.value == pytest.approx(lp_norm(x, X.p) * lp_norm(y, Y.p), rel=1e-9)


def test_proj_l1_factor_closed_form():
    # l_1 (x)_pi Y is l_1(Y): the norm is the sum of the row norms
    rng = np.random.default_rng(3)
    for p in (1.0, 2.0, INF):
        c = rng.standard_normal((4, 3))
        val = proj_norm(Tensor2(c, lp(4, 1), lp(3, p)))
        assert val == pytest.approx(sum(lp_norm(r, p) for r in c), rel=1e-12)


def test_proj_decomposition_reproduces_tensor():
    rng = np.random.default_rng(4)
    for X, Y in [(lp(3, 2), lp(3, 2)), (grid_lp(5, 2.0), lp(2, 2)), (lp(3, INF), lp(2, 1))]:
        c = rng.standard_normal((X.dim, Y.dim))
        xs, ys = proj_result(Tensor2(c, X, Y)).terms
        assert np.allclose(xs @ ys, c, atol=1e-12)


def test_proj_grid_l2_is_nuclear_norm_in_l2_coordinates():
    m = 9
    f = grid_nodes(m)
    u = Tensor2.rank_one(f, np.array([1.0, 0.0]), grid_lp(m, 2.0), lp(2, 2))
    assert proj_norm(u) == pytest.approx(math.sqrt(l2_inner(f, f)), rel=1e-12)


def test_tensor_serialisation():
    u = Tensor2(np.arange(6.0).reshape(2, 3), lp(2, 1), grid_c(3))
    v = Tensor2.from_dict(u.to_dict())
    assert np.array_equal(u.coeffs, v.coeffs) and u.factor_y == v.factor_y
    w = Tensor3(np.ones((2, 2, 2)), lp(2, 1), lp(2, 2), lp(2, INF))
    assert np.array_equal(Tensor3.from_dict(w.to_dict()).coeffs, w.coeffs)


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        Tensor2(np.ones((2, 2)), lp(3, 2), lp(2, 2))


@settings(max_examples=40, deadline=None)
@given(arrays(float, (3, 3), elements=st.floats(-5, 5)), st.sampled_from([1.0, 2.0, INF]),
       st.sampled_from([1.0, 2.0, INF]))
def test_eps_below_pi(c, p, q):
    u = Tensor2(c, lp(3, p), lp(3, q))
    assert eps_norm(u) <= proj_norm(u) * (1 + 1e-9) + 1e-12


@settings(max_examples=40, deadline=None)
@given(arrays(float, 3, elements=st.floats(-5, 5)), arrays(float, 4, elements=st.floats(-5, 5)),
       st.sampled_from([1.0, 1.5, 2.0, INF]), st.sampled_from([1.0, 2.0, 3.0, INF]))
def test_eps_cross_norm(x, y, p, q):
    u = Tensor2.rank_one(x, y, lp(3, p), lp(4, q))
    assert eps_norm(u) == pytest.approx(lp_norm(x, p) * lp_norm(y, q), rel=1e-9, abs=1e-12)


# ---------------------------------------------------------------- 3-tensors


def test_assoc_examples():
    x, y, z = np.array([1.0, -2.0]), np.array([0.5, 3.0, 1.0]), np.array([2.0, -1.0])
    for p in (1.0, 2.0, INF):
        w = Tensor3.rank_one(x, y, z, lp(2, p), lp(3, p), lp(2, p))
        left, right = eps_norm3_assoc(w)
        expect = lp_norm(x, p) * lp_norm(y, p) * lp_norm(z, p)
        assert left == pytest.approx(expect, rel=1e-9) and right == pytest.approx(expect, rel=1e-9)
    assert eps_norm3_assoc(Tensor3(np.zeros((2, 2, 2)), lp(2, INF), lp(2, INF), lp(2, INF))) == (0.0, 0.0)


def test_assoc_mixed_factors_exact():
    rng = np.random.default_rng(7)
    for _ in range(20):
        w = Tensor3(rng.standard_normal((3, 3, 3)), lp(3, INF), lp(3, 1), lp(3, 2))
        (left, le), (right, re) = eps3_grouped(w, "left"), eps3_grouped(w, "right")
        assert le and re
        assert left == pytest.approx(right, rel=1e-9)


def test_assoc_matches_brute_trilinear_sup():
    rng = np.random.default_rng(8)
    c = rng.standard_normal((2, 3, 2))
    w = Tensor3(c, lp(2, INF), lp(3, INF), lp(2, INF))
    # the dual of l_inf is l_1, whose extreme points are signed basis vectors
    oracle = np.abs(c).max()
    left, right = eps_norm3_assoc(w)
    assert left == pytest.approx(oracle) and right == pytest.approx(oracle)
    w = Tensor3(c, lp(2, 1), lp(3, 1), lp(2, 1))
    oracle = max(abs(np.einsum("i,j,k,ijk->", a, b, d, c))
                 for a in dual_vertices(2, 1) for b in dual_vertices(3, 1) for d in dual_vertices(2, 1))
    left, right = eps_norm3_assoc(w)
    assert left == pytest.approx(oracle) and right == pytest.approx(oracle)


# ---------------------------------------------------------------- T^#


def test_hash_operator_slice_bound():
    rng = np.random.default_rng(0)
    T = LinearMap(np.eye(4), TensorSpace(lp(2, 2), lp(2, 2)), lp(4, 2))
    for _ in range(5):
        x = rng.standard_normal(2)
        H = hash_operator(T, Vector(x, lp(2, 2)))
        assert op_norm(H).value <= np.linalg.norm(x) * (1 + 1e-12)
        assert op_norm(H).value == pytest.approx(np.linalg.norm(x))


def test_hash_operator_rejects_wrong_input():
    T = LinearMap(np.eye(4), TensorSpace(lp(2, 2), lp(2, 2)), lp(4, 2))
    with pytest.raises(ValueError):
        hash_operator(T, np.ones(3))
    with pytest.raises(ValueError):
        hash_operator(LinearMap(np.eye(2), lp(2, 2), lp(2, 2)), np.ones(2))


@settings(max_examples=30, deadline=None)
@given(arrays(float, (3, 6), elements=st.floats(-3, 3)), arrays(float, 2, elements=st.floats(-3, 3)),
       arrays(float, 2, elements=st.floats(-3, 3)), st.floats(-2, 2), st.floats(-2, 2))
def test_hash_operator_linear(M, x, x2, a, b):
    T = LinearMap(M, TensorSpace(lp(2, INF), lp(3, 1)), lp(3, 2))
    lhs = hash_operator(T, a * x + b * x2).matrix
    rhs = a * hash_operator(T, x).matrix + b * hash_operator(T, x2).matrix
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


# ---------------------------------------------------------------- Z norm


def dense_max_integral(g, samples=200001):
    """int_0^1 max_k |g_k(t)| dt from dense sampling of the piecewise-linear g."""
    m = g.shape[0]
    t = np.linspace(0, 1, samples)
    vals = np.stack([np.interp(t, grid_nodes(m), g[:, k]) for k in range(g.shape[1])], axis=1)
    return np.trapezoid(np.abs(vals).max(axis=1), t)


def test_z_eps_dual_envelope_matches_dense_sampling():
    rng = np.random.default_rng(1)
    for _ in range(3):
        g = rng.standard_normal((9, 3))
        assert z_eps_dual(g) == pytest.approx(dense_max_integral(g), rel=1e-6)
        assert z_eps_dual(g) <= z_eps_dual_majorant(g) * (1 + 1e-12)


def test_y_star_norms():
    for N in (1, 2, 3):
        m = 2 * N * N * 4 + 1
        for i in range(N):
            g = y_star(N, m, i)
            assert z_eps_dual(g) == pytest.approx(0.5, abs=1e-14)
            assert z_pi_dual(g) <= 1 / math.sqrt(3) + 1e-12


def test_z_single_tent_bound():
    m = 33
    f = tents(1, m)
    u = Tensor2(f, grid_c(m), lp(1, 1))
    zb = z_norm_bounds(u, 100, 0)
    assert zb.upper <= 1 / math.sqrt(3) + 1e-12
    assert zb.lower <= zb.upper * (1 + 1e-12)
    assert verify_z_bounds(u, zb)


@pytest.mark.parametrize("N", [2, 3])
def test_z_tent_family_bracket(N):
    m = 2 * N * N * 4 + 1
    rng = np.random.default_rng(N)
    lam = rng.uniform(-1, 1, N)
    c = tents(N, m) * np.repeat(lam, N)[None, :]
    u = Tensor2(c, grid_c(m), lp(N * N, 1))
    zb = z_norm_bounds(u, 100, 0, [y_star(N, m, i) for i in range(N)])
    sup = np.abs(lam).max()
    assert zb.lower >= sup / math.sqrt(3) - 1e-3
    assert zb.upper <= sup + 1e-9
    assert verify_z_bounds(u, zb)
    back = ZNormBounds.from_dict(zb.to_dict())
    assert verify_z_bounds(u, back)


def test_verify_rejects_forged_bounds():
    m = 9
    c = tents(1, m)
    u = Tensor2(c, grid_c(m), lp(1, 1))
    zb = z_norm_bounds(u, 20, 0)
    forged = ZNormBounds(zb.lower * 2, zb.upper / 2, zb.dual_witness, zb.split_witness)
    assert not verify_z_bounds(u, forged)


@settings(max_examples=30, deadline=None)
@given(arrays(float, (5, 2), elements=st.floats(-3, 3)), arrays(float, (5, 2), elements=st.floats(-3, 3)))
def test_z_dual_pairings(g, c):
    p = abs(z_pairing(g, c))
    assert p <= z_eps_dual(g) * z_eps(c) * (1 + 1e-9) + 1e-12
    assert p <= z_pi_dual(g) * z_pi(c) * (1 + 1e-9) + 1e-12


@settings(max_examples=15, deadline=None)
@given(arrays(float, (5, 2), elements=st.floats(-3, 3)))
def test_z_bounds_consistent(c):
    u = Tensor2(c, grid_c(5), lp(2, 1))
    zb = z_norm_bounds(u, 30, 0)
    assert zb.lower <= zb.upper * (1 + 1e-9) + 1e-12
    assert zb.upper <= min(z_eps(c), z_pi(c)) * (1 + 1e-12) + 1e-12
    assert verify_z_bounds(u, zb)
