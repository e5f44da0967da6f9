"""Injective and projective tensor norms, the mixed Z norm and T -> T^#."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .operators import (
    SIGN_ENUMERATION_MAX,
    LinearMap,
    op_norm,
    sign_vectors,
)
from .spaces import (
    SEQUENCE_FAMILIES,
    GridFunction,
    SpaceDescriptor,
    TensorSpace,
    Vector,
    decode_scalars,
    dual_exponent,
    encode_scalars,
    grid_integrate,
    grid_norm,
    grid_step,
    l2_coordinates,
    lp,
    lp_norm,
    lp_norm_rows,
    mass_apply,
    norming_vector,
    space_from_dict,
)


@dataclass(frozen=True)
class Tensor2:
    """``sum_ij coeffs[i, j] b_i (x) b'_j`` in ``factor_x (x) factor_y``.

    For grid factors the basis is the hat functions, i.e. rows are nodal samples.
    """

    coeffs: np.ndarray
    factor_x: SpaceDescriptor
    factor_y: SpaceDescriptor

    def __post_init__(self):
        c = np.asarray(self.coeffs)
        c = c.astype(complex if np.iscomplexobj(c) else float)
        if c.shape != (self.factor_x.dim, self.factor_y.dim):
            raise ValueError(f"coefficient shape {c.shape} does not match "
                             f"{self.factor_x.dim} x {self.factor_y.dim}")
        c = np.array(c, copy=True)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def rank_one(cls, x, y, factor_x, factor_y) -> "Tensor2":
        return cls(np.outer(_raw(x), _raw(y)), factor_x, factor_y)

    def to_dict(self) -> dict:
        return {"coeffs": encode_scalars(self.coeffs), "factor_x": self.factor_x.to_dict(),
                "factor_y": self.factor_y.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "Tensor2":
        return cls(np.atleast_2d(decode_scalars(d["coeffs"])), space_from_dict(d["factor_x"]),
                   space_from_dict(d["factor_y"]))


@dataclass(frozen=True)
class Tensor3:
    coeffs: np.ndarray
    factor_x: SpaceDescriptor
    factor_y: SpaceDescriptor
    factor_z: SpaceDescriptor

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        dims = (self.factor_x.dim, self.factor_y.dim, self.factor_z.dim)
        if c.shape != dims:
            raise ValueError(f"coefficient shape {c.shape} does not match {dims}")
        c = np.array(c, copy=True)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def rank_one(cls, x, y, z, fx, fy, fz) -> "Tensor3":
        return cls(np.einsum("i,j,k->ijk", _raw(x), _raw(y), _raw(z)), fx, fy, fz)

    def to_dict(self) -> dict:
        return {"coeffs": self.coeffs.tolist(), "factor_x": self.factor_x.to_dict(),
                "factor_y": self.factor_y.to_dict(), "factor_z": self.factor_z.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "Tensor3":
        return cls(np.asarray(d["coeffs"], float), space_from_dict(d["factor_x"]),
                   space_from_dict(d["factor_y"]), space_from_dict(d["factor_z"]))


def _raw(v):
    if isinstance(v, Vector):
        return v.coords
    if isinstance(v, GridFunction):
        return v.samples
    return np.asarray(v)


def factor_norm(v, space: SpaceDescriptor) -> float:
    v = _raw(v)
    if space.family in SEQUENCE_FAMILIES:
        return lp_norm(v, space.p)
    return grid_norm(GridFunction(v, space))


# ------------------------------------------------------------------ eps / pi


def _as_sequence(c: np.ndarray, space: SpaceDescriptor, axis: int):
    """Move a factor into a sequence space with the same norm on coefficients.

    GridC becomes l_inf over the nodes (exact for piecewise-linear tensors: the
    norm of ``t -> u(t)`` is convex on each cell); GridL2 becomes l_2 in
    orthonormal coordinates.
    """
    fam = space.family
    if fam in SEQUENCE_FAMILIES:
        return c, space
    if fam == "GridC":
        return c, lp(space.dim, math.inf, space.scalar)
    if fam == "GridLp" and space.p == 2:
        c2 = np.moveaxis(l2_coordinates(np.moveaxis(c, axis, 0)), 0, axis)
        return c2, lp(space.dim, 2.0, space.scalar)
    raise ValueError(f"tensor norms do not support factor {space}")


def _dual(space: SpaceDescriptor) -> SpaceDescriptor:
    return lp(space.dim, dual_exponent(space.p), space.scalar)


def eps_result(u: Tensor2):
    """op_norm of the associated map ``X* -> Y``: ``x* -> sum_i x*_i c[i, :]``."""
    c, X = _as_sequence(u.coeffs, u.factor_x, 0)
    c, Y = _as_sequence(c, u.factor_y, 1)
    return op_norm(LinearMap(c.T, _dual(X), Y))


def eps_norm(u: Tensor2) -> float:
    return eps_result(u).value


@dataclass(frozen=True)
class ProjResult:
    """``value`` is the nuclear norm when ``exact``; otherwise the cost of ``terms``."""

    value: float
    exact: bool
    terms: tuple  # (xs, ys): u = sum_k xs[k] (x) ys[k]


def _hilbert(space):
    return space.p == 2 and space.family in ("Lp", "GridLp")


def _from_l2_coordinates(y: np.ndarray) -> np.ndarray:
    """Inverse of :func:`l2_coordinates` along axis 0."""
    from .spaces import _chol

    diag, sub = _chol(y.shape[0])
    ab = np.zeros((2, y.shape[0]))
    ab[0, 1:] = sub
    ab[1] = diag
    return solve_banded((0, 1), ab, y)


def _decomposition_cost(xs, ys, X, Y) -> float:
    return float(sum(factor_norm(xs[:, r], X) * factor_norm(ys[r], Y) for r in range(xs.shape[1])))


def proj_result(u: Tensor2) -> ProjResult:
    c = u.coeffs
    X, Y = u.factor_x, u.factor_y
    if _hilbert(X) and _hilbert(Y):
        co, _ = _as_sequence(c, X, 0)
        co, _ = _as_sequence(co, Y, 1)
        U, s, Vh = np.linalg.svd(co, full_matrices=False)
        xs, ys = U * s, Vh
        if X.family == "GridLp":
            xs = _from_l2_coordinates(xs)
        if Y.family == "GridLp":
            ys = _from_l2_coordinates(ys.T).T
        return ProjResult(float(s.sum()), True, (xs, ys))
    # greedy decompositions c = xs @ ys: by rows, by columns, by singular vectors
    n, k = c.shape
    cands = [(np.eye(n), c), (c, np.eye(k))]
    U, s, Vh = np.linalg.svd(c, full_matrices=False)
    cands.append((U * s, Vh))
    best = min(cands, key=lambda t: _decomposition_cost(t[0], t[1], X, Y))
    return ProjResult(_decomposition_cost(best[0], best[1], X, Y), False, best)


def proj_norm(u: Tensor2) -> float:
    """Projective norm: exact for Hilbert factors, otherwise a decomposition upper bound."""
    return proj_result(u).value


# ------------------------------------------------------------------ 3-tensors


def _ext_dual_points(space: SpaceDescriptor):
    """Extreme points of the dual unit ball (up to sign), or None if not finite."""
    q = dual_exponent(space.p)
    n = space.dim
    if q == 1:
        return np.eye(n)
    if math.isinf(q) and n <= SIGN_ENUMERATION_MAX:
        return sign_vectors(n)
    return None


def _grouped(c, fa, fb, fo, seed=0, restarts=8, iters=100):
    """``sup_{w in B(fo*)} eps(sum_k w_k c[:, :, k])`` for 3-array ``c`` with outer axis last."""
    ext = _ext_dual_points(fo)
    if ext is not None:
        best, exact = 0.0, True
        for w in ext:
            res = eps_result(Tensor2(c @ w, fa, fb))
            exact &= res.exact
            best = max(best, res.value)
        return best, exact
    ea, eb = _ext_dual_points(fa), _ext_dual_points(fb)
    if ea is not None and eb is not None:
        # same supremum with the order of the sups exchanged: the outer factor
        # then only needs its own (exact) norm
        V = np.einsum("ai,bj,ijk->abk", ea, eb, c).reshape(-1, c.shape[2])
        return float(lp_norm_rows(V, fo.p).max()), True
    # alternating maximisation of the trilinear form over the three balls
    rng = np.random.default_rng(seed)
    q = dual_exponent(fo.p)
    best = 0.0
    for r in range(restarts):
        w = norming_vector(rng.standard_normal(fo.dim), q)
        val = 0.0
        for _ in range(iters):
            res = eps_result(Tensor2(c @ w, fa, fb))
            xs = res.witness.coords
            y = (c @ w).T @ xs
            ys = norming_vector(y, dual_exponent(fb.p))
            g = np.einsum("i,j,ijk->k", xs, ys, c)
            w = norming_vector(g, q)
            new = lp_norm(g, fo.p)
            if new <= val * (1 + 1e-14):
                val = max(val, new)
                break
            val = new
        best = max(best, val)
    return best, False


def eps3_grouped(w: Tensor3, grouping: str = "left", seed: int = 0):
    """ε norm of a 3-tensor under one grouping: ``(value, exact)``."""
    c = w.coeffs
    if grouping == "left":
        return _grouped(c, w.factor_x, w.factor_y, w.factor_z, seed)
    if grouping == "right":
        c = np.transpose(c, (1, 2, 0))
        return _grouped(c, w.factor_y, w.factor_z, w.factor_x, seed)
    raise ValueError("grouping must be 'left' or 'right'")


def eps_norm3_assoc(w: Tensor3, seed: int = 0) -> tuple[float, float]:
    """ε norm computed as ``(X (x) Y) (x) Z`` and as ``X (x) (Y (x) Z)``."""
    for f in (w.factor_x, w.factor_y, w.factor_z):
        if f.family not in SEQUENCE_FAMILIES:
            raise ValueError(f"eps_norm3_assoc needs sequence-space factors, got {f}")
    if not np.any(w.coeffs):
        return 0.0, 0.0
    return eps3_grouped(w, "left", seed)[0], eps3_grouped(w, "right", seed)[0]


# ------------------------------------------------------------------ T^#


def hash_operator(T: LinearMap, x) -> LinearMap:
    """``y -> T(x (x) y)`` for ``T`` defined on a tensor space ``X (x) Y``."""
    if not isinstance(T.domain, TensorSpace):
        raise ValueError("hash_operator needs an operator on a tensor space")
    X, Y = T.domain.factor_x, T.domain.factor_y
    if isinstance(x, Vector) and not x.space.same_space(X):
        raise ValueError(f"x lives in {x.space}, expected {X}")
    xs = _raw(x)
    if xs.shape != (X.dim,):
        raise ValueError(f"x has shape {xs.shape}, expected ({X.dim},)")
    M = np.asarray(T.matrix).reshape(T.codomain.dim, X.dim, Y.dim)
    return LinearMap(np.einsum("zij,i->zj", M, xs), Y, T.codomain)


# ------------------------------------------------------------------ Z norm


@dataclass(frozen=True)
class ZNormBounds:
    """``lower <= ||u||_Z <= upper``.

    ``dual_witness`` is a nodal density ``g`` (same shape as ``u``) with
    ``lower = <g, u> / max(eps_dual(g), pi_dual(g))``; ``split_witness`` is
    ``(x', x'')`` with ``upper = ||x'||_eps + ||x''||_pi``.
    """

    lower: float
    upper: float
    dual_witness: np.ndarray
    split_witness: tuple

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper,
                "dual_witness": encode_scalars(self.dual_witness),
                "split_witness": [encode_scalars(self.split_witness[0]),
                                  encode_scalars(self.split_witness[1])]}

    @classmethod
    def from_dict(cls, d: dict) -> "ZNormBounds":
        a, b = d["split_witness"]
        return cls(d["lower"], d["upper"], np.atleast_2d(decode_scalars(d["dual_witness"])),
                   (np.atleast_2d(decode_scalars(a)), np.atleast_2d(decode_scalars(b))))


def z_eps(c: np.ndarray) -> float:
    """Sup norm in ``C([0,1], l_1)`` of a piecewise-linear tensor: node maximum."""
    return float(np.max(np.sum(np.abs(c), axis=1))) if c.size else 0.0


def z_pi(c: np.ndarray) -> float:
    """Projective norm in ``L_2 (x) l_2``: nuclear norm in orthonormal coordinates."""
    return float(np.linalg.svd(l2_coordinates(c), compute_uv=False).sum())


def z_pairing(g: np.ndarray, c: np.ndarray) -> float:
    """``int sum_k g_k(t) c_k(t) dt``, exact for piecewise-linear ``g`` and ``c``."""
    return float(np.sum(g * mass_apply(c)))


def z_pi_dual(g: np.ndarray) -> float:
    """Norm of ``g`` as an operator ``L_2 -> l_2``: largest singular value."""
    return float(np.linalg.norm(l2_coordinates(g), 2))


def _upper_envelope_integral(a: np.ndarray, b: np.ndarray, h: float) -> float:
    """``int_0^h max_r (a_r + (b_r - a_r) t / h) dt`` for lines given by end values."""
    # lines in (slope, intercept) over s in [0, 1]; keep the upper envelope
    slope = b - a
    order = np.lexsort((a, slope))
    hull: list[tuple[float, float]] = []
    for r in order:
        m, c = slope[r], a[r]
        while hull and hull[-1][0] == m:
            hull.pop()
        while len(hull) >= 2:
            m1, c1 = hull[-2]
            m2, c2 = hull[-1]
            # line 2 is useless if line 1 and the new line meet left of where 1 and 2 meet
            if (c - c1) * (m2 - m1) >= (c2 - c1) * (m - m1):
                hull.pop()
            else:
                break
        hull.append((m, c))
    # walk the envelope from s = 0 to 1; the envelope starts with the line
    # highest at 0 and slopes increase along it
    total = 0.0
    s0 = 0.0
    idx = 0
    # find the first active line at s = 0
    vals0 = [c for _, c in hull]
    idx = int(np.argmax(vals0))
    while s0 < 1.0:
        m, c = hull[idx]
        s1 = 1.0
        nxt = None
        for j in range(idx + 1, len(hull)):
            mj, cj = hull[j]
            if mj > m:
                s = (c - cj) / (mj - m)
                if s < s1 and s > s0 - 1e-15:
                    s1, nxt = max(s, s0), j
        total += (m * (s1**2 - s0**2) / 2 + c * (s1 - s0))
        if nxt is None:
            break
        s0, idx = s1, nxt
    return total * h


def z_eps_dual(g: np.ndarray) -> float:
    """``int max_k |g_k(t)| dt`` for a piecewise-linear density ``g``.

    This is the norm of ``g`` as a functional on ``C([0,1], l_1)`` over the
    continuum, an upper bound for its norm on the grid subspace; exact on each
    cell through the upper envelope of the lines ``+-g_k``.
    """
    g = np.asarray(g, dtype=float)
    m = g.shape[0]
    h = grid_step(m)
    absg = np.abs(g)
    lo, hi = g[:-1], g[1:]
    arg_lo = np.argmax(np.abs(lo), axis=1)
    arg_hi = np.argmax(np.abs(hi), axis=1)
    rows = np.arange(m - 1)
    same = (arg_lo == arg_hi) & (lo[rows, arg_lo] * hi[rows, arg_lo] >= 0)
    mx = absg.max(axis=1)
    total = float(np.sum((mx[:-1] + mx[1:])[same]) * h / 2)
    for r in np.nonzero(~same)[0]:
        a = np.concatenate([lo[r], -lo[r]])
        b = np.concatenate([hi[r], -hi[r]])
        total += _upper_envelope_integral(a, b, h)
    return total


def z_eps_dual_majorant(g: np.ndarray) -> float:
    """Trapezoid rule on the nodal maxima; dominates :func:`z_eps_dual`."""
    mx = np.abs(g).max(axis=1)
    return float(grid_integrate(mx))


def z_dual_ratio(g: np.ndarray, c: np.ndarray) -> float:
    den = max(z_eps_dual(g), z_pi_dual(g))
    return z_pairing(g, c) / den if den > 0 else 0.0


def _check_z(u: Tensor2):
    if u.factor_x.family != "GridC":
        raise ValueError("z_norm_bounds needs a GridC first factor")
    if u.factor_y.family not in SEQUENCE_FAMILIES:
        raise ValueError("z_norm_bounds needs a sequence second factor")
    if np.iscomplexobj(u.coeffs):
        raise ValueError("z_norm_bounds is implemented for real scalars")


def _split_search(c: np.ndarray, budget: int):
    best = (z_eps(c), c.copy(), np.zeros_like(c))
    pi_all = z_pi(c)
    if pi_all < best[0]:
        best = (pi_all, np.zeros_like(c), c.copy())
    row1 = np.sum(np.abs(c), axis=1)
    cmax = float(np.abs(c).max()) if c.size else 0.0
    for frac in np.linspace(0.05, 0.95, 19):
        for x1 in (np.clip(c, -frac * cmax, frac * cmax),
                   c * np.minimum(1.0, frac * row1.max() / np.maximum(row1, 1e-300))[:, None]):
            val = z_eps(x1) + z_pi(c - x1)
            if val < best[0]:
                best = (val, x1, c - x1)
    # subgradient refinement on x' with x'' = c - x'
    val, x1, _ = best
    steps = max(0, min(budget, 400))
    scale = max(cmax, 1e-300)
    for it in range(steps):
        rowabs = np.sum(np.abs(x1), axis=1)
        t = int(np.argmax(rowabs))
        g_eps = np.zeros_like(x1)
        g_eps[t] = np.sign(x1[t])
        co = l2_coordinates(c - x1)
        U, s, Vh = np.linalg.svd(co, full_matrices=False)
        keep = s > s[0] * 1e-12 if s.size and s[0] > 0 else np.zeros(0, bool)
        W = U[:, keep] @ Vh[keep]
        # d/dx'' of ||L^T x''||_* is L W; x'' = c - x'
        LW = _l_apply(W)
        grad = g_eps - LW
        gn = np.linalg.norm(grad)
        if gn == 0:
            break
        x_try = x1 - (scale / (it + 1)) * 0.5 * grad / gn
        v = z_eps(x_try) + z_pi(c - x_try)
        if v < best[0]:
            best = (v, x_try.copy(), c - x_try)
        x1 = x_try
    return best


def _l_apply(W: np.ndarray) -> np.ndarray:
    """``L W`` for the lower bidiagonal mass factor (axis 0)."""
    from .spaces import _chol

    diag, sub = _chol(W.shape[0])
    out = diag[:, None] * W
    out[1:] += sub[:, None] * W[:-1]
    return out


def _dual_ascent(c, g0, budget, rng):
    """Improve ``<g, u> / max(eps*, pi*)`` from ``g0`` by subgradient steps."""
    def ratio(g):
        den = max(z_eps_dual_majorant(g), z_pi_dual(g))
        return z_pairing(g, c) / den if den > 0 else 0.0

    best_g, best = g0, ratio(g0)
    g = g0.copy()
    Gc = mass_apply(c)
    step = 0.1
    for _ in range(budget):
        d = Gc / max(np.linalg.norm(Gc), 1e-300)
        g_try = g + step * np.linalg.norm(g) * d + 0.01 * step * rng.standard_normal(g.shape) * np.abs(g).max()
        r = ratio(g_try)
        if r > best:
            best_g, best, g = g_try, r, g_try
            step *= 1.3
        else:
            step *= 0.6
            if step < 1e-8:
                break
    return best_g


def z_norm_bounds(u: Tensor2, budget: int = 200, seed: int = 0, seeds=()) -> ZNormBounds:
    """Bracket the norm of ``C([0,1], l_1) + L_2 (x)_pi l_2`` on a grid tensor.

    The upper bound comes from explicit splits ``u = x' + x''``; the lower one
    from densities ``g`` that are admissible for both dual norms.  ``seeds``
    are candidate densities tried first.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    _check_z(u)
    c = np.asarray(u.coeffs, dtype=float)
    if not np.any(c):
        z = np.zeros_like(c)
        return ZNormBounds(0.0, 0.0, z, (z, z))
    rng = np.random.default_rng(seed)
    upper, x1, x2 = _split_search(c, budget)

    cands = [np.asarray(s, dtype=float) for s in seeds]
    cands.append(c.copy())
    sgn = np.sign(c)
    cands.append(sgn * (np.abs(c) >= np.abs(c).max(axis=1, keepdims=True)))
    best_g, lower = None, -math.inf
    for g in cands:
        if not np.any(g):
            continue
        if z_pairing(g, c) < 0:
            g = -g
        r = z_dual_ratio(g, c)
        if r > lower:
            best_g, lower = g, r
    g = _dual_ascent(c, best_g, budget, rng)
    r = z_dual_ratio(g, c)
    if r > lower:
        best_g, lower = g, r
    den = max(z_eps_dual(best_g), z_pi_dual(best_g))
    best_g = best_g / den
    lower = z_pairing(best_g, c)
    return ZNormBounds(float(lower), float(upper), best_g, (x1, x2))


def verify_z_bounds(u: Tensor2, zb: ZNormBounds, tol: float = 1e-9) -> bool:
    """Recompute both bounds from their witnesses."""
    c = np.asarray(u.coeffs, dtype=float)
    x1, x2 = zb.split_witness
    if not np.allclose(x1 + x2, c, atol=1e-12 * max(1.0, np.abs(c).max())):
        return False
    up = z_eps(x1) + z_pi(x2)
    g = zb.dual_witness
    feasible = max(z_eps_dual(g), z_pi_dual(g)) <= 1 + tol
    lo = z_pairing(g, c)
    return bool(feasible and abs(up - zb.upper) <= tol * max(1, up)
                and abs(lo - zb.lower) <= tol * max(1, abs(lo)) and lo <= up + tol)
