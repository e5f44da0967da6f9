"""Finite-dimensional sequence spaces and grid function spaces on [0, 1].

Grid functions are sampled at the uniform nodes ``j / (m - 1)`` and always
interpreted as their piecewise-linear interpolant.  Every integral in this
module is computed exactly for that interpretation, except ``L_p`` norms of
complex functions with ``p`` not in ``{2, inf}`` (per-cell Gauss-Legendre).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

FAMILIES = ("Lp", "SupSeq", "GridC", "GridLp", "GridLorentz21")
SEQUENCE_FAMILIES = ("Lp", "SupSeq")
GRID_FAMILIES = ("GridC", "GridLp", "GridLorentz21")

#: Largest |k| accepted by :func:`fourier_coeff` as a fraction of the node count.
FOURIER_CUTOFF_FRACTION = 0.5

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class SpaceDescriptor:
    """Norm semantics attached to a coordinate array.

    ``dim`` is ``n`` for sequence families and the number of grid points
    ``m`` for grid families.  ``p`` is the exponent for ``Lp``/``GridLp``,
    ``inf`` for the sup-norm families and ``None`` for the Lorentz space.
    """

    family: str
    dim: int
    p: float | None = None
    scalar: str = "real"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown space family {self.family!r}")
        if self.scalar not in ("real", "complex"):
            raise ValueError(f"scalar must be 'real' or 'complex', got {self.scalar!r}")
        dim = int(self.dim)
        if dim != self.dim:
            raise ValueError("dimension must be an integer")
        object.__setattr__(self, "dim", dim)
        if self.family in GRID_FAMILIES and dim < 2:
            raise ValueError("grid spaces need at least 2 points")
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        if self.family in ("SupSeq", "GridC"):
            object.__setattr__(self, "p", math.inf)
        elif self.family == "GridLorentz21":
            object.__setattr__(self, "p", None)
        else:
            if self.p is None:
                raise ValueError(f"{self.family} needs an exponent p")
            p = float(self.p)
            if not (p >= 1.0):
                raise ValueError(f"exponent must lie in [1, inf], got {self.p}")
            object.__setattr__(self, "p", p)

    @property
    def is_grid(self) -> bool:
        return self.family in GRID_FAMILIES

    @property
    def is_complex(self) -> bool:
        return self.scalar == "complex"

    def same_space(self, other: "SpaceDescriptor") -> bool:
        """Equal up to the scalar field."""
        return (self.family, self.dim, self.p) == (other.family, other.dim, other.p)

    def with_scalar(self, scalar: str) -> "SpaceDescriptor":
        return SpaceDescriptor(self.family, self.dim, self.p, scalar)

    def to_dict(self) -> dict:
        d = {"family": self.family, "dim": self.dim}
        if self.family in ("Lp", "GridLp"):
            d["p"] = "inf" if math.isinf(self.p) else self.p
        d["scalar"] = self.scalar
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SpaceDescriptor":
        unknown = set(d) - {"family", "dim", "p", "scalar"}
        if unknown:
            raise ValueError(f"unknown descriptor fields {sorted(unknown)}")
        p = d.get("p")
        if isinstance(p, str):
            p = float(p)
        return cls(d["family"], d["dim"], p, d.get("scalar", "real"))

    def __str__(self):
        if self.family == "Lp":
            return f"l_{_fmt_p(self.p)}^{self.dim}"
        if self.family == "SupSeq":
            return f"c0^{self.dim}"
        if self.family == "GridC":
            return f"C[0,1]@{self.dim}"
        if self.family == "GridLp":
            return f"L_{_fmt_p(self.p)}[0,1]@{self.dim}"
        return f"L_(2,1)[0,1]@{self.dim}"


def _fmt_p(p):
    return "inf" if math.isinf(p) else f"{p:g}"


def lp(n: int, p: float, scalar: str = "real") -> SpaceDescriptor:
    return SpaceDescriptor("Lp", n, p, scalar)


def sup_seq(n: int, scalar: str = "real") -> SpaceDescriptor:
    return SpaceDescriptor("SupSeq", n, None, scalar)


def grid_c(m: int, scalar: str = "real") -> SpaceDescriptor:
    return SpaceDescriptor("GridC", m, None, scalar)


def grid_lp(m: int, p: float, scalar: str = "real") -> SpaceDescriptor:
    return SpaceDescriptor("GridLp", m, p, scalar)


def grid_lorentz21(m: int) -> SpaceDescriptor:
    return SpaceDescriptor("GridLorentz21", m, None, "real")


def dual_exponent(p: float) -> float:
    """Hoelder conjugate of ``p``."""
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def norm_exponent(space: SpaceDescriptor) -> float:
    """Exponent of the l_p-type norm a sequence space carries."""
    if space.family not in SEQUENCE_FAMILIES:
        raise ValueError(f"{space.family} is not a sequence space")
    return space.p


def dual_space(space: SpaceDescriptor) -> SpaceDescriptor:
    """Coordinate model of the dual of a sequence space or of ``GridC``.

    ``GridC`` dualises to ``l_1`` over point evaluations at the nodes; that is
    exact for bilinear pairings with piecewise-linear interpolants because a
    convex function of the interpolant peaks at a node.
    """
    if space.family in SEQUENCE_FAMILIES:
        return lp(space.dim, dual_exponent(space.p), space.scalar)
    if space.family == "GridC":
        return lp(space.dim, 1.0, space.scalar)
    raise ValueError(f"no coordinate dual for {space.family}")


def _as_array(values, scalar: str | None = None) -> np.ndarray:
    arr = np.asarray(values)
    if np.iscomplexobj(arr):
        if scalar == "real":
            if np.any(arr.imag != 0):
                raise ValueError("complex values in a real space")
            arr = arr.real
        arr = arr.astype(complex if np.iscomplexobj(arr) else float)
    else:
        arr = arr.astype(float)
    if scalar == "complex":
        arr = arr.astype(complex)
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Vector:
    coords: np.ndarray
    space: SpaceDescriptor

    def __post_init__(self):
        if self.space.family not in SEQUENCE_FAMILIES:
            raise ValueError("Vector needs an Lp or SupSeq descriptor")
        arr = _as_array(self.coords, self.space.scalar)
        if arr.ndim != 1 or arr.shape[0] != self.space.dim:
            raise ValueError(
                f"coords of length {arr.shape} do not match dimension {self.space.dim}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("coords must be finite")
        object.__setattr__(self, "coords", arr)

    def __len__(self):
        return self.space.dim

    def to_dict(self) -> dict:
        return {**self.space.to_dict(), "coords": encode_scalars(self.coords)}

    @classmethod
    def from_dict(cls, d: dict) -> "Vector":
        d = dict(d)
        coords = decode_scalars(d.pop("coords"))
        return cls(coords, SpaceDescriptor.from_dict(d))


@dataclass(frozen=True)
class GridFunction:
    samples: np.ndarray
    space: SpaceDescriptor = field(default=None)

    def __post_init__(self):
        arr = np.asarray(self.samples)
        space = self.space
        if space is None:
            space = grid_c(arr.shape[0], "complex" if np.iscomplexobj(arr) else "real")
            object.__setattr__(self, "space", space)
        if space.family not in GRID_FAMILIES:
            raise ValueError("GridFunction needs a grid descriptor")
        arr = _as_array(arr, space.scalar)
        if arr.ndim != 1 or arr.shape[0] != space.dim:
            raise ValueError(
                f"{arr.shape[0] if arr.ndim == 1 else arr.shape} samples do not match "
                f"grid size {space.dim}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite")
        object.__setattr__(self, "samples", arr)

    @property
    def m(self) -> int:
        return self.space.dim

    @property
    def nodes(self) -> np.ndarray:
        return grid_nodes(self.m)

    def to_dict(self) -> dict:
        return {**self.space.to_dict(), "samples": encode_scalars(self.samples)}

    @classmethod
    def from_dict(cls, d: dict) -> "GridFunction":
        d = dict(d)
        samples = decode_scalars(d.pop("samples"))
        return cls(samples, SpaceDescriptor.from_dict(d))

    @classmethod
    def from_callable(cls, fn, m: int, space: SpaceDescriptor | None = None):
        values = np.asarray(fn(grid_nodes(m)))
        if space is None:
            space = grid_c(m, "complex" if np.iscomplexobj(values) else "real")
        return cls(values, space)


def encode_scalars(arr):
    """JSON-friendly nested lists; complex arrays become ``{"re": .., "im": ..}``."""
    arr = np.asarray(arr)
    if np.iscomplexobj(arr):
        return {"re": arr.real.tolist(), "im": arr.imag.tolist()}
    return arr.tolist()


def decode_scalars(data) -> np.ndarray:
    """Inverse of :func:`encode_scalars`."""
    if isinstance(data, dict):
        return np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
    return np.asarray(data, dtype=float)


# ---------------------------------------------------------------- sequence norms


def lp_norm(x, p: float) -> float:
    """``l_p`` norm of a coordinate array (last axis)."""
    a = np.abs(np.asarray(x))
    if a.size == 0:
        return 0.0
    if math.isinf(p):
        return float(a.max())
    if p == 1.0:
        return float(a.sum())
    if p == 2.0:
        return float(np.sqrt(np.sum(a * a)))
    top = a.max()
    if top == 0:
        return 0.0
    return float(top * np.sum((a / top) ** p) ** (1.0 / p))


def lp_norm_rows(x, p: float) -> np.ndarray:
    """Row-wise ``l_p`` norms of a 2-D array."""
    a = np.abs(np.asarray(x))
    if math.isinf(p):
        return a.max(axis=-1)
    if p == 1.0:
        return a.sum(axis=-1)
    if p == 2.0:
        return np.sqrt(np.sum(a * a, axis=-1))
    top = a.max(axis=-1, keepdims=True)
    safe = np.where(top > 0, top, 1.0)
    return (safe[..., 0] * np.sum((a / safe) ** p, axis=-1) ** (1.0 / p)) * (top[..., 0] > 0)


def vector_norm(v: Vector) -> float:
    return lp_norm(v.coords, v.space.p)


def dual_norm(v, space: SpaceDescriptor) -> float:
    """Norm of ``v`` acting as a functional on ``space``."""
    if space.family not in SEQUENCE_FAMILIES:
        raise ValueError("dual_norm needs an Lp or SupSeq space")
    coords = v.coords if isinstance(v, Vector) else np.asarray(v)
    if coords.ndim != 1 or coords.shape[0] != space.dim:
        raise ValueError(f"functional of length {coords.shape} does not match {space}")
    return lp_norm(coords, dual_exponent(space.p))


def norming_vector(w, p: float) -> np.ndarray:
    """Unit vector ``x`` of ``l_p`` with ``sum(w * x) = ||w||_{p'}``.

    This is the extremal element of the duality pairing; for complex ``w`` the
    phases are conjugated so the pairing is real and nonnegative.
    """
    w = np.asarray(w)
    a = np.abs(w)
    phase = np.ones_like(w)
    nz = a > 0
    phase[nz] = np.conj(w[nz] / a[nz])
    if not np.any(nz):
        x = np.zeros(w.shape, dtype=w.dtype)
        x[..., 0] = 1.0
        return x
    if math.isinf(p):
        return phase
    if p == 1.0:
        x = np.zeros(w.shape, dtype=w.dtype)
        j = int(np.argmax(a))
        x[j] = phase[j]
        return x
    q = dual_exponent(p)
    top = a.max()
    mag = (a / top) ** (q - 1.0)
    x = phase * mag
    return x / lp_norm(x, p)


# ---------------------------------------------------------------- grid helpers


def grid_nodes(m: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, m)


def grid_step(m: int) -> float:
    return 1.0 / (m - 1)


def trapezoid_weights(m: int) -> np.ndarray:
    """Weights that integrate a piecewise-linear interpolant exactly."""
    w = np.full(m, grid_step(m))
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def _samples(f) -> np.ndarray:
    return f.samples if isinstance(f, GridFunction) else np.asarray(f)


def grid_integrate(f):
    """Exact integral over [0, 1] of the piecewise-linear interpolant."""
    s = _samples(f)
    val = np.dot(trapezoid_weights(s.shape[0]), s)
    return complex(val) if np.iscomplexobj(val) else float(val)


def _cell_power_integral_real(a: np.ndarray, b: np.ndarray, p: float) -> np.ndarray:
    """Exact integral of |linear|^p over unit-length cells with ends a, b."""
    out = np.empty_like(a, dtype=float)
    cross = a * b < 0
    aa, bb = np.abs(a), np.abs(b)
    # sign change: the piece splits at the zero
    with np.errstate(divide="ignore", invalid="ignore"):
        out_cross = (aa ** (p + 1) + bb ** (p + 1)) / ((p + 1) * (aa + bb))
        lo, hi = np.minimum(aa, bb), np.maximum(aa, bb)
        diff = hi - lo
        r = np.where(hi > 0, diff / np.where(hi > 0, hi, 1.0), 0.0)
        direct = (hi ** (p + 1) - lo ** (p + 1)) / ((p + 1) * diff)
        # near-constant pieces: expansion of ((1)^(p+1)-(1-r)^(p+1)) / ((p+1) r)
        series = hi ** p * (1 - p * r / 2 + p * (p - 1) * r * r / 6
                            - p * (p - 1) * (p - 2) * r ** 3 / 24)
    same = np.where(r < 1e-4, series, direct)
    same = np.where(hi == 0, 0.0, same)
    out[:] = np.where(cross, out_cross, same)
    return out


def grid_lp_norm(f, p: float) -> float:
    """``L_p[0,1]`` norm of the piecewise-linear interpolant."""
    s = _samples(f)
    m = s.shape[0]
    h = grid_step(m)
    if math.isinf(p):
        return float(np.max(np.abs(s)))
    a, b = s[:-1], s[1:]
    if p == 2.0:
        cell = (np.abs(a) ** 2 + np.real(a * np.conj(b)) + np.abs(b) ** 2) / 3.0
        return float(np.sqrt(h * np.sum(cell)))
    if not np.iscomplexobj(s):
        return float((h * np.sum(_cell_power_integral_real(a, b, p))) ** (1.0 / p))
    t = 0.5 * (_GL_NODES + 1.0)
    vals = a[:, None] * (1 - t)[None, :] + b[:, None] * t[None, :]
    cell = (np.abs(vals) ** p) @ (0.5 * _GL_WEIGHTS)
    return float((h * np.sum(cell)) ** (1.0 / p))


def grid_norm(f: GridFunction) -> float:
    """Norm of ``f`` in the space its descriptor names."""
    fam = f.space.family
    if fam == "GridC":
        return float(np.max(np.abs(f.samples)))
    if fam == "GridLp":
        return grid_lp_norm(f, f.space.p)
    return lorentz21_norm(f)


def grid_error_bound_linear(m: int, second_derivative_sup: float) -> float:
    """Sup-norm interpolation error for a C^2 function: h^2 sup|f''| / 8."""
    return grid_step(m) ** 2 * second_derivative_sup / 8.0


# ------------------------------------------------------------ L2 mass matrix


def mass_cholesky_banded(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Lower bidiagonal factor ``L`` of the L2 Gram matrix of hat functions.

    Returns ``(diag, sub)`` with ``G = L L^T``.  Used to move coefficient arrays
    into orthonormal coordinates, ``L^T c``.
    """
    h = grid_step(m)
    main = np.full(m, 2.0 * h / 3.0)
    main[0] = main[-1] = h / 3.0
    off = np.full(m - 1, h / 6.0)
    diag = np.empty(m)
    sub = np.empty(m - 1)
    diag[0] = math.sqrt(main[0])
    for i in range(1, m):
        sub[i - 1] = off[i - 1] / diag[i - 1]
        diag[i] = math.sqrt(main[i] - sub[i - 1] ** 2)
    return diag, sub


_CHOL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _chol(m):
    if m not in _CHOL_CACHE:
        _CHOL_CACHE[m] = mass_cholesky_banded(m)
    return _CHOL_CACHE[m]


def l2_coordinates(c: np.ndarray) -> np.ndarray:
    """Map hat-basis coefficients (axis 0) to orthonormal L2 coordinates."""
    c = np.asarray(c)
    diag, sub = _chol(c.shape[0])
    shape = (-1,) + (1,) * (c.ndim - 1)
    out = diag.reshape(shape) * c
    out[:-1] += sub.reshape(shape) * c[1:]
    return out


def mass_apply(c: np.ndarray) -> np.ndarray:
    """``G c`` for the hat-function Gram matrix ``G`` (axis 0)."""
    c = np.asarray(c)
    m = c.shape[0]
    h = grid_step(m)
    out = (2.0 * h / 3.0) * c
    out[0] = (h / 3.0) * c[0]
    out[-1] = (h / 3.0) * c[-1]
    out[:-1] += (h / 6.0) * c[1:]
    out[1:] += (h / 6.0) * c[:-1]
    return out


def l2_inner(f, g) -> complex | float:
    """Exact ``int f * g dt`` (no conjugation) for two interpolants."""
    a, b = _samples(f), _samples(g)
    val = np.sum(a * mass_apply(b))
    return complex(val) if np.iscomplexobj(val) else float(val)


# ------------------------------------------------------------- Lorentz (2,1)


def decreasing_rearrangement(f) -> tuple[np.ndarray, np.ndarray]:
    """Knots ``(s, y)`` of the decreasing rearrangement of ``|f|``.

    ``f*`` is piecewise linear in ``s`` between consecutive knots, with
    ``s[0] = 0`` and ``s[-1] = 1``.  The construction inverts the distribution
    function of the interpolant, which is piecewise linear between the sorted
    node values; constant pieces become flat steps of ``f*``.
    """
    s = _samples(f)
    if np.iscomplexobj(s):
        raise ValueError("decreasing rearrangement needs real samples")
    m = s.shape[0]
    h = grid_step(m)
    a, b = s[:-1], s[1:]
    # split cells at sign changes so |f| is linear on every piece
    cross = a * b < 0
    t0 = np.where(cross, np.abs(a) / np.where(cross, np.abs(a) + np.abs(b), 1.0), 1.0)
    lo_end = np.concatenate([np.abs(a), np.zeros(cross.sum())])
    hi_end = np.concatenate([np.where(cross, 0.0, np.abs(b)), np.abs(b[cross])])
    length = np.concatenate([h * t0, h * (1 - t0[cross])])
    lo = np.minimum(lo_end, hi_end)
    hi = np.maximum(lo_end, hi_end)
    keep = length > 0
    lo, hi, length = lo[keep], hi[keep], length[keep]

    scale = float(hi.max()) if hi.size else 0.0
    if scale == 0.0:
        return np.array([0.0, 1.0]), np.array([0.0, 0.0])
    flat = (hi - lo) <= 1e-10 * scale
    mid = 0.5 * (lo + hi)
    lo = np.where(flat, mid, lo)
    hi = np.where(flat, mid, hi)

    levels = np.unique(np.concatenate([lo, hi]))[::-1]  # descending
    slope_len = np.where(flat, 0.0, length)
    inv = np.where(flat, 0.0, slope_len / np.where(flat, 1.0, hi - lo))

    # mu(y) = sum_{lo >= y} L  +  sum_{lo < y < hi} L (hi - y) / (hi - lo)  (non-flat)
    #       + sum_{flat, level > y} L
    order_lo = np.argsort(lo)
    lo_sorted = lo[order_lo]
    cum_len_lo = np.concatenate([[0.0], np.cumsum(length[order_lo])])
    cum_a_lo = np.concatenate([[0.0], np.cumsum((inv * hi)[order_lo])])
    cum_b_lo = np.concatenate([[0.0], np.cumsum(inv[order_lo])])
    order_hi = np.argsort(hi)
    hi_sorted = hi[order_hi]
    cum_a_hi = np.concatenate([[0.0], np.cumsum((inv * hi)[order_hi])])
    cum_b_hi = np.concatenate([[0.0], np.cumsum(inv[order_hi])])
    total = cum_len_lo[-1]

    def mu(y, strict):
        # strict=True gives |{|f| > y}|, strict=False gives |{|f| >= y}|
        side = "right" if strict else "left"
        k_lo = np.searchsorted(lo_sorted, y, side=side)  # pieces with lo <= y (or < y)
        above = total - cum_len_lo[k_lo]
        # pieces with lo < y (strict: lo <= y) that also have hi > y contribute partially
        k_hi = np.searchsorted(hi_sorted, y, side="right")
        part = (cum_a_lo[k_lo] - cum_a_hi[k_hi]) - y * (cum_b_lo[k_lo] - cum_b_hi[k_hi])
        return above + np.maximum(part, 0.0)

    mu_right = np.clip(mu(levels, True), 0.0, total)
    mu_left = np.clip(mu(levels, False), 0.0, total)
    s_knots = np.empty(2 * levels.size)
    y_knots = np.empty(2 * levels.size)
    s_knots[0::2] = mu_right
    s_knots[1::2] = mu_left
    y_knots[0::2] = levels
    y_knots[1::2] = levels
    s_knots = np.maximum.accumulate(s_knots)
    if s_knots[0] > 0:
        s_knots = np.concatenate([[0.0], s_knots])
        y_knots = np.concatenate([[levels[0]], y_knots])
    if s_knots[-1] < 1.0:
        s_knots = np.concatenate([s_knots, [1.0]])
        y_knots = np.concatenate([y_knots, [y_knots[-1]]])
    s_knots[-1] = 1.0
    return s_knots, y_knots


def lorentz21_norm(f) -> float:
    """``int_0^1 s^(-1/2) f*(s) ds`` for the interpolant of real ``f``.

    On each linear piece of ``f*`` the weight ``s^(-1/2)`` is integrated in
    closed form, so the endpoint singularity carries no quadrature error.
    """
    if isinstance(f, GridFunction) and f.space.is_complex:
        raise ValueError("lorentz21_norm needs a real-valued function")
    s, y = decreasing_rearrangement(f)
    s0, s1 = s[:-1], s[1:]
    y0, y1 = y[:-1], y[1:]
    ds = s1 - s0
    ok = ds > 0
    slope = np.where(ok, (y1 - y0) / np.where(ok, ds, 1.0), 0.0)
    icept = y0 - slope * s0
    r0, r1 = np.sqrt(s0), np.sqrt(s1)
    piece = 2.0 * icept * (r1 - r0) + (2.0 / 3.0) * slope * (r1 ** 3 - r0 ** 3)
    return float(np.sum(np.where(ok, piece, 0.0)))


# ------------------------------------------------------------------ Fourier


def _half_hat_factor(x: np.ndarray) -> np.ndarray:
    """``int_0^1 (1 - v) exp(-i x v) dv`` evaluated without cancellation."""
    x = np.asarray(x, dtype=float)
    re = 0.5 * np.sinc(x / (2 * np.pi)) ** 2
    small = np.abs(x) < 0.1
    xs = np.where(small, 1.0, x)
    x2 = x * x
    series = x / 6 - x * x2 / 120 + x * x2 * x2 / 5040 - x * x2 ** 3 / 362880
    direct = (xs - np.sin(xs)) / (xs * xs)
    im = np.where(small, series, direct)
    return re - 1j * im


def fourier_weights(m: int, ks) -> np.ndarray:
    """Matrix ``W`` with ``fourier_coeffs(f, ks) == W @ samples`` on ``m`` nodes.

    The interpolant is a combination of hat functions whose transforms are
    known in closed form, so the coefficients are exact up to rounding.
    """
    h = grid_step(m)
    ks = np.atleast_1d(np.asarray(ks, dtype=int))
    cutoff = int(FOURIER_CUTOFF_FRACTION * (m - 1))
    if ks.size and np.max(np.abs(ks)) > cutoff:
        raise ValueError(f"|k| must be <= {cutoff} on a grid of {m} points")
    x = 2 * np.pi * ks * h
    interior_factor = np.sinc(x / (2 * np.pi)) ** 2
    g = _half_hat_factor(x)
    W = np.exp(-2j * np.pi * np.outer(ks, np.arange(m)) / (m - 1)) * interior_factor[:, None]
    W[:, 0] = g
    W[:, -1] = np.conj(g)
    return h * W


def fourier_coeffs(f, ks) -> np.ndarray:
    """``int_0^1 f(t) exp(-2 pi i k t) dt`` for each ``k`` in ``ks``, exact for the interpolant."""
    s = _samples(f)
    return fourier_weights(s.shape[0], ks) @ s


def fourier_coeff(f, k: int) -> complex:
    return complex(fourier_coeffs(f, [k])[0])


def fourier_interpolation_bound(k: int, m: int) -> float:
    """|1 - hat(eps_k)(k)| for the sampled exponential: 1 - sinc^2(pi k h)."""
    return float(1.0 - np.sinc(k * grid_step(m)) ** 2)


def trig_polynomial(coeffs: dict[int, complex] | np.ndarray, m: int, freqs=None) -> GridFunction:
    """Sample ``sum_k c_k exp(2 pi i k t)`` on ``m`` nodes."""
    if isinstance(coeffs, dict):
        freqs = np.array(list(coeffs.keys()), dtype=int)
        coeffs = np.array(list(coeffs.values()), dtype=complex)
    t = grid_nodes(m)
    vals = np.exp(2j * np.pi * np.outer(t, freqs)) @ np.asarray(coeffs, dtype=complex)
    return GridFunction(vals, grid_c(m, "complex"))


@dataclass(frozen=True)
class TensorSpace:
    """Algebraic tensor product ``X (x) Y`` carrying the injective norm.

    Coefficients of ``x (x) y`` are laid out row-major, index ``i * dim_y + j``.
    """

    factor_x: SpaceDescriptor
    factor_y: SpaceDescriptor
    kind: str = "eps"

    def __post_init__(self):
        if self.kind not in ("eps", "pi"):
            raise ValueError(f"tensor norm kind must be 'eps' or 'pi', got {self.kind!r}")

    @property
    def dim(self) -> int:
        return self.factor_x.dim * self.factor_y.dim

    @property
    def family(self) -> str:
        return "Tensor"

    @property
    def scalar(self) -> str:
        if "complex" in (self.factor_x.scalar, self.factor_y.scalar):
            return "complex"
        return "real"

    @property
    def is_complex(self) -> bool:
        return self.scalar == "complex"

    def same_space(self, other) -> bool:
        return (
            isinstance(other, TensorSpace)
            and self.kind == other.kind
            and self.factor_x.same_space(other.factor_x)
            and self.factor_y.same_space(other.factor_y)
        )

    def to_dict(self) -> dict:
        return {
            "family": "Tensor",
            "kind": self.kind,
            "factor_x": self.factor_x.to_dict(),
            "factor_y": self.factor_y.to_dict(),
        }

    def __str__(self):
        return f"({self.factor_x} (x)_{self.kind} {self.factor_y})"


def space_from_dict(d: dict):
    """Decode either a plain descriptor or a tensor-space descriptor."""
    if d.get("family") == "Tensor":
        return TensorSpace(
            SpaceDescriptor.from_dict(d["factor_x"]),
            SpaceDescriptor.from_dict(d["factor_y"]),
            d.get("kind", "eps"),
        )
    return SpaceDescriptor.from_dict(d)
