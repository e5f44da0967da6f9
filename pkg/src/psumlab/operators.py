"""Dense operators between described spaces and their operator norms."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .spaces import (
    SEQUENCE_FAMILIES,
    GridFunction,
    SpaceDescriptor,
    TensorSpace,
    Vector,
    decode_scalars,
    dual_exponent,
    encode_scalars,
    grid_lp_norm,
    lp,
    lp_norm,
    lp_norm_rows,
    norming_vector,
    space_from_dict,
    lorentz21_norm,
)

#: Largest l_inf-domain dimension for which sign vectors are enumerated.
SIGN_ENUMERATION_MAX = 16


@dataclass(frozen=True)
class LinearMap:
    """Matrix with ``rows = codomain.dim`` and ``cols = domain.dim``."""

    matrix: np.ndarray
    domain: SpaceDescriptor | TensorSpace
    codomain: SpaceDescriptor

    def __post_init__(self):
        mat = np.asarray(self.matrix)
        mat = mat.astype(complex if np.iscomplexobj(mat) else float)
        if mat.ndim != 2:
            raise ValueError("matrix must be 2-D")
        if mat.shape != (self.codomain.dim, self.domain.dim):
            raise ValueError(
                f"matrix shape {mat.shape} does not match "
                f"{self.codomain} <- {self.domain}"
            )
        if not np.all(np.isfinite(mat)):
            raise ValueError("matrix entries must be finite")
        mat = np.array(mat, copy=True)
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.matrix)

    def with_spaces(self, domain=None, codomain=None) -> "LinearMap":
        """Same matrix, reinterpreted between other spaces of equal dimension."""
        return LinearMap(self.matrix, domain or self.domain, codomain or self.codomain)

    def to_dict(self) -> dict:
        return {
            "matrix": encode_scalars(self.matrix),
            "domain": self.domain.to_dict(),
            "codomain": self.codomain.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LinearMap":
        unknown = set(d) - {"matrix", "domain", "codomain"}
        if unknown:
            raise ValueError(f"unknown LinearMap fields {sorted(unknown)}")
        mat = decode_scalars(d["matrix"])
        return cls(np.atleast_2d(mat), space_from_dict(d["domain"]),
                   space_from_dict(d["codomain"]))


@dataclass(frozen=True)
class OpNormResult:
    """``value`` is attained by ``witness``; ``upper`` always bounds the norm."""

    value: float
    witness: Vector
    exact: bool
    upper: float

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "upper": self.upper,
            "exact": self.exact,
            "witness": self.witness.to_dict(),
        }


def identity(space: SpaceDescriptor, codomain: SpaceDescriptor | None = None) -> LinearMap:
    return LinearMap(np.eye(space.dim), space, codomain or space)


def diagonal(entries, domain: SpaceDescriptor, codomain: SpaceDescriptor | None = None) -> LinearMap:
    return LinearMap(np.diag(np.asarray(entries)), domain, codomain or domain)


def zero(domain, codomain) -> LinearMap:
    return LinearMap(np.zeros((codomain.dim, domain.dim)), domain, codomain)


def _coords(v, dim: int) -> np.ndarray:
    if isinstance(v, (Vector, GridFunction)):
        c = v.coords if isinstance(v, Vector) else v.samples
    elif hasattr(v, "coeffs"):
        c = np.asarray(v.coeffs).ravel()
    else:
        c = np.asarray(v)
    if c.ndim != 1 or c.shape[0] != dim:
        raise ValueError(f"input of shape {c.shape} does not match dimension {dim}")
    return c


def apply(T: LinearMap, v) -> Vector | GridFunction:
    """``T v`` tagged with the codomain descriptor."""
    if isinstance(v, Vector) and not v.space.same_space(T.domain):
        raise ValueError(f"vector lives in {v.space}, operator expects {T.domain}")
    y = T.matrix @ _coords(v, T.domain.dim)
    cod = T.codomain
    if np.iscomplexobj(y) and not cod.is_complex:
        cod = cod.with_scalar("complex")
    if cod.family in SEQUENCE_FAMILIES:
        return Vector(y, cod)
    return GridFunction(y, cod)


def compose(A: LinearMap, B: LinearMap) -> LinearMap:
    """``A o B``: first ``B``, then ``A``."""
    if not B.codomain.same_space(A.domain):
        raise ValueError(f"cannot compose: {B.codomain} does not match {A.domain}")
    return LinearMap(A.matrix @ B.matrix, B.domain, A.codomain)


# ------------------------------------------------------------------ norms


def codomain_norms(Y: np.ndarray, space: SpaceDescriptor) -> np.ndarray:
    """Norms of the rows of ``Y`` measured in ``space``."""
    Y = np.atleast_2d(Y)
    if space.family in SEQUENCE_FAMILIES or space.family == "GridC":
        return lp_norm_rows(Y, space.p)
    if space.family == "GridLp":
        return np.array([grid_lp_norm(row, space.p) for row in Y])
    return np.array([lorentz21_norm(row) for row in Y])


def _seq_exponent(space, role):
    if space.family in SEQUENCE_FAMILIES:
        return space.p
    if role == "codomain" and space.family == "GridC":
        return math.inf
    raise ValueError(f"op_norm does not support {space.family} as {role}")


def _sign_vectors(n: int) -> np.ndarray:
    """All of {+-1}^n with first coordinate +1 (half the cube, by symmetry)."""
    if n == 0:
        return np.ones((1, 0))
    rest = np.array(list(itertools.product((1.0, -1.0), repeat=n - 1)))
    return np.hstack([np.ones((len(rest), 1)), rest.reshape(len(rest), n - 1)])


_SIGN_CACHE: dict[int, np.ndarray] = {}


def sign_vectors(n: int) -> np.ndarray:
    if n > SIGN_ENUMERATION_MAX:
        raise ValueError(f"sign enumeration is capped at n = {SIGN_ENUMERATION_MAX}")
    if n not in _SIGN_CACHE:
        _SIGN_CACHE[n] = _sign_vectors(n)
    return _SIGN_CACHE[n]


def _id_norm(n: int, p_from: float, p_to: float) -> float:
    """Norm of the formal identity l_{p_from}^n -> l_{p_to}^n."""
    a = 0.0 if math.isinf(p_from) else 1.0 / p_from
    b = 0.0 if math.isinf(p_to) else 1.0 / p_to
    return float(n ** max(0.0, b - a))


def op_norm_upper_bound(M: np.ndarray, p_dom: float, p_cod: float) -> float:
    """Always-valid upper bound on ``||M: l_p_dom -> l_p_cod||`` from norm inequalities."""
    k, n = M.shape
    if M.size == 0:
        return 0.0
    cols = lp_norm_rows(M.T, p_cod)
    via_l1 = _id_norm(n, p_dom, 1.0) * float(cols.max())
    rows = lp_norm_rows(M, dual_exponent(p_dom))
    via_linf = float(rows.max()) * _id_norm(k, math.inf, p_cod)
    spectral = float(np.linalg.norm(M, 2))
    via_l2 = _id_norm(n, p_dom, 2.0) * spectral * _id_norm(k, 2.0, p_cod)
    return min(via_l1, via_linf, via_l2)


def _ascent(M, p_dom, p_cod, rng, restarts, iters=200):
    """Alternating maximisation of ``Re <z, M x>`` over the two unit balls."""
    k, n = M.shape
    dtype = complex if np.iscomplexobj(M) else float
    starts = []
    _, _, vh = np.linalg.svd(M)
    starts.append(np.conj(vh[0]))
    col = int(np.argmax(lp_norm_rows(M.T, p_cod)))
    e = np.zeros(n, dtype=dtype)
    e[col] = 1.0
    starts.append(e)
    for _ in range(restarts):
        x = rng.standard_normal(n)
        if dtype is complex:
            x = x + 1j * rng.standard_normal(n)
        starts.append(x)
    q_cod = dual_exponent(p_cod)
    best_val, best_x = -1.0, None
    for x in starts:
        x = x / max(lp_norm(x, p_dom), 1e-300)
        val = lp_norm(M @ x, p_cod)
        for _ in range(iters):
            z = norming_vector(M @ x, q_cod)
            x_new = norming_vector(z @ M, p_dom)
            val_new = lp_norm(M @ x_new, p_cod)
            if val_new <= val * (1 + 1e-15):
                if val_new > val:
                    x, val = x_new, val_new
                break
            x, val = x_new, val_new
        if val > best_val:
            best_val, best_x = val, x
    return best_val, best_x


def op_norm(T: LinearMap, seed: int = 0, restarts: int = 16) -> OpNormResult:
    """Operator norm of ``T`` between sequence spaces.

    Exact regimes: l_1 domain (largest column), l_inf codomain (largest row in
    the dual exponent), real l_inf domain with ``n <= 16`` (sign vectors), real
    l_1 codomain with ``k <= 16`` (sign vectors on the transpose) and
    l_2 -> l_2 (largest singular value).  Anything else returns a lower bound
    from seeded alternating ascent together with a norm-inequality upper bound.
    """
    if isinstance(T.domain, TensorSpace):
        raise ValueError("op_norm needs a sequence-space domain")
    p_dom = _seq_exponent(T.domain, "domain")
    M = T.matrix
    k, n = M.shape
    dom = T.domain
    if np.iscomplexobj(M) and not dom.is_complex:
        dom = dom.with_scalar("complex")

    def result(value, x, exact, upper=None):
        value = float(value)
        return OpNormResult(value, Vector(x, dom), exact, value if upper is None else float(upper))

    if not np.any(M):
        x = np.zeros(n)
        x[0] = 1.0
        return result(0.0, x, True)

    if p_dom == 1.0:
        cols = codomain_norms(M.T, T.codomain)
        j = int(np.argmax(cols))
        x = np.zeros(n, dtype=M.dtype)
        x[j] = 1.0
        return result(cols[j], x, True)

    seq_cod = T.codomain.family in SEQUENCE_FAMILIES or T.codomain.family == "GridC"
    if seq_cod and (math.isinf(T.codomain.p) or k == 1):
        rows = lp_norm_rows(M, dual_exponent(p_dom))
        i = int(np.argmax(rows))
        x = norming_vector(M[i], p_dom)
        return result(lp_norm(M @ x, math.inf), x, True)

    if math.isinf(p_dom):
        if np.iscomplexobj(M):
            raise ValueError("l_inf-domain operator norms are only supported for real scalars")
        if n <= SIGN_ENUMERATION_MAX:
            S = sign_vectors(n)
            vals = codomain_norms(S @ M.T, T.codomain)
            i = int(np.argmax(vals))
            return result(vals[i], S[i], True)

    p_cod = _seq_exponent(T.codomain, "codomain")
    if p_cod == 1.0 and k <= SIGN_ENUMERATION_MAX and not np.iscomplexobj(M):
        # ||M: l_p -> l_1|| = ||M^T: l_inf -> l_p'||, attained at a sign vector
        S = sign_vectors(k)
        vals = lp_norm_rows(S @ M, dual_exponent(p_dom))
        i = int(np.argmax(vals))
        x = norming_vector(S[i] @ M, p_dom)
        return result(lp_norm(M @ x, 1.0), x, True)

    if p_dom == 2.0 and p_cod == 2.0:
        _, s, vh = np.linalg.svd(M)
        return result(s[0], np.conj(vh[0]), True)

    rng = np.random.default_rng(seed)
    val, x = _ascent(M, p_dom, p_cod, rng, restarts)
    upper = max(op_norm_upper_bound(M, p_dom, p_cod), val)
    return result(val, x, False, upper)


def witness_ratio(T: LinearMap, res: OpNormResult) -> float:
    """``||T w|| / ||w||`` for the returned witness, recomputed from scratch."""
    x = res.witness.coords
    num = float(codomain_norms((T.matrix @ x)[None, :], T.codomain)[0])
    den = lp_norm(x, T.domain.p)
    return num / den if den > 0 else 0.0


def op_norm_value(M: np.ndarray, dom: SpaceDescriptor, cod: SpaceDescriptor, seed: int = 0) -> OpNormResult:
    """Convenience wrapper for bare matrices."""
    return op_norm(LinearMap(M, dom, cod), seed=seed)


def ell(n: int, p: float, scalar: str = "real") -> SpaceDescriptor:
    """Shorthand used across the package for ``l_p^n``."""
    return lp(n, p, scalar)
