"""Summing norms: weak/strong sums, family search, Pietsch certificates, gamma_2."""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import hadamard
from scipy.optimize import minimize

from .operators import (
    SIGN_ENUMERATION_MAX,
    LinearMap,
    OpNormResult,
    codomain_norms,
    op_norm,
    sign_vectors,
)
from .spaces import (
    SEQUENCE_FAMILIES,
    SpaceDescriptor,
    Vector,
    decode_scalars,
    dual_exponent,
    dual_space,
    encode_scalars,
    lp,
    lp_norm,
    norming_vector,
    space_from_dict,
)

PIETSCH_TOL = 1e-10


# ------------------------------------------------------------------ families


@dataclass(frozen=True)
class WeakFamily:
    """Finite family of vectors in ``space``, stored as the rows of ``members``."""

    members: np.ndarray
    space: SpaceDescriptor
    q: float = 2.0

    def __post_init__(self):
        mem = np.atleast_2d(np.asarray(self.members))
        mem = mem.astype(complex if np.iscomplexobj(mem) else float)
        if mem.shape[0] == 0:
            raise ValueError("a weak family needs at least one member")
        if mem.shape[1] != self.space.dim:
            raise ValueError(f"members have length {mem.shape[1]}, space has dim {self.space.dim}")
        if self.space.family not in SEQUENCE_FAMILIES:
            raise ValueError(f"weak families live in sequence spaces, not {self.space.family}")
        if self.q < 1:
            raise ValueError("q must be >= 1")
        mem = np.array(mem, copy=True)
        mem.setflags(write=False)
        object.__setattr__(self, "members", mem)

    @classmethod
    def from_vectors(cls, vectors, q: float = 2.0) -> "WeakFamily":
        vectors = list(vectors)
        if not vectors:
            raise ValueError("a weak family needs at least one member")
        space = vectors[0].space
        for v in vectors[1:]:
            if not v.space.same_space(space):
                raise ValueError("family members must share one space")
        return cls(np.array([v.coords for v in vectors]), space, q)

    @property
    def vectors(self) -> list[Vector]:
        return [Vector(row, self.space) for row in self.members]

    def __len__(self):
        return self.members.shape[0]

    def to_dict(self) -> dict:
        return {"members": encode_scalars(self.members), "space": self.space.to_dict(),
                "q": _enc(self.q)}

    @classmethod
    def from_dict(cls, d: dict) -> "WeakFamily":
        return cls(decode_scalars(d["members"]), space_from_dict(d["space"]), _dec(d["q"]))


def _enc(p):
    return "inf" if p is not None and math.isinf(p) else p


def _dec(p):
    return math.inf if p == "inf" else p


def weak_family_map(fam: WeakFamily) -> LinearMap:
    """Members as rows: the map ``X* -> l_q^k`` whose norm is the weak l_q norm."""
    return LinearMap(fam.members, dual_space(fam.space), lp(len(fam), fam.q))


def weak_lq_bounds(fam: WeakFamily) -> OpNormResult:
    return op_norm(weak_family_map(fam))


def weak_lq_norm(fam: WeakFamily) -> float:
    """Weak l_q norm of the family.

    Exact whenever the underlying operator norm is (l_inf/SupSeq/l_1 members in
    enumeration range, l_2 members with q = 2); otherwise the certified upper
    bound, so that ratios built on it stay valid lower bounds.
    """
    return weak_lq_bounds(fam).upper


def strong_lp_sum(T: LinearMap, fam: WeakFamily, p: float) -> float:
    if not fam.space.same_space(T.domain):
        raise ValueError(f"family lives in {fam.space}, operator expects {T.domain}")
    norms = codomain_norms(fam.members @ T.matrix.T, T.codomain)
    return lp_norm(norms, p)


def family_ratio(T: LinearMap, fam: WeakFamily, p: float) -> float:
    """Strong l_p sum over weak l_q norm: a lower bound for pi_{p,q}(T)."""
    weak = weak_lq_norm(fam)
    if weak <= 0:
        return 0.0
    return strong_lp_sum(T, fam, p) / weak


# ------------------------------------------------------------------ certificates


@dataclass(frozen=True)
class PietschCertificate:
    """``||Tx||^2 <= constant^2 * sum_i weights_i |<functionals_i, x>|^2``.

    Each functional lies in the dual unit ball of the domain and the weights
    form a probability vector.
    """

    functionals: np.ndarray
    weights: np.ndarray
    constant: float

    def bound(self, x) -> np.ndarray:
        X = np.atleast_2d(x)
        return self.constant * np.sqrt(np.abs(X @ self.functionals.T) ** 2 @ self.weights)

    def to_dict(self) -> dict:
        return {"kind": "pietsch", "functionals": encode_scalars(self.functionals),
                "weights": encode_scalars(self.weights), "constant": self.constant}

    @classmethod
    def from_dict(cls, d: dict) -> "PietschCertificate":
        return cls(decode_scalars(d["functionals"]), decode_scalars(d["weights"]), d["constant"])


def check_pietsch(T: LinearMap, cert: PietschCertificate, samples: int = 1000, seed: int = 0,
                  rtol: float = 1e-9) -> bool:
    """Test the domination inequality on random inputs plus the certificate's own validity."""
    F = cert.functionals
    dual_norms = np.array([lp_norm(f, dual_exponent(T.domain.p)) for f in F])
    if np.any(dual_norms > 1 + 1e-12):
        return False
    w = cert.weights
    if np.any(w < -1e-15) or abs(w.sum() - 1) > 1e-9:
        return False
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((samples, T.domain.dim))
    lhs = np.linalg.norm(X @ T.matrix.T, axis=1)
    rhs = cert.bound(X)
    return bool(np.all(lhs <= rhs * (1 + rtol) + 1e-12))


@dataclass(frozen=True)
class SummingEstimate:
    p: float
    q: float
    lower: float
    lower_witness: WeakFamily
    upper: float | None = None
    upper_certificate: object = None

    def __post_init__(self):
        if self.q > self.p:
            raise ValueError("summing estimates need q <= p")
        if self.upper is not None and self.lower > self.upper * (1 + 1e-8) + 1e-12:
            raise ValueError(f"lower {self.lower} exceeds upper {self.upper}")

    @property
    def exact(self) -> bool:
        return self.upper is not None and self.upper - self.lower <= 1e-8 * max(1.0, self.upper)

    def to_dict(self) -> dict:
        cert = self.upper_certificate
        return {
            "p": _enc(self.p),
            "q": _enc(self.q),
            "lower": self.lower,
            "upper": self.upper,
            "lower_witness": self.lower_witness.to_dict(),
            "upper_certificate": None if cert is None else cert.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SummingEstimate":
        cert = d.get("upper_certificate")
        if cert is not None:
            cert = PietschCertificate.from_dict(cert) if cert["kind"] == "pietsch" \
                else Gamma2Result.from_dict(cert)
        return cls(_dec(d["p"]), _dec(d["q"]), d["lower"], WeakFamily.from_dict(d["lower_witness"]),
                   d.get("upper"), cert)


# ------------------------------------------------------------------ family search


def _check_search_spaces(T: LinearMap):
    if T.domain.family not in SEQUENCE_FAMILIES:
        raise ValueError(f"family search needs a sequence-space domain, got {T.domain.family}")
    if T.codomain.family not in SEQUENCE_FAMILIES and T.codomain.family != "GridC":
        raise ValueError(f"family search needs an l_p codomain, got {T.codomain.family}")
    if T.is_complex:
        raise ValueError("family search is implemented for real scalars")


def _norm_grad_rows(Y: np.ndarray, r: float) -> tuple[np.ndarray, np.ndarray]:
    """Row norms of ``Y`` in l_r and a (sub)gradient of each row norm."""
    norms = np.array([lp_norm(y, r) for y in Y])
    G = np.zeros_like(Y)
    # the unit l_r' functional attaining ||y||_r is a gradient of the norm
    for i, y in enumerate(Y):
        if norms[i] > 0:
            G[i] = norming_vector(y, dual_exponent(r))
    return norms, G


def _ratio_grad(T, F, p, q, want_grad=True):
    M = T.matrix
    r = T.codomain.p
    Y = F @ M.T
    norms, Gy = _norm_grad_rows(Y, r)
    strong = lp_norm(norms, p)
    fam_map = LinearMap(F, dual_space(T.domain), lp(F.shape[0], q))
    wres = op_norm(fam_map)
    weak = wres.upper
    if not want_grad:
        return strong, weak, None
    if strong <= 0 or weak <= 0:
        return strong, weak, np.zeros_like(F)
    if math.isinf(p):
        c = np.zeros_like(norms)
        c[int(np.argmax(norms))] = 1.0
    else:
        c = (norms / strong) ** (p - 1)
    g_strong = (c[:, None] * Gy) @ M
    x = wres.witness.coords
    z = norming_vector(F @ x, dual_exponent(q))
    g_weak = np.outer(z, x)
    return strong, weak, g_strong / strong - g_weak / weak


def _ascend(T, F, p, q, evals):
    strong, weak, g = _ratio_grad(T, F, p, q)
    best = strong / weak if weak > 0 else 0.0
    eta = 0.1
    used = 1
    while used < evals and eta > 1e-9:
        gn = np.linalg.norm(g)
        if gn == 0:
            break
        F_try = F + eta * np.linalg.norm(F) * g / gn
        s, w, g_try = _ratio_grad(T, F_try, p, q)
        used += 1
        val = s / w if w > 0 else 0.0
        if val > best:
            F, g, best = F_try / w, g_try * w, val
            eta *= 1.5
        else:
            eta *= 0.5
    return best, F, used


def pi_pq_lower_search(T: LinearMap, p: float, q: float, budget: int = 10000, seed: int = 0,
                       extra_families=()) -> SummingEstimate:
    """Lower bound for ``pi_{p,q}(T)`` from a seeded search over finite families.

    Starts from the basis family, the right singular vectors, any supplied
    families and random families of size up to ``4 n``; the best few are then
    improved by normalised gradient ascent on the strong/weak ratio.
    """
    if q > p:
        raise ValueError("need q <= p")
    if budget < 1:
        raise ValueError("budget must be >= 1")
    _check_search_spaces(T)
    n = T.domain.dim
    rng = np.random.default_rng(seed)
    starts = [np.eye(n)]
    _, _, vh = np.linalg.svd(T.matrix)
    starts.append(vh)
    for F in extra_families:
        starts.append(np.atleast_2d(np.asarray(F.members if isinstance(F, WeakFamily) else F, float)))
    for size in (n, 2 * n, 4 * n):
        starts.append(rng.standard_normal((size, n)))
        if math.isinf(T.domain.p):
            starts.append(rng.choice((-1.0, 1.0), size=(size, n)))

    scored = []
    for F in starts:
        s, w, _ = _ratio_grad(T, F, p, q, want_grad=False)
        scored.append((s / w if w > 0 else 0.0, F))
    used = len(scored)
    order = sorted(range(len(scored)), key=lambda i: -scored[i][0])
    best_val, best_F = scored[order[0]]
    n_climb = min(4, len(order))
    per = max(0, (budget - used) // n_climb)
    if per > 1 and best_val > 0:
        for i in order[:n_climb]:
            val, F, _ = _ascend(T, scored[i][1], p, q, per)
            if val > best_val:
                best_val, best_F = val, F

    fam = WeakFamily(best_F, T.domain, q)
    return SummingEstimate(p, q, family_ratio(T, fam, p), fam)


# ------------------------------------------------------------------ pi_2


def _basis_family(T: LinearMap) -> WeakFamily:
    return WeakFamily(np.eye(T.domain.dim), T.domain, 2.0)


def _zero_estimate(T):
    fam = WeakFamily(np.eye(T.domain.dim)[:1], T.domain, 2.0)
    n = T.domain.dim
    cert = PietschCertificate(np.eye(n)[:1] if T.domain.p != 1 else np.ones((1, n)),
                              np.ones(1), 0.0)
    return SummingEstimate(2.0, 2.0, 0.0, fam, 0.0, cert)


def _scale_safe(fn):
    """Run on ``T / max|T|`` when the entries would under- or overflow."""

    @functools.wraps(fn)
    def wrapper(T, *args, **kwargs):
        s = float(np.abs(T.matrix).max()) if T.matrix.size else 0.0
        if s == 0 or 1e-100 < s < 1e100:
            return fn(T, *args, **kwargs)
        est = fn(LinearMap(T.matrix / s, T.domain, T.codomain), *args, **kwargs)
        c = est.upper_certificate
        cert = PietschCertificate(c.functionals, c.weights, c.constant * s)
        return SummingEstimate(est.p, est.q, est.lower * s, est.lower_witness, est.upper * s, cert)

    return wrapper


def _mixing_method(A: np.ndarray, seed: int = 0, max_sweeps: int = 20000, tol: float = PIETSCH_TOL):
    """Maximise <A, V^T V> over unit columns of V by coordinate updates."""
    n = A.shape[0]
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((n, n))
    V /= np.linalg.norm(V, axis=0)
    Aoff = A - np.diag(np.diag(A))
    scale = max(np.trace(A), 1e-300)
    best = None
    for sweep in range(max_sweeps):
        for j in range(n):
            g = V @ Aoff[:, j]
            ng = np.linalg.norm(g)
            if ng > 0:
                V[:, j] = g / ng
        if sweep % 5 == 0 or sweep == max_sweeps - 1:
            lower, d, upper = _mixing_bounds(A, V)
            if best is None or upper - lower < best[2] - best[0]:
                best = (lower, d, upper, V.copy())
            if upper - lower <= tol * scale:
                break
    return best


def _mixing_bounds(A, V):
    lower = float(np.sum(A * (V.T @ V)))
    d = np.einsum("ij,ij->j", V, V @ A)
    lam = np.linalg.eigvalsh(np.diag(d) - A)[0]
    shift = max(0.0, -lam) + 1e-15 * max(np.trace(A), 1e-300)
    d = np.maximum(d + shift, 0.0)
    return lower, d, float(d.sum())


@_scale_safe
def pi2_pietsch_linf(T: LinearMap, seed: int = 0) -> SummingEstimate:
    """Exact ``pi_2`` of a real map out of ``l_inf^n`` (or SupSeq) into ``l_2``.

    Solves the Pietsch weight problem in its semidefinite form, ``min sum d``
    subject to ``diag(d) >= T^T T``, together with its dual. The dual
    factor gives a family with weak l_2 norm one whose strong sum meets the
    weights' constant to about 1e-10 relative.
    """
    if not math.isinf(T.domain.p):
        raise ValueError(f"pi2_pietsch_linf needs an l_inf domain, got {T.domain}")
    if T.codomain.family not in SEQUENCE_FAMILIES or T.codomain.p != 2:
        raise ValueError("pi2_pietsch_linf needs an l_2 codomain")
    if T.is_complex:
        raise ValueError("pi2_pietsch_linf is implemented for real scalars")
    if not np.any(T.matrix):
        return _zero_estimate(T)
    M = T.matrix
    n = M.shape[1]
    A = M.T @ M
    diag = np.diag(A)
    if np.allclose(A - np.diag(diag), 0, atol=1e-15 * diag.max()):
        # diagonal Gram matrix: weights proportional to the column norms squared
        d = diag.copy()
        V = np.eye(n)
    else:
        _, d, _, V = _mixing_method(A, seed)
    C = math.sqrt(d.sum())
    cert = PietschCertificate(np.eye(n), d / d.sum(), C)
    fam = WeakFamily(V, T.domain, 2.0)
    lower = family_ratio(T, fam, 2.0)
    basis = _basis_family(T)
    if family_ratio(T, basis, 2.0) > lower:
        fam, lower = basis, family_ratio(T, basis, 2.0)
    return SummingEstimate(2.0, 2.0, lower, fam, max(C, lower), cert)


@_scale_safe
def pi2_hilbert(T: LinearMap) -> SummingEstimate:
    """``pi_2`` of a map from ``l_2`` into ``l_2``: the Hilbert-Schmidt norm."""
    if T.domain.p != 2 or T.codomain.p != 2:
        raise ValueError("pi2_hilbert needs l_2 domain and codomain")
    if not np.any(T.matrix):
        return _zero_estimate(T)
    _, s, vh = np.linalg.svd(T.matrix)
    s2 = np.zeros(vh.shape[0])
    s2[: len(s)] = s**2
    hs = math.sqrt(s2.sum())
    keep = s2 > 0
    cert = PietschCertificate(np.conj(vh[keep]), s2[keep] / s2.sum(), hs)
    fam = WeakFamily(vh if T.is_complex else vh.real, T.domain, 2.0)
    lower = family_ratio(T, fam, 2.0)
    return SummingEstimate(2.0, 2.0, lower, fam, max(hs, lower), cert)


def _hadamard_rows(n: int) -> np.ndarray:
    """Sign vectors whose outer products sum to ``16 I_n`` (n <= 16)."""
    return hadamard(16)[:, :n].astype(float)


@_scale_safe
def pi2_pietsch_l1(T: LinearMap, max_rounds: int = 200) -> SummingEstimate:
    """Exact ``pi_2`` of a real map out of ``l_1^n`` into ``l_2``, ``n <= 16``.

    The Pietsch measure lives on the sign vectors (extreme points of the dual
    ball).  A cutting-plane loop solves the dual semidefinite program over a
    growing set of sign constraints, using exact enumeration to find the most
    violated one.
    """
    import cvxpy as cp

    if T.domain.p != 1:
        raise ValueError(f"pi2_pietsch_l1 needs an l_1 domain, got {T.domain}")
    if T.codomain.family not in SEQUENCE_FAMILIES or T.codomain.p != 2:
        raise ValueError("pi2_pietsch_l1 needs an l_2 codomain")
    if T.is_complex:
        raise ValueError("pi2_pietsch_l1 is implemented for real scalars")
    n = T.domain.dim
    if n > SIGN_ENUMERATION_MAX:
        raise ValueError(f"pi2_pietsch_l1 is capped at n = {SIGN_ENUMERATION_MAX}")
    if not np.any(T.matrix):
        return _zero_estimate(T)
    M = T.matrix
    A = M.T @ M
    S_all = sign_vectors(n)
    # Hadamard rows bound the trace of X from the first round on
    H = _hadamard_rows(n)
    H = H * H[:, :1]
    index = {tuple(row): i for i, row in enumerate(S_all)}
    active = sorted({index[tuple(row)] for row in H})
    X = cp.Variable((n, n), PSD=True)
    for _ in range(max_rounds):
        S = S_all[active]
        cons = [cp.sum(cp.multiply(S @ X, S), axis=1) <= 1]
        prob = cp.Problem(cp.Maximize(cp.trace(A @ X)), cons)
        with warnings.catch_warnings():
            # an inaccurate solve is fine: the weights are repaired below
            warnings.filterwarnings("ignore", message="Solution may be inaccurate")
            prob.solve(solver=cp.CLARABEL)
        if X.value is None:
            raise RuntimeError(f"pi_2 semidefinite program failed: {prob.status}")
        Xv = (X.value + X.value.T) / 2
        vals = np.einsum("ij,jk,ik->i", S_all, Xv, S_all)
        worst = int(np.argmax(vals))
        if vals[worst] <= 1 + 1e-9 or worst in active:
            break
        active.append(worst)
    mu = np.maximum(np.asarray(cons[0].dual_value).ravel(), 0.0)
    S = S_all[active]
    # repair the dual weights so that sum mu_s s s^T - A is exactly PSD
    D = (S.T * mu) @ S - A
    lam = np.linalg.eigvalsh(D)[0]
    shift = max(0.0, -lam) + 1e-14 * max(np.trace(A), 1e-300)
    funcs = np.vstack([S, _hadamard_rows(n)])
    weights = np.concatenate([mu, np.full(16, shift / 16)])
    keep = weights > 0
    funcs, weights = funcs[keep], weights[keep]
    total = weights.sum()
    cert = PietschCertificate(funcs, weights / total, math.sqrt(total))

    # lower witness: factor X = F^T F, members are the rows of F
    w, U = np.linalg.eigh(Xv)
    F = (U * np.sqrt(np.maximum(w, 0))).T
    F = F[np.linalg.norm(F, axis=1) > 1e-14 * max(np.abs(F).max(), 1e-300)]
    fam = WeakFamily(F, T.domain, 2.0)
    lower = family_ratio(T, fam, 2.0)
    basis = _basis_family(T)
    if family_ratio(T, basis, 2.0) > lower:
        fam, lower = basis, family_ratio(T, basis, 2.0)
    return SummingEstimate(2.0, 2.0, lower, fam, max(math.sqrt(total), lower), cert)


def pi2(T: LinearMap, seed: int = 0) -> SummingEstimate:
    """Dispatch on the domain: l_inf/SupSeq, l_2 or l_1."""
    if T.codomain.family not in SEQUENCE_FAMILIES or T.codomain.p != 2:
        raise ValueError("exact pi_2 is available for l_2 codomains only")
    p = T.domain.p
    if math.isinf(p):
        return pi2_pietsch_linf(T, seed)
    if p == 2:
        return pi2_hilbert(T)
    if p == 1:
        return pi2_pietsch_l1(T)
    raise ValueError(f"no exact pi_2 for domain {T.domain}")


def pi2_vs_opnorm(T: LinearMap) -> float:
    """``pi_2(T) / ||T||`` for maps out of ``l_inf`` or ``l_1`` into ``l_2``."""
    if not (math.isinf(T.domain.p) or T.domain.p == 1):
        raise ValueError("pi2_vs_opnorm needs an l_inf or l_1 domain")
    if not np.any(T.matrix):
        return 0.0
    return pi2(T).upper / op_norm(T).value


# ------------------------------------------------------------------ gamma_2


@dataclass(frozen=True)
class Gamma2Result:
    """Bracket ``lower <= gamma_2(T) <= value`` with the factorisation attaining ``value``."""

    value: float
    factor_in: LinearMap
    factor_out: LinearMap
    lower: float = 0.0
    norms: tuple = field(default=(0.0, 0.0))

    def to_dict(self) -> dict:
        return {"kind": "factorization", "value": self.value, "lower": self.lower,
                "norms": list(self.norms), "factor_in": self.factor_in.to_dict(),
                "factor_out": self.factor_out.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "Gamma2Result":
        return cls(d["value"], LinearMap.from_dict(d["factor_in"]),
                   LinearMap.from_dict(d["factor_out"]), d["lower"], tuple(d["norms"]))


def _norm_and_grad(M, dom, cod):
    res = op_norm(LinearMap(M, dom, cod))
    x = res.witness.coords
    y = M @ x
    z = norming_vector(y, dual_exponent(cod.p))
    return res, np.outer(z, x)


def factorization_norms(A: np.ndarray, B: np.ndarray, X: SpaceDescriptor, Y: SpaceDescriptor):
    """Certified upper bounds for ``||A: l_2 -> Y||`` and ``||B: X -> l_2||``."""
    r = B.shape[0]
    H = lp(r, 2.0)
    return op_norm(LinearMap(A, H, Y)).upper, op_norm(LinearMap(B, X, H)).upper


def gamma2_norm(T: LinearMap, budget: int = 200, seed: int = 0, restarts: int = 4) -> Gamma2Result:
    """Bracket for the Hilbert-space factorisation norm of a real map.

    Factorisations ``T = A B`` run through ``l_2^r`` with ``r = rank T``; ``B``
    is parametrised as ``G Q`` with ``Q`` an orthonormal basis of the row
    space, and ``log ||A|| + log ||B||`` is minimised over ``G`` by L-BFGS.
    The lower end of the bracket is the operator norm.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if T.is_complex:
        raise ValueError("gamma2_norm is implemented for real scalars")
    k, n = T.shape
    if max(k, n) > 32:
        raise ValueError("gamma2_norm supports dimensions up to 32")
    X, Y = T.domain, T.codomain
    M = T.matrix
    opn = op_norm(T)
    if not np.any(M):
        A = np.zeros((k, 1))
        B = np.zeros((1, n))
        return Gamma2Result(0.0, LinearMap(B, X, lp(1, 2)), LinearMap(A, lp(1, 2), Y), 0.0, (0.0, 0.0))

    U, s, Vt = np.linalg.svd(M)
    r = int(np.sum(s > s[0] * 1e-12))
    Q = Vt[:r]
    C = M @ Q.T
    H = lp(r, 2.0)

    def split(G):
        return C @ np.linalg.inv(G), G @ Q

    def objective(g):
        G = g.reshape(r, r)
        try:
            A, B = split(G)
        except np.linalg.LinAlgError:
            return 1e300, np.zeros_like(g)
        ra, ga = _norm_and_grad(A, H, Y)
        rb, gb = _norm_and_grad(B, X, H)
        if ra.value <= 0 or rb.value <= 0 or not np.all(np.isfinite(A)):
            return 1e300, np.zeros_like(g)
        f = math.log(ra.value) + math.log(rb.value)
        grad_B = gb / rb.value
        grad_A = ga / ra.value
        Ginv = np.linalg.inv(G)
        grad = grad_B @ Q.T - A.T @ grad_A @ Ginv.T
        return f, grad.ravel()

    rng = np.random.default_rng(seed)
    seeds = [np.eye(r), np.diag(s[:r])]
    for _ in range(restarts):
        seeds.append(np.diag(s[:r]) @ (np.eye(r) + 0.3 * rng.standard_normal((r, r))))
    per = max(1, budget // len(seeds))

    best = None
    for G0 in seeds:
        cands = [G0]
        if per > 1:
            out = minimize(objective, G0.ravel(), jac=True, method="L-BFGS-B",
                           options={"maxiter": per})
            cands.append(out.x.reshape(r, r))
        for G in cands:
            if abs(np.linalg.det(G)) < 1e-300 or not np.all(np.isfinite(G)):
                continue
            A, B = split(G)
            na, nb = factorization_norms(A, B, X, Y)
            val = na * nb
            if best is None or val < best[0]:
                best = (val, A, B, na, nb)
    val, A, B, na, nb = best
    # balance the two factors
    c = math.sqrt(na / nb) if nb > 0 else 1.0
    A, B = A / c, B * c
    na, nb = na / c, nb * c
    return Gamma2Result(val, LinearMap(B, X, H), LinearMap(A, H, Y), opn.value, (na, nb))
