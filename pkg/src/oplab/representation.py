"""Representations of C(K) for a finite set K, i.e. of l^inf_N.

A unital homomorphism ``u: l^inf_N -> B(X)`` is fixed by the disjoint
idempotents ``p_l = u(indicator of t_l)``, and ``u(f) = sum_l f(t_l) p_l``.
This module evaluates such representations, bounds their norms from below,
and checks the tensor-extension inequality

    || sum_k u(f_k) b_k || <= ||u||^2 R({ sum_k f_k(t) b_k : t in K })

for ``b_k`` in the commutant of the range of ``u``.
"""
from dataclasses import dataclass, field
import json

import numpy as np

from . import _ascent
from ._rng import rng_for
from .rademacher import RBoundConfig, RBoundEstimate, r_bound, r_bound_of_map
from .spaces import INF, NormEstimate, OperatorMatrix, SearchConfig, SpaceDescriptor, lp, op_norm, sign_patterns

TOL = 1e-10
COMMUTE_TOL = 1e-9


class RepresentationError(ValueError):
    """An idempotent system failed validation; ``residuals`` names the failures."""

    def __init__(self, message, residuals):
        super().__init__(message)
        self.residuals = residuals


class CommutationError(ValueError):
    def __init__(self, message, pair, residual):
        super().__init__(message)
        self.pair = pair
        self.residual = residual


@dataclass
class FiniteRepresentation:
    space: object
    idempotents: np.ndarray
    points: tuple = None
    unital: bool = True

    def __post_init__(self):
        P = np.asarray(self.idempotents, dtype=complex)
        if P.ndim == 2:
            P = P[None]
        self.idempotents = P
        if self.points is None:
            self.points = tuple(range(P.shape[0]))
        self.points = tuple(self.points)
        if len(self.points) != P.shape[0]:
            raise ValueError("one point label per idempotent is required")
        if P.shape[1:] != (self.space.dim, self.space.dim):
            raise ValueError("idempotents do not match the space dimension")

    @property
    def N(self):
        return self.idempotents.shape[0]

    @property
    def dim(self):
        return self.space.dim

    def residuals(self):
        P = self.idempotents
        res = {}
        res["idempotent"] = max(float(np.max(np.abs(p @ p - p))) for p in P)
        off = 0.0
        for i in range(self.N):
            for j in range(self.N):
                if i != j:
                    off = max(off, float(np.max(np.abs(P[i] @ P[j]))))
        res["disjoint"] = off
        if self.unital:
            res["unital"] = float(np.max(np.abs(P.sum(axis=0) - np.eye(self.dim))))
        return res

    def validate(self, tol=TOL):
        res = self.residuals()
        bad = {k: v for k, v in res.items() if v > tol}
        if bad:
            msg = ", ".join(f"{k} residual {v:.3e}" for k, v in bad.items())
            raise RepresentationError(f"invalid idempotent system: {msg} (tolerance {tol:g})", bad)
        return self

    def __call__(self, f):
        return apply_rep(self, f)

    # serialization: points, idempotents as row-major complex arrays
    def to_dict(self):
        return {
            "space": space_to_dict(self.space),
            "points": [str(t) for t in self.points],
            "unital": self.unital,
            "idempotents": [matrix_to_dict(p) for p in self.idempotents],
        }

    @classmethod
    def from_dict(cls, d):
        P = np.array([matrix_from_dict(m) for m in d["idempotents"]])
        return cls(space_from_dict(d["space"]), P, tuple(d["points"]), bool(d.get("unital", True)))

    def dumps(self):
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def loads(cls, text):
        return cls.from_dict(json.loads(text))


def matrix_to_dict(A):
    A = np.asarray(A, dtype=complex)
    return {"rows": A.shape[0], "cols": A.shape[1], "re": A.real.ravel().tolist(), "im": A.imag.ravel().tolist()}


def matrix_from_dict(d):
    A = np.asarray(d["re"], dtype=float) + 1j * np.asarray(d.get("im", [0.0] * len(d["re"])), dtype=float)
    return A.reshape(d["rows"], d["cols"])


def space_to_dict(space):
    p = "inf" if space.p == INF else str(space.p)
    d = {"n": space.n, "p": p}
    if space.mu is not None:
        d["mu"] = list(space.mu)
    if space.sup_weights is not None:
        d["sup_weights"] = list(space.sup_weights)
    return d


def space_from_dict(d):
    from fractions import Fraction

    p = INF if str(d["p"]) == "inf" else Fraction(str(d["p"]))
    return SpaceDescriptor(d["n"], p, mu=d.get("mu"), sup_weights=d.get("sup_weights"))


@dataclass
class CKFunction:
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex).ravel()

    @property
    def sup(self):
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


@dataclass
class RTensor:
    """``sum_k f_k (x) b_k`` with ``fs`` of shape (K, N) and ``bs`` of shape (K, n, n)."""

    fs: np.ndarray
    bs: np.ndarray

    def __post_init__(self):
        self.fs = np.atleast_2d(np.asarray(self.fs, dtype=complex))
        self.bs = np.asarray(self.bs, dtype=complex)
        if self.bs.ndim == 2:
            self.bs = self.bs[None]
        if self.fs.shape[0] != self.bs.shape[0]:
            raise ValueError("one function per operator is required")

    def at_points(self):
        """The operators ``sum_k f_k(t_l) b_k`` for every point ``t_l``."""
        return np.einsum("kl,kab->lab", self.fs, self.bs)


def _values(f, N):
    v = f.values if isinstance(f, CKFunction) else np.asarray(f, dtype=complex).ravel()
    if v.size != N:
        raise ValueError(f"function has {v.size} values but K has {N} points")
    return v


def apply_rep(u, f):
    """``u(f) = sum_l f(t_l) p_l`` as an OperatorMatrix."""
    v = _values(f, u.N)
    return OperatorMatrix.on(u.space, np.tensordot(v, u.idempotents, 1))


def _is_star_system(u):
    w = u.space.hilbert_weights
    if w is None or not u.unital:
        return False
    s = np.sqrt(w)
    P = s[None, :, None] * u.idempotents / s[None, None, :]
    return bool(np.max(np.abs(P - np.conj(np.transpose(P, (0, 2, 1))))) < TOL)


def rep_norm(u, cfg=None):
    """Lower bound of ``||u|| = sup{ ||u(f)|| : max_l |f(t_l)| <= 1 }``.

    Enumerates the real sign vectors (all of them for N <= 14), then runs a
    torus ascent over unimodular ``f`` from the best sign. Orthogonal
    projection systems on a Hilbert space are *-representations and return
    exactly 1.
    """
    cfg = cfg or SearchConfig(restarts=8, iterations=200)
    N = u.N
    if _is_star_system(u) or N == 1 and u.unital:
        return NormEstimate(1.0, "exact", np.ones(N, dtype=complex))
    if N <= 14:
        S = sign_patterns(N)
    else:
        S = rng_for(cfg.seed, "rep_norm", "signs").choice(np.array([-1.0, 1.0]), size=(4096, N))
    best_v, best_f, best_x = -1.0, None, None
    for s in S:
        e = op_norm(apply_rep(u, s), cfg)
        if e.value > best_v:
            best_v, best_f, best_x = e.value, s.astype(complex), e.witness
    # torus ascent on f for the current witness, then re-solve for x
    X, P = u.space, u.idempotents
    f, x = best_f, np.asarray(best_x, dtype=complex)
    for _ in range(5):
        W = np.einsum("lab,b->la", P, x)

        def fun(F, W=W):
            Y = F @ W
            nn = X.norm(Y) ** 2
            g = X.norm_sq_grad(Y) @ W.conj().T
            with np.errstate(divide="ignore"):
                return 0.5 * np.log(nn), np.where(nn[:, None] > 0, g / (2 * nn[:, None]), 0.0)

        rng = rng_for(cfg.seed, "rep_norm", "torus")
        F0 = np.exp(2j * np.pi * rng.random((cfg.restarts, N)))
        F0[0] = f
        Fb, vals, _ = _ascent.maximize(fun, F0, cfg.iterations, project=_torus)
        k = int(np.argmax(vals))
        e = op_norm(apply_rep(u, Fb[k]), cfg)
        if e.value <= best_v * (1 + 1e-12):
            break
        best_v, f, x = e.value, Fb[k], np.asarray(e.witness)
    return NormEstimate(best_v, "lower_bound", f)


def _torus(F):
    a = np.abs(F)
    return np.where(a > 0, F / np.where(a > 0, a, 1.0), 1.0)


def r_tensor_norm(x, space, cfg=None):
    """``||sum_k f_k (x) b_k||_R``: the R-bound of the finite set of point values."""
    ops = x.at_points()
    if not np.any(ops):
        z = np.zeros((1, space.dim), dtype=complex)
        z[0, 0] = 1
        return RBoundEstimate(0.0, ops[:1], z, space, (0,))
    return r_bound([OperatorMatrix.on(space, T) for T in ops], cfg)


def commutation_residual(a, b):
    scale = max(np.linalg.norm(a, 2) * np.linalg.norm(b, 2), 1.0)
    return float(np.linalg.norm(a @ b - b @ a, 2) / scale)


def check_commutant(u, bs, tol=COMMUTE_TOL):
    for k, b in enumerate(bs):
        for l, p in enumerate(u.idempotents):
            r = commutation_residual(b, p)
            if r > tol:
                raise CommutationError(
                    f"b_{k} does not commute with p_{l}: relative residual {r:.3e} > {tol:g}", (k, l), r
                )


@dataclass
class ExtensionReport:
    lhs: float
    u_norm: float
    r_norm: float
    slack: float
    escalations: int = 0
    violation: bool = False
    lhs_kind: str = "exact"
    witnesses: dict = field(default_factory=dict)

    @property
    def rhs(self):
        return self.u_norm**2 * self.r_norm

    @property
    def empirical_constant(self):
        """Smallest ``c`` with ``lhs <= c * r_norm``, to compare with ``u_norm^2``."""
        return self.lhs / self.r_norm if self.r_norm > 0 else 0.0


def verify_extension(u, x, cfg=None, slack=1e-6, max_escalations=2):
    """Check ``||sum u(f_k) b_k|| <= ||u||^2 ||sum f_k (x) b_k||_R``.

    Both right-hand factors are lower bounds, so an apparent violation first
    triggers up to ``max_escalations`` re-runs with a doubled budget; only a
    violation surviving those is flagged.
    """
    cfg = cfg or RBoundConfig()
    u.validate()
    check_commutant(u, x.bs)
    M = np.einsum("kl,lab,kbc->ac", x.fs, u.idempotents, x.bs)
    L = op_norm(OperatorMatrix.on(u.space, M), cfg.op_config)
    esc = 0
    c = cfg
    while True:
        un = rep_norm(u, c.op_config)
        rn = r_tensor_norm(x, u.space, c)
        viol = L.value > un.value**2 * rn.value * (1 + slack)
        if not viol or esc >= max_escalations:
            break
        esc += 1
        c = c.scaled(2.0)
        c.seed = cfg.seed + esc
    return ExtensionReport(
        L.value, un.value, rn.value, slack, esc, viol, L.kind,
        {"f": un.witness, "lhs_x": L.witness, "r_vectors": rn.vectors, "r_assignment": rn.assignment},
    )


@dataclass
class DotReport:
    value: float
    u_norm: float
    r_v: float
    f_sup: float
    violation: bool

    @property
    def bound(self):
        return self.u_norm**2 * self.r_v * self.f_sup


def dot_extension(u, V, Z, F, cfg=None, slack=1e-6):
    """``(u . v)(F) = sum_l p_l v(F(t_l))`` with its bound report.

    ``V`` (shape (dim Z, n, n)) defines ``v(z) = sum_i z_i V[i]``; ``F`` has
    shape (N, dim Z). The report checks
    ``||(u . v)(F)|| <= ||u||^2 R(v) ||F||_inf``.
    """
    cfg = cfg or RBoundConfig()
    u.validate()
    V = np.asarray(V, dtype=complex)
    if V.ndim == 2:
        V = V[None]
    F = np.asarray(F, dtype=complex).reshape(u.N, Z.dim)
    check_commutant(u, V)
    vals = np.einsum("li,iab->lab", F, V)
    out = np.einsum("lab,lbc->ac", u.idempotents, vals)
    op = OperatorMatrix.on(u.space, out)
    nrm = op_norm(op, cfg.op_config).value
    un = rep_norm(u, cfg.op_config).value
    rv = r_bound_of_map(V, Z, u.space, cfg).value
    fs = float(np.max(Z.norm(F)))
    return op, DotReport(nrm, un, rv, fs, nrm > un**2 * rv * fs * (1 + slack))


def product_rep(u, v, tol=COMMUTE_TOL):
    """Representation of ``K1 x K2`` with idempotents ``q_lm = p_l q_m``."""
    if u.space != v.space:
        raise ValueError("representations act on different spaces")
    for i, p in enumerate(u.idempotents):
        for j, q in enumerate(v.idempotents):
            r = commutation_residual(p, q)
            if r > tol:
                raise CommutationError(f"p_{i} and q_{j} do not commute: residual {r:.3e}", (i, j), r)
    Q = np.einsum("lab,mbc->lmac", u.idempotents, v.idempotents).reshape(-1, u.dim, u.dim)
    pts = tuple((a, b) for a in u.points for b in v.points)
    return FiniteRepresentation(u.space, Q, pts, u.unital and v.unital)


def tensor_function(f, g):
    """``f (x) g`` on ``K1 x K2`` in the point order used by ``product_rep``."""
    return np.outer(np.asarray(f, dtype=complex).ravel(), np.asarray(g, dtype=complex).ravel()).ravel()


# ---------------------------------------------------------------------------
# generators


def coordinate_projections(space, blocks):
    """Orthogonal (coordinate) projections onto consecutive blocks of sizes ``blocks``."""
    n = space.dim
    if sum(blocks) != n:
        raise ValueError("block sizes must sum to the dimension")
    P = np.zeros((len(blocks), n, n), dtype=complex)
    i = 0
    for l, b in enumerate(blocks):
        P[l, i:i + b, i:i + b] = np.eye(b)
        i += b
    return FiniteRepresentation(space, P)


def similar_system(space, blocks, S):
    """Idempotents ``S E_l S^{-1}`` for block coordinate projections ``E_l``."""
    E = coordinate_projections(space, blocks).idempotents
    Si = np.linalg.inv(S)
    return FiniteRepresentation(space, np.einsum("ab,lbc,cd->lad", S, E, Si))


def skew_pair(t, space=None):
    """``p_1 = [[1, t], [0, 0]]``, ``p_2 = [[0, -t], [0, 1]]`` on a 2-dimensional space."""
    space = space or lp(2, 2)
    P = np.array([[[1, t], [0, 0]], [[0, -t], [0, 1]]], dtype=complex)
    return FiniteRepresentation(space, P)


def random_commutant(rng, blocks, S, count, scale=1.0):
    """``count`` operators ``S diag(B_1, ..., B_N) S^{-1}`` commuting with ``similar_system``."""
    n = sum(blocks)
    Si = np.linalg.inv(S)
    out = []
    for _ in range(count):
        D = np.zeros((n, n), dtype=complex)
        i = 0
        for b in blocks:
            D[i:i + b, i:i + b] = scale * (rng.standard_normal((b, b)) + 1j * rng.standard_normal((b, b)))
            i += b
        out.append(S @ D @ Si)
    return np.array(out)
