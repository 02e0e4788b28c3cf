"""Operator matrices under the Rademacher norm, and the constants built on it.

An ``n x n`` matrix ``[T_ij]`` of operators on ``X`` acts on ``Rad_n(X)`` by
``(x_j) -> (sum_j T_ij x_j)``; its ``R``-norm is the operator norm there. On a
Hilbert space ``Rad_n(H) = l^2_n(H)`` and the norm is a singular value.
"""
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from . import _ascent
from ._rng import complex_normal, rng_for
from .rademacher import RBoundConfig, RBoundEstimate, _ascend, _family_fun, _ratio, r_bound, r_bound_of_map
from .representation import FiniteRepresentation, rep_norm
from .spaces import (
    INF,
    NormEstimate,
    OperatorMatrix,
    SearchConfig,
    _ratio_fun,
    lp,
    op_norm,
    rad_space,
    sign_patterns,
)

EXACT_SIGNS = 7


@dataclass
class OperatorBlockMatrix:
    """``[T_ij]`` with ``blocks`` of shape (n, n, d, d) acting on one space."""

    space: object
    blocks: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.blocks, dtype=complex)
        if B.ndim != 4 or B.shape[0] != B.shape[1] or B.shape[2] != B.shape[3]:
            raise ValueError(f"blocks must have shape (n, n, d, d), got {B.shape}")
        if B.shape[2] != self.space.dim:
            raise ValueError(f"block size {B.shape[2]} does not match the space dimension {self.space.dim}")
        self.blocks = B

    @classmethod
    def from_operators(cls, rows):
        rows = [list(r) for r in rows]
        space = rows[0][0].domain
        for r in rows:
            if len(r) != len(rows):
                raise ValueError("the block matrix must be square")
            for T in r:
                if T.domain != space or T.codomain != space:
                    raise ValueError("all blocks must act on the same space")
        return cls(space, np.array([[T.entries for T in r] for r in rows]))

    @classmethod
    def diagonal(cls, ops):
        ops = list(ops)
        space = ops[0].domain
        n, d = len(ops), space.dim
        B = np.zeros((n, n, d, d), dtype=complex)
        for i, T in enumerate(ops):
            B[i, i] = T.entries
        return cls(space, B)

    @property
    def n(self):
        return self.blocks.shape[0]

    def flatten(self):
        """The matrix of the action on slot-major vectors of ``Rad_n(X)``."""
        n, d = self.n, self.space.dim
        return self.blocks.transpose(0, 2, 1, 3).reshape(n * d, n * d)

    def rad_space(self, max_signs=EXACT_SIGNS, seed=0):
        return rad_space(self.space, self.n, max_signs=max_signs, seed=seed)

    def as_operator(self, max_signs=EXACT_SIGNS, seed=0):
        R = self.rad_space(max_signs, seed)
        return OperatorMatrix.on(R, self.flatten())

    def __call__(self, x):
        return self.flatten() @ np.asarray(x)


def mat_r_norm(M, cfg=None):
    """``||[T_ij]||_R`` as the operator norm on ``Rad_n(X)``.

    Exact (weighted SVD of the flattened matrix) when ``X`` is Hilbert.
    Otherwise a lower bound from ascent seeded with the top singular vector
    and with each block's norming vector placed in its column slot, so the
    value is never below the largest block norm.
    """
    cfg = cfg or SearchConfig()
    T = M.as_operator(seed=cfg.seed)
    R = T.domain
    if R.hilbert_weights is not None:
        return op_norm(T)
    n, d = M.n, M.space.dim
    A = T.entries
    seeds = []
    for j in range(n):
        for i in range(n):
            B = M.blocks[i, j]
            if not np.any(B):
                continue
            w = op_norm(OperatorMatrix.on(M.space, B), SearchConfig(4, 100, cfg.seed)).witness
            x = np.zeros(n * d, dtype=complex)
            x[j * d:(j + 1) * d] = w
            seeds.append(x)
    _, _, Vh = np.linalg.svd(A)
    seeds.append(Vh[0].conj())
    rng = rng_for(cfg.seed, "mat_r_norm", n, d)
    X0 = complex_normal(rng, (max(cfg.restarts, len(seeds)), n * d))
    X0[:len(seeds)] = seeds
    Xb, vals, its = _ascent.maximize(_ratio_fun(A, R, R), X0, cfg.iterations)
    k = int(np.argmax(vals))
    x = Xb[k]
    value = float(R.norm(A @ x) / R.norm(x))
    return NormEstimate(value, "lower_bound", x, its, {"path": "ascent", "exact_signs": R.exact})


def sigma_apply(a, X):
    """``[a_ij I_X]`` for a scalar matrix ``a``."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("a must be a square matrix")
    return OperatorBlockMatrix(X, a[:, :, None, None] * np.eye(X.dim)[None, None])


# ---------------------------------------------------------------------------
# property (alpha) at fixed size


@dataclass
class AlphaEstimate:
    """Lower bound for the best constant at size ``n``; ``t`` is (n, n), ``x`` is (n, n, d)."""

    n: int
    value: float
    t: np.ndarray
    x: np.ndarray
    space: object
    kind: str = "lower_bound"

    def witness_ratio(self):
        return alpha_ratio(self.space, self.t, self.x)

    def __float__(self):
        return float(self.value)


def _double_signs(n):
    S = sign_patterns(n)
    return np.einsum("ai,bj->abij", S, S).reshape(S.shape[0] ** 2, n * n)


def alpha_ratio(X, t, x):
    """``||sum t_ij e_i e'_j x_ij|| / ||sum e_i e'_j x_ij||`` in ``Rad(Rad(X))``."""
    t = np.asarray(t, dtype=complex)
    n = t.shape[0]
    Ts = t.reshape(-1)[:, None, None] * np.eye(X.dim)[None]
    return _ratio(X, Ts, np.asarray(x).reshape(n * n, X.dim), _double_signs(n))


def _torus(F):
    a = np.abs(F)
    return np.where(a > 0, F / np.where(a > 0, a, 1.0), 1.0)


def _t_fun(X, x, P):
    W = P[:, :, None] * x[None]  # (K, n^2, d)

    def fun(Tb):
        Y = np.einsum("kja,rj->rka", W, Tb)
        nn = np.mean(X.norm(Y) ** 2, axis=-1)
        G = X.norm_sq_grad(Y)
        g = np.einsum("kja,rka->rj", W.conj(), G) / P.shape[0]
        with np.errstate(divide="ignore", invalid="ignore"):
            val = 0.5 * np.log(nn)
            g = g / (2 * nn[:, None])
        return np.where(np.isfinite(val), val, -np.inf), np.where(np.isfinite(g), g, 0.0)

    return fun


def alpha_constant(X, n, cfg=None, real=False, rounds=4):
    """Lower bound of the smallest constant in the property (alpha) inequality at size ``n``.

    Alternates vector ascent (fixed ``t``) with ascent over unimodular ``t``
    (fixed vectors); with ``real=True`` the multipliers are restricted to
    signs and updated by greedy single flips. ``t = 1`` is always one of the
    starts, so the value is at least 1.
    """
    cfg = cfg or SearchConfig(restarts=8, iterations=200)
    if n > EXACT_SIGNS:
        raise ValueError(f"n = {n} exceeds the exact double-sign enumeration limit {EXACT_SIGNS}")
    d, k = X.dim, n * n
    P = _double_signs(n)
    eye = np.eye(d)
    rng = rng_for(cfg.seed, "alpha", n, d, int(real))
    starts = [np.ones(k, dtype=complex)]
    for _ in range(max(0, cfg.restarts // 4)):
        if real:
            starts.append(rng.choice(np.array([-1.0, 1.0]), size=k).astype(complex))
        else:
            starts.append(np.exp(2j * np.pi * rng.random(k)))
    best = AlphaEstimate(n, -1.0, None, None, X)
    for t in starts:
        x, val = None, -1.0
        for _ in range(rounds):
            Ts = t[:, None, None] * eye[None]
            X0 = complex_normal(rng, (cfg.restarts, k, d))
            if x is not None:
                X0[0] = x
            x, val = _ascend(X, Ts, P, X0, cfg.iterations)
            if real:
                t_new, v_new = t, val
                for j in range(k):
                    trial = t_new.copy()
                    trial[j] = -trial[j]
                    v = _ratio(X, trial[:, None, None] * eye[None], x, P)
                    if v > v_new * (1 + 1e-12):
                        t_new, v_new = trial, v
            else:
                T0 = np.exp(2j * np.pi * rng.random((cfg.restarts, k)))
                T0[0] = t
                Tb, tv, _ = _ascent.maximize(_t_fun(X, x, P), T0, cfg.iterations, project=_torus)
                t_new = _torus(Tb[int(np.argmax(tv))])
                v_new = _ratio(X, t_new[:, None, None] * eye[None], x, P)
            if v_new <= val * (1 + 1e-9):
                break
            t, val = t_new, v_new
        if val > best.value:
            best = AlphaEstimate(n, val, t.reshape(n, n).copy(), x.reshape(n, n, d).copy(), X)
    return best


# ---------------------------------------------------------------------------
# sigma_{n,X} and matricial constants of representations


def unit_ball_sample(n, rng, gaussian=8, rank_one=4, max_perms=24):
    """Scalar matrices of operator norm 1: normalized Gaussians, permutations,
    diagonal signs and rank-one extremes."""
    out = []
    for _ in range(gaussian):
        g = complex_normal(rng, (n, n))
        out.append(g / np.linalg.norm(g, 2))
    perms = list(permutations(range(n)))
    if len(perms) > max_perms:
        perms = [perms[i] for i in rng.choice(len(perms), max_perms, replace=False)]
    for p in perms:
        out.append(np.eye(n)[list(p)].astype(complex))
    out.extend(diagonal_sign_matrices(n))
    for _ in range(rank_one):
        u, v = complex_normal(rng, n), complex_normal(rng, n)
        out.append(np.outer(u / np.linalg.norm(u), v.conj() / np.linalg.norm(v)))
    return out


def diagonal_sign_matrices(n):
    return [np.diag(s).astype(complex) for s in sign_patterns(n, half=False)]


def sigma_r_bound(X, n, cfg=None, family="mixed", matrices=None):
    """Lower bound of ``R({sigma_{n,X}(a) : ||a|| <= 1})`` over a sample of the unit ball.

    ``family="diagonal_signs"`` keeps only the diagonal sign matrices.
    """
    cfg = cfg or RBoundConfig(sizes=(1, 2, 4))
    if matrices is None:
        if family == "diagonal_signs":
            matrices = diagonal_sign_matrices(n)
        elif family == "mixed":
            matrices = unit_ball_sample(n, rng_for(cfg.seed, "sigma_sample", n))
        else:
            raise ValueError(f"unknown family {family!r}")
    ops = [sigma_apply(a, X).as_operator(seed=cfg.seed) for a in matrices]
    est = r_bound(ops, cfg)
    est.info = {"family": family, "count": len(ops)}
    return est


@dataclass
class MatricialReport:
    n: int
    value: float
    witness: np.ndarray
    rep_norm: float
    sigma_r: float = None
    alpha: float = None
    ratios: list = field(default_factory=list)
    kind: str = "lower_bound"

    @property
    def budget(self):
        """Reference bound ``R(sigma_{n,X}) ||u||^2`` (both factors are estimates)."""
        if self.sigma_r is None:
            return None
        return self.sigma_r * self.rep_norm ** 2

    def __float__(self):
        return float(self.value)


def _function_sample(N, n, rng, count):
    out = []
    for _ in range(count):
        a = complex_normal(rng, (n, n))
        out.append(np.repeat((a / np.linalg.norm(a, 2))[None], N, axis=0))
        F = complex_normal(rng, (N, n, n))
        out.append(F / np.max(np.linalg.norm(F, 2, axis=(1, 2))))
        D = np.exp(2j * np.pi * rng.random((N, n)))
        out.append(np.einsum("li,ij->lij", D, np.eye(n)))
        perm = np.eye(n)[rng.permutation(n)]
        ph = np.exp(2j * np.pi * rng.random(N))
        out.append(ph[:, None, None] * perm[None])
    return out


def matricial_constant(u, n, cfg=None, samples=4, with_budget=False):
    """Lower bound of the best ``C`` with ``||[u(f_ij)]||_R <= C ||[f_ij]||`` at size ``n``.

    ``||[f_ij]|| = max_l ||[f_ij(t_l)]||_{M_n}``. The sample always contains
    ``diag(f, 0, ..., 0)`` for the norming function ``f`` of ``u``, so the
    result is never below the size-1 value.
    """
    cfg = cfg or SearchConfig(restarts=8, iterations=200)
    rn = rep_norm(u, cfg)
    N = u.N
    rng = rng_for(cfg.seed, "matricial", n, N)
    F0 = np.zeros((N, n, n), dtype=complex)
    F0[:, 0, 0] = rn.witness / np.max(np.abs(rn.witness))
    Fs = [F0] + _function_sample(N, n, rng, samples)
    best, wit, ratios = -1.0, None, []
    for F in Fs:
        blocks = np.einsum("lij,lab->ijab", F, u.idempotents)
        v = mat_r_norm(OperatorBlockMatrix(u.space, blocks), cfg).value
        r = v / float(np.max(np.linalg.norm(F, 2, axis=(1, 2))))
        ratios.append(r)
        if r > best:
            best, wit = r, F
    rep = MatricialReport(n, best, wit, rn.value, ratios=ratios)
    if with_budget:
        rep.sigma_r = sigma_r_bound(u.space, n, RBoundConfig(sizes=(1, 2), restarts=4, iterations=100, seed=cfg.seed)).value
        rep.alpha = alpha_constant(u.space, n, SearchConfig(4, 100, cfg.seed)).value
    return rep


@dataclass
class CounterexampleReport:
    rep: FiniteRepresentation
    m: int
    u_norm: float
    r_hat: RBoundEstimate
    alpha: float

    @property
    def r_value(self):
        return self.r_hat.value


def counterexample_rep(X, m, cfg=None, alpha=True):
    """Diagonal multiplier representation on ``Rad_m(X)``: ``u(f)(x_k) = (f(k) x_k)``.

    ``||u|| <= 2`` by the contraction principle; the report gives ``R^(u)``
    next to the size-``m`` alpha constant of ``X``.
    """
    cfg = cfg or RBoundConfig(sizes=(1, 2, 4), restarts=6, iterations=150)
    R = rad_space(X, m, max_signs=EXACT_SIGNS, seed=cfg.seed)
    d = X.dim
    P = np.zeros((m, m * d, m * d), dtype=complex)
    for l in range(m):
        P[l, l * d:(l + 1) * d, l * d:(l + 1) * d] = np.eye(d)
    u = FiniteRepresentation(R, P)
    scfg = SearchConfig(4, 100, cfg.seed)
    un = rep_norm(u, scfg).value
    if un > 2 * (1 + 1e-9):
        raise AssertionError(f"multiplier norm {un} exceeds the contraction bound 2")
    est = r_bound_of_map(P, lp(m, INF), R, cfg)
    a = alpha_constant(X, m, scfg).value if alpha and m <= EXACT_SIGNS else None
    return CounterexampleReport(u, m, un, est, a)
