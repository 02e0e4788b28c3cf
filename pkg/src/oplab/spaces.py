"""Finite-dimensional Banach spaces, operators between them, and their norms.

Vectors are plain complex numpy arrays; a space descriptor is passed alongside
whenever a norm is needed. All norm routines broadcast over leading axes, so a
batch of vectors of shape ``(..., n)`` is handled in one call.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
import math

import numpy as np

from . import _ascent
from ._rng import complex_normal, rng_for

INF = math.inf


class DimensionError(ValueError):
    """Raised when an array does not match the dimension of its space."""

    def __init__(self, expected, got, what="vector"):
        super().__init__(f"{what} dimension mismatch: space has dimension {expected}, got {got}")
        self.expected = expected
        self.got = got


def _as_exponent(p):
    if p == INF or (isinstance(p, float) and math.isinf(p)):
        return INF
    q = Fraction(p).limit_denominator(10**6) if isinstance(p, float) else Fraction(p)
    if q < 1:
        raise ValueError(f"exponent must lie in [1, inf], got {p}")
    return q


def conjugate_exponent(p):
    p = _as_exponent(p)
    if p == INF:
        return Fraction(1)
    if p == 1:
        return INF
    return p / (p - 1)


@lru_cache(maxsize=None)
def sign_patterns(k, half=True):
    """All sign vectors in {-1, 1}^k as rows, first sign fixed to +1 if ``half``.

    Norms are even, so fixing one sign halves the work of an exact average.
    """
    if k == 0:
        return np.ones((1, 0))
    bits = k - 1 if half else k
    idx = np.arange(2**bits)[:, None] >> np.arange(bits)[None, :]
    S = 1.0 - 2.0 * (idx & 1)
    if half:
        S = np.hstack([np.ones((S.shape[0], 1)), S])
    S.setflags(write=False)
    return S


@dataclass(frozen=True)
class SpaceDescriptor:
    """``lp(n, p)`` or ``weighted_atoms(n, p, mu)``.

    For finite ``p`` the norm is ``(sum_i mu_i |x_i|^p)^(1/p)``; for ``p = inf``
    it is ``max_i |x_i|`` (times ``sup_weights`` when present, which only
    arises as the dual of a weighted l^1 space).
    """

    n: int
    p: object
    mu: tuple = None
    sup_weights: tuple = None

    def __post_init__(self):
        if int(self.n) < 1:
            raise ValueError("dimension must be >= 1")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "p", _as_exponent(self.p))
        for name in ("mu", "sup_weights"):
            w = getattr(self, name)
            if w is not None:
                w = tuple(float(v) for v in np.ravel(w))
                if len(w) != self.n:
                    raise DimensionError(self.n, len(w), what=name)
                if min(w) <= 0:
                    raise ValueError(f"{name} must be strictly positive")
                object.__setattr__(self, name, w)

    @property
    def kind(self):
        return "lp" if self.mu is None and self.sup_weights is None else "weighted_atoms"

    @property
    def dim(self):
        return self.n

    @property
    def pf(self):
        return INF if self.p == INF else float(self.p)

    @property
    def weights(self):
        return np.ones(self.n) if self.mu is None else np.asarray(self.mu)

    @property
    def sweights(self):
        return np.ones(self.n) if self.sup_weights is None else np.asarray(self.sup_weights)

    @property
    def hilbert_weights(self):
        """Weights ``w`` with ``||x||^2 = sum w |x|^2`` when the space is Hilbert, else None."""
        if self.p == 2:
            return self.weights
        if self.n == 1:
            # every norm on a line is a multiple of |x|
            return self.norm(np.ones(1)) ** 2 * np.ones(1)
        return None

    def check(self, x, what="vector"):
        x = np.asarray(x)
        if x.shape[-1] != self.n:
            raise DimensionError(self.n, x.shape[-1], what=what)
        return x

    def norm(self, x):
        x = self.check(x)
        a = np.abs(x)
        if self.p == INF:
            return np.max(a * self.sweights, axis=-1)
        p = float(self.p)
        w = self.weights
        if p == 1:
            return np.sum(w * a, axis=-1)
        if p == 2:
            return np.sqrt(np.sum(w * a * a, axis=-1))
        m = np.max(a, axis=-1, keepdims=True)
        safe = np.where(m > 0, m, 1.0)
        return np.squeeze(safe, -1) * np.sum(w * (a / safe) ** p, axis=-1) ** (1.0 / p)

    def norm_sq_grad(self, x):
        """Gradient of ``||x||^2`` (a subgradient where the norm is not smooth)."""
        x = self.check(x)
        a = np.abs(x)
        phase = np.where(a > 0, x / np.where(a > 0, a, 1.0), 0.0)
        nrm = self.norm(x)[..., None]
        if self.p == INF:
            wa = a * self.sweights
            hit = wa == np.max(wa, axis=-1, keepdims=True)
            first = hit & (np.cumsum(hit, axis=-1) == 1)
            return 2.0 * nrm * first * self.sweights * phase
        p = float(self.p)
        w = self.weights
        if p == 2:
            return 2.0 * w * x
        if p == 1:
            return 2.0 * nrm * w * phase
        safe = np.where(nrm > 0, nrm, 1.0)
        return 2.0 * safe * w * (a / safe) ** (p - 1) * phase

    def dual(self):
        """Dual space for the pairing ``<x, y> = sum_i x_i conj(y_i)``."""
        q = conjugate_exponent(self.p)
        if self.p == INF:
            mu = None if self.sup_weights is None else tuple(1.0 / self.sweights)
            return SpaceDescriptor(self.n, 1, mu=mu)
        if self.p == 1:
            sw = None if self.mu is None else tuple(1.0 / self.weights)
            return SpaceDescriptor(self.n, INF, sup_weights=sw)
        mu = None if self.mu is None else tuple(self.weights ** (1.0 - float(q)))
        return SpaceDescriptor(self.n, q, mu=mu)


def lp(n, p):
    return SpaceDescriptor(n, p)


def weighted_atoms(n, p, mu):
    return SpaceDescriptor(n, p, mu=tuple(np.ravel(mu)))


@dataclass(frozen=True)
class RadSpace:
    """``Rad_m(X)``: m-tuples of X-vectors under the Rademacher average norm.

    Elements are flat arrays of length ``m * base.n`` (slot-major). The norm is
    ``(2^-m sum_s ||sum_j s_j x_j||^2)^(1/2)`` over all sign patterns when
    ``m <= max_signs``; beyond that a fixed seeded sample of ``mc_samples``
    patterns stands in for the full average (a Monte Carlo model).
    """

    base: object
    m: int
    max_signs: int = 14
    mc_samples: int = 4096
    seed: int = 0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")

    @property
    def kind(self):
        return "rad"

    @property
    def exact(self):
        return self.m <= self.max_signs

    @property
    def signs(self):
        if self.exact:
            return sign_patterns(self.m)
        return _mc_signs(self.m, self.mc_samples, self.seed)

    @property
    def dim(self):
        return self.m * self.base.dim

    @property
    def n(self):
        return self.dim

    @property
    def hilbert_weights(self):
        w = self.base.hilbert_weights
        return None if w is None else np.tile(w, self.m)

    def check(self, x, what="vector"):
        x = np.asarray(x)
        if x.shape[-1] != self.dim:
            raise DimensionError(self.dim, x.shape[-1], what=what)
        return x

    def slots(self, x):
        x = self.check(x)
        return x.reshape(x.shape[:-1] + (self.m, self.base.dim))

    def norm(self, x):
        X = self.slots(x)
        Y = np.einsum("sj,...jn->...sn", self.signs, X)
        return np.sqrt(np.mean(self.base.norm(Y) ** 2, axis=-1))

    def norm_sq_grad(self, x):
        X = self.slots(x)
        S = self.signs
        Y = np.einsum("sj,...jn->...sn", S, X)
        G = self.base.norm_sq_grad(Y)
        H = np.einsum("sj,...sn->...jn", S, G) / S.shape[0]
        return H.reshape(np.shape(x))

    def dual(self):
        raise NotImplementedError("the dual of Rad_m(X) is not a Rademacher space in general")


@lru_cache(maxsize=32)
def _mc_signs(m, samples, seed):
    S = rng_for(seed, "rad_space_signs", m, samples).choice(np.array([-1.0, 1.0]), size=(samples, m))
    S.setflags(write=False)
    return S


def rad_space(base, m, max_signs=14, mc_samples=4096, seed=0):
    return RadSpace(base, int(m), max_signs, mc_samples, seed)


def norm(space, x):
    """Norm of ``x`` (or of each row of a batch) in ``space``."""
    return space.norm(np.asarray(x))


@dataclass
class OperatorMatrix:
    """Dense complex matrix from ``domain`` to ``codomain``."""

    domain: object
    codomain: object
    entries: np.ndarray

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=complex)
        if self.entries.ndim != 2:
            raise ValueError("operator entries must be a 2-d array")
        r, c = self.entries.shape
        if c != self.domain.dim:
            raise DimensionError(self.domain.dim, c, what="operator domain")
        if r != self.codomain.dim:
            raise DimensionError(self.codomain.dim, r, what="operator codomain")

    @classmethod
    def on(cls, space, entries):
        return cls(space, space, entries)

    @classmethod
    def identity(cls, space):
        return cls(space, space, np.eye(space.dim))

    @property
    def shape(self):
        return self.entries.shape

    def __call__(self, x):
        return np.asarray(x) @ self.entries.T

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            return OperatorMatrix(other.domain, self.codomain, self.entries @ other.entries)
        return self.entries @ np.asarray(other)


@dataclass
class NormEstimate:
    value: float
    kind: str = "exact"
    witness: object = None
    iterations: int = 0
    info: dict = field(default_factory=dict)

    def __float__(self):
        return float(self.value)


@dataclass
class SearchConfig:
    """Settings for ascent-based lower bounds."""

    restarts: int = 32
    iterations: int = 500
    seed: int = 0

    def scaled(self, factor):
        return SearchConfig(max(1, int(self.restarts * factor)), max(1, int(self.iterations * factor)), self.seed)


def adjoint(T):
    """Conjugate transpose acting between the dual spaces."""
    return OperatorMatrix(T.codomain.dual(), T.domain.dual(), T.entries.conj().T)


def pairing(x, y):
    return np.sum(np.asarray(x) * np.conj(np.asarray(y)), axis=-1)


def _ratio_fun(A, X, Y):
    AH = A.conj().T

    def fun(V):
        W = V @ A.T
        nw = Y.norm(W) ** 2
        nv = X.norm(V) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            val = 0.5 * (np.log(nw) - np.log(nv))
            g = (Y.norm_sq_grad(W) @ AH.T) / (2 * nw[:, None]) - X.norm_sq_grad(V) / (2 * nv[:, None])
        g = np.where(np.isfinite(g), g, 0.0)
        return np.where(np.isfinite(val), val, -np.inf), g

    return fun


def _exact_op_norm(T):
    A = T.entries
    X, Y = T.domain, T.codomain
    wx, wy = X.hilbert_weights, Y.hilbert_weights
    if wx is not None and wy is not None:
        B = np.sqrt(wy)[:, None] * A / np.sqrt(wx)[None, :]
        U, s, Vh = np.linalg.svd(B)
        x = Vh[0].conj() / np.sqrt(wx)
        return NormEstimate(float(s[0]), "exact", x, 0, {"path": "svd"})
    if isinstance(X, SpaceDescriptor) and X.p == 1:
        cols = Y.norm(A.T) / X.weights
        j = int(np.argmax(cols))
        x = np.zeros(X.n, dtype=complex)
        x[j] = 1.0 / X.weights[j]
        return NormEstimate(float(cols[j]), "exact", x, 0, {"path": "l1-columns"})
    if isinstance(X, SpaceDescriptor) and isinstance(Y, SpaceDescriptor) and X.p == INF and Y.p == INF:
        rows = Y.sweights * (np.abs(A) @ (1.0 / X.sweights))
        i = int(np.argmax(rows))
        a = A[i]
        ph = np.where(np.abs(a) > 0, np.conj(a) / np.where(np.abs(a) > 0, np.abs(a), 1), 1.0)
        return NormEstimate(float(rows[i]), "exact", ph / X.sweights, 0, {"path": "linf-rows"})
    return None


def op_norm(T, config=None, exact=True):
    """Operator norm of ``T``: exact where a closed form exists, else a certified lower bound.

    Exact paths: both spaces Hilbert (weighted SVD), domain l^1 (extreme
    points are the scaled unit vectors), l^inf -> l^inf (weighted row sums).
    Otherwise normalized-gradient ascent with random restarts; the returned
    witness ``x`` satisfies ``||Tx|| / ||x|| == value``.
    """
    if exact:
        est = _exact_op_norm(T)
        if est is not None:
            return est
    cfg = config or SearchConfig()
    A = T.entries
    n = T.domain.dim
    rng = rng_for(cfg.seed, "op_norm", n, A.shape[0])
    X0 = complex_normal(rng, (cfg.restarts, n))
    _, _, Vh = np.linalg.svd(A)
    X0[0] = Vh[0].conj()
    fun = _ratio_fun(A, T.domain, T.codomain)
    Xb, vals, its = _ascent.maximize(fun, X0, cfg.iterations)
    k = int(np.argmax(vals))
    x = Xb[k]
    value = float(T.codomain.norm(A @ x) / T.domain.norm(x))
    return NormEstimate(value, "lower_bound", x, its, {"path": "ascent", "restarts": cfg.restarts})
