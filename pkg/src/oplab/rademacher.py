"""Rademacher and Gaussian averages, and lower-bound estimation of R-bounds.

The R-bound of a set of operators ``tau`` is the best constant ``C`` in

    (E ||sum_k eps_k T_k x_k||^2)^(1/2) <= C (E ||sum_k eps_k x_k||^2)^(1/2)

over all finite families with ``T_k`` in ``tau``. No finite procedure certifies
an upper bound outside Hilbert space, so every estimator here returns a
witness family whose exact ratio is the reported value.
"""
from dataclasses import dataclass, field

import numpy as np

from . import _ascent
from ._rng import complex_normal, rng_for
from .spaces import OperatorMatrix, SearchConfig, op_norm, sign_patterns


class EnumerationLimitError(ValueError):
    pass


@dataclass
class RadFamily:
    """The element ``sum_k eps_k (x) x_k`` of Rad(X); ``members`` has shape (k, n)."""

    base: object
    members: np.ndarray

    def __post_init__(self):
        self.members = np.atleast_2d(np.asarray(self.members, dtype=complex))
        if self.members.shape[0] < 1:
            raise ValueError("a Rademacher family needs at least one member")
        self.base.check(self.members, what="family member")

    def __len__(self):
        return self.members.shape[0]


@dataclass
class AverageConfig:
    mode: str = "auto"
    exact_max_signs: int = 14
    samples: int = 20000
    seed: int = 0
    gaussian_samples: int = 20000

    def use_exact(self, k):
        if self.mode == "exact":
            if k > self.exact_max_signs:
                raise EnumerationLimitError(
                    f"exact averaging over {k} signs exceeds exact_max_signs={self.exact_max_signs}; "
                    "use mode='monte_carlo' or mode='auto'"
                )
            return True
        if self.mode == "monte_carlo":
            return False
        if self.mode == "auto":
            return k <= self.exact_max_signs
        raise ValueError(f"unknown averaging mode {self.mode!r}")


@dataclass
class Average:
    """An L^2 average with its standard error (0 for exact enumeration)."""

    value: float
    stderr: float = 0.0
    mode: str = "exact"
    seed: int = None

    def __float__(self):
        return float(self.value)


def _sqrt_mean(sq):
    m = float(np.mean(sq))
    value = np.sqrt(m)
    if len(sq) < 2 or value == 0:
        return value, 0.0
    se_m = float(np.std(sq, ddof=1)) / np.sqrt(len(sq))
    return value, se_m / (2 * value)


def rad_norm(fam, cfg=None):
    """``(E ||sum_k eps_k x_k||^2)^(1/2)`` by exact enumeration or Monte Carlo."""
    cfg = cfg or AverageConfig()
    X = fam.members
    k = X.shape[0]
    if cfg.use_exact(k):
        S = sign_patterns(k)
        return Average(float(np.sqrt(np.mean(fam.base.norm(S @ X) ** 2))), 0.0, "exact")
    rng = rng_for(cfg.seed, "rad_norm", k, X.shape[1])
    S = rng.choice(np.array([-1.0, 1.0]), size=(cfg.samples, k))
    value, se = _sqrt_mean(fam.base.norm(S @ X) ** 2)
    return Average(value, se, "monte_carlo", cfg.seed)


def gauss_norm(fam, cfg=None):
    """Monte Carlo ``(E ||sum_k g_k x_k||^2)^(1/2)`` with standard complex Gaussians."""
    cfg = cfg or AverageConfig()
    X = fam.members
    rng = rng_for(cfg.seed, "gauss_norm", X.shape[0], X.shape[1])
    G = complex_normal(rng, (cfg.gaussian_samples, X.shape[0]))
    value, se = _sqrt_mean(fam.base.norm(G @ X) ** 2)
    return Average(value, se, "monte_carlo", cfg.seed)


def rad_norms_batch(space, X, S=None):
    """Exact Rademacher averages of a batch of families ``X`` of shape (..., k, n)."""
    S = sign_patterns(X.shape[-2]) if S is None else S
    Y = np.einsum("sj,...jn->...sn", S, X)
    return np.sqrt(np.mean(space.norm(Y) ** 2, axis=-1))


# --------------------------------------------------------------------------
# R-bound engine


@dataclass
class RBoundConfig:
    sizes: tuple = (1, 2, 4, 8)
    restarts: int = 10
    iterations: int = 200
    rounds: int = 3
    seed: int = 0
    exact_max_signs: int = 14
    mc_signs: int = 4096
    op_config: SearchConfig = field(default_factory=lambda: SearchConfig(restarts=16, iterations=300))

    def scaled(self, factor):
        return RBoundConfig(
            self.sizes,
            max(1, int(self.restarts * factor)),
            max(1, int(self.iterations * factor)),
            self.rounds + (1 if factor > 1 else 0),
            self.seed,
            self.exact_max_signs,
            self.mc_signs,
            self.op_config.scaled(factor),
        )


@dataclass
class RBoundEstimate:
    """Lower bound of an R-bound with the family that attains it.

    ``ops`` has shape (m, n, n) (operator in each slot, repetitions allowed)
    and ``vectors`` shape (m, n); ``assignment`` indexes ``ops`` into the
    input set when the set was finite.
    """

    value: float
    ops: np.ndarray
    vectors: np.ndarray
    space: object
    assignment: tuple = None
    z: np.ndarray = None
    trace: list = field(default_factory=list)
    kind: str = "lower_bound"

    @property
    def family_size(self):
        return self.vectors.shape[0]

    def witness_ratio(self):
        m = self.vectors.shape[0]
        if m > 14:
            raise EnumerationLimitError("witness too long for exact re-verification")
        TX = np.einsum("jab,jb->ja", self.ops, self.vectors)
        num = rad_norms_batch(self.space, TX)
        den = rad_norms_batch(self.space, self.vectors)
        return float(num / den) if den > 0 else 0.0

    def __float__(self):
        return float(self.value)


def _signs(m, cfg, rng):
    if m <= cfg.exact_max_signs:
        return sign_patterns(m), True
    return rng.choice(np.array([-1.0, 1.0]), size=(cfg.mc_signs, m)), False


def _family_fun(space, Ts, S):
    """log of the Rademacher ratio for fixed slot operators ``Ts``, batched over restarts."""
    Tc = Ts.conj()
    ns = S.shape[0]

    def fun(X):
        TX = np.einsum("jab,rjb->rja", Ts, X)
        Yn = np.einsum("sj,rja->rsa", S, TX)
        Yd = np.einsum("sj,rja->rsa", S, X)
        nn = np.mean(space.norm(Yn) ** 2, axis=-1)
        nd = np.mean(space.norm(Yd) ** 2, axis=-1)
        Gn = np.einsum("sj,rsa->rja", S, space.norm_sq_grad(Yn)) / ns
        Gn = np.einsum("jba,rjb->rja", Tc, Gn)
        Gd = np.einsum("sj,rsa->rja", S, space.norm_sq_grad(Yd)) / ns
        with np.errstate(divide="ignore", invalid="ignore"):
            val = 0.5 * (np.log(nn) - np.log(nd))
            g = Gn / (2 * nn[:, None, None]) - Gd / (2 * nd[:, None, None])
        g = np.where(np.isfinite(g), g, 0.0)
        return np.where(np.isfinite(val), val, -np.inf), g

    return fun


def _ratio(space, Ts, x, S):
    TX = np.einsum("jab,jb->ja", Ts, x)
    num = np.sqrt(np.mean(space.norm(S @ TX) ** 2))
    den = np.sqrt(np.mean(space.norm(S @ x) ** 2))
    return float(num / den) if den > 0 else 0.0


def _ascend(space, Ts, S, X0, iterations):
    Xb, vals, _ = _ascent.maximize(_family_fun(space, Ts, S), X0, iterations)
    k = int(np.argmax(vals))
    return Xb[k], _ratio(space, Ts, Xb[k], S)


def _check_tau(tau):
    tau = list(tau)
    if not tau:
        raise ValueError("the operator set is empty")
    space = tau[0].domain
    for i, T in enumerate(tau):
        if T.domain != space or T.codomain != space:
            raise ValueError(f"operator {i} does not act on the common space {space}")
    return tau, space


def r_bound(tau, cfg=None):
    """Lower bound of ``R(tau)`` for a finite set of operators on one space.

    For each family size ``m`` in ``cfg.sizes`` the search alternates
    normalized-ratio ascent over the vectors with single-slot reassignments of
    operators (accepted on improvement). The ``m = 1`` stage is seeded with
    the op_norm witnesses, so the result is never below ``max ||T||`` as
    computed by ``op_norm``.
    """
    cfg = cfg or RBoundConfig()
    tau, space = _check_tau(tau)
    mats = np.stack([T.entries for T in tau])
    n = space.dim
    norms = [op_norm(T, SearchConfig(cfg.op_config.restarts, cfg.op_config.iterations, cfg.seed)) for T in tau]
    i0 = int(np.argmax([e.value for e in norms]))
    best = RBoundEstimate(
        norms[i0].value, mats[[i0]], np.asarray(norms[i0].witness)[None, :], space, (i0,),
        trace=[{"m": 1, "stage": "op_norm", "value": norms[i0].value, "running_max": norms[i0].value}],
    )
    order = np.argsort([-e.value for e in norms], kind="stable")
    for m in cfg.sizes:
        rng = rng_for(cfg.seed, "r_bound", m)
        S, exact = _signs(m, cfg, rng)
        assign = order[np.arange(m) % len(tau)]
        X0 = complex_normal(rng, (cfg.restarts, m, n))
        if m >= 1:
            X0[0] = 0.0
            X0[0, 0] = best.vectors[0]
            X0[0, 1:] = 1e-3 * complex_normal(rng, (m - 1, n))
        x, val = _ascend(space, mats[assign], S, X0, cfg.iterations)
        for rnd in range(cfg.rounds):
            improved = False
            for j in range(m):
                for t in range(len(tau)):
                    if t == assign[j]:
                        continue
                    trial = assign.copy()
                    trial[j] = t
                    v = _ratio(space, mats[trial], x, S)
                    if v > val * (1 + 1e-12):
                        assign, val, improved = trial, v, True
            if not improved:
                break
            X0 = complex_normal(rng, (cfg.restarts, m, n))
            X0[0] = x
            X0[1:] = x + 0.3 * np.linalg.norm(x) / np.sqrt(m * n) * X0[1:]
            x2, v2 = _ascend(space, mats[assign], S, X0, cfg.iterations)
            if v2 > val:
                x, val = x2, v2
        if val > best.value and exact:
            best = RBoundEstimate(val, mats[assign], x, space, tuple(int(a) for a in assign), trace=best.trace)
        best.trace.append({"m": m, "stage": "search", "value": val, "exact_signs": exact, "running_max": best.value})
    return best


def _unit_sphere_projector(Z):
    def project(Zb):
        nz = Z.norm(Zb)
        return Zb / np.where(nz > 0, nz, 1.0)[..., None]

    return project


def _z_seeds(Z, dz):
    seeds = [np.eye(dz, dtype=complex)[i] for i in range(dz)]
    if dz > 1:
        seeds.append(np.ones(dz, dtype=complex))
        seeds.extend(np.array(s, dtype=complex) for s in sign_patterns(dz)[1:])
    out = []
    for s in seeds:
        out.append(s / Z.norm(s))
    return out


def r_bound_of_map(V, Z, X, cfg=None):
    """Lower bound of ``R({v(z) : ||z||_Z <= 1})`` for ``v(z) = sum_i z_i V[i]``.

    ``V`` has shape (dim Z, n, n). Slot operators are parametrized by points
    ``z_j`` on the unit sphere of ``Z`` (the numerator is convex in each
    ``z_j``, so the supremum over the ball is reached there), and the search
    alternates vector ascent with projected ascent over the ``z_j``.
    """
    cfg = cfg or RBoundConfig()
    V = np.asarray(V, dtype=complex)
    if V.ndim == 2:
        V = V[None]
    dz, n = V.shape[0], V.shape[1]
    if V.shape[2] != n or n != X.dim or dz != Z.dim:
        raise ValueError("shape mismatch between the map, Z and X")
    seeds = _z_seeds(Z, dz)
    rng0 = rng_for(cfg.seed, "r_bound_of_map", "seeds")
    seeds += [z / Z.norm(z) for z in complex_normal(rng0, (max(4, cfg.restarts), dz))]
    opcfg = SearchConfig(cfg.op_config.restarts, cfg.op_config.iterations, cfg.seed)
    cand = [op_norm(OperatorMatrix.on(X, np.tensordot(z, V, 1)), opcfg) for z in seeds]
    i0 = int(np.argmax([c.value for c in cand]))
    z0 = seeds[i0]
    best = RBoundEstimate(
        cand[i0].value, np.tensordot(z0, V, 1)[None], np.asarray(cand[i0].witness)[None], X, z=z0[None],
        trace=[{"m": 1, "stage": "op_norm", "value": cand[i0].value, "running_max": cand[i0].value}],
    )
    project = _unit_sphere_projector(Z)
    for m in cfg.sizes:
        rng = rng_for(cfg.seed, "r_bound_of_map", m)
        S, exact = _signs(m, cfg, rng)
        zs = np.array([seeds[(i0 + j) % len(seeds)] for j in range(m)])
        Ts = np.einsum("ji,iab->jab", zs, V)
        X0 = complex_normal(rng, (cfg.restarts, m, n))
        X0[0, 0] = best.vectors[0]
        x, val = _ascend(X, Ts, S, X0, cfg.iterations)
        for rnd in range(cfg.rounds):
            W = np.einsum("iab,jb->jia", V, x)
            den = np.mean(X.norm(S @ x) ** 2)

            def zfun(Zb, W=W, den=den):
                TX = np.einsum("rji,jia->rja", Zb, W)
                Y = np.einsum("sj,rja->rsa", S, TX)
                nn = np.mean(X.norm(Y) ** 2, axis=-1)
                H = np.einsum("sj,rsa->rja", S, X.norm_sq_grad(Y)) / S.shape[0]
                g = np.einsum("jia,rja->rji", W.conj(), H)
                with np.errstate(divide="ignore", invalid="ignore"):
                    val_ = 0.5 * (np.log(nn) - np.log(den))
                    g = g / (2 * nn[:, None, None])
                return np.where(np.isfinite(val_), val_, -np.inf), np.where(np.isfinite(g), g, 0.0)

            Z0 = complex_normal(rng, (cfg.restarts, m, dz))
            Z0[0] = zs
            Zb, zv, _ = _ascent.maximize(zfun, Z0, cfg.iterations, project=project)
            k = int(np.argmax(zv))
            zs_new = project(Zb[k])
            Ts_new = np.einsum("ji,iab->jab", zs_new, V)
            X0 = complex_normal(rng, (cfg.restarts, m, n))
            X0[0] = x
            x2, v2 = _ascend(X, Ts_new, S, X0, cfg.iterations)
            if v2 <= val * (1 + 1e-9):
                if _ratio(X, Ts_new, x, S) > val:
                    zs, Ts, val = zs_new, Ts_new, _ratio(X, Ts_new, x, S)
                break
            zs, Ts, x, val = zs_new, Ts_new, x2, v2
        if val > best.value and exact:
            best = RBoundEstimate(val, Ts, x, X, z=zs, trace=best.trace)
        best.trace.append({"m": m, "stage": "search", "value": val, "exact_signs": exact, "running_max": best.value})
    return best
