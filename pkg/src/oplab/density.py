"""Change of density on finite atom spaces and the transfer of bases to L^2.

For a density ``g`` (``sum g_i mu_i = 1``) the map ``h -> g^{-1/p} h`` is an
isometry from ``L^p(mu)`` onto ``L^p(g mu)``. An operator ``T`` conjugated
by it and read on ``L^2(g mu)`` has norm ``||D_a T D_a^{-1}||_2`` with
``a = mu^{1/p} q^{1/2 - 1/p}`` and ``q = g mu``, which is what the density
search minimizes.
"""
from dataclasses import dataclass, field

import numpy as np

from . import _ascent
from ._rng import complex_normal, rng_for
from .rademacher import RBoundConfig, r_bound
from .spaces import INF, _as_exponent, NormEstimate, OperatorMatrix, SearchConfig, conjugate_exponent, op_norm, sign_patterns, weighted_atoms

G_FLOOR = 1e-9


class SingularBasisError(ValueError):
    def __init__(self, cond):
        super().__init__(f"basis matrix is singular or ill-conditioned (condition number {cond:.3e})")
        self.cond = cond


@dataclass(frozen=True)
class AtomSpace:
    mu: tuple

    def __post_init__(self):
        mu = tuple(float(v) for v in np.ravel(self.mu))
        if not mu or min(mu) <= 0:
            raise ValueError("atom weights must be strictly positive")
        object.__setattr__(self, "mu", mu)

    @classmethod
    def uniform(cls, m):
        return cls((1.0,) * m)

    @property
    def m(self):
        return len(self.mu)

    @property
    def weights(self):
        return np.asarray(self.mu)

    def lp(self, p):
        return weighted_atoms(self.m, p, self.mu)


def _atoms_of(space):
    if getattr(space, "sup_weights", None) is not None:
        raise ValueError("sup-weighted spaces are not L^p spaces")
    return AtomSpace(tuple(space.weights))


@dataclass
class Density:
    g: np.ndarray
    atoms: AtomSpace
    g_floor: float = G_FLOOR

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float).ravel()
        if g.size != self.atoms.m:
            raise ValueError(f"density has {g.size} values but there are {self.atoms.m} atoms")
        if np.min(g) < self.g_floor * (1 - 1e-12):
            raise ValueError(f"density value {np.min(g):.3e} below the floor {self.g_floor:g}")
        total = float(g @ self.atoms.weights)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"density integrates to {total!r}, not 1")
        self.g = g

    @classmethod
    def uniform(cls, atoms):
        return cls(np.full(atoms.m, 1.0 / sum(atoms.mu)), atoms)

    @classmethod
    def from_masses(cls, q, atoms, g_floor=G_FLOOR):
        """Density with ``g_i mu_i`` proportional to ``q_i``, clipped at the floor."""
        mu = atoms.weights
        q = np.asarray(q, dtype=float)
        g = np.maximum(q / q.sum() / mu, g_floor)
        for _ in range(3):
            g = np.maximum(g / (g @ mu), g_floor)
        g = g / (g @ mu)
        return cls(g, atoms, g_floor)

    @property
    def masses(self):
        return self.g * self.atoms.weights

    def space(self, p):
        return weighted_atoms(self.atoms.m, p, self.masses)


def _finite_p(p):
    # same rational exponent as the space descriptors, so phi and the norms agree exactly
    q = _as_exponent(p)
    if q == INF:
        raise ValueError("the change of density is defined for 1 <= p < inf only")
    return float(q)


def phi(p, g, h):
    """``g^{-1/p} h``: isometric from ``L^p(mu)`` onto ``L^p(g mu)``."""
    p = _finite_p(p)
    return np.asarray(h) * g.g ** (-1.0 / p)


def phi_inverse(p, g, h):
    p = _finite_p(p)
    return np.asarray(h) * g.g ** (1.0 / p)


def conjugation_weights(p, g):
    p = _finite_p(p)
    mu = g.atoms.weights
    return np.sqrt(g.g * mu) * g.g ** (-1.0 / p)


def conjugated_l2_norm(T, g):
    """Norm on ``L^2(g mu)`` of ``T`` transported by ``phi_{p,g}`` (p from ``T``'s domain)."""
    a = conjugation_weights(T.domain.pf, g)
    return float(np.linalg.norm(a[:, None] * T.entries / a[None, :], 2))


# ---------------------------------------------------------------------------
# density search


def _family(family):
    family = list(family)
    if not family:
        raise ValueError("the operator family is empty")
    space = family[0].domain
    for i, T in enumerate(family):
        if T.domain != space or T.codomain != space:
            raise ValueError(f"operator {i} does not act on the common space {space}")
    p = _finite_p(space.pf)
    return np.stack([T.entries for T in family]), space, p


def _objective(mats, mu, p, logq):
    """Top singular values (R, K) and their gradients in log q (R, K, m)."""
    q = np.exp(logq)
    a = mu ** (1.0 / p) * q ** (0.5 - 1.0 / p)
    M = a[:, None, :, None] * mats[None] / a[:, None, None, :]
    U, s, Vh = np.linalg.svd(M)
    u, v = U[..., :, 0], Vh[..., 0, :]
    grad = (0.5 - 1.0 / p) * s[..., :1] * (np.abs(u) ** 2 - np.abs(v) ** 2)
    return s[..., 0], grad


def _project_logq(logq, floor_q):
    q = np.exp(logq - logq.max(axis=-1, keepdims=True))
    q = q / q.sum(axis=-1, keepdims=True)
    q = np.maximum(q, floor_q)
    return np.log(q / q.sum(axis=-1, keepdims=True))


@dataclass
class DensityConfig:
    restarts: int = 8
    iterations: int = 300
    step: float = 0.5
    temperature: tuple = (0.1, 1e-4)
    seed: int = 0
    g_floor: float = G_FLOOR
    grid: int = 400


@dataclass
class DensityResult:
    density: Density
    achieved: float
    trace: list
    oracle: float = None
    certified: bool = True

    def __iter__(self):
        return iter((self.density, self.achieved, self.trace))


def density_search(family, cfg=None, oracle=None):
    """Density minimizing the largest conjugated L^2 norm over ``family``.

    Exponentiated-gradient descent on the masses ``q = g mu`` against a
    softmax-smoothed maximum whose temperature is annealed geometrically;
    several restarts from the uniform and random masses. The trace records
    the best true maximum over all restarts after each iteration. For
    ``m <= 3`` atoms a grid search is run as well (``oracle=False`` skips
    it) and the result is marked certified when the two agree within 5%.
    """
    cfg = cfg or DensityConfig()
    mats, space, p = _family(family)
    atoms = _atoms_of(space)
    mu, m = atoms.weights, atoms.m
    floor_q = cfg.g_floor * mu.min() / mu.sum()
    rng = rng_for(cfg.seed, "density_search", m, mats.shape[0])
    L = np.empty((cfg.restarts, m))
    L[0] = np.log(mu / mu.sum())
    if cfg.restarts > 1:
        L[1:] = np.log(rng.dirichlet(np.ones(m), size=cfg.restarts - 1))
    L = _project_logq(L, floor_q)
    s, _ = _objective(mats, mu, p, L)
    best_vals = s.max(axis=1)
    best_L = L.copy()
    trace = [{"iteration": 0, "objective": float(best_vals.min())}]
    if p != 2:
        t0, t1 = cfg.temperature
        scale = float(best_vals.max()) or 1.0
        for it in range(1, cfg.iterations + 1):
            tau = scale * t0 * (t1 / t0) ** (it / cfg.iterations)
            s, grad = _objective(mats, mu, p, L)
            w = np.exp((s - s.max(axis=1, keepdims=True)) / tau)
            w /= w.sum(axis=1, keepdims=True)
            G = np.einsum("rk,rkm->rm", w, grad)
            G -= G.mean(axis=1, keepdims=True)
            nrm = np.max(np.abs(G), axis=1, keepdims=True)
            step = cfg.step * (1.0 - 0.9 * it / cfg.iterations)
            L = _project_logq(L - step * G / np.where(nrm > 0, nrm, 1.0), floor_q)
            vals = _objective(mats, mu, p, L)[0].max(axis=1)
            better = vals < best_vals
            best_vals = np.where(better, vals, best_vals)
            best_L[better] = L[better]
            trace.append({"iteration": it, "objective": float(best_vals.min())})
    k = int(np.argmin(best_vals))
    g = Density.from_masses(np.exp(best_L[k]), atoms, cfg.g_floor)
    achieved = max(conjugated_l2_norm(OperatorMatrix.on(space, A), g) for A in mats)
    res = DensityResult(g, achieved, trace)
    if (oracle is None and m <= 3) or oracle:
        res.oracle = grid_oracle(family, cfg.grid, cfg.g_floor)[1]
        res.certified = achieved <= res.oracle * 1.05
    return res


def grid_oracle(family, resolution=400, g_floor=G_FLOOR):
    """Brute-force minimum of the largest conjugated norm over a grid of masses (m <= 3)."""
    mats, space, p = _family(family)
    atoms = _atoms_of(space)
    m, mu = atoms.m, atoms.weights
    if m > 3:
        raise ValueError("the grid oracle is limited to at most 3 atoms")
    if m == 1:
        g = Density.uniform(atoms)
        return g, max(conjugated_l2_norm(OperatorMatrix.on(space, A), g) for A in mats)
    # logit-spaced grid reaching the floored simplex faces
    edge = -np.log(g_floor * mu.min() / mu.sum())
    x = 1.0 / (1.0 + np.exp(-np.linspace(-edge, edge, resolution)))
    if m == 2:
        Q = np.stack([x, 1 - x], axis=1)
    else:
        a, b = np.meshgrid(x, x, indexing="ij")
        Q = np.stack([a, (1 - a) * b, (1 - a) * (1 - b)], axis=-1).reshape(-1, 3)
    best, qbest = np.inf, None
    for chunk in np.array_split(Q, max(1, len(Q) // 4096)):
        vals = _objective(mats, mu, p, np.log(chunk))[0].max(axis=1)
        i = int(np.argmin(vals))
        if vals[i] < best:
            best, qbest = float(vals[i]), chunk[i]
    g = Density.from_masses(qbest, atoms, g_floor)
    return g, max(conjugated_l2_norm(OperatorMatrix.on(space, A), g) for A in mats)


# ---------------------------------------------------------------------------
# bases


@dataclass
class BasisFamily:
    """Columns of ``vectors`` are ``e_1..e_n``; ``dual`` (same layout) is biorthogonal when given."""

    vectors: np.ndarray
    dual: np.ndarray = None
    cond_limit: float = 1e12

    def __post_init__(self):
        E = np.asarray(self.vectors, dtype=complex)
        if E.ndim != 2 or E.shape[0] != E.shape[1]:
            raise ValueError("a basis of an n-dimensional space needs an n x n matrix")
        c = np.linalg.cond(E)
        if not np.isfinite(c) or c > self.cond_limit:
            raise SingularBasisError(c)
        self.vectors = E
        self.cond = float(c)
        if self.dual is not None:
            self.dual = np.asarray(self.dual, dtype=complex)

    @property
    def n(self):
        return self.vectors.shape[1]

    @classmethod
    def canonical(cls, n):
        return cls(np.eye(n))

    def with_dual(self, mu=None):
        """Attach the biorthogonal system for the pairing ``sum mu_i x_i conj(y_i)``."""
        mu = np.ones(self.n) if mu is None else np.asarray(mu, dtype=float)
        D = np.linalg.inv(self.vectors).conj().T / mu[:, None]
        return BasisFamily(self.vectors, D, self.cond_limit)

    def biorthogonality_residual(self, mu=None):
        if self.dual is None:
            raise ValueError("no dual system attached")
        mu = np.ones(self.n) if mu is None else np.asarray(mu, dtype=float)
        G = self.dual.conj().T @ (mu[:, None] * self.vectors)
        return float(np.max(np.abs(G - np.eye(self.n))))

    def multiplier(self, lam):
        """``T_lambda e_k = lambda_k e_k``."""
        E = self.vectors
        return E @ (np.asarray(lam)[:, None] * np.linalg.inv(E))

    def partial_sum(self, N):
        lam = np.zeros(self.n)
        lam[:N] = 1.0
        return self.multiplier(lam)


def _signs_for(n, rng, limit=12, sample=256):
    if n <= limit:
        return sign_patterns(n)
    S = rng.choice(np.array([-1.0, 1.0]), size=(sample, n))
    return np.vstack([S, 1.0 - 2.0 * np.eye(n)])


def unconditional_constant(basis, space, cfg=None, complex_multipliers=True):
    """``sup_{|lambda_k| <= 1} ||T_lambda||``: exact over real signs on Hilbert spaces.

    Real signs are enumerated for ``n <= 20`` (only half, since ``T_{-lambda}
    = -T_lambda``). With ``complex_multipliers`` a torus ascent over
    ``lambda`` then follows from the best sign; the result is a lower bound
    unless it is attained by a sign and the space is Hilbert. The witness is
    ``(lambda, a)`` with ``a`` the coefficient vector of the norming element.
    """
    cfg = cfg or SearchConfig(restarts=8, iterations=200)
    E = basis.vectors
    n = basis.n
    Ei = np.linalg.inv(E)
    hilbert = space.hilbert_weights is not None
    if n <= 20:
        S = sign_patterns(n)
    else:
        S = _signs_for(n, rng_for(cfg.seed, "unconditional", n), limit=0)
    if hilbert:
        w = np.sqrt(space.hilbert_weights)
        A, B = w[:, None] * E, Ei / w[None, :]
        best, lam = -1.0, None
        for chunk in np.array_split(S, max(1, len(S) // 2048)):
            s = np.linalg.norm(np.einsum("ik,rk,kj->rij", A, chunk, B), 2, axis=(1, 2))
            i = int(np.argmax(s))
            if s[i] > best:
                best, lam = float(s[i]), chunk[i].astype(complex)
        x = op_norm(OperatorMatrix.on(space, basis.multiplier(lam))).witness
    else:
        best, lam, x = -1.0, None, None
        for s in S:
            e = op_norm(OperatorMatrix.on(space, basis.multiplier(s)), cfg)
            if e.value > best:
                best, lam, x = e.value, s.astype(complex), e.witness
    kind = "exact" if hilbert and n <= 20 else "lower_bound"
    if complex_multipliers:
        rng = rng_for(cfg.seed, "unconditional", "torus", n)
        for _ in range(4):
            a = Ei @ x
            W = E * a[None, :]

            def fun(Lb, W=W):
                Y = Lb @ W.T
                nn = space.norm(Y) ** 2
                g = space.norm_sq_grad(Y) @ W.conj()
                with np.errstate(divide="ignore"):
                    return 0.5 * np.log(nn), np.where(nn[:, None] > 0, g / (2 * nn[:, None]), 0.0)

            L0 = np.exp(2j * np.pi * rng.random((cfg.restarts, n)))
            L0[0] = lam
            Lb, vals, _ = _ascent.maximize(fun, L0, cfg.iterations, project=_torus)
            cand = _torus(Lb[int(np.argmax(vals))])
            e = op_norm(OperatorMatrix.on(space, basis.multiplier(cand)), cfg)
            if e.value <= best * (1 + 1e-12):
                break
            best, lam, x, kind = e.value, cand, e.witness, "lower_bound"
    return NormEstimate(best, kind, (lam, Ei @ x), info={"signs": len(S)})


def _torus(F):
    a = np.abs(F)
    return np.where(a > 0, F / np.where(a > 0, a, 1.0), 1.0)


@dataclass
class TransferReport:
    density: Density
    transferred: BasisFamily
    constant_before: float
    constant_after: float
    achieved: float
    route: str
    certificate: dict = field(default_factory=dict)
    trace: list = field(default_factory=list)

    @property
    def certified(self):
        return bool(self.certificate.get("certified", False))


def transfer_basis(basis, p, mu=None, cfg=None, density_cfg=None):
    """Move a basis of ``L^p(mu)`` to an unconditional basis of ``L^2(g mu)``.

    The density is searched against the sign multipliers ``T_lambda`` (all of
    them for ``n <= 12``, else 256 random patterns and the single flips).
    For ``p < 2`` the dual system is transferred with the conjugate exponent
    as well and biorthogonality is checked. ``constant_after`` is the exact
    real-sign constant of the transferred basis on ``L^2(g mu)``; it never
    exceeds ``achieved``.
    """
    cfg = cfg or SearchConfig(restarts=8, iterations=200)
    density_cfg = density_cfg or DensityConfig(seed=cfg.seed)
    p = _finite_p(p)
    n = basis.n
    atoms = AtomSpace(tuple(np.ones(n) if mu is None else np.ravel(mu)))
    X = atoms.lp(p)
    S = _signs_for(n, rng_for(cfg.seed, "transfer", n))
    family = [OperatorMatrix.on(X, basis.multiplier(s)) for s in S]
    before = unconditional_constant(basis, X, cfg, complex_multipliers=False).value
    res = density_search(family, density_cfg)
    g = res.density
    transferred = BasisFamily(phi(p, g, basis.vectors.T).T)
    L2 = g.space(2)
    after = unconditional_constant(transferred, L2, cfg, complex_multipliers=False).value
    cert = {
        "achieved": res.achieved,
        "oracle": res.oracle,
        "search_certified": res.certified,
        "soundness": after <= res.achieved * (1 + 1e-9),
    }
    if p < 2:
        route = "dual"
        dual = basis.with_dual(atoms.weights).dual
        q = float(conjugate_exponent(p))
        tdual = dual if q == INF else phi(q, g, dual.T).T
        G = tdual.conj().T @ (g.masses[:, None] * transferred.vectors)
        cert["biorthogonality"] = float(np.max(np.abs(G - np.eye(n))))
        cert["biorthogonal"] = cert["biorthogonality"] <= 1e-9
        transferred = BasisFamily(transferred.vectors, tdual)
    else:
        route = "inclusion"
    cert["certified"] = bool(cert["search_certified"] and cert["soundness"] and cert.get("biorthogonal", True))
    return TransferReport(g, transferred, before, after, res.achieved, route, cert, res.trace)


@dataclass
class BasisProfile:
    schauder_constant: float
    projection_norms: list
    r_bound: object
    transferred_schauder: float
    density: Density


def r_basis_profile(basis, space, cfg=None, density_cfg=None):
    """Partial-sum projections: their norms, an R-bound estimate, and the L^2 Schauder constant after transfer."""
    cfg = cfg or RBoundConfig(sizes=(1, 2, 4))
    P = [OperatorMatrix.on(space, basis.partial_sum(N)) for N in range(1, basis.n + 1)]
    norms = [op_norm(T, cfg.op_config).value for T in P]
    rb = r_bound(P, cfg)
    res = density_search(P, density_cfg or DensityConfig(seed=cfg.seed), oracle=False)
    after = max(conjugated_l2_norm(T, res.density) for T in P)
    return BasisProfile(max(norms), norms, rb, after, res.density)
