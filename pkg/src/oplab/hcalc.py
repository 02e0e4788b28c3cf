"""Sectorial matrices and their holomorphic functional calculus.

``f(A) = (1/2 pi i) \\int_{d Sigma_gamma} f(lambda) (lambda - A)^{-1} d lambda`` is
evaluated by composite Gauss-Legendre quadrature in ``log |lambda|`` along
the two boundary rays of the sector, upper ray inward and lower ray outward.
For diagonalizable matrices ``spectral_calc`` gives an independent answer
``V diag(f(lambda_i)) V^{-1}`` that the tests compare against.
"""
from dataclasses import dataclass, field
import cmath
import math

import numpy as np
from scipy.optimize import linear_sum_assignment, minimize_scalar

from .rademacher import RBoundConfig, r_bound
from .spaces import INF, OperatorMatrix, SearchConfig, SpaceDescriptor, lp, op_norm

PI = math.pi


class SectorialError(ValueError):
    pass


class ContourError(ValueError):
    pass


class TruncationError(ContourError):
    """The truncation bound exceeds the budget; ``suggested`` holds radii that meet it."""

    def __init__(self, message, bound, suggested):
        super().__init__(message)
        self.bound = bound
        self.suggested = suggested


class SimilarityError(ValueError):
    def __init__(self, message, obstruction):
        super().__init__(message)
        self.obstruction = obstruction


def opnorm_batch(space, M):
    """Operator norms of a stack of matrices on ``space`` (exact where possible)."""
    M = np.asarray(M)
    w = space.hilbert_weights
    if w is not None:
        s = np.sqrt(w)
        B = s[:, None] * M / s[None, :]
        return np.linalg.norm(B, 2, axis=(-2, -1))
    if isinstance(space, SpaceDescriptor) and space.p == 1:
        return np.max(np.sum(np.abs(M) * space.weights[:, None], axis=-2) / space.weights, axis=-1)
    if isinstance(space, SpaceDescriptor) and space.p == INF:
        sw = space.sweights
        return np.max(sw * np.sum(np.abs(M) / sw, axis=-1), axis=-1)
    flat = M.reshape((-1,) + M.shape[-2:])
    cfg = SearchConfig(restarts=8, iterations=200)
    out = np.array([op_norm(OperatorMatrix.on(space, m), cfg).value for m in flat])
    return out.reshape(M.shape[:-2])


def _resolvents(A, lam):
    n = A.shape[0]
    return np.linalg.inv(lam[:, None, None] * np.eye(n) - A[None])


# ---------------------------------------------------------------------------
# sectorial operators


@dataclass
class SectorialOperator:
    A: np.ndarray
    space: object
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    diagonalizable: bool
    omega: float
    resolvent_profile: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def spectral_radius(self):
        return float(np.max(np.abs(self.eigenvalues)))

    def resolvent_bound(self, theta, samples=400):
        """Sampled ``sup ||lambda (lambda - A)^{-1}||`` on the rays ``arg lambda = +-theta``."""
        key = round(float(theta), 12)
        if key not in self.resolvent_profile:
            if theta <= self.omega:
                return INF
            rho = 1.0 + self.spectral_radius
            r = np.logspace(-8, 8, samples) * rho
            lam = np.concatenate([r * cmath.exp(1j * theta), r * cmath.exp(-1j * theta)])
            M = lam[:, None, None] * _resolvents(self.A, lam)
            self.resolvent_profile[key] = float(np.max(opnorm_batch(self.space, M)))
        return self.resolvent_profile[key]


def make_sectorial(A, space=None, theta_grid=None, cond_limit=1e8):
    """Eigendata, sector angle and resolvent profile of a square matrix.

    ``omega`` is ``max |arg lambda_i|`` over nonzero eigenvalues. A zero
    eigenvalue is admitted only when it is semisimple; spectrum on the
    negative half-line is rejected.
    """
    if isinstance(A, OperatorMatrix):
        space = space or A.domain
        A = A.entries
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise SectorialError("a sectorial operator must be a square matrix")
    n = A.shape[0]
    space = space or lp(n, 2)
    lam, V = np.linalg.eig(A)
    scale = 1.0 + float(np.max(np.abs(lam)))
    ztol = 1e-10 * scale
    zero = np.abs(lam) <= ztol
    if zero.any():
        r1 = np.linalg.matrix_rank(A, tol=1e-9 * scale)
        r2 = np.linalg.matrix_rank(A @ A, tol=1e-9 * scale**2)
        if r2 < r1:
            raise SectorialError(
                "0 is a non-semisimple eigenvalue (nilpotent part at 0): "
                "||lambda (lambda - A)^{-1}|| is unbounded as lambda -> 0"
            )
    args = np.where(zero, 0.0, np.abs(np.angle(lam)))
    omega = float(np.max(args)) if n else 0.0
    if omega >= PI - 1e-12:
        raise SectorialError("spectrum meets the negative half-line; A is not sectorial")
    cond = np.linalg.cond(V)
    diag = bool(np.isfinite(cond) and cond < cond_limit)
    op = SectorialOperator(A, space, lam, V, diag, omega)
    grid = theta_grid if theta_grid is not None else omega + (PI - omega) * np.array([0.1, 0.25, 0.5, 0.75, 0.9])
    for th in grid:
        op.resolvent_bound(float(th))
    return op


# ---------------------------------------------------------------------------
# scalar and operator-valued functions


@dataclass
class AnalyticFn:
    """A holomorphic function on the open sector of angle ``sector_angle``.

    ``func`` is vectorized over complex arrays. ``decay = (eps, C)`` certifies
    ``|f(lambda)| <= C min(|lambda|^eps, |lambda|^-eps)`` on sampled points of
    the sector boundary at angle ``decay_angle`` and on the unit arc.
    """

    func: object
    sector_angle: float = PI
    decay: tuple = None
    derivative: object = None
    name: str = "f"
    gamma_width: float = None
    decay_angle: float = None

    def __call__(self, lam):
        return self.func(np.asarray(lam, dtype=complex))

    @classmethod
    def with_decay(cls, func, eps, sector_angle=PI, angle=None, **kw):
        f = cls(func, sector_angle, None, **kw)
        angle = min(angle if angle is not None else 0.9 * sector_angle, 0.9 * sector_angle)
        f.decay = (eps, decay_constant(f, eps, angle))
        f.decay_angle = angle
        return f

    @classmethod
    def rational(cls, zeros=(), poles=(), scale=1.0, name=None):
        zeros = [complex(z) for z in zeros]
        poles = [complex(p) for p in poles]
        if any(abs(p) == 0 for p in poles):
            raise ValueError("poles at 0 are not allowed")

        def func(lam):
            out = np.full(np.shape(lam), complex(scale))
            for z in zeros:
                out = out * (lam - z)
            for p in poles:
                out = out / (lam - p)
            return out

        def deriv(lam):
            f = func(lam)
            s = sum(1.0 / (lam - z) for z in zeros) - sum(1.0 / (lam - p) for p in poles) if (zeros or poles) else 0
            return f * s

        theta = min((abs(cmath.phase(p)) for p in poles), default=PI)
        eps = min(sum(1 for z in zeros if z == 0), len(poles) - len(zeros))
        label = name or f"rational(zeros={zeros}, poles={poles}, scale={scale})"
        if eps > 0:
            return cls.with_decay(func, eps, theta, derivative=deriv, name=label)
        return cls(func, theta, None, deriv, label)

    @classmethod
    def power_is(cls, s):
        """``lambda^{is}`` (principal branch); bounded on every sector, no decay."""
        s = float(s)
        return cls(lambda lam: np.exp(1j * s * np.log(lam)), PI, None,
                   lambda lam: 1j * s * np.exp((1j * s - 1) * np.log(lam)), f"power_is({s:g})")

    @classmethod
    def h_times_power_is(cls, s):
        """``4 lambda/(1+lambda)^2 * lambda^{is}``: equals 1 at 1 with vanishing h'(1)."""
        s = float(s)

        def func(lam):
            return 4 * lam / (1 + lam) ** 2 * np.exp(1j * s * np.log(lam))

        def deriv(lam):
            h = 4 * lam / (1 + lam) ** 2
            dh = 4 / (1 + lam) ** 2 - 8 * lam / (1 + lam) ** 3
            g = np.exp(1j * s * np.log(lam))
            return dh * g + h * 1j * s * g / lam

        width = min(PI / 4, 1.0 / (1.0 + abs(s)))
        return cls.with_decay(func, 1, PI, angle=width, derivative=deriv, name=f"h_times_power_is({s:g})",
                              gamma_width=width)

    @classmethod
    def constant(cls, c):
        c = complex(c)
        decay = (1, 0.0) if c == 0 else None
        return cls(lambda lam: np.full(np.shape(lam), c), PI, decay, lambda lam: np.zeros(np.shape(lam), complex),
                   f"constant({c})")

    @classmethod
    def resolvent(cls, mu):
        """``R_mu(lambda) = (mu - lambda)^{-1}``; continuous on the spectrum when mu is off it."""
        mu = complex(mu)
        return cls(lambda lam: 1.0 / (mu - lam), abs(cmath.phase(mu)) if mu != 0 else 0.0, None,
                   lambda lam: 1.0 / (mu - lam) ** 2, f"resolvent({mu})")


def decay_constant(f, eps, angle, samples=2001):
    r = np.logspace(-10, 10, samples)
    phi = np.linspace(-angle, angle, 201)
    pts = np.concatenate([r * cmath.exp(1j * angle), r * cmath.exp(-1j * angle), r.astype(complex), np.exp(1j * phi)])
    vals = np.abs(f(pts)) / np.minimum(np.abs(pts) ** eps, np.abs(pts) ** -eps)
    return 1.1 * float(np.max(vals[np.isfinite(vals)]))


def parse_preset(text):
    """Parse ``rational:zeros=0;poles=-1,-1;scale=4``, ``power_is:<s>``, ``h_times_power_is:<s>``."""
    kind, _, arg = text.partition(":")
    if kind == "power_is":
        return AnalyticFn.power_is(float(arg))
    if kind == "h_times_power_is":
        return AnalyticFn.h_times_power_is(float(arg))
    if kind == "rational":
        fields = dict(item.split("=", 1) for item in arg.split(";") if item)
        parse = lambda v: [complex(t.replace(" ", "")) for t in v.split(",") if t]
        return AnalyticFn.rational(parse(fields.get("zeros", "")), parse(fields.get("poles", "")),
                                   complex(fields.get("scale", "1")), name=text)
    raise ValueError(f"unknown function preset {text!r}")


@dataclass
class OperatorFn:
    """Operator-valued ``F``; ``func`` maps an array of K points to an array (K, n, n)."""

    func: object
    decay: tuple
    sector_angle: float = PI
    name: str = "F"

    def __call__(self, lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        return self.func(lam)

    @classmethod
    def scalar_times(cls, f, B):
        B = np.asarray(B, dtype=complex)
        c = 0.0 if f.decay is None else f.decay[1] * np.linalg.norm(B, 2)
        decay = None if f.decay is None else (f.decay[0], c)
        return cls(lambda lam: f(lam)[:, None, None] * B[None], decay, f.sector_angle, f"{f.name}*B")

    @classmethod
    def pointwise(cls, g, decay, sector_angle=PI, name="F"):
        """Wrap a function of a single point returning a matrix."""
        return cls(lambda lam: np.array([g(z) for z in lam]), decay, sector_angle, name)

    @classmethod
    def zero(cls, n):
        return cls(lambda lam: np.zeros((len(lam), n, n), complex), (1, 0.0), PI, "0")


def check_commutes(F, A, gamma, samples=16, tol=1e-9):
    r = np.logspace(-3, 3, samples)
    lam = np.concatenate([r * cmath.exp(1j * gamma), r * cmath.exp(-1j * gamma), r])
    vals = F(lam)
    scale = max(np.linalg.norm(A, 2), 1.0)
    for z, T in zip(lam, vals):
        nt = max(np.linalg.norm(T, 2), 1e-300)
        res = np.linalg.norm(T @ A - A @ T, 2) / (scale * nt) if nt > 1e-300 else 0.0
        if res > tol:
            raise ContourError(f"F({z:.3g}) does not commute with A: relative residual {res:.3e}")


# ---------------------------------------------------------------------------
# contour quadrature


@dataclass
class Contour:
    gamma: float
    r_min: float
    r_max: float
    panels: int = 64
    order: int = 8

    def __post_init__(self):
        if not (0 < self.r_min < 1 < self.r_max):
            raise ContourError("contour radii must satisfy r_min < 1 < r_max")

    def nodes(self, panels=None):
        """Quadrature points on both rays and the weights of ``d lambda / (2 pi i)`` with orientation."""
        P = panels or self.panels
        xg, wg = np.polynomial.legendre.leggauss(self.order)
        edges = np.linspace(math.log(self.r_min), math.log(self.r_max), P + 1)
        h = np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        x = (mid[:, None] + 0.5 * h[:, None] * xg[None, :]).ravel()
        w = (0.5 * h[:, None] * wg[None, :]).ravel()
        up = np.exp(x + 1j * self.gamma)
        lo = np.exp(x - 1j * self.gamma)
        lam = np.concatenate([up, lo])
        # upper ray runs from infinity to 0, lower ray from 0 to infinity; d lambda = lambda dx
        wts = np.concatenate([-w * up, w * lo]) / (2j * PI)
        return lam, wts


def default_gamma(A, theta):
    hi = min(theta, PI)
    if hi <= A.omega:
        raise ContourError(f"no admissible angle: omega(A) = {A.omega:.4g} >= sector angle {theta:.4g}")
    return A.omega + 0.5 * (hi - A.omega)


def auto_contour(A, f, tol=1e-10, panels=64, gamma=None):
    """Contour with the default radii ``1e-6 (1+rho)``, ``1e6 (1+rho)``, widened until the truncation bound meets ``tol``."""
    if gamma is None:
        if getattr(f, "gamma_width", None):
            gamma = A.omega + min(f.gamma_width, 0.5 * (f.sector_angle - A.omega))
        else:
            gamma = default_gamma(A, f.sector_angle)
    rho = 1.0 + A.spectral_radius
    r_min, r_max = 1e-6 * rho, 1e6 * rho
    if f.decay is not None and f.decay[1] > 0:
        eps, C = f.decay
        M = A.resolvent_bound(gamma)
        # 2 rays * C M r^eps / eps / (2 pi) <= tol / 2 at each end
        r = (0.5 * tol * PI * eps / (C * M)) ** (1.0 / eps)
        r_min = min(r_min, r)
        r_max = max(r_max, 1.0 / r)
    return Contour(gamma, r_min, r_max, panels)


def truncation_bound(f, A, c):
    eps, C = f.decay
    if C == 0:
        return 0.0
    if isinstance(f, AnalyticFn) and (f.decay_angle is None or c.gamma > f.decay_angle):
        C = max(C, decay_constant(f, eps, c.gamma))
    M = A.resolvent_bound(c.gamma)
    return C * M * (c.r_min**eps + c.r_max**-eps) / (eps * PI)


@dataclass
class CalcResult:
    matrix: np.ndarray
    error: float
    quad_error: float
    trunc_error: float
    panels: int
    contour: Contour

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


def _quadrature(integrand, A, c, tol, max_panels, chunk=8192):
    def integrate(P):
        lam, wts = c.nodes(P)
        total = np.zeros(A.A.shape, dtype=complex)
        for i in range(0, len(lam), chunk):
            l, w = lam[i:i + chunk], wts[i:i + chunk]
            total += np.einsum("k,kab->ab", w, integrand(l, _resolvents(A.A, l)))
        return total

    P = c.panels
    coarse = integrate(P)
    while True:
        fine = integrate(2 * P)
        err = float(np.linalg.norm(fine - coarse, 2))
        if err <= tol or 2 * P >= max_panels:
            return fine, err, 2 * P
        P, coarse = 2 * P, fine


def _prepare(f, A, c, tol):
    if not isinstance(A, SectorialOperator):
        A = make_sectorial(A)
    if f.decay is None:
        raise ContourError(f"{getattr(f, 'name', 'f')} has no decay certificate; the contour integral may diverge")
    if c is None:
        c = auto_contour(A, f, tol / 10)
        trunc = truncation_bound(f, A, c)
    else:
        if not (A.omega < c.gamma < f.sector_angle):
            raise ContourError(
                f"contour angle {c.gamma:.4g} outside the admissible range ({A.omega:.4g}, {f.sector_angle:.4g})"
            )
        trunc = truncation_bound(f, A, c)
        if trunc > tol:
            sug = auto_contour(A, f, tol / 10, c.panels, c.gamma)
            raise TruncationError(
                f"truncation bound {trunc:.3e} exceeds {tol:.1e}; use r_min={sug.r_min:.3g}, r_max={sug.r_max:.3g}",
                trunc, (sug.r_min, sug.r_max),
            )
    return A, c, trunc


def contour_calc(f, A, c=None, tol=1e-10, max_panels=2**15):
    """``f(A)`` by contour quadrature, with an error estimate.

    The quadrature error is estimated by comparing ``P`` and ``2P`` panels and
    doubling until it falls below ``tol``; the truncation error is bounded
    from the decay certificate and the sampled resolvent bound on the rays.
    """
    A, c, trunc = _prepare(f, A, c, tol)
    mat, qerr, P = _quadrature(lambda l, R: f(l)[:, None, None] * R, A, c, tol, max_panels)
    return CalcResult(mat, qerr + trunc, qerr, trunc, P, c)


def op_valued_calc(F, A, c=None, tol=1e-10, max_panels=2**15):
    """``F(A)`` for an operator-valued ``F`` commuting with ``A``."""
    if not isinstance(A, SectorialOperator):
        A = make_sectorial(A)
    gamma = c.gamma if c is not None else default_gamma(A, F.sector_angle)
    check_commutes(F, A.A, gamma)
    A, c, trunc = _prepare(F, A, c, tol)
    mat, qerr, P = _quadrature(lambda l, R: np.einsum("kab,kbc->kac", F(l), R), A, c, tol, max_panels)
    return CalcResult(mat, qerr + trunc, qerr, trunc, P, c)


def spectral_calc(f, A):
    """``V diag(f(lambda_i)) V^{-1}`` for diagonalizable ``A``."""
    if not isinstance(A, SectorialOperator):
        A = make_sectorial(A)
    if not A.diagonalizable:
        raise SectorialError("A is not diagonalizable; use contour_calc for the holomorphic calculus")
    V = A.eigenvectors
    vals = np.asarray(f(A.eigenvalues), dtype=complex)
    return (V * vals[None, :]) @ np.linalg.inv(V)


# ---------------------------------------------------------------------------
# sup norms on sectors and the uniform-boundedness profile


def hinf_norm(f, theta, samples=2001, r_range=(1e-8, 1e8)):
    """Sampled ``sup |f|`` over the boundary of the sector (the half-line for theta = 0).

    The maximum-modulus principle puts the supremum on the boundary; the
    sample maximum is refined by a bounded scalar search in ``log r``. The
    result is a lower bound that converges under refinement.
    """
    lo, hi = math.log(r_range[0]), math.log(r_range[1])
    x = np.linspace(lo, hi, samples)
    rays = [1.0] if theta == 0 else [cmath.exp(1j * theta), cmath.exp(-1j * theta)]
    best = 0.0
    dx = x[1] - x[0]
    for d in rays:
        vals = np.abs(f(np.exp(x) * d))
        vals = np.where(np.isfinite(vals), vals, 0.0)
        k = int(np.argmax(vals))
        best = max(best, float(vals[k]))
        a, b = max(lo, x[k] - dx), min(hi, x[k] + dx)
        if b > a:
            res = minimize_scalar(lambda t: -abs(complex(f(np.array([math.exp(t) * d]))[0])), bounds=(a, b),
                                  method="bounded", options={"xatol": 1e-12})
            if np.isfinite(res.fun):
                best = max(best, -float(res.fun))
    return best


def default_bank(s_grid=None):
    bank = [
        AnalyticFn.rational([0], [-1, -1], 4.0, name="4t/(1+t)^2"),
        AnalyticFn.rational([0], [-2, -2], 1.0, name="t/(2+t)^2"),
        AnalyticFn.rational([0, 0], [-1, -1, -1], 1.0, name="t^2/(1+t)^3"),
        AnalyticFn.rational([0], [-1 + 1j, -1 - 1j], 1.0, name="t/(t^2+2t+2)"),
    ]
    for s in (s_grid if s_grid is not None else np.arange(0, 51, 10)):
        bank.append(AnalyticFn.h_times_power_is(s))
    return bank


@dataclass
class ProfileTable:
    thetas: np.ndarray
    M: np.ndarray
    ratios: np.ndarray
    names: list

    @property
    def sup(self):
        return float(np.max(self.M)) if self.M.size else 0.0


def uniform_profile(A, bank=None, theta_grid=None, tol=1e-9):
    """``M(theta) = max_f ||f(A)|| / ||f||_{inf,theta}`` over a function bank."""
    if not isinstance(A, SectorialOperator):
        A = make_sectorial(A)
    bank = default_bank() if bank is None else list(bank)
    thetas = np.asarray(theta_grid if theta_grid is not None else [0.0, PI / 16, PI / 8, PI / 4, PI / 2])
    if not bank:
        return ProfileTable(thetas, np.zeros(0), np.zeros((0, len(thetas))), [])
    ratios = np.zeros((len(bank), len(thetas)))
    for i, f in enumerate(bank):
        nrm = float(opnorm_batch(A.space, contour_calc(f, A, tol=tol).matrix))
        for j, th in enumerate(thetas):
            if th >= f.sector_angle:
                ratios[i, j] = np.nan
                continue
            h = hinf_norm(f, th)
            ratios[i, j] = nrm / h if h > 0 else 0.0
    M = np.nanmax(ratios, axis=0)
    return ProfileTable(thetas, M, ratios, [f.name for f in bank])


def power_is_ratios(A, s_grid, theta=0.0, tol=1e-9):
    """``||f_s(A)|| / ||f_s||_{inf,theta}`` for ``f_s = 4 lambda/(1+lambda)^2 lambda^{is}``."""
    if not isinstance(A, SectorialOperator):
        A = make_sectorial(A)
    out = []
    for s in s_grid:
        f = AnalyticFn.h_times_power_is(s)
        nrm = float(opnorm_batch(A.space, contour_calc(f, A, tol=tol).matrix))
        out.append(nrm / hinf_norm(f, theta))
    return np.array(out)


@dataclass
class SlopeFit:
    slope: float
    intercept: float
    r2: float


def fit_slope(s, y):
    s, y = np.asarray(s, float), np.asarray(y, float)
    slope, intercept = np.polyfit(s, y, 1)
    pred = slope * s + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return SlopeFit(float(slope), float(intercept), 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0)


def blowup_test(A, s_grid=None, growth=1.1):
    """Detect growth of the ``lambda^{is}`` family ratios (no uniform calculus)."""
    s_grid = np.linspace(0, 50, 11) if s_grid is None else np.asarray(s_grid)
    r = power_is_ratios(A, s_grid)
    fit = fit_slope(s_grid, r)
    return {"s": s_grid, "ratios": r, "fit": fit, "detected": bool(np.max(r) > growth * r[0] and fit.slope > 0)}


# ---------------------------------------------------------------------------
# operator-valued bound, Cauchy reconstruction, continuous calculus, similarity


@dataclass
class KWReport:
    lhs: float
    C_hat: float
    R_hat: float
    violation: bool
    lhs_error: float = 0.0

    @property
    def rhs(self):
        return self.C_hat * self.R_hat


def verify_kw(A, F, t_samples, cfg=None, bank=None, slack=1e-6):
    """Compare ``||F(A)||`` with ``C R({F(t_j)})`` where ``C`` is the squared profile sup."""
    cfg = cfg or RBoundConfig()
    if not isinstance(A, SectorialOperator):
        A = make_sectorial(A)
    res = op_valued_calc(F, A)
    lhs = float(opnorm_batch(A.space, res.matrix))
    C = uniform_profile(A, bank).sup ** 2
    vals = F(np.asarray(t_samples, dtype=complex))
    if not np.any(vals):
        R = 0.0
    else:
        R = r_bound([OperatorMatrix.on(A.space, v) for v in vals], cfg).value
    return KWReport(lhs, C, R, lhs > C * R * (1 + slack) + res.error, res.error)


@dataclass
class CauchyReport:
    t: np.ndarray
    deviation: np.ndarray
    trusted: np.ndarray
    R_hat: float

    @property
    def max_deviation(self):
        d = self.deviation[self.trusted]
        return float(np.max(d)) if d.size else INF


def phi_integral_check(F, c, t_points, space=None, cfg=None, r_hat=True):
    """Reconstruct ``F(t)`` from the quadrature sum of ``R_lambda(t) F(lambda)``.

    Points outside ``[10 r_min, r_max / 10]`` are flagged untrusted because the
    truncated contour no longer encloses them with margin.
    """
    t = np.asarray(t_points, dtype=float)
    lam, wts = c.nodes()
    FL = F(lam)
    n = FL.shape[-1]
    space = space or lp(n, 2)
    recon = np.einsum("k,tk,kab->tab", wts, 1.0 / (lam[None, :] - t[:, None]), FL)
    exact = F(t.astype(complex))
    dev = np.linalg.norm(recon - exact, 2, axis=(-2, -1))
    trusted = (t >= 10 * c.r_min) & (t <= c.r_max / 10)
    R = 0.0
    if r_hat and np.any(recon[trusted]):
        R = r_bound([OperatorMatrix.on(space, m) for m in recon[trusted]], cfg or RBoundConfig(sizes=(1, 2, 4))).value
    return CauchyReport(t, dev, trusted, R)


@dataclass
class SpectralReport:
    eigenvalues: np.ndarray
    expected: np.ndarray
    max_error: float
    resolvent_error: float = None
    f_infinity: tuple = ()


def match_spectra(a, b):
    a, b = np.asarray(a), np.asarray(b)
    C = np.abs(a[:, None] - b[None, :])
    i, j = linear_sum_assignment(C)
    return float(np.max(C[i, j])) if len(i) else 0.0, b[j]


def cl_rep(A, f, mu_samples=(-1.0, -2.0 + 1j)):
    """Continuous calculus ``Psi(f)`` of a diagonalizable matrix with a spectral-mapping report."""
    if not isinstance(A, SectorialOperator):
        A = make_sectorial(A)
    if not A.diagonalizable:
        raise SectorialError(
            "A is not diagonalizable: there is no bounded continuous calculus to extend (Jordan block)"
        )
    out = spectral_calc(f, A)
    ev = np.linalg.eigvals(out)
    expected = np.asarray(f(A.eigenvalues), dtype=complex)
    err, _ = match_spectra(expected, ev)
    rerr = 0.0
    n = A.n
    for mu in mu_samples:
        if np.min(np.abs(A.eigenvalues - mu)) < 1e-8:
            continue
        direct = np.linalg.inv(mu * np.eye(n) - A.A)
        via = spectral_calc(AnalyticFn.resolvent(mu), A)
        rerr = max(rerr, float(np.linalg.norm(direct - via, 2) / max(np.linalg.norm(direct, 2), 1.0)))
    return OperatorMatrix.on(A.space, out), SpectralReport(ev, expected, err, rerr)


def similarity_selfadjoint(A, tol=1e-8, cond_limit=1e8):
    """``S`` with ``S^{-1} A S`` selfadjoint, when ``A`` is diagonalizable with real spectrum."""
    A = np.asarray(A.entries if isinstance(A, OperatorMatrix) else A, dtype=complex)
    if np.allclose(A, A.conj().T, atol=1e-14 * max(1.0, np.linalg.norm(A))):
        _, S = np.linalg.eigh(A)
        return S
    lam, V = np.linalg.eig(A)
    scale = 1.0 + float(np.max(np.abs(lam)))
    if np.max(np.abs(lam.imag)) > 1e-9 * scale:
        raise SimilarityError("A has a non-real eigenvalue", "complex_eigenvalue")
    cond = np.linalg.cond(V)
    if not np.isfinite(cond) or cond > cond_limit:
        raise SimilarityError("A is not diagonalizable (Jordan block)", "jordan_block")
    S = V / np.linalg.norm(V, axis=0)[None, :]
    B = np.linalg.solve(S, A @ S)
    if np.linalg.norm(B - B.conj().T, 2) > tol * scale:
        raise SimilarityError("eigenvector similarity is not selfadjoint within tolerance", "ill_conditioned")
    return S
