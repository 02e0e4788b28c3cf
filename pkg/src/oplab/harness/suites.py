"""Named experiment suites. Each instance is a pure function of (seed, index, params)."""
from dataclasses import dataclass
import math

import numpy as np

from .. import density, hcalc, matricial, rademacher, representation
from .._rng import complex_normal, rng_for
from ..spaces import INF, OperatorMatrix, SearchConfig, lp, op_norm, sign_patterns
from .config import ConfigError


def q(value, kind="exact", **extra):
    out = {"value": float(value), "kind": kind}
    out.update({k: v for k, v in extra.items() if v is not None})
    return out


def arr(a):
    a = np.asarray(a)
    if np.iscomplexobj(a):
        return {"re": a.real.tolist(), "im": a.imag.tolist()}
    return a.tolist()


def _p(v):
    return INF if str(v).lower() in ("inf", "infinity") else float(v)


@dataclass(frozen=True)
class Suite:
    name: str
    run: object
    defaults: dict
    instances: int
    stochastic: bool = True

    def params(self, given):
        bad = set(given) - set(self.defaults)
        if bad:
            raise ConfigError(f"unknown parameter(s) for suite {self.name}: {', '.join(sorted(bad))}")
        return {**self.defaults, **given}


def radnorm_hilbert(rng, seed, P):
    d = int(rng.integers(1, P["max_dim"] + 1))
    k = int(rng.integers(1, P["max_terms"] + 1))
    X = lp(d, 2)
    x = complex_normal(rng, (k, d))
    v = rademacher.rad_norm(rademacher.RadFamily(X, x), rademacher.AverageConfig(mode="exact"))
    f = math.sqrt(float(np.sum(np.abs(x) ** 2)))
    return {"rad_norm": q(v.value), "formula": q(f), "deviation": q(abs(v.value - f))}, {"d": d, "k": k}


def contraction(rng, seed, P):
    ps = [_p(v) for v in P["p"]]
    p = ps[int(rng.integers(len(ps)))]
    k = int(rng.integers(1, P["max_terms"] + 1))
    X = lp(P["dim"], p)
    x = complex_normal(rng, (k, P["dim"]))
    cfg = rademacher.AverageConfig(mode="exact")
    base = rademacher.rad_norm(rademacher.RadFamily(X, x), cfg).value
    s = rng.choice(np.array([-1.0, 1.0]), size=k)
    signed = rademacher.rad_norm(rademacher.RadFamily(X, s[:, None] * x), cfg).value
    a = rng.random(k) * np.exp(2j * np.pi * rng.random(k))
    scaled = rademacher.rad_norm(rademacher.RadFamily(X, a[:, None] * x), cfg).value
    ratio = scaled / (np.max(np.abs(a)) * base)
    return {
        "real_sign_deviation": q(abs(signed - base) / base),
        "complex_ratio": q(ratio),
        "violation": q(float(ratio > 2 * (1 + 1e-12))),
    }, {"p": str(p), "k": k}


def rbound_oracle(rng, seed, P):
    d = int(rng.integers(1, P["max_dim"] + 1))
    size = int(rng.integers(1, P["max_set"] + 1))
    X = lp(d, 2)
    tau = [OperatorMatrix.on(X, complex_normal(rng, (d, d))) for _ in range(size)]
    cfg = rademacher.RBoundConfig(sizes=(1, 2, 4), restarts=4, iterations=100, seed=seed)
    est = rademacher.r_bound(tau, cfg)
    top = max(op_norm(T).value for T in tau)
    return {"r_hat": q(est.value, "lower_bound", seed=seed), "max_norm": q(top),
            "relative_gap": q(abs(est.value - top) / top)}, {"d": d, "size": size}


def _extension_instance(rng, P):
    d = int(rng.integers(2, P["max_dim"] + 1))
    kind = ["orthogonal", "skew", "lp_similar"][int(rng.integers(3))]
    cut = int(rng.integers(1, d))
    blocks = [cut, d - cut]
    if kind == "orthogonal":
        X = lp(d, 2)
        S = np.eye(d, dtype=complex)
    else:
        X = lp(d, 2) if kind == "skew" else lp(d, [1, 3, INF][int(rng.integers(3))])
        S = np.eye(d, dtype=complex) + 0.6 * complex_normal(rng, (d, d))
    u = representation.similar_system(X, blocks, S)
    K = int(rng.integers(1, P["max_terms"] + 1))
    bs = representation.random_commutant(rng, blocks, S, K)
    fs = complex_normal(rng, (K, len(blocks)))
    return u, representation.RTensor(fs, bs), kind


def thm_main_verify(rng, seed, P):
    u, x, kind = _extension_instance(rng, P)
    cfg = rademacher.RBoundConfig(sizes=(1, 2, 4), restarts=4, iterations=100, seed=seed,
                                  op_config=SearchConfig(6, 150, seed))
    r = representation.verify_extension(u, x, cfg)
    return {
        "lhs": q(r.lhs, r.lhs_kind),
        "u_norm": q(r.u_norm, "lower_bound", seed=seed),
        "r_norm": q(r.r_norm, "lower_bound", seed=seed),
        "rhs": q(r.rhs, "lower_bound", seed=seed),
        "escalations": q(r.escalations),
        "violation": q(float(r.violation)),
    }, {"kind": kind, "space": str(u.space), "representation": u.to_dict()}


def jordan_calculus(rng, seed, P):
    a = float(rng.uniform(P["low"], P["high"]))
    A = np.array([[a, 1.0], [0.0, a]])
    f = hcalc.AnalyticFn.rational([0], [-2, -2], 1.0)
    res = hcalc.contour_calc(f, A, tol=1e-11)
    exact = np.array([[a / (2 + a) ** 2, (2 - a) / (2 + a) ** 3], [0.0, a / (2 + a) ** 2]])
    err = float(np.max(np.abs(res.matrix - exact)))
    return {"max_error": q(err), "quadrature_error": q(res.error), "diagonal": q(exact[0, 0]),
            "offdiagonal": q(exact[0, 1])}, {"a": a, "panels": res.panels}


def _diag_or_jordan(rng, P):
    if P["matrix"] == "jordan":
        return np.array([[1.0, 1.0], [0.0, 1.0]])
    if P["matrix"] == "diag125":
        return np.diag([1.0, 2.0, 5.0])
    d = int(rng.integers(2, P["max_dim"] + 1))
    V = np.eye(d) + 0.3 * rng.standard_normal((d, d))
    return V @ np.diag(rng.uniform(0.5, 5.0, d)) @ np.linalg.inv(V)


def hcalc_uniform(rng, seed, P):
    A = _diag_or_jordan(rng, P)
    prof = hcalc.uniform_profile(A, hcalc.default_bank(np.arange(0, P["s_max"] + 1, 10)))
    qs = {"sup_M": q(prof.sup, "lower_bound")}
    return qs, {"profile": {"theta": prof.thetas.tolist(), "M": prof.M.tolist()}, "matrix": arr(A)}


def hcalc_blowup(rng, seed, P):
    A = _diag_or_jordan(rng, P)
    s = np.linspace(0, P["s_max"], 11)
    out = hcalc.blowup_test(A, s)
    fit = out["fit"]
    return {"slope": q(fit.slope), "r2": q(fit.r2), "max_ratio": q(np.max(out["ratios"])),
            "detected": q(float(out["detected"]))}, {"blowup": {"s": s.tolist(), "ratio": out["ratios"].tolist()}}


def spectral_mapping(rng, seed, P):
    d = int(rng.integers(1, P["max_dim"] + 1))
    V = np.eye(d) + 0.3 * complex_normal(rng, (d, d))
    lam = rng.uniform(0.2, 4.0, d) * np.exp(1j * rng.uniform(-1.0, 1.0, d))
    A = V @ np.diag(lam) @ np.linalg.inv(V)
    _, rep = hcalc.cl_rep(A, lambda z: np.exp(-z) + 1.0 / (1.0 + z))
    return {"max_error": q(rep.max_error), "resolvent_error": q(rep.resolvent_error)}, {"matrix": arr(A)}


def matnorm_hilbert(rng, seed, P):
    n = int(rng.integers(1, P["max_blocks"] + 1))
    d = int(rng.integers(1, P["max_dim"] + 1))
    M = matricial.OperatorBlockMatrix(lp(d, 2), complex_normal(rng, (n, n, d, d)))
    v = matricial.mat_r_norm(M).value
    f = float(np.linalg.norm(M.flatten(), 2))
    return {"mat_r_norm": q(v), "flattened": q(f), "deviation": q(abs(v - f))}, {"n": n, "d": d}


def alpha_hilbert(rng, seed, P):
    d = int(rng.integers(1, P["max_dim"] + 1))
    n = int(rng.integers(1, P["max_n"] + 1))
    est = matricial.alpha_constant(lp(d, 2), n, SearchConfig(4, 100, seed))
    return {"alpha": q(est.value, "lower_bound", seed=seed), "deviation": q(abs(est.value - 1))}, {"d": d, "n": n}


def basis_transfer(rng, seed, P):
    m = P["dim"]
    E = np.eye(m) + rng.standard_normal((m, m))
    p = _p(P["p"])
    r = density.transfer_basis(density.BasisFamily(E), p, cfg=SearchConfig(4, 100, seed),
                               density_cfg=density.DensityConfig(seed=seed, iterations=P["iterations"]))
    qs = {
        "constant_before": q(r.constant_before),
        "constant_after": q(r.constant_after),
        "achieved": q(r.achieved, "lower_bound", seed=seed),
        "certified": q(float(r.certified)),
    }
    if r.certificate.get("oracle") is not None:
        qs["oracle"] = q(r.certificate["oracle"])
    wit = {"route": r.route, "g": r.density.g.tolist(), "basis": E.tolist(),
           "trace": [[t["iteration"], t["objective"]] for t in r.trace]}
    return qs, wit


def phi_isometry(rng, seed, P):
    m = int(rng.integers(1, P["max_atoms"] + 1))
    p = float(rng.uniform(1.0, 6.0))
    atoms = density.AtomSpace(rng.uniform(0.1, 2.0, m))
    g = density.Density.from_masses(rng.uniform(0.01, 1.0, m), atoms)
    h = complex_normal(rng, m)
    a = atoms.lp(p).norm(h)
    b = g.space(p).norm(density.phi(p, g, h))
    return {"source_norm": q(a), "target_norm": q(b), "deviation": q(abs(a - b) / max(a, 1e-300))}, {"p": p, "m": m}


SUITES = {s.name: s for s in [
    Suite("radnorm-hilbert", radnorm_hilbert, {"max_dim": 8, "max_terms": 10}, 100),
    Suite("contraction", contraction, {"p": [1, 2, "inf"], "dim": 4, "max_terms": 10}, 60),
    Suite("rbound-oracle", rbound_oracle, {"max_dim": 4, "max_set": 4}, 20),
    Suite("thm-main-verify", thm_main_verify, {"max_dim": 4, "max_terms": 3}, 20),
    Suite("jordan-calculus", jordan_calculus, {"low": 0.5, "high": 3.0}, 10),
    Suite("hcalc-uniform", hcalc_uniform, {"matrix": "diag125", "max_dim": 4, "s_max": 50}, 1),
    Suite("hcalc-blowup", hcalc_blowup, {"matrix": "jordan", "max_dim": 4, "s_max": 50}, 1),
    Suite("spectral-mapping", spectral_mapping, {"max_dim": 6}, 50),
    Suite("matnorm-hilbert", matnorm_hilbert, {"max_blocks": 4, "max_dim": 4}, 50),
    Suite("alpha-hilbert", alpha_hilbert, {"max_dim": 4, "max_n": 4}, 16),
    Suite("basis-transfer", basis_transfer, {"dim": 2, "p": 4, "iterations": 200}, 10),
    Suite("phi-isometry", phi_isometry, {"max_atoms": 8}, 200),
]}


def get_suite(name):
    try:
        return SUITES[name]
    except KeyError:
        raise UnknownSuiteError(name) from None


class UnknownSuiteError(ConfigError):
    exit_code = 3

    def __init__(self, name):
        super().__init__(f"unknown suite {name!r}; available: {', '.join(sorted(SUITES))}")
