"""``oplab`` command line interface."""
import argparse
import json
import os
import sys

import numpy as np

from .. import density, hcalc, matricial, rademacher, representation
from ..spaces import INF, DimensionError, OperatorMatrix, SearchConfig, lp, weighted_atoms
from .config import ConfigError, _parse_seed, resolve
from .report import emit_report
from .runner import run_suite
from .suites import arr, get_suite

EXIT_MISSING = 4
EXIT_INPUT = 5


def parse_matrix(obj):
    """Nested lists (real), ``{"re": [[..]], "im": [[..]]}`` or ``{"rows", "cols", "re", "im"}``."""
    if isinstance(obj, dict):
        if "rows" in obj:
            return representation.matrix_from_dict(obj)
        re = np.asarray(obj["re"], dtype=float)
        return re + 1j * np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    return np.asarray(obj, dtype=complex)


def _p(v):
    return INF if str(v).lower() in ("inf", "infinity") else float(v)


def _space(args, n):
    if args.mu:
        return weighted_atoms(n, _p(args.p), [float(v) for v in args.mu.split(",")])
    return lp(n, _p(args.p))


def _load(path):
    if not path:
        raise ValueError("this command needs --input")
    with open(path) as fh:
        return json.load(fh)


def _seed(args):
    if args.seed is not None:
        return args.seed
    if os.environ.get("OPLAB_SEED"):
        return _parse_seed(os.environ["OPLAB_SEED"])
    return 0


def _search(args, restarts=16, iterations=300):
    cfg = SearchConfig(restarts, iterations, _seed(args))
    if args.budget_ms:
        cfg = cfg.scaled(min(10.0, max(0.1, args.budget_ms / 1000.0)))
    return cfg


def _emit(args, payload, rows=None):
    if args.format == "csv" and rows is not None:
        text = "\n".join(",".join(str(v) for v in r) for r in rows) + "\n"
    else:
        text = json.dumps(payload, indent=2, sort_keys=True, default=_default) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _default(o):
    if isinstance(o, np.ndarray):
        return arr(o)
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    return str(o)


# -- subcommands -------------------------------------------------------------


def cmd_radnorm(args):
    if args.input:
        x = parse_matrix(_load(args.input)["vectors"])
    else:
        rng = np.random.default_rng(_seed(args))
        x = rng.standard_normal((args.k, args.dim)) + 1j * rng.standard_normal((args.k, args.dim))
    X = _space(args, x.shape[1])
    cfg = rademacher.AverageConfig(mode=args.mode, seed=_seed(args))
    v = rademacher.rad_norm(rademacher.RadFamily(X, x), cfg)
    g = rademacher.gauss_norm(rademacher.RadFamily(X, x), cfg)
    _emit(args, {"rad_norm": v.value, "stderr": v.stderr, "mode": v.mode, "seed": v.seed,
                 "gauss_norm": g.value, "gauss_stderr": g.stderr})


def cmd_rbound(args):
    data = _load(args.input)
    mats = [parse_matrix(m) for m in data["operators"]]
    X = _space(args, mats[0].shape[0])
    s = _search(args)
    cfg = rademacher.RBoundConfig(sizes=tuple(args.sizes), seed=s.seed, op_config=s)
    est = rademacher.r_bound([OperatorMatrix.on(X, m) for m in mats], cfg)
    _emit(args, {"r_hat": est.value, "kind": est.kind, "assignment": est.assignment,
                 "witness_vectors": est.vectors, "trace": est.trace})


def cmd_rep_verify(args):
    data = _load(args.input)
    u = representation.FiniteRepresentation.from_dict(data["representation"])
    x = representation.RTensor(parse_matrix(data["functions"]), np.array([parse_matrix(b) for b in data["operators"]]))
    s = _search(args)
    cfg = rademacher.RBoundConfig(sizes=tuple(args.sizes), seed=s.seed, op_config=s)
    r = representation.verify_extension(u, x, cfg)
    _emit(args, {"lhs": r.lhs, "u_norm": r.u_norm, "r_norm": r.r_norm, "rhs": r.rhs,
                 "violation": bool(r.violation), "escalations": r.escalations})


def _matrix_arg(args):
    if args.matrix:
        return parse_matrix(json.loads(args.matrix))
    return parse_matrix(_load(args.input)["matrix"])


def cmd_hcalc(args):
    A = _matrix_arg(args)
    f = hcalc.parse_preset(args.fn)
    res = hcalc.contour_calc(f, A, tol=args.tol)
    out = {"matrix": res.matrix, "error": res.error, "quadrature_error": res.quad_error,
           "truncation_error": res.trunc_error, "panels": res.panels}
    try:
        out["spectral"] = hcalc.spectral_calc(f, A)
    except hcalc.SectorialError:
        pass
    _emit(args, out)


def cmd_uniform_profile(args):
    A = _matrix_arg(args)
    prof = hcalc.uniform_profile(A)
    _emit(args, {"theta": prof.thetas, "M": prof.M, "functions": prof.names},
          [["theta", "M"]] + [[t, m] for t, m in zip(prof.thetas, prof.M)])


def cmd_matnorm(args):
    data = _load(args.input)
    blocks = np.array([[parse_matrix(b) for b in row] for row in data["blocks"]])
    M = matricial.OperatorBlockMatrix(_space(args, blocks.shape[-1]), blocks)
    e = matricial.mat_r_norm(M, _search(args))
    _emit(args, {"mat_r_norm": e.value, "kind": e.kind, "witness": e.witness})


def cmd_alpha(args):
    est = matricial.alpha_constant(_space(args, args.dim), args.n, _search(args, 8, 200), real=args.real)
    _emit(args, {"alpha": est.value, "kind": est.kind, "t": est.t, "x": est.x})


def cmd_density(args):
    data = _load(args.input)
    mats = [parse_matrix(m) for m in data["operators"]]
    X = _space(args, mats[0].shape[0])
    res = density.density_search([OperatorMatrix.on(X, m) for m in mats], density.DensityConfig(seed=_seed(args)))
    _emit(args, {"g": res.density.g, "achieved": res.achieved, "oracle": res.oracle, "certified": res.certified,
                 "trace": res.trace},
          [["iteration", "objective"]] + [[t["iteration"], t["objective"]] for t in res.trace])


def cmd_basis_transfer(args):
    data = _load(args.input)
    E = parse_matrix(data["basis"])
    mu = data.get("mu") or ([float(v) for v in args.mu.split(",")] if args.mu else None)
    r = density.transfer_basis(density.BasisFamily(E), _p(args.p), mu, _search(args, 8, 200),
                               density.DensityConfig(seed=_seed(args)))
    _emit(args, {"g": r.density.g, "constant_before": r.constant_before, "constant_after": r.constant_after,
                 "achieved": r.achieved, "route": r.route, "certificate": r.certificate,
                 "transferred": r.transferred.vectors})


def cmd_suite(args):
    flags = {"seed": args.seed, "out": args.out, "budget_ms": args.budget_ms,
             "threads": args.threads, "instances": args.instances}
    cfg = resolve(args.config, args.name, **flags)
    if cfg.out is None:
        cfg = cfg.with_flags(out=os.path.join("results", f"{cfg.suite}.jsonl"))
    get_suite(cfg.suite)
    n = 0
    for rec in run_suite(cfg):
        n += 1
        if args.verbose:
            vals = ", ".join(f"{k}={v['value']:.6g}" for k, v in rec.quantities.items())
            print(f"[{rec.instance}] {vals}")
    print(f"{cfg.suite}: {n} records in {cfg.out}")


def cmd_report(args):
    out = args.out or os.path.splitext(args.log)[0] + "_report"
    for path in emit_report(args.log, out, args.format):
        print(path)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI experiment config")
    common.add_argument("--seed", type=_parse_seed, help="unsigned 64-bit seed")
    common.add_argument("--budget-ms", type=int, default=0, help="time budget in milliseconds")
    common.add_argument("--out", help="output path")
    common.add_argument("--format", choices=("csv", "jsonl"), default="jsonl")

    space = argparse.ArgumentParser(add_help=False)
    space.add_argument("--p", default="2", help="exponent (a number or inf)")
    space.add_argument("--mu", help="comma-separated atom weights")

    io = argparse.ArgumentParser(add_help=False)
    io.add_argument("--input", help="JSON input file")

    parser = argparse.ArgumentParser(prog="oplab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("radnorm", parents=[common, space, io], help="Rademacher and Gaussian averages")
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--mode", choices=("auto", "exact", "monte_carlo"), default="auto")
    p.set_defaults(func=cmd_radnorm)

    for name, func, parents, text in [
        ("rbound", cmd_rbound, [common, space, io], "lower bound of an R-bound"),
        ("rep-verify", cmd_rep_verify, [common, io], "check the tensor extension inequality"),
    ]:
        p = sub.add_parser(name, parents=parents, help=text)
        p.add_argument("--sizes", type=int, nargs="+", default=[1, 2, 4, 8])
        p.set_defaults(func=func)

    for name, func, text in [("hcalc", cmd_hcalc, "contour functional calculus f(A)"),
                             ("uniform-profile", cmd_uniform_profile, "calculus bound profile over angles")]:
        p = sub.add_parser(name, parents=[common, io], help=text)
        p.add_argument("--matrix", help='matrix as JSON, e.g. "[[1,1],[0,1]]"')
        if name == "hcalc":
            p.add_argument("--fn", default="rational:zeros=0;poles=-2,-2;scale=1")
            p.add_argument("--tol", type=float, default=1e-10)
        p.set_defaults(func=func)

    p = sub.add_parser("matnorm", parents=[common, space, io], help="matricial R-norm of a block matrix")
    p.set_defaults(func=cmd_matnorm)
    p = sub.add_parser("alpha", parents=[common, space], help="property (alpha) constant")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--real", action="store_true", help="restrict multipliers to signs")
    p.set_defaults(func=cmd_alpha)
    p = sub.add_parser("density", parents=[common, space, io], help="density search for an operator family")
    p.set_defaults(func=cmd_density)
    p = sub.add_parser("basis-transfer", parents=[common, space, io], help="transfer a basis to weighted L^2")
    p.set_defaults(func=cmd_basis_transfer)

    p = sub.add_parser("suite", parents=[common], help="run a named suite")
    p.add_argument("name", nargs="?")
    p.add_argument("--threads", type=int)
    p.add_argument("--instances", type=int)
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("report", parents=[common], help="render CSV from a result log")
    p.add_argument("log")
    p.set_defaults(func=cmd_report, format="csv")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ConfigError as e:
        print(f"oplab: {e}", file=sys.stderr)
        return e.exit_code
    except FileNotFoundError as e:
        print(f"oplab: {e}", file=sys.stderr)
        return EXIT_MISSING
    except (ValueError, KeyError, DimensionError) as e:
        print(f"oplab: invalid input: {e}", file=sys.stderr)
        return EXIT_INPUT
    return 0


if __name__ == "__main__":
    sys.exit(main())
