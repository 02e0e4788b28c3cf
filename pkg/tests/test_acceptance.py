"""Acceptance criteria, each at its stated tolerance and time limit.

Run alone with ``python tests/test_acceptance.py`` or ``pytest tests/test_acceptance.py``;
one PASS/FAIL line per criterion is printed in the summary.
"""
from contextlib import contextmanager
import json
import math
import sys
import time

import numpy as np
import pytest

from oplab._rng import rng_for
from oplab.density import AtomSpace, BasisFamily, Density, phi, transfer_basis, unconditional_constant
from oplab.harness import ExperimentConfig, run_suite
from oplab.hcalc import AnalyticFn, cl_rep, contour_calc, fit_slope, power_is_ratios, spectral_calc
from oplab.matricial import OperatorBlockMatrix, alpha_constant, mat_r_norm
from oplab.rademacher import RadFamily, RBoundConfig, r_bound, rad_norm, rad_norms_batch
from oplab.spaces import INF, OperatorMatrix, SearchConfig, lp, op_norm, sign_patterns

from conftest import ACCEPTANCE_LINES, cnormal


@contextmanager
def criterion(number, title, limit):
    t = time.perf_counter()
    detail = {}
    try:
        yield detail
        elapsed = time.perf_counter() - t
        assert elapsed < limit, f"took {elapsed:.1f}s, limit {limit}s"
    except AssertionError as e:
        line = f"[{number:2d}] FAIL  {title}: {e}".splitlines()[0]
        ACCEPTANCE_LINES.append(line)
        print(line)
        raise
    extra = ", ".join(f"{k}={v}" for k, v in detail.items())
    line = f"[{number:2d}] PASS  {title} ({time.perf_counter() - t:.1f}s{', ' + extra if extra else ''})"
    ACCEPTANCE_LINES.append(line)
    print(line)


def test_01_hilbert_rademacher_isometry():
    with criterion(1, "Hilbert Rademacher isometry", 5) as out:
        rng = rng_for(1, "acceptance")
        worst = 0.0
        for _ in range(1000):
            d, k = int(rng.integers(1, 9)), int(rng.integers(1, 11))
            x = cnormal(rng, (k, d))
            v = rad_norm(RadFamily(lp(d, 2), x)).value
            worst = max(worst, abs(v - math.sqrt(float(np.sum(np.abs(x) ** 2)))))
        out["max_deviation"] = f"{worst:.1e}"
        assert worst <= 1e-12


def test_02_contraction_principle():
    with criterion(2, "Contraction principle", 10) as out:
        rng = rng_for(2, "acceptance")
        worst_real, worst_ratio = 0.0, 0.0
        for p in (1, 2, INF):
            X = lp(4, p)
            for k in range(1, 11):
                for _ in range(3):
                    x = cnormal(rng, (k, 4))
                    base = rad_norms_batch(X, x)
                    S = sign_patterns(k, half=False)
                    signed = rad_norms_batch(X, S[:, :, None] * x[None])
                    worst_real = max(worst_real, float(np.max(np.abs(signed - base))) / base)
                    a = rng.random((64, k)) * np.exp(2j * np.pi * rng.random((64, k)))
                    a[:8] = np.exp(2j * np.pi * rng.random((8, k)))
                    scaled = rad_norms_batch(X, a[:, :, None] * x[None])
                    worst_ratio = max(worst_ratio, float(np.max(scaled / (np.max(np.abs(a), axis=1) * base))))
        out["real_dev"] = f"{worst_real:.1e}"
        out["max_complex_ratio"] = f"{worst_ratio:.3f}"
        assert worst_real <= 1e-12
        assert worst_ratio <= 2.0


def test_03_r_bound_oracles():
    with criterion(3, "R-bound oracles", 60) as out:
        rng = rng_for(3, "acceptance")
        cfg = RBoundConfig(sizes=(1, 2, 4), restarts=4, iterations=120)
        worst_single = 0.0
        for i in range(20):
            p = [1, 1.5, 3, INF][i % 4]
            X = lp(int(rng.integers(2, 5)), p)
            T = OperatorMatrix.on(X, cnormal(rng, (X.dim, X.dim)))
            ref = op_norm(T, SearchConfig(64, 1000, seed=99)).value
            worst_single = max(worst_single, abs(r_bound([T], cfg).value - ref) / ref)
        worst_h = 0.0
        for _ in range(100):
            d, m = int(rng.integers(1, 5)), int(rng.integers(1, 5))
            X = lp(d, 2)
            tau = [OperatorMatrix.on(X, cnormal(rng, (d, d))) for _ in range(m)]
            top = max(op_norm(T).value for T in tau)
            worst_h = max(worst_h, abs(r_bound(tau, cfg).value - top) / top)
        out["singleton_gap"] = f"{worst_single:.1e}"
        out["hilbert_gap"] = f"{worst_h:.1e}"
        assert worst_single <= 0.01
        assert worst_h <= 0.02


def test_04_extension_inequality():
    with criterion(4, "Tensor extension inequality on 200 instances", 300) as out:
        recs = list(run_suite(ExperimentConfig("thm-main-verify", seed=4, instances=200)))
        kinds = {}
        for r in recs:
            k = r.witnesses["kind"]
            kinds[k] = kinds.get(k, 0) + 1
        violations = sum(r.quantities["violation"]["value"] for r in recs)
        out["kinds"] = json.dumps(kinds, sort_keys=True)
        out["violations"] = int(violations)
        assert len(recs) == 200
        assert violations == 0


BANK = [
    AnalyticFn.rational([0], [-1, -1], 4.0),
    AnalyticFn.rational([0], [-2, -2], 1.0),
    AnalyticFn.rational([0, 0], [-1, -1, -1], 1.0),
    AnalyticFn.rational([0], [-1 + 1j, -1 - 1j], 1.0),
]


def test_05_contour_calculus():
    with criterion(5, "Contour vs spectral calculus", 120) as out:
        rng = rng_for(5, "acceptance")
        worst = 0.0
        for i in range(100):
            d = int(rng.integers(1, 7))
            V = np.eye(d) + 0.3 * cnormal(rng, (d, d))
            lam = rng.uniform(0.1, 10, d) * np.exp(1j * rng.uniform(-0.7, 0.7, d))
            A = V @ np.diag(lam) @ np.linalg.inv(V)
            f = BANK[i % len(BANK)]
            worst = max(worst, float(np.max(np.abs(contour_calc(f, A).matrix - spectral_calc(f, A)))))
        J = contour_calc(BANK[1], np.array([[1.0, 1.0], [0.0, 1.0]])).matrix
        jerr = float(np.max(np.abs(J - np.array([[1 / 9, 1 / 27], [0, 1 / 9]]))))
        out["max_deviation"] = f"{worst:.1e}"
        out["jordan_error"] = f"{jerr:.1e}"
        assert worst <= 1e-8
        assert jerr <= 1e-8


def test_06_uniform_calculus_dichotomy():
    with criterion(6, "Uniform calculus dichotomy", 60) as out:
        s = np.linspace(0, 50, 26)
        diag = power_is_ratios(np.diag([1.0, 2.0, 5.0]), s)
        jordan = power_is_ratios(np.array([[1.0, 1.0], [0.0, 1.0]]), s)
        fit = fit_slope(s, jordan)
        out["diag_max_over_s0"] = f"{np.max(diag) / diag[0]:.4f}"
        out["jordan_slope"] = f"{fit.slope:.4f}"
        out["r2"] = f"{fit.r2:.5f}"
        assert np.max(diag) < 1.1 * diag[0]
        assert fit.slope > 0 and fit.r2 > 0.99


def test_07_spectral_mapping():
    with criterion(7, "Spectral mapping", 30) as out:
        rng = rng_for(7, "acceptance")
        worst = 0.0
        for _ in range(100):
            d = int(rng.integers(1, 7))
            V = np.eye(d) + 0.3 * cnormal(rng, (d, d))
            lam = rng.uniform(0.1, 10, d) * np.exp(1j * rng.uniform(-1.2, 1.2, d))
            A = V @ np.diag(lam) @ np.linalg.inv(V)
            _, rep = cl_rep(A, lambda z: np.exp(-z) + 1 / (1 + z))
            worst = max(worst, rep.max_error)
        out["max_error"] = f"{worst:.1e}"
        assert worst <= 1e-9


def test_08_matricial_norm_oracle():
    with criterion(8, "Matricial norm oracle", 60) as out:
        rng = rng_for(8, "acceptance")
        worst = 0.0
        for _ in range(50):
            n, d = int(rng.integers(1, 5)), int(rng.integers(1, 5))
            M = OperatorBlockMatrix(lp(d, 2), cnormal(rng, (n, n, d, d)))
            worst = max(worst, abs(mat_r_norm(M).value - np.linalg.norm(M.flatten(), 2)))
        worst_diag = 0.0
        for i in range(9):
            X = lp(3, [1, 3, INF][i % 3])
            bs = [OperatorMatrix.on(X, rng.standard_normal((3, 3))) for _ in range(int(rng.integers(2, 4)))]
            a = mat_r_norm(OperatorBlockMatrix.diagonal(bs)).value
            b = r_bound(bs).value
            worst_diag = max(worst_diag, abs(a - b) / b)
        out["flatten_dev"] = f"{worst:.1e}"
        out["diag_gap"] = f"{worst_diag:.1e}"
        assert worst <= 1e-8
        assert worst_diag <= 0.02


def test_09_alpha_hilbert():
    with criterion(9, "Property (alpha) constant on Hilbert spaces", 120) as out:
        worst = 0.0
        for d in range(1, 5):
            for n in range(1, 5):
                worst = max(worst, abs(alpha_constant(lp(d, 2), n).value - 1.0))
        out["max_deviation"] = f"{worst:.1e}"
        assert worst <= 0.01


def test_10_change_of_density_and_transfer():
    with criterion(10, "Change of density and basis transfer", 120) as out:
        rng = rng_for(10, "acceptance")
        worst = 0.0
        for _ in range(1000):
            m = int(rng.integers(1, 9))
            p = float(rng.uniform(1, 8))
            atoms = AtomSpace(rng.uniform(0.05, 3, m))
            g = Density.from_masses(rng.uniform(0.001, 1, m), atoms)
            h = cnormal(rng, m)
            a = atoms.lp(p).norm(h)
            worst = max(worst, abs(g.space(p).norm(phi(p, g, h)) - a) / a)
        skew = unconditional_constant(BasisFamily(np.array([[1.0, 1.0], [0.0, 1.0]])), lp(2, 2)).value
        gaps = []
        for i in range(9):
            E = np.eye(2) + rng.standard_normal((2, 2))
            r = transfer_basis(BasisFamily(E), [1.5, 3, 4][i % 3])
            gaps.append(abs(r.achieved - r.certificate["oracle"]) / r.certificate["oracle"])
        out["isometry_dev"] = f"{worst:.1e}"
        out["skew_err"] = f"{abs(skew - 1 - math.sqrt(2)):.1e}"
        out["transfer_gap"] = f"{max(gaps):.1e}"
        assert worst <= 1e-12
        assert abs(skew - (1 + math.sqrt(2))) <= 1e-6
        assert max(gaps) <= 0.05


def test_11_determinism_across_threads():
    with criterion(11, "Determinism at 1 and 8 threads", 120) as out:
        for suite, n in [("thm-main-verify", 8), ("rbound-oracle", 6), ("basis-transfer", 3), ("alpha-hilbert", 4)]:
            cfg = ExperimentConfig(suite, seed=11, instances=n)
            t = time.perf_counter()
            one = [r.quantity_fields() for r in run_suite(cfg.with_flags(threads=1))]
            t1 = time.perf_counter() - t
            t = time.perf_counter()
            eight = [r.quantity_fields() for r in run_suite(cfg.with_flags(threads=8))]
            t8 = time.perf_counter() - t
            assert json.dumps(one, sort_keys=True) == json.dumps(eight, sort_keys=True), f"{suite} differs"
            assert t8 < 2 * t1 + 1.0, f"{suite}: 8 threads took {t8:.1f}s vs {t1:.1f}s"
        out["suites"] = 4


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
