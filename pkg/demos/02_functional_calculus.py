"""Contour functional calculus for sectorial matrices.

A diagonalizable matrix has a uniformly bounded calculus; a Jordan block
does not, and the imaginary-power family shows it.
"""
# %%
import numpy as np

from oplab.hcalc import AnalyticFn, blowup_test, contour_calc, spectral_calc, uniform_profile

f = AnalyticFn.rational([0], [-2, -2])  # lambda / (2 + lambda)^2

# %% Contour quadrature against the eigen-decomposition.
A = np.array([[1.0, 0.4, 0.0], [0.0, 2.0, 0.3], [0.0, 0.0, 5.0]])
res = contour_calc(f, A)
print("quadrature vs spectral:", np.abs(res.matrix - spectral_calc(f, A)).max())
print("error estimate        :", res.error, "panels", res.panels)

# %% The Jordan block is handled by the contour too.
J = np.array([[1.0, 1.0], [0.0, 1.0]])
print(contour_calc(f, J).matrix.real.round(12))

# %% Sup of ||f(A)|| / ||f||_theta over a function bank, as theta shrinks.
for name, M in [("diag(1,2,5)", np.diag([1.0, 2.0, 5.0])), ("jordan", J)]:
    prof = uniform_profile(M)
    print(name, " ".join(f"{t:.3f}:{m:.3f}" for t, m in zip(prof.thetas, prof.M)))

# %% Growth in s of the lambda^{is} family.
for name, M in [("diag(1,2,5)", np.diag([1.0, 2.0, 5.0])), ("jordan", J)]:
    b = blowup_test(M)
    print(f"{name}: slope {b['fit'].slope:.3f}  r2 {b['fit'].r2:.4f}  blow-up {b['detected']}")
