"""Rademacher averages and R-bounds on small l^p spaces.

Run with ``python demos/01_rademacher_averages.py``.
"""
# %%
import numpy as np

from oplab import RadFamily, lp, r_bound, rad_norm
from oplab.spaces import OperatorMatrix

rng = np.random.default_rng(0)

# %% On l^2 the average over signs is just the l^2 sum of norms.
x = rng.standard_normal((5, 3))
print("l2 average :", rad_norm(RadFamily(lp(3, 2), x)).value)
print("sum of norms:", np.sqrt(np.sum(x**2)))

# %% On l^1 and l^inf it is not, and the gap grows with the family size.
for p in (1, np.inf):
    avg = rad_norm(RadFamily(lp(3, p), x)).value
    print(f"p={p}: average {avg:.4f}, sqrt(sum ||x_k||^2) {np.sqrt(np.sum(lp(3, p).norm(x) ** 2)):.4f}")

# %% A single operator has R-bound equal to its norm.
X = lp(3, 1)
T = OperatorMatrix.on(X, rng.standard_normal((3, 3)))
print("||T|| on l^1 :", np.abs(T.entries).sum(axis=0).max())
print("R({T})       :", r_bound([T]).value)

# %% Two coordinate projections on l^inf_2 have R-bound 1; swapping one for a rotation raises it.
P1 = OperatorMatrix.on(lp(2, np.inf), np.diag([1.0, 0.0]))
P2 = OperatorMatrix.on(lp(2, np.inf), np.diag([0.0, 1.0]))
c, s = np.cos(0.7), np.sin(0.7)
R = OperatorMatrix.on(lp(2, np.inf), np.array([[c, -s], [s, c]]))
print("R(P1, P2)      :", r_bound([P1, P2]).value)
print("R(P1, rotation):", r_bound([P1, R]).value)
