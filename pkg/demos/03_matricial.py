"""Block operator matrices, the matricial R-norm and property (alpha)."""
# %%
import numpy as np

from oplab import lp
from oplab.matricial import OperatorBlockMatrix, alpha_constant, mat_r_norm
from oplab.rademacher import r_bound
from oplab.spaces import OperatorMatrix

rng = np.random.default_rng(3)

# %% On a Hilbert space the block norm is the norm of the flattened matrix.
M = OperatorBlockMatrix(lp(2, 2), rng.standard_normal((3, 3, 2, 2)))
print(mat_r_norm(M).value, np.linalg.norm(M.flatten(), 2))

# %% A diagonal block matrix recovers the R-bound of its blocks.
X = lp(3, 1)
blocks = [OperatorMatrix.on(X, rng.standard_normal((3, 3))) for _ in range(3)]
print("diagonal:", mat_r_norm(OperatorBlockMatrix.diagonal(blocks)).value)
print("R-bound :", r_bound(blocks).value)

# %% The alpha constant is 1 on Hilbert space and grows on l^1.
for p in (2, 1):
    for n in (1, 2, 3):
        print(f"p={p} n={n}: alpha >= {alpha_constant(lp(4, p), n).value:.4f}")
