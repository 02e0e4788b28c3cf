"""Change of density and transfer of a basis to a weighted l^2 setting."""
# %%
import numpy as np

from oplab import lp
from oplab.density import AtomSpace, BasisFamily, Density, phi, transfer_basis, unconditional_constant

rng = np.random.default_rng(4)

# %% The multiplication h -> g^{-1/p} h is an isometry onto L^p(g mu).
atoms = AtomSpace(np.array([0.5, 1.0, 2.0]))
g = Density.from_masses(np.array([0.2, 0.3, 0.5]), atoms)
h = rng.standard_normal(3)
print(atoms.lp(3).norm(h), g.space(3).norm(phi(3, g, h)))

# %% A skewed basis of l^2_2 has unconditional constant 1 + sqrt(2).
skew = BasisFamily(np.array([[1.0, 1.0], [0.0, 1.0]]))
print(unconditional_constant(skew, lp(2, 2)).value, 1 + np.sqrt(2))

# %% Searching a density that makes the basis as close to orthogonal as possible.
for p in (1.5, 4):
    r = transfer_basis(skew, p)
    print(f"p={p} route={r.route}: before {r.constant_before:.4f} after {r.constant_after:.4f}"
          f" objective {r.achieved:.4f} oracle {r.certificate['oracle']:.4f} certified {r.certified}")
