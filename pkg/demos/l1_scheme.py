"""The L1 discretization of the Caputo derivative and its convergence order."""

# %%
import numpy as np
from scipy.special import gamma

from fracdiffhom import TimeGrid, caputo_l1, rl_integral, verify_inverse_pair

# %% [markdown]
# For v(t) = t^2 the Caputo derivative of order a is 2 t^(2-a) / Gamma(3-a).
# On a uniform grid the L1 scheme should converge with order 2 - a.

# %%
for alpha in (0.3, 0.5, 0.7):
    errs = []
    for M in (64, 128, 256, 512):
        g = TimeGrid(1.0, M)
        exact = 2 * g.nodes ** (2 - alpha) / gamma(3 - alpha)
        errs.append(np.max(np.abs(caputo_l1(g.nodes**2, g, alpha) - exact)))
    orders = np.log2(np.array(errs[:-1]) / errs[1:])
    print(f"a = {alpha}: observed orders {np.round(orders, 3)} (expected {2 - alpha})")

# %% [markdown]
# The Riemann-Liouville integral is the inverse operation. Composing the two
# discrete operators recovers v - v(0) up to discretization error.

# %%
g = TimeGrid(1.0, 256)
print(verify_inverse_pair(0.5, g, np.sin(g.nodes)))
print(rl_integral(np.ones(len(g)), g, 0.5)[-1], 1 / gamma(1.5))
