"""Evaluating the Mittag-Leffler relaxation kernel E_a(-x).

Three routes are used depending on the argument: the power series near the
origin, an integral representation in the middle range and the algebraic
expansion for large x. This script walks through each one and checks it against
closed forms.
"""

# %%
import math

import numpy as np
from scipy.special import erfcx

from fracdiffhom import ml, ml_asymptotic, ml_series

# %% [markdown]
# For a = 1/2 there is a closed form, E_{1/2}(-x) = exp(x^2) erfc(x), which
# scipy exposes as erfcx. It makes a good independent check across all three routes.

# %%
x = np.array([0.3, 1.0, 4.0, 30.0, 1e4])
rel = np.abs(ml(-x, 0.5) / erfcx(x) - 1)
for xi, r in zip(x, rel):
    print(f"x = {xi:<8g} rel. error vs erfcx: {r:.1e}")

# %% [markdown]
# For a = 1 the function is the exponential.

# %%
z = np.linspace(-30, 0, 7)
print(np.max(np.abs(ml(z, 1.0) / np.exp(z) - 1)))

# %% [markdown]
# Far out, the kernel decays like x^-1 / Gamma(1 - a) rather than
# exponentially. That heavy tail is what the long-time trace recovery relies on.

# %%
for alpha in (0.3, 0.5, 0.8):
    lead, omitted = ml_asymptotic(alpha, 1e3, 1)
    print(f"a = {alpha}: E(-1000) = {ml(-1e3, alpha):.6e}, leading term {lead:.6e}")

# %%
# the raw series is only trusted for |z| <= 1 on the negative axis
print(ml_series(0.5, -1.0), math.exp(1) * math.erfc(1))
