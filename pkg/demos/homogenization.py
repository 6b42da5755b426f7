"""Effective coefficients of periodic and layered media.

In 1D the effective coefficient is the harmonic mean of the cell coefficient.
For layered matrices (depending on y_1 only) there are closed forms for every
entry, which are checked here against the flux-average definition.
"""

# %%
import math

import numpy as np

from fracdiffhom import (
    LayeredMatrix,
    PeriodicCoefficient1D,
    arithmetic_mean,
    corrector_1d,
    harmonic_mean,
    homogenize_layered,
    verify_against_definition,
)

# %%
a = PeriodicCoefficient1D.sinusoid(2.0, 1.0)  # 2 + sin(2 pi y)
print("harmonic mean", harmonic_mean(a), "sqrt(3) =", math.sqrt(3))
print("arithmetic mean", arithmetic_mean(a))

lam = PeriodicCoefficient1D.two_phase((1.0, 3.0), 0.5)
print("laminate", harmonic_mean(lam))

# %% [markdown]
# The corrector chi solves the cell problem. For the laminate it is piecewise
# linear, with slopes -1/2 and +1/2 in the two phases.

# %%
corr = corrector_1d(lam, 11)
print(np.round(corr.chi, 4))

# %% {{{ layered 2x2 example
A = LayeredMatrix([[a, 0.5], [0.5, a]], 0.4, 3.6)
T = homogenize_layered(A)
print(T.matrix)
print("eigenvalues", T.eigenvalues(), "definition check", verify_against_definition(A, T))
# }}}
