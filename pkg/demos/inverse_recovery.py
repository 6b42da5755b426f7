"""Recovering a diffusion coefficient from a single observation.

If Laplacian(u0) >= 0, the solution at a fixed point grows with p, so a
bracketing search inverts the data map. A long trace at one point also works:
its t^-a tail carries p directly.
"""

# %%
import math

import numpy as np

from fracdiffhom import (
    ForwardModel,
    IntervalDomain,
    Point,
    RecoverySpec,
    Trace,
    counterexample_demo,
    forward_data,
    observe,
    recover_from_trace,
    recover_monotone,
    spectral_solve,
)

# %%
model = ForwardModel(IntervalDomain(math.pi), alpha=0.5, u0=(-1.0,))
obs = Point(math.pi / 2, 1.0)
probe = RecoverySpec(model, obs, 0.0, nu=0.5, mu=3.0)
for p_true in (0.7, 1.7, 2.9):
    spec = RecoverySpec(model, obs, forward_data(p_true, probe), 0.5, 3.0)
    res = recover_monotone(spec)
    print(f"p* = {p_true}: p_hat = {res.p_hat:.10f} in {res.iterations} iterations, "
          f"1/h' = {res.stability_estimate:.3g}")

# %% [markdown]
# Long-time trace at x0 = pi/2, fitted on t in [50, 500].

# %%
times = np.linspace(50, 500, 200)
trace = observe(spectral_solve(IntervalDomain(math.pi), 1.3, 0.5, [-1.0]), Trace(math.pi / 2, tuple(times)))
res = recover_from_trace(times, trace, [-1.0], math.pi / 2, 0.5)
print(res.p_hat, res.extra["contamination_bound"])

# %% [markdown]
# The trace alone does not fix p when u0 is unknown. Here (p, u0) = (1, phi_1)
# and (1/4, phi_2) give identical traces at x0 = pi/3.

# %%
demo = counterexample_demo()
print(demo["max_difference"], demo["P1_u0q_at_x0"])
