"""Moving between the periodic and the homogenized descriptions.

From data of the oscillating model, recover the effective coefficient. From
data of the homogenized model, recover a member of an ordered periodic family.
"""

# %%
import math

from fracdiffhom import (
    ForwardModel,
    IntervalDomain,
    PeriodicCoefficient1D,
    Point,
    RecoverySpec,
    cross_recover_homogenized,
    cross_recover_periodic,
    forward_data,
    sandwich_check,
)

# %%
a = PeriodicCoefficient1D.sinusoid(2.0, 1.0)
for row in cross_recover_homogenized(a, [1 / 4, 1 / 8, 1 / 16]):
    print(f"eps = {row['epsilon']:<8g} a0_hat = {row['a0_hat']:.8f} error {row['error']:.2e}")


# %% [markdown]
# The family s -> s + sin(2 pi y) has a0(s) = sqrt(s^2 - 1), which increases with s.

# %%
def family(s):
    return PeriodicCoefficient1D.sinusoid(s, 1.0)


model = ForwardModel(IntervalDomain(math.pi), 0.5, (-1.0,))
obs = Point(math.pi / 2, 1.0)
probe = RecoverySpec(model, obs, 0.0, 0.5, 4.0)
spec = RecoverySpec(model, obs, forward_data(math.sqrt(3.0), probe), 0.5, 4.0, 1e-12)
out = cross_recover_periodic(family, (1.5, 4.0), spec, nu=0.5, mu=5.0)
print("s_hat", out["s_hat"])

# %%
band = sandwich_check(family(3.0), family(2.0), nu=1.0, mu=4.0)
print(f"{band['lower']:.4f} <= {band['gap']:.4f} <= {band['upper']:.1f}")
