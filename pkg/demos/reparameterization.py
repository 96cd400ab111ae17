"""
Only the shape path matters
===========================

Replaying a stroke with any time change, even one that runs backwards for
a while, reproduces the original trajectory composed with that time change.
A flapping time change that stays inside ``[0, T]`` cannot carry the body
further than the quadrature bound ``K * int |s| |s'|``.
"""

# %%
import numpy as np

from linswim import Pose, ShapePath, integrate, lowre_swimmer, reparameterize
from linswim.engine import flapping_bound
from linswim.lowre import ALPHA_REST

field = lowre_swimmer(tabulate=True)
T = 2.5
base = ShapePath(lambda t: (ALPHA_REST + np.pi / 3 * np.cos(t), -np.pi / 3 * np.sin(t)), T)
ref = integrate(field, base, Pose(), 1e-3)

# %%
# A non-monotone time change: forward, back, then forward again.
def beta(t):
    return T * np.sin(t) ** 2


def dbeta(t):
    return T * np.sin(2 * t)


horizon = 12.0
flap = integrate(field, reparameterize(base, beta, dbeta, horizon=horizon), Pose(), 1e-3)
gap = np.abs(flap.q - ref.at(beta(flap.t))).max()
print(f"sup |q_beta - q o beta| = {gap:.2e}")

# %%
print(f"diameter {flap.diameter():.4f}   bound {flapping_bound(field, base, T):.4f}")
