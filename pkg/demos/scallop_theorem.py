"""
Reciprocal strokes go nowhere
=============================

A scallop that opens and closes its hinge along the same path cannot swim
in free space. This script checks it for both fluid models and shows that
the speed of the stroke plays no role at low Reynolds number.
"""

# %%
# Setup
# -----
# The opening angle oscillates about a right angle with amplitude pi/3.
import numpy as np

from linswim import Pose, ShapePath, ScallopGeometry, highre_swimmer, integrate, lowre_swimmer
from linswim.lowre import ALPHA_REST

A = np.pi / 3


def stroke(phi, dphi):
    return ShapePath(lambda t: (ALPHA_REST + A * np.cos(phi(t)), -A * np.sin(phi(t)) * dphi(t)), 2 * np.pi)


q0 = Pose(0.3, (1.0, -0.5))

# %%
# Low Reynolds number
# -------------------
# Three time profiles of the same stroke. Each one ends exactly where it
# started, so the final poses also agree with each other.
viscous = lowre_swimmer(tabulate=True)
profiles = {
    "uniform": (lambda t: t, lambda t: 1.0),
    "lazy start": (lambda t: t + 0.5 * np.sin(t), lambda t: 1 + 0.5 * np.cos(t)),
    "double beat": (lambda t: t - 0.3 * np.sin(2 * t), lambda t: 1 - 0.6 * np.cos(2 * t)),
}
for name, (phi, dphi) in profiles.items():
    tr = integrate(viscous, stroke(phi, dphi), q0, 1e-3)
    print(f"{name:12s} max |x| reached {np.abs(tr.q[:, 1] - q0.r[0]).max():.4f}   net {np.abs(tr.displacement()).max():.1e}")

# %%
# Ideal fluid
# -----------
# In potential flow the body still moves during the stroke and still comes
# back. The connection is tabulated once from panel solves.
inviscid = highre_swimmer(ScallopGeometry(panel_count=64))
tr = integrate(inviscid, stroke(lambda t: t, lambda t: 1.0), q0, 2 * np.pi / 200)
print(f"ideal fluid  max |x| reached {np.abs(tr.q[:, 1] - q0.r[0]).max():.4f}   net {np.abs(tr.displacement()).max():.1e}")
