"""
Swimming next to a wall
=======================

The same reciprocal stroke does produce motion in an ideal fluid once a
fixed obstacle breaks the symmetry. The built-in scenario places a thin
rectangle to the left of the scallop, whose hinge points toward it.
"""

# %%
import numpy as np

from linswim.scenarios import builtin, run

sc = builtin("scallop_obstacle")
print(sc.description)
print("stroke:", sc.waveform.describe(), "about", sc.waveform.rest)

# %%
# The second-order dynamics are integrated until the horizon or until the
# gap to the obstacle closes. This takes a little while.
res = run(sc, write=False)
for row in res.summary["per_stroke"]:
    print(f"stroke {row['stroke']}: dx = {row['dx']:+.4f}   dy = {row['dy']:+.1e}")
print("status:", res.trajectory.status, "at t =", round(float(res.trajectory.t[-1]), 3))

# %%
# Each stroke moves the body further left than the one before, and the run
# ends in contact.
dx = np.array([row["dx"] for row in res.summary["per_stroke"]])
print("leftward every stroke:", bool(np.all(dx < 0)))
print("accelerating:", bool(np.all(np.diff(np.abs(dx)) > 0)))
