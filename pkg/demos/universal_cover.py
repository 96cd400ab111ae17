"""
When does a bounded stroke keep the body bounded?
=================================================

For one shape coordinate the answer depends on the lift of the stroke to
the universal cover. A damped oscillation has a bounded lift and the
trajectory stays inside an explicit radius. A stroke that winds around a
circle has a lift that keeps growing, and a synthetic field with nonzero
holonomy shows the body escaping.
"""

# %%
import numpy as np

from linswim.scenarios import builtin, run

damped = run(builtin("damped_stroke"), write=False)
print(damped.verdict.report())
print(f"trajectory diameter {damped.trajectory.diameter():.4f}  <=  witness {damped.verdict.witness:.4f}")

# %%
# The winding stroke makes ten loops. Every loop shifts the body by the same
# vector because the heading returns after each one.
wind = run(builtin("winding_stroke"), write=False)
print(wind.verdict.report())
q = wind.trajectory.q
loop = len(q) // 10
print("per-loop shifts:")
print(np.round(q[loop::loop, 1:] - q[:-loop:loop, 1:], 6))
