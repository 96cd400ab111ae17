"""Hand-built fields for exercising the engine and the cover analysis."""

from __future__ import annotations

import numpy as np

from .engine import SwimmerField
from .se2 import frame_matrix


def zero_field(m: int = 1) -> SwimmerField:
    return SwimmerField(lambda q, s, sd: np.zeros(3), 0.0, ((-1.0, 1.0),) * m, "zero")


def constant_field(c, m: int = 1) -> SwimmerField:
    """World rate ``c * s'_1`` regardless of placement and shape."""
    c = np.asarray(c, dtype=float)
    return SwimmerField(lambda q, s, sd: c * sd[0], np.inf, ((0.5, 1.5),) * m, "constant")


def quadratic_field(c) -> SwimmerField:
    """Not a linear swimmer: rate ``c * (s'_1)^2``."""
    c = np.asarray(c, dtype=float)
    return SwimmerField(lambda q, s, sd: c * sd[0] ** 2, np.inf, ((0.5, 1.5),), "quadratic")


def holonomy_field(drift: float = 0.05, wobble: float = 0.3, sway: float = 0.1, turn: float = 0.2) -> SwimmerField:
    """Swimmer with one angular shape coordinate on the circle.

    Body-frame connection ``(turn sin s, drift (1 - cos s) + wobble sin s, sway sin s)``,
    which vanishes at ``s = 0``. The heading returns after every full turn of
    ``s`` while the position advances by a fixed step, so windings accumulate
    net motion.
    """

    def velocity(q, s, sd):
        a = np.angle(np.exp(1j * s[0]))
        body = np.array([turn * np.sin(a), drift * (1 - np.cos(a)) + wobble * np.sin(a), sway * np.sin(a)])
        return frame_matrix(q[0]) @ (body * sd[0])

    # 1 - cos s <= (pi / 2) |s| and |sin s| <= |s| on (-pi, pi]
    K = float(np.sqrt(turn**2 + (drift * np.pi / 2 + wobble) ** 2 + sway**2))
    return SwimmerField(velocity, K, ((-np.pi, np.pi),), "holonomy")


def two_mode_field(k: float = 0.5) -> SwimmerField:
    """Two shape coordinates with a non-integrable coupling (net motion on loops)."""

    def velocity(q, s, sd):
        body = np.array([
            k * (s[0] * sd[1] - s[1] * sd[0]),
            sd[0] + k * s[1] * sd[1],
            sd[1] - k * s[0] * sd[0],
        ])
        return frame_matrix(q[0]) @ body

    return SwimmerField(velocity, np.inf, ((-1.0, 1.0), (-1.0, 1.0)), "two-mode")
