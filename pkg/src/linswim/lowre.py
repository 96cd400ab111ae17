"""Low-Reynolds swimmers by resistive-force theory.

Each link is a straight slender segment with drag density
``mu * (c_t t t^T + c_n n n^T)``. Force balance on the whole swimmer gives
``Mr(s) xi + N(s) s' = 0`` for the body twist ``xi``, hence the world rate
``q' = -frame(theta) Mr^{-1} N s'``.

Near a wall the normal drag of each link element is amplified by
``1 + kappa * L / gap``, switched off smoothly beyond ``cutoff * L``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .engine import ShapeRangeError, SwimmerField, TabulatedConnection, connection_field, estimate_bound
from .geometry import BodyBoundary, ScallopGeometry, scallop_arms, _points_to_segments
from .se2 import Pose, frame_matrix, perp

ALPHA_REST = np.pi / 2
STROKE_LIMIT = np.pi / 3
WALL_KAPPA = 0.5


class SingularAssemblyError(np.linalg.LinAlgError):
    """The assembled resistance matrix is not safely positive definite."""


class ProximityError(RuntimeError):
    """A link came closer to the wall than the allowed gap."""


@dataclass(frozen=True)
class LinkPlacement:
    """Link center and direction in the body frame, with per-mode twists (m, 3)."""

    center: np.ndarray
    angle: float
    twists: np.ndarray


@dataclass(frozen=True)
class LinkSpec:
    """A slender link; ``attachment(s)`` places it in the body frame."""

    length: float
    attachment: Callable[[np.ndarray], LinkPlacement]
    c_t: float = 1.0
    c_n: float = 2.0

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError(f"link length must be positive, got {self.length}")
        if not 0 < self.c_t <= self.c_n:
            raise ValueError(f"need 0 < c_t <= c_n, got c_t={self.c_t}, c_n={self.c_n}")


@dataclass(frozen=True)
class GrandMatrices:
    """Rigid matrix ``Mr`` (3 x 3) and shape coupling ``N`` (3 x m)."""

    Mr: np.ndarray
    N: np.ndarray

    def connection(self) -> np.ndarray:
        """Body twist per unit shape rate: ``-Mr^{-1} N``."""
        return -np.linalg.solve(self.Mr, self.N)


def _rigid_fields(center, tangent):
    """Unit rigid velocity fields along a link as (value at center, slope in arclength)."""
    u0 = np.stack([perp(center), [1.0, 0.0], [0.0, 1.0]])
    u1 = np.stack([perp(tangent), [0.0, 0.0], [0.0, 0.0]])
    return u0, u1


def _mode_fields(center, tangent, twists):
    twists = np.atleast_2d(twists)
    w0 = twists[:, :1] * perp(center) + twists[:, 1:]
    w1 = twists[:, :1] * perp(tangent)[None, :]
    return w0, w1


def link_resistance(link: LinkSpec, placement: LinkPlacement, mu: float = 1.0):
    """Closed-form resistance of one link.

    Returns ``(Mr, N)``: the 3 x 3 rigid block and the 3 x m coupling with the
    link's mode velocities.
    """
    c = np.asarray(placement.center, dtype=float)
    t = np.array([np.cos(placement.angle), np.sin(placement.angle)])
    n = perp(t)
    K = mu * (link.c_t * np.outer(t, t) + link.c_n * np.outer(n, n))
    L = link.length
    u0, u1 = _rigid_fields(c, t)
    w0, w1 = _mode_fields(c, t, placement.twists)
    Mr = L * u0 @ K @ u0.T + L**3 / 12.0 * u1 @ K @ u1.T
    N = L * u0 @ K @ w0.T + L**3 / 12.0 * u1 @ K @ w1.T
    return Mr, N


def _smooth_cutoff(x):
    """C-infinity step: 1 for x <= 0, 0 for x >= 1."""
    x = np.clip(x, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1 - x, 1.0)), 0.0)
        b = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
    return a / (a + b)


@dataclass(frozen=True)
class Wall:
    """Fixed obstacle for the resistive model, with the proximity law parameters."""

    boundary: BodyBoundary
    kappa: float = WALL_KAPPA
    near: float = 2.0
    cutoff: float = 10.0
    min_gap: float = 1e-2

    def distance(self, pts_world) -> np.ndarray:
        pts = np.atleast_2d(pts_world)
        return np.array([_points_to_segments(p[None], self.boundary.p0, self.boundary.p1) for p in pts])

    def factor(self, gap, length: float) -> np.ndarray:
        ramp = _smooth_cutoff((gap / length - self.near) / (self.cutoff - self.near))
        return 1.0 + self.kappa * length / gap * ramp


def link_resistance_near_wall(link: LinkSpec, placement: LinkPlacement, mu: float, q: Pose, wall: Wall, n_gauss: int = 8):
    """Link resistance with the wall-proximity factor on normal drag (Gauss quadrature)."""
    c = np.asarray(placement.center, dtype=float)
    t = np.array([np.cos(placement.angle), np.sin(placement.angle)])
    n = perp(t)
    L = link.length
    x, w = np.polynomial.legendre.leggauss(n_gauss)
    sig = 0.5 * L * x
    w = 0.5 * L * w
    pts = c + sig[:, None] * t
    gap = wall.distance(q.apply(pts))
    if np.any(gap < wall.min_gap):
        raise ProximityError(f"link within {gap.min():.3g} of the wall (limit {wall.min_gap:g})")
    f = wall.factor(gap, L)
    u0, u1 = _rigid_fields(c, t)
    w0, w1 = _mode_fields(c, t, placement.twists)
    Mr = np.zeros((3, 3))
    N = np.zeros((3, w0.shape[0]))
    for sk, wk, fk in zip(sig, w, f):
        K = mu * (link.c_t * np.outer(t, t) + fk * link.c_n * np.outer(n, n))
        u = u0 + sk * u1
        wm = w0 + sk * w1
        Mr += wk * u @ K @ u.T
        N += wk * u @ K @ wm.T
    return Mr, N


def grand_resistance(s, links, mu: float = 1.0, q: Pose | None = None, wall: Wall | None = None) -> GrandMatrices:
    """Assemble ``Mr`` and ``N`` over all links at shape ``s``."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    Mr = np.zeros((3, 3))
    N = None
    for link in links:
        placement = link.attachment(s)
        if wall is None:
            dM, dN = link_resistance(link, placement, mu)
        else:
            dM, dN = link_resistance_near_wall(link, placement, mu, q or Pose(), wall)
        Mr += dM
        N = dN if N is None else N + dN
    Mr = 0.5 * (Mr + Mr.T)
    eig = np.linalg.eigvalsh(Mr)
    if eig[0] < 1e-12 * np.trace(Mr):
        raise SingularAssemblyError(f"resistance matrix nearly singular (eigenvalues {eig})")
    return GrandMatrices(Mr, N)


# ---------------------------------------------------------------------------
# scallop links


def scallop_links(geom: ScallopGeometry = ScallopGeometry(), c_t: float = 1.0, c_n: float = 2.0,
                  alpha_rest: float = ALPHA_REST, stroke_limit: float = STROKE_LIMIT) -> list[LinkSpec]:
    """Two links along the arms' major axes, length ``2a`` each."""

    def make(k):
        def attach(s):
            alpha = float(s[0])
            if abs(alpha - alpha_rest) > stroke_limit + 1e-9:
                raise ShapeRangeError(f"opening {alpha:.6g} outside {alpha_rest:.6g} +/- {stroke_limit:.6g}")
            arm = scallop_arms(geom.with_alpha(alpha), check_overlap=False)[k]
            return LinkPlacement(np.asarray(arm.region.center), arm.region.angle, arm.twist[None, :])

        return attach

    return [LinkSpec(2 * geom.a, make(k), c_t, c_n) for k in range(2)]


def lowre_connection(links, mu: float = 1.0):
    return lambda s: grand_resistance(s, links, mu).connection()


def lowre_field(q, s, sdot, links, mu: float = 1.0) -> np.ndarray:
    """World rate ``-frame(theta) Mr(s)^{-1} N(s) s'``."""
    q = q.as_array() if isinstance(q, Pose) else np.asarray(q, dtype=float)
    A = grand_resistance(s, links, mu).connection()
    return frame_matrix(q[0]) @ (A @ np.atleast_1d(sdot))


def lowre_field_with_obstacle(q, s, sdot, links, wall: Wall, mu: float = 1.0) -> np.ndarray:
    """As :func:`lowre_field` with placement-dependent matrices ``Mr(s, q)``, ``N(s, q)``."""
    q = q.as_array() if isinstance(q, Pose) else np.asarray(q, dtype=float)
    A = grand_resistance(s, links, mu, Pose.from_array(q), wall).connection()
    return frame_matrix(q[0]) @ (A @ np.atleast_1d(sdot))


def lowre_swimmer(geom: ScallopGeometry = ScallopGeometry(), mu: float = 1.0, c_t: float = 1.0, c_n: float = 2.0,
                  wall: Wall | None = None, alpha_rest: float = ALPHA_REST, stroke_limit: float = STROKE_LIMIT,
                  tabulate: bool = False, degree: int = 48) -> SwimmerField:
    """Resistive-force scallop as a pluggable field.

    With ``tabulate`` (free space only) the connection is replaced by its
    Chebyshev interpolant over the stroke range.
    """
    links = scallop_links(geom, c_t, c_n, alpha_rest, stroke_limit)
    lo, hi = alpha_rest - stroke_limit, alpha_rest + stroke_limit
    rng = ((lo, hi),)
    conn = lowre_connection(links, mu)
    K = estimate_bound(conn, rng)
    if wall is None and tabulate:
        return connection_field(TabulatedConnection(conn, lo, hi, degree), rng, K, "lowre")
    if wall is None:
        def velocity(q, s, sd):
            return lowre_field(q, s, sd, links, mu)
        name = "lowre"
    else:
        def velocity(q, s, sd):
            return lowre_field_with_obstacle(q, s, sd, links, wall, mu)
        name = "lowre-wall"
    return SwimmerField(velocity, K, rng, name)
