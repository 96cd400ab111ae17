"""Panelized swimmer boundaries and the articulated two-ellipse scallop.

Boundaries are unions of closed polygonal loops. Panel normals point into
the body (out of the fluid). Every loop moves rigidly under each shape
mode, so mode velocities are stored as one twist per loop and per mode,
expressed about the body-frame origin.

The scallop's shape variable is the full opening angle between its arms.
The body frame has its origin at the center of mass of the two arms and its
x-axis along the bisector, pointing from the hinge towards the arm tips.
"""

from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .se2 import Pose, BodyTwist, cross2, perp, rotation

HINGE_GAP_FRACTION = 1e-3


class ArmsOverlapError(ValueError):
    """The two scallop arms intersect at the requested opening angle."""


@dataclass(frozen=True)
class Ellipse:
    center: tuple[float, float]
    a: float
    b: float
    angle: float = 0.0

    def vertices(self, n: int) -> np.ndarray:
        t = 2.0 * np.pi * np.arange(n) / n
        local = np.stack([self.a * np.cos(t), self.b * np.sin(t)], axis=1)
        return local @ rotation(self.angle).T + np.asarray(self.center)

    def inside(self, pts) -> np.ndarray:
        local = (np.asarray(pts) - np.asarray(self.center)) @ rotation(self.angle)
        return (local[..., 0] / self.a) ** 2 + (local[..., 1] / self.b) ** 2 < 1.0

    @property
    def area(self) -> float:
        return np.pi * self.a * self.b

    def polar_moment(self) -> float:
        """Second moment of area about the ellipse's own center."""
        return self.area * (self.a**2 + self.b**2) / 4.0


@dataclass(frozen=True, eq=False)
class BodyBoundary:
    """Closed polygonal loops with per-loop rigid mode twists.

    ``loop_twists[k, j]`` is the body-frame twist ``(omega, vx, vy)`` (about
    the body origin) of loop ``k`` per unit rate of shape mode ``j``.
    ``movable[k]`` is False for fixed walls, which take no part in the
    rigid-body modes of the swimmer.
    """

    loops: tuple[np.ndarray, ...]
    loop_twists: np.ndarray
    movable: tuple[bool, ...]
    regions: tuple[Ellipse | None, ...]

    p0: np.ndarray = field(init=False, repr=False)
    p1: np.ndarray = field(init=False, repr=False)
    midpoints: np.ndarray = field(init=False, repr=False)
    lengths: np.ndarray = field(init=False, repr=False)
    tangents: np.ndarray = field(init=False, repr=False)
    normals: np.ndarray = field(init=False, repr=False)
    loop_index: np.ndarray = field(init=False, repr=False)
    mode_velocities: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        loops = []
        for verts in self.loops:
            verts = np.array(verts, dtype=float)
            if verts.ndim != 2 or verts.shape[1] != 2 or len(verts) < 3:
                raise ValueError("each loop needs at least 3 vertices of shape (k, 2)")
            area = signed_area(verts)
            if area == 0.0:
                raise ValueError("degenerate loop with zero area")
            if area < 0:
                verts = verts[::-1].copy()
            verts.setflags(write=False)
            loops.append(verts)
        object.__setattr__(self, "loops", tuple(loops))
        twists = np.array(self.loop_twists, dtype=float)
        if twists.ndim != 3 or twists.shape[0] != len(loops) or twists.shape[2] != 3:
            raise ValueError("loop_twists must have shape (n_loops, n_modes, 3)")
        if len(self.movable) != len(loops) or len(self.regions) != len(loops):
            raise ValueError("movable and regions need one entry per loop")
        object.__setattr__(self, "loop_twists", twists)
        object.__setattr__(self, "movable", tuple(bool(m) for m in self.movable))

        p0 = np.concatenate(loops)
        p1 = np.concatenate([np.vstack([v[1:], v[:1]]) for v in loops])
        d = p1 - p0
        lengths = np.hypot(d[:, 0], d[:, 1])
        tangents = d / lengths[:, None]
        index = np.concatenate([np.full(len(v), k) for k, v in enumerate(loops)])
        mid = 0.5 * (p0 + p1)
        # counter-clockwise loops: the left normal points into the body
        normals = perp(tangents)
        tw = twists[index]  # (n, m, 3)
        modes = tw[:, :, :1] * perp(mid)[:, None, :] + tw[:, :, 1:]
        for name, val in [("p0", p0), ("p1", p1), ("midpoints", mid), ("lengths", lengths),
                          ("tangents", tangents), ("normals", normals), ("loop_index", index),
                          ("mode_velocities", modes)]:
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        twists.setflags(write=False)

    @property
    def n_panels(self) -> int:
        return len(self.lengths)

    @property
    def n_modes(self) -> int:
        return self.loop_twists.shape[1]

    @property
    def n_loops(self) -> int:
        return len(self.loops)

    @property
    def swimmer_mask(self) -> np.ndarray:
        return np.asarray(self.movable)[self.loop_index]

    def loop_slice(self, k: int) -> slice:
        start = sum(len(v) for v in self.loops[:k])
        return slice(start, start + len(self.loops[k]))

    def perimeter(self, k: int | None = None) -> float:
        if k is None:
            return float(self.lengths.sum())
        return float(self.lengths[self.loop_slice(k)].sum())

    def mode_normal_data(self) -> np.ndarray:
        """Normal velocity ``w_d . n`` per panel and per mode, shape (n, m)."""
        return np.einsum("nmk,nk->nm", self.mode_velocities, self.normals)

    def transformed(self, pose: Pose) -> "BodyBoundary":
        """The same boundary moved rigidly by ``pose`` (twists follow the motion)."""
        R = rotation(pose.theta)
        p = np.asarray(pose.r)
        loops = tuple(v @ R.T + p for v in self.loops)
        tw = self.loop_twists.copy()
        om = tw[..., 0]
        tw[..., 1:] = tw[..., 1:] @ R.T - om[..., None] * perp(p)
        regions = tuple(
            None if e is None else Ellipse(tuple(R @ np.asarray(e.center) + p), e.a, e.b, e.angle + pose.theta)
            for e in self.regions
        )
        return BodyBoundary(loops, tw, self.movable, regions)

    def union(self, other: "BodyBoundary") -> "BodyBoundary":
        """Concatenate loops; mode twists are padded with zeros where missing."""
        m = max(self.n_modes, other.n_modes)

        def pad(tw):
            out = np.zeros((tw.shape[0], m, 3))
            out[:, : tw.shape[1]] = tw
            return out

        return BodyBoundary(
            self.loops + other.loops,
            np.concatenate([pad(self.loop_twists), pad(other.loop_twists)]),
            self.movable + other.movable,
            self.regions + other.regions,
        )

    def to_csv(self, path) -> None:
        """Write the panel mesh as rows ``x0,y0,x1,y1,nx,ny``."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x0", "y0", "x1", "y1", "nx", "ny"])
            for a, b, n in zip(self.p0, self.p1, self.normals):
                w.writerow([repr(float(v)) for v in (*a, *b, *n)])


def signed_area(verts: np.ndarray) -> float:
    x, y = verts[:, 0], verts[:, 1]
    return 0.5 * float(x[:-1] @ y[1:] - x[1:] @ y[:-1] + x[-1] * y[0] - x[0] * y[-1])


def rectangle_vertices(center, width: float, height: float, n_panels: int) -> np.ndarray:
    """Counter-clockwise rectangle vertices with near-uniform panel length."""
    if width <= 0 or height <= 0:
        raise ValueError("rectangle width and height must be positive")
    per = 2 * (width + height)
    nw = max(1, round(n_panels * width / per))
    nh = max(1, round(n_panels * height / per))
    cx, cy = center
    x0, x1 = cx - width / 2, cx + width / 2
    y0, y1 = cy - height / 2, cy + height / 2
    sides = [
        np.stack([np.linspace(x0, x1, nw + 1)[:-1], np.full(nw, y0)], axis=1),
        np.stack([np.full(nh, x1), np.linspace(y0, y1, nh + 1)[:-1]], axis=1),
        np.stack([np.linspace(x1, x0, nw + 1)[:-1], np.full(nw, y1)], axis=1),
        np.stack([np.full(nh, x0), np.linspace(y1, y0, nh + 1)[:-1]], axis=1),
    ]
    return np.concatenate(sides)


def rigid_body(verts_or_region, n: int = 128, n_modes: int = 0) -> BodyBoundary:
    """A single rigid movable loop (no shape modes unless padded)."""
    if isinstance(verts_or_region, Ellipse):
        region = verts_or_region
        verts = region.vertices(n)
    else:
        region = None
        verts = np.asarray(verts_or_region, dtype=float)
    return BodyBoundary((verts,), np.zeros((1, n_modes, 3)), (True,), (region,))


def circle_body(radius: float = 1.0, n: int = 128, center=(0.0, 0.0)) -> BodyBoundary:
    return rigid_body(Ellipse(tuple(center), radius, radius), n)


def ellipse_body(a: float, b: float, n: int = 128, center=(0.0, 0.0), angle: float = 0.0) -> BodyBoundary:
    return rigid_body(Ellipse(tuple(center), a, b, angle), n)


def rectangle_obstacle(center, width: float, height: float, n_panels: int = 80, n_modes: int = 1) -> BodyBoundary:
    """Fixed rectangular wall (zero Neumann data, not part of the swimmer)."""
    verts = rectangle_vertices(center, width, height, n_panels)
    return BodyBoundary((verts,), np.zeros((1, n_modes, 3)), (False,), (None,))


# ---------------------------------------------------------------------------
# scallop


@dataclass(frozen=True)
class ScallopGeometry:
    """Two identical rigid ellipses hinged together.

    ``alpha`` is the full opening angle between the arms' major axes.
    ``hinge_offset`` is the distance from the hinge to each ellipse center;
    it must leave a clearance of at least ``1e-3 * a`` between the arm tips
    and the hinge point.
    """

    ellipse_semiaxes: tuple[float, float] = (1.0, 0.2)
    hinge_offset: float = 1.5
    panel_count: int = 128
    alpha: float = np.pi / 2

    def __post_init__(self):
        a, b = self.ellipse_semiaxes
        object.__setattr__(self, "ellipse_semiaxes", (float(a), float(b)))
        if not a > b > 0:
            raise ValueError(f"ellipse semi-axes must satisfy a > b > 0, got ({a}, {b})")
        if int(self.panel_count) != self.panel_count or self.panel_count < 8:
            raise ValueError(f"panel_count must be an integer >= 8, got {self.panel_count}")
        if not 0.0 < self.alpha < np.pi:
            raise ValueError(f"opening angle alpha must lie in (0, pi), got {self.alpha}")
        if self.hinge_offset - a < HINGE_GAP_FRACTION * a:
            raise ValueError(
                f"hinge_offset {self.hinge_offset} leaves less than {HINGE_GAP_FRACTION}*a "
                "between the arm tips and the hinge"
            )

    @property
    def a(self) -> float:
        return self.ellipse_semiaxes[0]

    @property
    def b(self) -> float:
        return self.ellipse_semiaxes[1]

    def with_alpha(self, alpha: float) -> "ScallopGeometry":
        return dataclasses.replace(self, alpha=float(alpha))


@dataclass(frozen=True)
class Arm:
    """One rigid arm at a given opening: its ellipse and its mode twist."""

    region: Ellipse
    twist: np.ndarray  # (3,) per unit opening rate, about the body origin


def hinge_point(geom: ScallopGeometry) -> np.ndarray:
    return np.array([-geom.hinge_offset * np.cos(geom.alpha / 2), 0.0])


def _arm_regions(geom: ScallopGeometry) -> list[Ellipse]:
    h = hinge_point(geom)
    out = []
    for sign in (+1, -1):
        angle = sign * geom.alpha / 2
        center = h + geom.hinge_offset * np.array([np.cos(angle), np.sin(angle)])
        out.append(Ellipse((float(center[0]), float(center[1])), geom.a, geom.b, angle))
    return out


def arms_overlap(geom: ScallopGeometry, n: int = 720) -> bool:
    e1, e2 = _arm_regions(geom)
    return bool(e2.inside(e1.vertices(n)).any() or e1.inside(e2.vertices(n)).any())


def contact_angle(geom: ScallopGeometry, tol: float = 1e-10) -> float:
    """Smallest opening angle at which the arms do not intersect."""
    lo, hi = 1e-9, np.pi - 1e-9
    if not arms_overlap(geom.with_alpha(lo)):
        return 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if arms_overlap(geom.with_alpha(mid)):
            lo = mid
        else:
            hi = mid
    return hi


def raw_arm_twists(geom: ScallopGeometry) -> np.ndarray:
    """Arm twists for a unit opening rate with the hinge held fixed.

    Each arm turns about the hinge at rate 1/2, in opposite senses.
    """
    h = hinge_point(geom)
    out = []
    for sign in (+1, -1):
        om = 0.5 * sign
        out.append(np.concatenate([[om], -om * perp(h)]))
    return np.array(out)


def rigid_mass_matrix(regions, density: float = 1.0) -> np.ndarray:
    """Rigid-body mass matrix in (omega, vx, vy) coordinates about the origin."""
    M = np.zeros((3, 3))
    for e in regions:
        m = density * e.area
        c = np.asarray(e.center)
        M[0, 0] += density * e.polar_moment() + m * c @ c
        M[0, 1] += -m * c[1]
        M[0, 2] += m * c[0]
        M[1, 1] += m
        M[2, 2] += m
    M[1, 0], M[2, 0] = M[0, 1], M[0, 2]
    return M


def momentum_of_twists(regions, twists, density: float = 1.0) -> np.ndarray:
    """(angular, px, py) momentum of per-region rigid velocity fields, analytically."""
    out = np.zeros(3)
    for e, tw in zip(regions, twists):
        m = density * e.area
        c = np.asarray(e.center)
        vc = tw[0] * perp(c) + tw[1:]
        out[0] += density * e.polar_moment() * tw[0] + m * cross2(c, vc)
        out[1:] += m * vc
    return out


def self_propelled_twists(regions, raw_twists) -> np.ndarray:
    """Remove the rigid part of a per-region deformation so that it carries no
    linear or angular momentum (uniform density)."""
    M = rigid_mass_matrix(regions)
    corr = np.linalg.solve(M, momentum_of_twists(regions, raw_twists))
    return np.asarray(raw_twists) - corr


def scallop_arms(geom: ScallopGeometry, check_overlap: bool = True) -> list[Arm]:
    """Arm placements in the body frame and their self-propelled mode twists."""
    if check_overlap and arms_overlap(geom):
        raise ArmsOverlapError(
            f"arms intersect at alpha={geom.alpha:.6g}; contact angle is "
            f"{contact_angle(geom):.6g} for this geometry"
        )
    regions = _arm_regions(geom)
    twists = self_propelled_twists(regions, raw_arm_twists(geom))
    return [Arm(e, tw) for e, tw in zip(regions, twists)]


def build_scallop(geom: ScallopGeometry) -> BodyBoundary:
    """Panelize both arms (``panel_count`` panels each) with the opening mode."""
    arms = scallop_arms(geom)
    loops = tuple(arm.region.vertices(geom.panel_count) for arm in arms)
    twists = np.array([[arm.twist] for arm in arms])
    return BodyBoundary(loops, twists, (True, True), tuple(arm.region for arm in arms))


def build_scallop_raw(geom: ScallopGeometry) -> BodyBoundary:
    """Scallop with the unprojected hinge-fixed mode (diagnostics only)."""
    regions = _arm_regions(geom)
    loops = tuple(e.vertices(geom.panel_count) for e in regions)
    twists = raw_arm_twists(geom)[:, None, :]
    return BodyBoundary(loops, twists, (True, True), tuple(regions))


def scallop_mass_matrix(geom: ScallopGeometry, density: float = 1.0) -> np.ndarray:
    return rigid_mass_matrix(_arm_regions(geom), density)


# ---------------------------------------------------------------------------
# boundary data and diagnostics


def rigid_boundary_data(b: BodyBoundary, twist: BodyTwist | np.ndarray) -> np.ndarray:
    """Normal velocity ``(omega z x x + v) . n`` at each panel midpoint.

    Panels of fixed loops get zero.
    """
    xi = twist.as_array() if isinstance(twist, BodyTwist) else np.asarray(twist, dtype=float)
    vel = xi[0] * perp(b.midpoints) + xi[1:]
    return np.where(b.swimmer_mask, np.einsum("nk,nk->n", vel, b.normals), 0.0)


def rigid_mode_data(b: BodyBoundary) -> np.ndarray:
    """Neumann data of the three unit rigid modes, shape (n, 3)."""
    return np.stack([rigid_boundary_data(b, e) for e in np.eye(3)], axis=1)


def loop_fluxes(b: BodyBoundary, data: np.ndarray) -> np.ndarray:
    """Net flux ``sum(data * length)`` per loop; data may carry trailing columns."""
    data = np.asarray(data, dtype=float)
    weighted = data * (b.lengths if data.ndim == 1 else b.lengths[:, None])
    out = np.zeros((b.n_loops,) + data.shape[1:])
    np.add.at(out, b.loop_index, weighted)
    return out


def _ellipse_quadrature(e: Ellipse, n_r: int = 6, n_t: int = 16):
    """Nodes and weights integrating low-degree polynomials exactly over an ellipse."""
    xr, wr = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * (xr + 1.0)
    wr = 0.5 * wr
    t = 2.0 * np.pi * np.arange(n_t) / n_t
    rr, tt = np.meshgrid(r, t, indexing="ij")
    local = np.stack([e.a * rr * np.cos(tt), e.b * rr * np.sin(tt)], axis=-1).reshape(-1, 2)
    w = (wr[:, None] * rr * e.a * e.b * (2.0 * np.pi / n_t)).reshape(-1)
    return local @ rotation(e.angle).T + np.asarray(e.center), w


def _polygon_quadrature(verts: np.ndarray):
    """Edge-midpoint rule on a centroid fan; exact for quadratics."""
    c = verts.mean(axis=0)
    nxt = np.roll(verts, -1, axis=0)
    areas = 0.5 * cross2(verts - c, nxt - c)
    pts = np.concatenate([0.5 * (verts + nxt), 0.5 * (verts + c), 0.5 * (nxt + c)])
    w = np.tile(areas / 3.0, 3)
    return pts, w


def check_self_propulsion(b: BodyBoundary, density: float = 1.0):
    """Linear and angular momentum carried by each deformation mode.

    Computed by area quadrature over each movable loop's region.

    Returns
    -------
    linear : ndarray, shape (m, 2)
    angular : ndarray, shape (m,)
        Angular momentum about the body origin.
    """
    linear = np.zeros((b.n_modes, 2))
    angular = np.zeros(b.n_modes)
    for k in range(b.n_loops):
        if not b.movable[k]:
            continue
        region = b.regions[k]
        pts, w = _ellipse_quadrature(region) if region is not None else _polygon_quadrature(b.loops[k])
        for j in range(b.n_modes):
            tw = b.loop_twists[k, j]
            u = tw[0] * perp(pts) + tw[1:]
            linear[j] += density * (w[:, None] * u).sum(axis=0)
            angular[j] += density * np.sum(w * cross2(pts, u))
    return linear, angular


def closest_distance(b1: BodyBoundary, b2: BodyBoundary) -> float:
    """Smallest distance between the panel polygons of two boundaries."""
    return min(_points_to_segments(b1.p0, b2.p0, b2.p1), _points_to_segments(b2.p0, b1.p0, b1.p1))


def _points_to_segments(pts, a, b) -> float:
    d = b - a
    rel = pts[:, None, :] - a[None, :, :]
    t = np.clip(np.einsum("pnk,nk->pn", rel, d) / np.einsum("nk,nk->n", d, d), 0.0, 1.0)
    diff = rel - t[..., None] * d[None]
    return float(np.sqrt(np.min(np.einsum("pnk,pnk->pn", diff, diff))))


def export_mesh(b: BodyBoundary, path: str | Path) -> Path:
    path = Path(path)
    b.to_csv(path)
    return path
