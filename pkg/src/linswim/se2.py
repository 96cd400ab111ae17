"""Planar rigid placements and body-frame twists.

A placement is stored as ``(theta, x, y)``: the rotation angle of the body
frame and the position of its origin (the center of mass). Twists are
``(omega, vx, vy)`` with the linear part expressed in the body frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def wrap_angle(theta):
    """Map an angle to the interval (-pi, pi]."""
    w = np.mod(np.asarray(theta, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    w = np.where(w == -np.pi, np.pi, w)
    return w if w.ndim else float(w)


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def perp(v: np.ndarray) -> np.ndarray:
    """Rotate 2-vectors (last axis) by +90 degrees: z x v."""
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def cross2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Scalar planar cross product a x b along the last axis."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


@dataclass(frozen=True)
class Pose:
    """Rigid placement of the body frame: rotation angle and origin position."""

    theta: float = 0.0
    r: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "r", (float(self.r[0]), float(self.r[1])))

    @classmethod
    def identity(cls) -> "Pose":
        return cls()

    @classmethod
    def from_array(cls, q) -> "Pose":
        q = np.asarray(q, dtype=float)
        return cls(q[0], (q[1], q[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.theta, self.r[0], self.r[1]])

    def inverse(self) -> "Pose":
        return inverse(self)

    def apply(self, points) -> np.ndarray:
        """Map body-frame points (..., 2) to the world frame."""
        pts = np.asarray(points, dtype=float)
        return pts @ rotation(self.theta).T + np.asarray(self.r)

    def isclose(self, other: "Pose", atol: float = 1e-12) -> bool:
        dtheta = wrap_angle(self.theta - other.theta)
        dr = np.subtract(self.r, other.r)
        return abs(dtheta) <= atol and bool(np.all(np.abs(dr) <= atol))


@dataclass(frozen=True)
class BodyTwist:
    """Rigid velocity in the body frame: angular rate and linear velocity."""

    omega: float = 0.0
    v: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        omega = float(self.omega)
        v = (float(self.v[0]), float(self.v[1]))
        if not np.all(np.isfinite([omega, *v])):
            raise ValueError(f"non-finite twist: omega={omega}, v={v}")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "v", v)

    @classmethod
    def from_array(cls, xi) -> "BodyTwist":
        xi = np.asarray(xi, dtype=float)
        return cls(xi[0], (xi[1], xi[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.omega, self.v[0], self.v[1]])

    def __add__(self, other: "BodyTwist") -> "BodyTwist":
        return BodyTwist.from_array(self.as_array() + other.as_array())

    def __mul__(self, k: float) -> "BodyTwist":
        return BodyTwist.from_array(k * self.as_array())

    __rmul__ = __mul__


def compose(p1: Pose, p2: Pose) -> Pose:
    """Group product p1 * p2: first apply p2, then p1."""
    r = rotation(p1.theta) @ np.asarray(p2.r) + np.asarray(p1.r)
    return Pose(p1.theta + p2.theta, r)


def inverse(p: Pose) -> Pose:
    r = -(rotation(p.theta).T @ np.asarray(p.r))
    return Pose(-p.theta, r)


def frame_matrix(theta: float) -> np.ndarray:
    """The 3x3 block diag(1, R(theta)) taking body twists to world rates."""
    out = np.eye(3)
    out[1:, 1:] = rotation(theta)
    return out


def world_map(q: Pose | np.ndarray, twist: BodyTwist | np.ndarray) -> np.ndarray:
    """World-frame rates ``(theta_dot, x_dot, y_dot)`` of a body twist at placement q."""
    theta = q.theta if isinstance(q, Pose) else float(np.asarray(q)[0])
    xi = twist.as_array() if isinstance(twist, BodyTwist) else np.asarray(twist, dtype=float)
    return frame_matrix(theta) @ xi


def body_map(q: Pose | np.ndarray, qdot) -> np.ndarray:
    """Inverse of :func:`world_map`: world rates to body twist components."""
    theta = q.theta if isinstance(q, Pose) else float(np.asarray(q)[0])
    return frame_matrix(theta).T @ np.asarray(qdot, dtype=float)
