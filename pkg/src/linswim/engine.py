"""Fixed-step integration of linear-swimmer dynamics ``q' = F(q, s) s'``.

Placements are integrated as arrays ``(theta, x, y)``; the rotation angle is
additive in the plane, so no group-aware integrator is needed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .se2 import Pose, frame_matrix


class FieldEvaluationError(FloatingPointError):
    """The field returned a non-finite velocity."""


class ShapeRangeError(ValueError):
    """Shape outside the admissible stroke range."""


@dataclass(frozen=True)
class ShapePath:
    """Time-parameterized shape ``t -> (s(t), s'(t))`` on ``[0, horizon]``.

    ``circle`` flags coordinates living on the circle (period 2 pi).
    ``accel`` optionally returns ``s''(t)``; it is only needed by
    second-order models and falls back to central differences.
    """

    sampler: Callable[[float], tuple]
    horizon: float
    circle: tuple[bool, ...] = (False,)
    accel: Callable[[float], np.ndarray] | None = None
    label: str = ""

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")

    def __call__(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        s, sd = self.sampler(t)
        return np.atleast_1d(np.asarray(s, dtype=float)), np.atleast_1d(np.asarray(sd, dtype=float))

    @property
    def dim(self) -> int:
        return len(self(0.0)[0])

    def shape(self, t: float) -> np.ndarray:
        return self(t)[0]

    def rate(self, t: float) -> np.ndarray:
        return self(t)[1]

    def acceleration(self, t: float, h: float = 1e-5) -> np.ndarray:
        if self.accel is not None:
            return np.atleast_1d(np.asarray(self.accel(t), dtype=float))
        return (self.rate(t + h) - self.rate(t - h)) / (2 * h)

    def sample(self, times) -> np.ndarray:
        return np.array([self.shape(t) for t in times])

    def derivative_mismatch(self, n: int = 20, h: float = 1e-6, seed: int = 0) -> float:
        """Largest gap between the stated rate and a forward difference of s."""
        rng = np.random.default_rng(seed)
        worst = 0.0
        for t in rng.uniform(0.0, self.horizon - h, n):
            s0, sd = self(t)
            fd = (self.shape(t + h) - s0) / h
            worst = max(worst, float(np.max(np.abs(fd - sd))))
        return worst


@dataclass(frozen=True)
class SwimmerField:
    """World-frame rate map ``(q, s, s') -> (theta', x', y')``.

    ``bound_K`` is the constant claimed for ``|F(q,s) s'| <= K |s| |s'|``.
    ``shape_range`` gives per-coordinate probe intervals.
    """

    velocity: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    bound_K: float = np.inf
    shape_range: tuple[tuple[float, float], ...] = ((-1.0, 1.0),)
    name: str = "field"

    @property
    def shape_dim(self) -> int:
        return len(self.shape_range)

    def __call__(self, q, s, sdot) -> np.ndarray:
        return np.asarray(self.velocity(np.asarray(q, float), np.atleast_1d(s), np.atleast_1d(sdot)), dtype=float)


def connection_field(connection: Callable[[np.ndarray], np.ndarray], shape_range, bound_K=np.inf, name="field") -> SwimmerField:
    """Field ``frame(theta) A(s) s'`` from a body-frame connection ``A(s)`` (3 x m)."""

    def velocity(q, s, sdot):
        return frame_matrix(q[0]) @ (connection(s) @ sdot)

    return SwimmerField(velocity, bound_K, tuple(tuple(r) for r in shape_range), name)


def estimate_bound(connection, shape_range, n: int = 101, safety: float = 1.05) -> float:
    """Empirical ``sup |A(s)| / |s|`` over a grid of a one-dimensional shape range."""
    lo, hi = shape_range[0]
    grid = np.linspace(lo, hi, n)
    ratios = [np.linalg.norm(connection(np.array([s])), 2) / abs(s) for s in grid if s != 0]
    return safety * max(ratios)


class TabulatedConnection:
    """Chebyshev interpolant of a smooth connection ``A(s)`` on ``[lo, hi]``."""

    def __init__(self, func, lo: float, hi: float, degree: int = 32):
        self.lo, self.hi = float(lo), float(hi)
        k = np.arange(degree + 1)
        x = np.cos(np.pi * (k + 0.5) / (degree + 1))
        nodes = 0.5 * (self.lo + self.hi) + 0.5 * (self.hi - self.lo) * x
        vals = np.array([np.asarray(func(np.array([s])), dtype=float) for s in nodes])
        self.shape = vals.shape[1:]
        self.coef = np.polynomial.chebyshev.chebfit(x, vals.reshape(len(x), -1), degree)

    def __call__(self, s) -> np.ndarray:
        s = float(np.atleast_1d(s)[0])
        x = (2 * s - self.lo - self.hi) / (self.hi - self.lo)
        if abs(x) > 1 + 1e-9:
            raise ShapeRangeError(f"shape {s:.6g} outside the tabulated range [{self.lo:.6g}, {self.hi:.6g}]")
        return np.polynomial.chebyshev.chebval(x, self.coef).reshape(self.shape)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples ``(t, s, q)`` of an integrated swimmer.

    ``qdot`` holds the world rates at each sample (used for Hermite dense
    output). ``twist`` is filled for second-order runs. ``status`` is
    ``"ok"`` or ``"collision"``.
    """

    t: np.ndarray
    s: np.ndarray
    q: np.ndarray
    qdot: np.ndarray
    step: float
    twist: np.ndarray | None = None
    status: str = "ok"
    _spline: object = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.t) > 1 and not np.all(np.diff(self.t) > 0):
            raise ValueError("trajectory times must be strictly increasing")

    @property
    def final_pose(self) -> Pose:
        return Pose.from_array(self.q[-1])

    @property
    def initial_pose(self) -> Pose:
        return Pose.from_array(self.q[0])

    def poses(self) -> list[Pose]:
        return [Pose.from_array(row) for row in self.q]

    def at(self, t) -> np.ndarray:
        """Pose arrays at arbitrary times by cubic Hermite interpolation."""
        spline = self._spline
        if spline is None:
            spline = CubicHermiteSpline(self.t, self.q, self.qdot, axis=0)
            object.__setattr__(self, "_spline", spline)
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t[0] - 1e-12) or np.any(t > self.t[-1] + 1e-12):
            raise ValueError("requested time outside the integrated horizon")
        return spline(np.clip(t, self.t[0], self.t[-1]))

    def displacement(self) -> np.ndarray:
        return self.q[-1] - self.q[0]

    def diameter(self) -> float:
        """Largest Euclidean distance between two samples in (theta, x, y)."""
        q = self.q
        best = 0.0
        for chunk in np.array_split(np.arange(len(q)), max(1, len(q) // 2000)):
            d = q[chunk, None, :] - q[None, :, :]
            best = max(best, float(np.max(np.einsum("ijk,ijk->ij", d, d))))
        return float(np.sqrt(best))

    def to_csv(self, path) -> None:
        cols = ["t"] + _shape_columns(self.s.shape[1]) + ["theta", "x", "y"]
        if self.twist is not None:
            cols += ["omega", "vx", "vy"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for k in range(len(self.t)):
                row = [self.t[k], *self.s[k], *self.q[k]]
                if self.twist is not None:
                    row += list(self.twist[k])
                w.writerow([repr(float(v)) for v in row])


def _shape_columns(m: int) -> list[str]:
    return ["alpha"] if m == 1 else [f"alpha_{k}" for k in range(m)]


def _rhs(field: SwimmerField, path: ShapePath, t: float, q: np.ndarray) -> np.ndarray:
    s, sd = path(t)
    v = field(q, s, sd)
    if not np.all(np.isfinite(v)):
        raise FieldEvaluationError(f"non-finite field value at t={t!r}, s={s.tolist()}, q={q.tolist()}")
    return v


def integrate(field: SwimmerField, path: ShapePath, q0: Pose | np.ndarray, step: float, horizon: float | None = None) -> Trajectory:
    """Classical fourth-order Runge-Kutta integration of ``q' = F(q, s) s'``.

    The number of steps is ``round(horizon / step)`` and the step is adjusted
    so that the last sample falls exactly on the horizon.
    """
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    T = path.horizon if horizon is None else float(horizon)
    n = max(1, int(round(T / step)))
    h = T / n
    q = (q0.as_array() if isinstance(q0, Pose) else np.asarray(q0, dtype=float)).copy()
    ts = h * np.arange(n + 1)
    ts[-1] = T
    qs = np.empty((n + 1, 3))
    qd = np.empty((n + 1, 3))
    ss = np.empty((n + 1, path.dim))
    qs[0] = q
    k1 = _rhs(field, path, 0.0, q)
    for i in range(n):
        t = ts[i]
        qd[i] = k1
        ss[i] = path.shape(t)
        k2 = _rhs(field, path, t + h / 2, q + h / 2 * k1)
        k3 = _rhs(field, path, t + h / 2, q + h / 2 * k2)
        k4 = _rhs(field, path, t + h, q + h * k3)
        q = q + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        qs[i + 1] = q
        k1 = _rhs(field, path, ts[i + 1], q)
    qd[n] = k1
    ss[n] = path.shape(ts[n])
    return Trajectory(ts, ss, qs, qd, h)


def reparameterize(path: ShapePath, beta: Callable, dbeta: Callable, horizon: float | None = None, label: str = "") -> ShapePath:
    """Path ``t -> s(beta(t))`` with rate ``s'(beta(t)) beta'(t)``.

    ``beta`` need not be monotone; it must map into the domain of ``path``.
    """

    def sampler(t):
        u = beta(t)
        s, sd = path(u)
        return s, sd * dbeta(t)

    return ShapePath(sampler, path.horizon if horizon is None else horizon, path.circle, label=label or path.label)


@dataclass(frozen=True)
class FieldReport:
    linearity_residual: float
    bound_ratio: float
    probes: int

    @property
    def passed(self) -> bool:
        return self.linearity_residual < 1e-8


def check_field_contract(field: SwimmerField, probes: int = 100, seed: int = 0) -> FieldReport:
    """Probe linearity in the rate and the empirical bound ratio ``|F s'| / (|s| |s'|)``."""
    rng = np.random.default_rng(seed)
    lo = np.array([r[0] for r in field.shape_range])
    hi = np.array([r[1] for r in field.shape_range])
    m = len(lo)
    worst = 0.0
    ratio = 0.0
    for _ in range(probes):
        q = np.array([rng.uniform(-np.pi, np.pi), *rng.uniform(-5.0, 5.0, 2)])
        s = rng.uniform(lo, hi)
        d1, d2 = rng.normal(size=m), rng.normal(size=m)
        a, b = rng.normal(size=2)
        f1, f2 = field(q, s, d1), field(q, s, d2)
        f12 = field(q, s, a * d1 + b * d2)
        scale = np.linalg.norm(a * f1) + np.linalg.norm(b * f2)
        err = np.linalg.norm(f12 - a * f1 - b * f2)
        if err > 0:
            worst = max(worst, err / scale if scale > 0 else np.inf)
        ns = np.linalg.norm(s)
        if ns > 0:
            ratio = max(ratio, np.linalg.norm(f1) / (ns * np.linalg.norm(d1)))
    return FieldReport(float(worst), float(ratio), probes)


def flapping_bound(field: SwimmerField, path: ShapePath, T: float, n: int = 4001) -> float:
    """``K * int_0^T |s| |s'| dt`` by composite Simpson quadrature."""
    from scipy.integrate import simpson

    ts = np.linspace(0.0, T, n)
    vals = [np.linalg.norm(s) * np.linalg.norm(sd) for s, sd in map(path, ts)]
    return float(field.bound_K * simpson(vals, x=ts))
