"""Universal-cover lift of a one-dimensional shape path and the boundedness verdict.

A path on the circle is unwrapped to the real line; a path on the line is
its own lift. If the lifted image stays in a compact interval the placement
stays bounded, with the explicit radius ``K * int_image |p(sigma)| d sigma``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

TWO_PI = 2.0 * np.pi
FINITE = "FiniteLiftLength"
GROWING = "GrowingLift"


class UndersampledPathError(ValueError):
    """Consecutive circle samples too far apart to unwrap unambiguously."""


def project(values, circle: bool) -> np.ndarray:
    """Covering map: identity on the line, wrap to (-pi, pi] on the circle."""
    v = np.asarray(values, dtype=float)
    if not circle:
        return v
    w = np.mod(v + np.pi, TWO_PI) - np.pi
    return np.where(w == -np.pi, np.pi, w)


@dataclass(frozen=True, eq=False)
class LiftedPath:
    """Lifted samples ``(t, s_hat)`` with the chosen base point over ``s(0)``."""

    t: np.ndarray
    lifted: np.ndarray
    base_point: float
    circle: bool

    @property
    def horizon(self) -> float:
        return float(self.t[-1] - self.t[0])

    def projected(self) -> np.ndarray:
        return project(self.lifted, self.circle)

    def image(self) -> tuple[float, float]:
        return float(self.lifted.min()), float(self.lifted.max())


def lift(times, values, base_point: float | None = None, circle: bool = False,
         max_increment: float = 0.9 * np.pi) -> LiftedPath:
    """Unwrap samples of a one-dimensional shape path.

    Parameters
    ----------
    times, values : array_like
        Strictly increasing times and shape samples (one coordinate only).
    base_point : float, optional
        Lift of ``values[0]``; must lie in its fiber. Defaults to ``values[0]``.
    circle : bool
        Whether the samples live on the circle of period 2 pi.
    max_increment : float
        Largest accepted wrapped increment between consecutive circle samples.

    Raises
    ------
    UndersampledPathError
        If a wrapped increment reaches ``max_increment``.
    """
    t = np.asarray(times, dtype=float)
    s = np.asarray(values, dtype=float)
    if s.ndim == 2:
        if s.shape[1] != 1:
            raise ValueError(f"the cover lift needs one shape coordinate, got {s.shape[1]}")
        s = s[:, 0]
    if s.ndim != 1 or len(s) != len(t) or len(t) == 0:
        raise ValueError("times and values must be one-dimensional with equal length")
    if len(t) > 1 and not np.all(np.diff(t) > 0):
        raise ValueError("times must be strictly increasing")
    base = float(s[0]) if base_point is None else float(base_point)
    if circle:
        k = (base - s[0]) / TWO_PI
        if abs(k - round(k)) > 1e-9:
            raise ValueError(f"base point {base!r} is not over s(0) = {s[0]!r} on the circle")
        inc = project(np.diff(s), True)
        bad = np.flatnonzero(np.abs(inc) >= max_increment)
        if bad.size:
            i = int(bad[0])
            raise UndersampledPathError(
                f"increment {inc[i]:.4g} between t={t[i]!r} and t={t[i + 1]!r} is too large to unwrap")
        lifted = base + np.concatenate([[0.0], np.cumsum(inc)])
    else:
        if abs(base - s[0]) > 1e-12 * max(1.0, abs(s[0])):
            raise ValueError(f"on the line the only lift of s(0) = {s[0]!r} is itself")
        lifted = s.copy()
    for arr in (t, lifted):
        arr.setflags(write=False)
    return LiftedPath(t, lifted, base, circle)


def lift_length(lp: LiftedPath) -> float:
    """Total variation of the lift over the sampled horizon."""
    return float(np.sum(np.abs(np.diff(lp.lifted))))


def image_integral(lp: LiftedPath) -> float:
    """``int |p(sigma)| d sigma`` over the lifted image."""
    lo, hi = lp.image()
    if hi == lo:
        return 0.0
    if not lp.circle:
        return 0.5 * (hi * abs(hi) - lo * abs(lo))
    turns = np.arange(np.ceil((lo - np.pi) / TWO_PI), np.floor((hi + np.pi) / TWO_PI) + 1)
    pts = [p for p in TWO_PI * turns if lo < p < hi]
    pts += [p for p in TWO_PI * turns + np.pi if lo < p < hi]
    val, _ = quad(lambda x: abs(float(project(x, True))), lo, hi, points=sorted(pts) or None,
                  limit=200 + 4 * len(pts))
    return float(val)


@dataclass(frozen=True)
class CoverVerdict:
    verdict: str
    lift_length: float
    image: tuple[float, float]
    tail_rate: float
    witness: float | None
    bound_K: float | None
    horizon: float
    base_point: float
    circle: bool

    @property
    def finite(self) -> bool:
        return self.verdict == FINITE

    def report(self) -> str:
        """Structured ``key: value`` text."""
        lines = [
            f"verdict: {self.verdict}",
            f"lift_length: {self.lift_length!r}",
            f"image: [{self.image[0]!r}, {self.image[1]!r}]",
            f"tail_growth_rate: {self.tail_rate!r}",
            f"bound_K: {'n/a' if self.bound_K is None else repr(self.bound_K)}",
            f"witness_radius: {'n/a' if self.witness is None else repr(self.witness)}",
            f"horizon: {self.horizon!r}",
            f"base_point: {self.base_point!r}",
            f"circle: {str(self.circle).lower()}",
        ]
        if self.verdict == GROWING:
            lines.append("note: the lift keeps growing; no conclusion about locomotion follows")
        return "\n".join(lines) + "\n"


def verdict(lp: LiftedPath, K: float | None = None, tail_fraction: float = 0.1, tol: float = 1e-6) -> CoverVerdict:
    """Horizon-relative boundedness verdict for a lifted path.

    The lift counts as growing when its image widens over the final
    ``tail_fraction`` of the horizon faster than ``tol`` per unit time.
    Otherwise the verdict is finite and, given the field constant ``K``, the
    witness radius ``K * int_image |p(sigma)| d sigma`` bounds the
    trajectory diameter.
    """
    if not 0 < tail_fraction < 1:
        raise ValueError("tail_fraction must lie in (0, 1)")
    t, x = lp.t, lp.lifted
    window = tail_fraction * lp.horizon
    head = t <= t[-1] - window
    rate = 0.0
    if window > 0 and head.any():
        widen = (x.max() - x.min()) - (x[head].max() - x[head].min())
        rate = float(widen / window)
    kind = GROWING if rate > tol else FINITE
    K = None if K is None else float(K)
    witness = None
    if kind == FINITE and K is not None:
        witness = float(K * image_integral(lp))
    return CoverVerdict(kind, lift_length(lp), lp.image(), rate, witness, K, lp.horizon, lp.base_point, lp.circle)


def read_path_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read ``(t, s)`` from a CSV with a header; the first two columns are used."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    try:
        data = np.array([[float(v) for v in r[:2]] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric entry ({exc})") from None
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError(f"{path}: expected at least two columns t,s")
    return data[:, 0], data[:, 1]
