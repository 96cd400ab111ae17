"""Named shape waveforms with numeric parameters.

Templates (``t`` is time, ``A`` amplitude, ``w`` frequency):

- ``cosine``  : ``rest + A cos(w t + phase)``
- ``damped``  : ``rest + A exp(-decay t) sin(w t)``
- ``winding`` : ``rest + w t`` on the circle
- ``csv``     : samples ``(t, s)`` from a file, interpolated by a cubic spline

Numeric parameters may be written as plain numbers or as simple multiples
of pi such as ``"pi/3"``, ``"-2pi"`` or ``"3*pi/4"``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.interpolate import CubicSpline

from .cover import read_path_csv
from .engine import ShapePath

KINDS = ("cosine", "damped", "winding", "csv")
_PI_RE = re.compile(r"^\s*([-+]?(?:\d+(?:\.\d*)?|\.\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")


def parse_number(value) -> float:
    """Float from a number or a ``k*pi/m`` string."""
    if isinstance(value, bool):
        raise ValueError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _PI_RE.match(value)
        if m:
            k = m.group(1)
            k = 1.0 if k in ("", "+") else -1.0 if k == "-" else float(k)
            den = float(m.group(2)) if m.group(2) else 1.0
            if den == 0:
                raise ValueError(f"division by zero in {value!r}")
            return k * np.pi / den
        try:
            return float(value)
        except ValueError:
            pass
    raise ValueError(f"expected a number or a multiple of pi, got {value!r}")


def format_number(x: float) -> str:
    """Short text for ``x``, as a rational multiple of pi when it is one."""
    if x == 0:
        return "0"
    frac = Fraction(x / np.pi).limit_denominator(12)
    if frac != 0 and abs(float(frac) * np.pi - x) < 1e-12 * max(1.0, abs(x)):
        num, den = frac.numerator, frac.denominator
        head = "pi" if num == 1 else "-pi" if num == -1 else f"{num}*pi"
        return head if den == 1 else f"{head}/{den}"
    return f"{x:g}"


def _scaled(coef: float, body: str) -> str:
    if coef == 1:
        return body
    if coef == -1:
        return f"-{body}"
    return f"{format_number(coef)}*{body}"


def _arg(w: float, phase: float = 0.0) -> str:
    out = "t" if w == 1 else f"{format_number(w)}*t"
    if phase:
        out += f" + {format_number(phase)}" if phase > 0 else f" - {format_number(-phase)}"
    return out


@dataclass(frozen=True)
class Waveform:
    kind: str = "cosine"
    amplitude: float = np.pi / 3
    frequency: float = 1.0
    phase: float = 0.0
    decay: float = 0.2
    rest: float = 0.0
    file: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown waveform kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if not self.frequency > 0:
            raise ValueError(f"frequency must be positive, got {self.frequency}")
        if self.kind == "csv" and not self.file:
            raise ValueError("csv waveform needs a file")

    @property
    def circle(self) -> bool:
        return self.kind == "winding"

    @property
    def period(self) -> float:
        return 2 * np.pi / self.frequency

    def describe(self) -> str:
        """The stroke about ``rest`` in the template's notation, e.g. ``pi/3*cos(t)``."""
        A, w = self.amplitude, self.frequency
        if self.kind == "cosine":
            return _scaled(A, f"cos({_arg(w, self.phase)})")
        if self.kind == "damped":
            return _scaled(A, f"exp({format_number(-self.decay)}*t)*sin({_arg(w)})")
        if self.kind == "winding":
            return _arg(w)
        return f"csv({self.file})"

    def excursion(self, horizon: float) -> tuple[float, float]:
        """Bounds of the shape over ``[0, horizon]`` (templates only)."""
        A = abs(self.amplitude)
        if self.kind in ("cosine", "damped"):
            return self.rest - A, self.rest + A
        if self.kind == "winding":
            return self.rest, self.rest + self.frequency * horizon
        raise ValueError("excursion is not defined for sampled waveforms")

    def path(self, horizon: float, label: str = "") -> ShapePath:
        A, w, ph, lam, c = self.amplitude, self.frequency, self.phase, self.decay, self.rest
        label = label or self.describe()
        if self.kind == "cosine":
            return ShapePath(
                lambda t: (c + A * np.cos(w * t + ph), -A * w * np.sin(w * t + ph)),
                horizon, accel=lambda t: -A * w * w * np.cos(w * t + ph), label=label,
            )
        if self.kind == "damped":
            def sampler(t):
                e = np.exp(-lam * t)
                return c + A * e * np.sin(w * t), A * e * (w * np.cos(w * t) - lam * np.sin(w * t))

            def accel(t):
                e = np.exp(-lam * t)
                return A * e * ((lam * lam - w * w) * np.sin(w * t) - 2 * lam * w * np.cos(w * t))

            return ShapePath(sampler, horizon, accel=accel, label=label)
        if self.kind == "winding":
            return ShapePath(lambda t: (c + w * t, w), horizon, circle=(True,), accel=lambda t: 0.0, label=label)
        t, s = read_path_csv(self.file)
        if horizon > t[-1] - t[0] + 1e-12:
            raise ValueError(f"{self.file}: samples cover {t[-1] - t[0]:g}, shorter than the horizon {horizon:g}")
        spline = CubicSpline(t - t[0], s)
        d1, d2 = spline.derivative(), spline.derivative(2)
        return ShapePath(lambda x: (spline(x), d1(x)), horizon, accel=lambda x: d2(x), label=label)
