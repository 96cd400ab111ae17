"""Scenario configuration, built-in scenarios and the run pipeline.

A scenario is a TOML document::

    name = "my_run"
    model = "lowre"            # lowre | highre-free | highre-obstacle | synthetic
    step = 0.0157
    horizon = 6.2832

    [waveform]
    kind = "cosine"            # cosine | damped | winding | csv
    amplitude = "pi/3"

    [initial]
    theta = 0.0

Unknown keys, missing required fields and out-of-range values are all
collected and reported together, each with its key path.
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .cover import CoverVerdict, lift, verdict
from .engine import ShapePath, SwimmerField, Trajectory, integrate, reparameterize
from .geometry import ScallopGeometry, build_scallop, rectangle_obstacle
from .highre import HighReModel, highre_swimmer, integrate_second_order
from .lowre import ALPHA_REST, STROKE_LIMIT, Wall, lowre_swimmer
from .se2 import BodyTwist, Pose
from .synthetic import holonomy_field
from .waveforms import KINDS, Waveform, format_number, parse_number

OUTPUT_ENV = "LINSWIM_OUTPUT_DIR"
MODELS = ("lowre", "highre-free", "highre-obstacle", "synthetic")
SCALLOP_MODELS = ("lowre", "highre-free", "highre-obstacle")
REPARAM_KINDS = ("none", "scale", "flap")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_COLLISION = 3


class ConfigError(ValueError):
    """Invalid scenario; ``errors`` lists ``(key_path, message)`` pairs."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(f"{k}: {m}" for k, m in self.errors))


@dataclass(frozen=True)
class Obstacle:
    center: tuple[float, float] = (-3.0, 0.0)
    width: float = 0.4
    height: float = 4.0
    panels: int = 60


@dataclass(frozen=True)
class Reparam:
    """``scale``: beta(t) = factor t. ``flap``: beta(t) = span sin^2(frequency t)."""

    kind: str = "none"
    factor: float = 1.0
    span: float = np.pi
    frequency: float = 1.0

    def apply(self, path: ShapePath, horizon: float) -> ShapePath:
        if self.kind == "scale":
            c = self.factor
            return reparameterize(path, lambda t: c * t, lambda t: c, horizon)
        if self.kind == "flap":
            S, w = self.span, self.frequency
            return reparameterize(path, lambda t: S * np.sin(w * t) ** 2, lambda t: S * w * np.sin(2 * w * t), horizon)
        return path

    def source_horizon(self, horizon: float) -> float:
        if self.kind == "scale":
            return self.factor * horizon
        if self.kind == "flap":
            return self.span
        return horizon


@dataclass(frozen=True)
class Scenario:
    name: str
    model: str
    step: float
    horizon: float
    waveform: Waveform
    geometry: ScallopGeometry = field(default_factory=ScallopGeometry)
    mu: float = 1.0
    c_t: float = 1.0
    c_n: float = 2.0
    rho_body: float = 1.0
    rho_fluid: float = 1.0
    obstacle: Obstacle | None = None
    initial: Pose = field(default_factory=Pose)
    synthetic: dict = field(default_factory=dict)
    reparam: Reparam = field(default_factory=Reparam)
    output_dir: str = "out"
    description: str = ""

    @property
    def stroke_period(self) -> float:
        return self.waveform.period


# ---------------------------------------------------------------------------
# parsing

_SCHEMA = {
    "": {"name": str, "model": str, "step": float, "horizon": float, "description": str,
         "geometry": dict, "fluid": dict, "obstacle": dict, "waveform": dict, "initial": dict,
         "synthetic": dict, "reparam": dict, "output": dict},
    "geometry": {"semi_major": float, "semi_minor": float, "hinge_offset": float, "panels_per_arm": int},
    "fluid": {"mu": float, "c_t": float, "c_n": float, "rho_body": float, "rho_fluid": float},
    "obstacle": {"center": list, "width": float, "height": float, "panels": int},
    "waveform": {"kind": str, "amplitude": float, "frequency": float, "phase": float, "decay": float,
                 "rest": float, "file": str},
    "initial": {"theta": float, "x": float, "y": float},
    "synthetic": {"field": str, "drift": float, "wobble": float, "sway": float, "turn": float},
    "reparam": {"kind": str, "factor": float, "span": float, "frequency": float},
    "output": {"directory": str},
}


class _Reader:
    def __init__(self, data: dict):
        self.data = data
        self.errors: list[tuple[str, str]] = []

    def section(self, name: str) -> dict:
        sec = self.data if name == "" else self.data.get(name, {})
        if not isinstance(sec, dict):
            self.errors.append((name, "expected a table"))
            return {}
        for key in sec:
            if key not in _SCHEMA[name]:
                self.errors.append((_path(name, key), "unknown key"))
        return sec

    def get(self, name: str, key: str, default=None, required: bool = False, check=None, message: str = ""):
        sec = self.section(name) if name else self.data
        path = _path(name, key)
        if key not in sec:
            if required:
                self.errors.append((path, "missing required field"))
            return default
        kind = _SCHEMA[name][key]
        raw = sec[key]
        try:
            if kind is float:
                val = parse_number(raw)
            elif kind is int:
                if isinstance(raw, bool) or not isinstance(raw, int):
                    raise ValueError(f"expected an integer, got {raw!r}")
                val = raw
            elif kind is str:
                if not isinstance(raw, str):
                    raise ValueError(f"expected a string, got {raw!r}")
                val = raw
            else:
                val = raw
        except ValueError as exc:
            self.errors.append((path, str(exc)))
            return default
        if check is not None and not check(val):
            self.errors.append((path, f"out of range: {message} (got {raw!r})"))
            return default
        return val


def _positive(v) -> bool:
    return v > 0


def _path(section: str, key: str) -> str:
    return f"{section}.{key}" if section else key


def parse_config(text: str, base_dir: str | Path | None = None) -> Scenario:
    """Validate TOML scenario text; raise :class:`ConfigError` with every problem found."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([("<document>", f"malformed TOML: {exc}")]) from None
    base = Path(base_dir) if base_dir is not None else Path.cwd()
    r = _Reader(data)
    r.section("")
    for sec in _SCHEMA[""]:
        if _SCHEMA[""][sec] is dict and sec in data:
            r.section(sec)

    model = r.get("", "model", required=True, check=lambda v: v in MODELS, message=f"one of {', '.join(MODELS)}")
    name = r.get("", "name", "scenario", check=lambda v: bool(v.strip()) and "/" not in v, message="non-empty file stem")
    period_default = 2 * np.pi
    horizon = r.get("", "horizon", period_default, check=_positive, message="must be positive")
    step = r.get("", "step", 2 * np.pi / 400, check=_positive, message="must be positive")
    if horizon and step and step > horizon:
        r.errors.append(("step", f"out of range: larger than the horizon {horizon:g}"))

    scallop = model in SCALLOP_MODELS
    kind = r.get("waveform", "kind", "cosine", check=lambda v: v in KINDS, message=f"one of {', '.join(KINDS)}")
    wf = dict(
        kind=kind,
        amplitude=r.get("waveform", "amplitude", np.pi / 3),
        frequency=r.get("waveform", "frequency", 1.0, check=_positive, message="must be positive"),
        phase=r.get("waveform", "phase", 0.0),
        decay=r.get("waveform", "decay", 0.2, check=lambda v: v >= 0, message="must be non-negative"),
        rest=r.get("waveform", "rest", ALPHA_REST if scallop else 0.0),
        file=r.get("waveform", "file", None, required=kind == "csv"),
    )
    if wf["file"] is not None:
        fp = Path(wf["file"])
        fp = fp if fp.is_absolute() else base / fp
        if not fp.is_file():
            r.errors.append(("waveform.file", f"file not found: {fp}"))
        wf["file"] = str(fp)
    if scallop and kind == "winding":
        r.errors.append(("waveform.kind", "out of range: the scallop opening cannot wind"))
    if scallop and kind in ("cosine", "damped") and wf["amplitude"] is not None:
        lo, hi = ALPHA_REST - STROKE_LIMIT, ALPHA_REST + STROKE_LIMIT
        if wf["rest"] - abs(wf["amplitude"]) < lo - 1e-9 or wf["rest"] + abs(wf["amplitude"]) > hi + 1e-9:
            r.errors.append(("waveform.amplitude",
                             f"out of range: opening must stay in [{format_number(lo)}, {format_number(hi)}]"))

    geom = None
    g = dict(
        a=r.get("geometry", "semi_major", 1.0, check=_positive, message="must be positive"),
        b=r.get("geometry", "semi_minor", 0.2, check=_positive, message="must be positive"),
        d=r.get("geometry", "hinge_offset", 1.5, check=_positive, message="must be positive"),
        n=r.get("geometry", "panels_per_arm", 64, check=lambda v: v >= 8, message="at least 8"),
    )
    if all(v is not None for v in g.values()):
        try:
            geom = ScallopGeometry((g["a"], g["b"]), g["d"], g["n"])
        except ValueError as exc:
            r.errors.append(("geometry", str(exc)))

    fluid = dict(
        mu=r.get("fluid", "mu", 1.0, check=_positive, message="must be positive"),
        c_t=r.get("fluid", "c_t", 1.0, check=_positive, message="must be positive"),
        c_n=r.get("fluid", "c_n", 2.0, check=_positive, message="must be positive"),
        rho_body=r.get("fluid", "rho_body", 1.0, check=_positive, message="must be positive"),
        rho_fluid=r.get("fluid", "rho_fluid", 1.0, check=_positive, message="must be positive"),
    )
    if fluid["c_t"] and fluid["c_n"] and fluid["c_t"] > fluid["c_n"]:
        r.errors.append(("fluid.c_t", "out of range: must not exceed fluid.c_n"))

    obstacle = None
    if "obstacle" in data or model == "highre-obstacle":
        if "obstacle" not in data:
            r.errors.append(("obstacle", "missing required table for model highre-obstacle"))
        elif model in ("highre-free", "synthetic"):
            r.errors.append(("obstacle", f"not supported by model {model}"))
        else:
            center = r.get("obstacle", "center", [-3.0, 0.0])
            ok = isinstance(center, list) and len(center) == 2
            try:
                center = tuple(parse_number(v) for v in center) if ok else None
            except ValueError:
                ok = False
            if not ok:
                r.errors.append(("obstacle.center", "expected two numbers [x, y]"))
            o = dict(
                width=r.get("obstacle", "width", 0.4, check=_positive, message="must be positive"),
                height=r.get("obstacle", "height", 4.0, check=_positive, message="must be positive"),
                panels=r.get("obstacle", "panels", 60, check=lambda v: v >= 8, message="at least 8"),
            )
            if ok and all(v is not None for v in o.values()):
                obstacle = Obstacle(center, **o)

    initial = Pose(
        r.get("initial", "theta", 0.0) or 0.0,
        (r.get("initial", "x", 0.0) or 0.0, r.get("initial", "y", 0.0) or 0.0),
    )

    synthetic = {}
    if model == "synthetic":
        fname = r.get("synthetic", "field", "holonomy", check=lambda v: v == "holonomy", message="only 'holonomy'")
        synthetic = {"field": fname}
        for key in ("drift", "wobble", "sway", "turn"):
            v = r.get("synthetic", key)
            if v is not None:
                synthetic[key] = v
    elif "synthetic" in data:
        r.errors.append(("synthetic", f"only used by model synthetic, not {model}"))

    rp = Reparam(
        kind=r.get("reparam", "kind", "none", check=lambda v: v in REPARAM_KINDS, message=f"one of {', '.join(REPARAM_KINDS)}"),
        factor=r.get("reparam", "factor", 1.0, check=_positive, message="must be positive"),
        span=r.get("reparam", "span", np.pi, check=_positive, message="must be positive"),
        frequency=r.get("reparam", "frequency", 1.0, check=_positive, message="must be positive"),
    )
    if rp.kind != "none" and model == "highre-obstacle":
        r.errors.append(("reparam.kind", "out of range: reparameterization needs a first-order model"))

    out_dir = r.get("output", "directory", "out")
    description = r.get("", "description", "")

    if r.errors:
        raise ConfigError(_unique(r.errors))
    try:
        waveform = Waveform(**wf)
    except ValueError as exc:
        raise ConfigError([("waveform", str(exc))]) from None
    return Scenario(
        name=name, model=model, step=step, horizon=horizon, waveform=waveform, geometry=geom,
        mu=fluid["mu"], c_t=fluid["c_t"], c_n=fluid["c_n"], rho_body=fluid["rho_body"],
        rho_fluid=fluid["rho_fluid"], obstacle=obstacle, initial=initial, synthetic=synthetic,
        reparam=rp, output_dir=out_dir, description=description,
    )


def _unique(errors):
    seen, out = set(), []
    for e in errors:
        if e not in seen:
            seen.add(e)
            out.append(e)
    return out


def load_scenario(config: str) -> Scenario:
    """A built-in scenario by name, or a TOML file path."""
    if config in BUILTIN:
        return builtin(config)
    p = Path(config)
    if not p.is_file():
        raise ConfigError([("<config>", f"no such file or built-in scenario: {config}")])
    return parse_config(p.read_text(), base_dir=p.parent)


# ---------------------------------------------------------------------------
# built-in library

BUILTIN = {
    "scallop_free_lowre": '''
description = "Resistive-force scallop, reciprocal stroke, three periods"
name = "scallop_free_lowre"
model = "lowre"
horizon = "6*pi"
step = "pi/200"
[waveform]
kind = "cosine"
amplitude = "pi/3"
''',
    "scallop_free_highre": '''
description = "Potential-flow scallop in free space, one period"
name = "scallop_free_highre"
model = "highre-free"
horizon = "2*pi"
step = "pi/100"
[geometry]
panels_per_arm = 128
[waveform]
kind = "cosine"
amplitude = "pi/3"
''',
    "scallop_obstacle": '''
description = "Potential-flow scallop beside a rectangular wall on its left"
name = "scallop_obstacle"
model = "highre-obstacle"
horizon = "16*pi"
step = "pi/30"
[geometry]
panels_per_arm = 48
[obstacle]
center = [-3.0, 0.0]
width = 0.4
height = 4.0
panels = 60
[waveform]
kind = "cosine"
amplitude = "pi/3"
[initial]
theta = "pi/2"
''',
    "damped_stroke": '''
description = "Resistive-force scallop with a decaying stroke"
name = "damped_stroke"
model = "lowre"
horizon = 40.0
step = 0.01
[waveform]
kind = "damped"
amplitude = "pi/3"
decay = 0.2
''',
    "winding_stroke": '''
description = "Circle-valued shape winding ten times through a synthetic holonomy field"
name = "winding_stroke"
model = "synthetic"
horizon = "20*pi"
step = "pi/200"
[waveform]
kind = "winding"
[synthetic]
field = "holonomy"
''',
    "reparam_demo": '''
description = "Reciprocal stroke replayed back and forth through a flapping time change"
name = "reparam_demo"
model = "lowre"
horizon = "4*pi"
step = "pi/400"
[waveform]
kind = "cosine"
amplitude = "pi/3"
[reparam]
kind = "flap"
span = "pi"
frequency = 1.0
''',
}


def builtin(name: str) -> Scenario:
    try:
        text = BUILTIN[name]
    except KeyError:
        raise ConfigError([("<config>", f"unknown built-in scenario {name!r}")]) from None
    return parse_config(text)


def list_scenarios() -> list[tuple[str, str]]:
    return [(n, builtin(n).description) for n in BUILTIN]


# ---------------------------------------------------------------------------
# running


def build_field(sc: Scenario) -> SwimmerField:
    """First-order field of a scenario (all models except the obstacle one)."""
    if sc.model == "lowre":
        wall = None
        if sc.obstacle is not None:
            o = sc.obstacle
            wall = Wall(rectangle_obstacle(o.center, o.width, o.height, o.panels))
        return lowre_swimmer(sc.geometry, sc.mu, sc.c_t, sc.c_n, wall=wall, tabulate=wall is None)
    if sc.model == "highre-free":
        return highre_swimmer(sc.geometry, sc.rho_body, sc.rho_fluid)
    if sc.model == "synthetic":
        params = {k: v for k, v in sc.synthetic.items() if k != "field"}
        return holonomy_field(**params)
    raise ValueError(f"model {sc.model} has no first-order field")


def build_model(sc: Scenario) -> HighReModel:
    o = sc.obstacle
    obst = rectangle_obstacle(o.center, o.width, o.height, o.panels)
    return HighReModel(sc.geometry, obst, sc.rho_body, sc.rho_fluid)


def shape_path(sc: Scenario) -> ShapePath:
    base = sc.waveform.path(sc.reparam.source_horizon(sc.horizon), label=sc.waveform.describe())
    return sc.reparam.apply(base, sc.horizon)


def scenario_mesh(sc: Scenario):
    """Swimmer boundary (with the obstacle, if any) at t = 0 in world coordinates."""
    if sc.model == "synthetic":
        raise ValueError("synthetic scenarios have no body geometry")
    s0 = float(shape_path(sc).shape(0.0)[0])
    b = build_scallop(sc.geometry.with_alpha(s0)).transformed(sc.initial)
    if sc.obstacle is not None:
        o = sc.obstacle
        b = b.union(rectangle_obstacle(o.center, o.width, o.height, o.panels, n_modes=b.n_modes))
    return b


@dataclass(eq=False)
class RunResult:
    scenario: Scenario
    trajectory: Trajectory
    verdict: CoverVerdict | None
    summary: dict
    files: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return EXIT_COLLISION if self.trajectory.status == "collision" else EXIT_OK


def per_stroke_displacement(traj: Trajectory, period: float) -> np.ndarray:
    """Rows ``(dtheta, dx, dy)`` between consecutive stroke boundaries."""
    n = int(np.floor(traj.t[-1] / period + 1e-9))
    if n == 0:
        return np.zeros((0, 3))
    marks = np.minimum(period * np.arange(n + 1), traj.t[-1])
    q = traj.at(marks)
    return np.diff(q, axis=0)


def simulate(sc: Scenario) -> tuple[Trajectory, SwimmerField | None]:
    path = shape_path(sc)
    if sc.model == "highre-obstacle":
        return integrate_second_order(build_model(sc), path, sc.initial, sc.step, twist0=BodyTwist()), None
    f = build_field(sc)
    return integrate(f, path, sc.initial, sc.step), f


def run(sc: Scenario, output_dir: str | Path | None = None, write: bool = True) -> RunResult:
    """Integrate a scenario and write ``<name>.csv``, ``<name>.verdict.txt`` and ``<name>.summary.json``.

    The output directory is, in order of precedence, ``output_dir``, the
    ``LINSWIM_OUTPUT_DIR`` environment variable, then the scenario's own.
    """
    traj, f = simulate(sc)
    v = None
    if traj.s.shape[1] == 1:
        K = None if f is None or not np.isfinite(f.bound_K) else float(f.bound_K)
        v = verdict(lift(traj.t, traj.s[:, 0], circle=sc.waveform.circle), K)
    strokes = per_stroke_displacement(traj, sc.stroke_period) if sc.reparam.kind == "none" else np.zeros((0, 3))
    summary = {
        "name": sc.name,
        "model": sc.model,
        "waveform": sc.waveform.describe(),
        "rest": sc.waveform.rest,
        "status": traj.status,
        "steps": len(traj.t) - 1,
        "step": traj.step,
        "horizon": sc.horizon,
        "final_time": float(traj.t[-1]),
        "initial_pose": traj.q[0].tolist(),
        "final_pose": traj.q[-1].tolist(),
        "net_displacement": traj.displacement().tolist(),
        "net_displacement_norm": float(np.linalg.norm(traj.displacement())),
        "diameter": traj.diameter(),
        "per_stroke": [{"stroke": k + 1, "dtheta": d[0], "dx": d[1], "dy": d[2]} for k, d in enumerate(strokes.tolist())],
        "verdict": None if v is None else {"verdict": v.verdict, "lift_length": v.lift_length,
                                           "witness_radius": v.witness, "image": list(v.image)},
    }
    res = RunResult(sc, traj, v, summary)
    if write:
        out = Path(output_dir or os.environ.get(OUTPUT_ENV) or sc.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        res.files["trajectory"] = out / f"{sc.name}.csv"
        traj.to_csv(res.files["trajectory"])
        if v is not None:
            res.files["verdict"] = out / f"{sc.name}.verdict.txt"
            res.files["verdict"].write_text(v.report())
        res.files["summary"] = out / f"{sc.name}.summary.json"
        res.files["summary"].write_text(json.dumps(summary, indent=2) + "\n")
    return res
