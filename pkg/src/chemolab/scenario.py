"""Run descriptions: strict JSON parsing and initial data synthesis.

A scenario file pins down everything a run needs: model parameters, grid,
initial data, time window, monitor cadence, which checks to grade, and the
seed.  Parsing is deliberately unforgiving: unknown keys, missing keys, and
out-of-range values are all errors, each naming the offending path, so a
typo in a config cannot silently change an experiment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter

from .grid import Grid, ScalarField
from .params import CoefficientSpec, ParameterSet

__all__ = [
    "Scenario",
    "ScenarioError",
    "parse_scenario",
    "load_scenario",
    "make_initial",
    "CHECK_NAMES",
    "INITIAL_KINDS",
]

CHECK_NAMES = ("envelope", "global_bound", "rectangle", "persistence",
               "speed_interval", "v_bounds")
INITIAL_KINDS = ("uniform", "bump", "front_like", "random_strictly_positive")


class ScenarioError(ValueError):
    """Scenario input could not be validated; the message names the path."""


def _fail(path, msg):
    raise ScenarioError(f"{path}: {msg}")


def _require_mapping(obj, path):
    if not isinstance(obj, dict):
        _fail(path, f"expected an object, got {type(obj).__name__}")
    return obj


def _reject_unknown(obj, allowed, path):
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        _fail(f"{path}.{unknown[0]}", "unknown key")


def _number(obj, key, path, required=True, default=None):
    if key not in obj:
        if required:
            _fail(f"{path}.{key}", "missing required key")
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        _fail(f"{path}.{key}", f"expected a number, got {val!r}")
    val = float(val)
    if not np.isfinite(val):
        _fail(f"{path}.{key}", "must be finite")
    return val


def _integer(obj, key, path, required=True, default=None):
    if key not in obj:
        if required:
            _fail(f"{path}.{key}", "missing required key")
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, int):
        _fail(f"{path}.{key}", f"expected an integer, got {val!r}")
    return val


def _coefficient(obj, key, path):
    if key not in obj:
        _fail(f"{path}.{key}", "missing required key")
    val = obj[key]
    here = f"{path}.{key}"
    if isinstance(val, bool):
        _fail(here, "expected a number or an object")
    if isinstance(val, (int, float)):
        try:
            return CoefficientSpec.constant(float(val))
        except ValueError as e:
            _fail(here, str(e))
    spec = _require_mapping(val, here)
    _reject_unknown(spec, ("base", "space_amplitude", "space_wavelength",
                           "time_amplitude", "time_period"), here)
    kwargs = {"base": _number(spec, "base", here)}
    for opt in ("space_amplitude", "space_wavelength",
                "time_amplitude", "time_period"):
        v = _number(spec, opt, here, required=False)
        if v is not None:
            kwargs[opt] = v
    try:
        return CoefficientSpec(**kwargs)
    except ValueError as e:
        _fail(here, str(e))


@dataclass(frozen=True)
class Scenario:
    name: str
    params: ParameterSet
    grid: Grid
    initial_kind: str
    initial_options: dict
    t0: float
    t_end: float
    monitor_cadence: float
    checks: tuple[str, ...]
    seed: int | None
    dt_max: float | None

    @property
    def tracks_fronts(self) -> bool:
        """Fronts are only meaningful for data with an identifiable edge."""
        return self.initial_kind in ("bump", "front_like")

    @property
    def front_mode(self):
        """Reach convention for spreading diagnostics: "radial" for bumps,
        the planar direction for front-like data, None otherwise."""
        if self.initial_kind == "bump":
            return "radial"
        if self.initial_kind == "front_like":
            return self.initial_options["direction"]
        return None


def parse_scenario(raw: dict, name: str = "scenario") -> Scenario:
    """Validate a decoded scenario object.  Every complaint names the JSON
    path it refers to and parsing stops at the first one."""
    top = _require_mapping(raw, name)
    _reject_unknown(top, ("params", "grid", "initial_data", "t0", "t_end",
                          "monitor_cadence", "checks", "seed", "dt_max"),
                    name)

    for key in ("params", "grid", "initial_data"):
        if key not in top:
            _fail(f"{name}.{key}", "missing required key")

    # --- params ---------------------------------------------------------
    po = _require_mapping(top["params"], f"{name}.params")
    ppath = f"{name}.params"
    _reject_unknown(po, ("chi", "lambda", "mu", "dims", "a", "b"), ppath)
    chi = _number(po, "chi", ppath)
    lam = _number(po, "lambda", ppath)
    mu = _number(po, "mu", ppath)
    dims = _integer(po, "dims", ppath)
    a = _coefficient(po, "a", ppath)
    b = _coefficient(po, "b", ppath)
    try:
        params = ParameterSet(chi=chi, lam=lam, mu=mu, dims=dims, a=a, b=b)
    except ValueError as e:
        _fail(ppath, str(e))

    # --- grid -----------------------------------------------------------
    go = _require_mapping(top["grid"], f"{name}.grid")
    gpath = f"{name}.grid"
    _reject_unknown(go, ("extent", "points", "boundary"), gpath)
    if "extent" not in go:
        _fail(f"{gpath}.extent", "missing required key")
    if "points" not in go:
        _fail(f"{gpath}.points", "missing required key")
    if "boundary" not in go:
        _fail(f"{gpath}.boundary", "missing required key")
    extent = go["extent"]
    points = go["points"]
    boundary = go["boundary"]
    if isinstance(extent, (int, float)) and not isinstance(extent, bool):
        extent = (float(extent),) * dims
    elif isinstance(extent, list):
        extent = tuple(extent)
    else:
        _fail(f"{gpath}.extent", "expected a number or a list")
    if isinstance(points, bool):
        _fail(f"{gpath}.points", "expected an integer or a list")
    if isinstance(points, int):
        points = (points,) * dims
    elif isinstance(points, list):
        points = tuple(points)
    else:
        _fail(f"{gpath}.points", "expected an integer or a list")
    if len(extent) != dims or len(points) != dims:
        _fail(gpath, f"extent/points must match params.dims = {dims}")
    if not isinstance(boundary, str):
        _fail(f"{gpath}.boundary", "expected a string")
    try:
        grid = Grid(extents=extent, points=points, boundary=boundary)
    except (TypeError, ValueError) as e:
        _fail(gpath, str(e))

    # Spatially varying coefficients must tile a periodic box exactly,
    # otherwise the stated extrema are wrong on the grid actually used.
    if boundary == "periodic":
        for label, spec in (("a", a), ("b", b)):
            if spec.space_amplitude != 0.0:
                for e in grid.extents:
                    ratio = e / spec.space_wavelength
                    if abs(ratio - round(ratio)) > 1e-9:
                        _fail(f"{ppath}.{label}.space_wavelength",
                              f"periodic extent {e:g} must be an integer "
                              f"multiple of the wavelength {spec.space_wavelength:g}")

    # --- initial data ----------------------------------------------------
    io = _require_mapping(top["initial_data"], f"{name}.initial_data")
    ipath = f"{name}.initial_data"
    if "kind" not in io:
        _fail(f"{ipath}.kind", "missing required key")
    kind = io["kind"]
    if kind not in INITIAL_KINDS:
        _fail(f"{ipath}.kind", f"must be one of {INITIAL_KINDS}, got {kind!r}")
    opts = {}
    if kind == "uniform":
        _reject_unknown(io, ("kind", "value"), ipath)
        value = _number(io, "value", ipath)
        if value < 0:
            _fail(f"{ipath}.value", "must be nonnegative")
        opts["value"] = value
    elif kind == "bump":
        _reject_unknown(io, ("kind", "height", "radius", "center"), ipath)
        height = _number(io, "height", ipath)
        radius = _number(io, "radius", ipath)
        if height <= 0:
            _fail(f"{ipath}.height", "must be positive")
        if radius <= 0:
            _fail(f"{ipath}.radius", "must be positive")
        center = io.get("center", [0.0] * dims)
        if not (isinstance(center, list) and len(center) == dims
                and all(isinstance(c, (int, float)) and not isinstance(c, bool)
                        for c in center)):
            _fail(f"{ipath}.center", f"expected a list of {dims} number(s)")
        center = tuple(float(c) for c in center)
        for c, h in zip(center, grid.half_extents):
            if abs(c) + radius >= h:
                _fail(f"{ipath}.radius",
                      f"support must lie strictly inside the domain "
                      f"(|{c:g}| + {radius:g} reaches the half extent {h:g})")
        opts.update(height=height, radius=radius, center=center)
    elif kind == "front_like":
        _reject_unknown(io, ("kind", "height", "interface", "width",
                             "direction"), ipath)
        if boundary != "reflecting":
            _fail(f"{ipath}.kind",
                  "front_like data wraps around on a periodic grid; "
                  "use a reflecting boundary")
        height = _number(io, "height", ipath)
        interface = _number(io, "interface", ipath)
        width = _number(io, "width", ipath)
        if height <= 0:
            _fail(f"{ipath}.height", "must be positive")
        if width <= 0:
            _fail(f"{ipath}.width", "must be positive")
        direction = io.get("direction", [1.0] + [0.0] * (dims - 1))
        if not (isinstance(direction, list) and len(direction) == dims
                and all(isinstance(c, (int, float)) and not isinstance(c, bool)
                        for c in direction)):
            _fail(f"{ipath}.direction", f"expected a list of {dims} number(s)")
        norm = float(np.sqrt(sum(float(c) ** 2 for c in direction)))
        if norm == 0.0 or not np.isfinite(norm):
            _fail(f"{ipath}.direction", "must have a nonzero length")
        direction = tuple(float(c) / norm for c in direction)
        span = max(abs(d) * h for d, h in zip(direction, grid.half_extents))
        if not -span < interface < span:
            _fail(f"{ipath}.interface", "must lie inside the domain")
        opts.update(height=height, interface=interface, width=width,
                    direction=direction)
    else:  # random_strictly_positive
        _reject_unknown(io, ("kind", "low", "high", "smoothing_length"), ipath)
        low = _number(io, "low", ipath)
        high = _number(io, "high", ipath)
        if low <= 0:
            _fail(f"{ipath}.low", "must be strictly positive")
        if high <= low:
            _fail(f"{ipath}.high", "must exceed low")
        smoothing = _number(io, "smoothing_length", ipath, required=False,
                            default=0.0)
        if smoothing < 0:
            _fail(f"{ipath}.smoothing_length", "must be nonnegative")
        if "seed" not in top:
            _fail(f"{name}.seed", "required for random initial data")
        opts.update(low=low, high=high, smoothing_length=smoothing)

    # --- time window and the rest ----------------------------------------
    t0 = _number(top, "t0", name, required=False, default=0.0)
    t_end = _number(top, "t_end", name)
    if t_end < t0:
        _fail(f"{name}.t_end", f"must not precede t0 = {t0:g}")
    cadence = _number(top, "monitor_cadence", name)
    if cadence <= 0:
        _fail(f"{name}.monitor_cadence", "must be positive")
    # t_end == t0 is a degenerate but legal window: one record, no steps
    if t_end > t0 and cadence > t_end - t0:
        _fail(f"{name}.monitor_cadence",
              f"exceeds the run window {t_end - t0:g}")

    checks = top.get("checks", [])
    if not isinstance(checks, list):
        _fail(f"{name}.checks", "expected a list of check names")
    for c in checks:
        if c not in CHECK_NAMES:
            _fail(f"{name}.checks", f"unknown check {c!r}; "
                  f"valid names: {', '.join(CHECK_NAMES)}")
    if len(set(checks)) != len(checks):
        _fail(f"{name}.checks", "duplicate check name")

    seed = _integer(top, "seed", name, required=False)
    if seed is not None and seed < 0:
        _fail(f"{name}.seed", "must be nonnegative")

    dt_max = _number(top, "dt_max", name, required=False)
    if dt_max is not None and dt_max <= 0:
        _fail(f"{name}.dt_max", "must be positive")

    return Scenario(name=name, params=params, grid=grid, initial_kind=kind,
                    initial_options=opts, t0=t0, t_end=t_end,
                    monitor_cadence=cadence, checks=tuple(checks), seed=seed,
                    dt_max=dt_max)


def load_scenario(path) -> Scenario:
    """Read and validate a scenario file.  Malformed JSON is reported as a
    ScenarioError too, so callers have one failure type for bad input."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ScenarioError(f"{path}: {e.strerror or e}") from e
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{path.name}: invalid JSON ({e})") from e
    return parse_scenario(raw, name=path.stem)


def make_initial(scn: Scenario) -> ScalarField:
    """Synthesize the initial density for a scenario.

    uniform: the constant value.
    bump: height * max(0, 1 - |x - center|^2/radius^2)^2, compactly
        supported inside the ball of the given radius, once continuously
        differentiable across its edge.
    front_like: a plateau of the given height that descends to exactly
        zero through a smoothstep ramp; the transition spans reach values
        within one width of the interface, so the data is constant on
        both sides of that band.
    random_strictly_positive: iid uniform in [low, high] from the scenario
        seed, optionally smoothed (boundary-aware), then clipped back to
        [low, high].  Same seed, same field, bit for bit.
    """
    g = scn.grid
    o = scn.initial_options
    kind = scn.initial_kind
    if kind == "uniform":
        return ScalarField(g, np.full(g.shape, o["value"], dtype=float))
    axes = g.axes()
    if kind == "bump":
        r2 = sum((ax - c) ** 2 for ax, c in zip(axes, o["center"]))
        shape_fn = np.maximum(0.0, 1.0 - r2 / o["radius"] ** 2) ** 2
        vals = o["height"] * np.broadcast_to(shape_fn, g.shape).copy()
        return ScalarField(g, vals)
    if kind == "front_like":
        reach = sum(ax * d for ax, d in zip(axes, o["direction"]))
        ramp = np.clip((1.0 - (reach - o["interface"]) / o["width"]) / 2.0,
                       0.0, 1.0)
        prof = o["height"] * ramp * ramp * (3.0 - 2.0 * ramp)
        return ScalarField(g, np.broadcast_to(prof, g.shape).copy())
    # random_strictly_positive
    rng = np.random.default_rng(scn.seed)
    vals = rng.uniform(o["low"], o["high"], size=g.shape)
    if o["smoothing_length"] > 0:
        sigma = o["smoothing_length"] / g.spacing
        mode = "wrap" if g.boundary == "periodic" else "reflect"
        vals = gaussian_filter(vals, sigma=sigma, mode=mode)
        vals = np.clip(vals, o["low"], o["high"])
    return ScalarField(g, vals)
