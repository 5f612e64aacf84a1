"""Diagnostics extracted from runs, and the checks that compare them
against the closed-form predictions.

A run produces a Trajectory: a time series of MonitorRecords (extrema,
mass, front positions, live bound flags) plus the final fields.  The
check_* functions grade a trajectory against the attracting rectangle, the
finite-time persistence floor, and the spreading-speed interval; they
return small report objects with a passed flag and the measured margins,
raising HypothesisError when the parameter regime does not define the
quantity being checked.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, ScalarField
from .params import (
    ParameterSet,
    check_h1,
    check_h2,
    comparison_envelope,
    finite_time_floor,
    m_plus,
    rectangle_bounds,
    spreading_speeds,
)

__all__ = [
    "MonitorRecord",
    "Trajectory",
    "SpeedFit",
    "RectangleReport",
    "PersistenceReport",
    "SpeedIntervalReport",
    "front_position",
    "estimate_speed",
    "check_rectangle_invariance",
    "check_persistence",
    "check_speed_interval",
    "boundary_margin_guard",
    "default_front_threshold",
    "envelope_holds",
    "global_bound_holds",
    "TRAJECTORY_COLUMNS",
]

TRAJECTORY_COLUMNS = ("t", "u_min", "u_max", "v_min", "v_max", "mass",
                      "front_plus", "front_minus", "clamp_count")


@dataclass(frozen=True)
class MonitorRecord:
    """One diagnostic snapshot.  Front positions are None when the scenario
    does not track fronts (or the level set is empty)."""

    t: float
    u_min: float
    u_max: float
    v_min: float
    v_max: float
    mass: float
    front_plus: float | None
    front_minus: float | None
    clamp_count: int
    flags: dict = field(default_factory=dict)


@dataclass
class Trajectory:
    records: list[MonitorRecord]
    t0: float
    t_end_requested: float
    theta: float | None
    front_mode: object  # None, "radial", or a direction tuple
    halt_reason: str    # "completed" or "truncation_limited"
    final_u: ScalarField | None = None
    final_v: ScalarField | None = None

    @property
    def t_final(self) -> float:
        return self.records[-1].t

    @property
    def truncation_limited(self) -> bool:
        return self.halt_reason == "truncation_limited"

    def to_csv(self, path) -> None:
        """Delimited time series, 17 significant digits, empty cell for
        absent fronts.  Identical runs produce identical bytes."""
        def cell(x):
            return "" if x is None else f"{x:.17g}"

        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(TRAJECTORY_COLUMNS) + "\n")
            for r in self.records:
                fh.write(",".join([
                    f"{r.t:.17g}", f"{r.u_min:.17g}", f"{r.u_max:.17g}",
                    f"{r.v_min:.17g}", f"{r.v_max:.17g}", f"{r.mass:.17g}",
                    cell(r.front_plus), cell(r.front_minus),
                    str(r.clamp_count),
                ]) + "\n")


def default_front_threshold(p: ParameterSet) -> float:
    """Level used to locate fronts: half the rectangle floor when the
    rectangle exists, otherwise a tenth of the eventual upper bound."""
    if check_h2(p):
        return rectangle_bounds(p)[0] / 2.0
    if check_h1(p):
        return 0.1 * p.a_sup / (p.b_inf - p.chimu)
    return 0.1 * p.a_sup / p.b_sup


def front_position(u: ScalarField, theta: float,
                   direction=None) -> float | None:
    """Outermost location where the density still reaches theta.

    With direction None the reach of a node is its distance |x| from the
    origin; otherwise direction is a vector xi (any nonzero length, it is
    normalized) and the reach is the projection x . xi.  The position
    returned is the reach of the outermost node with u >= theta, refined by
    linear interpolation toward its outward neighbor along the dominant
    axis (exact bracketing in 1D, O(spacing) in 2D).  None when no node
    qualifies.
    """
    if theta <= 0:
        raise ValueError("theta must be strictly positive")
    grid = u.grid
    vals = u.values
    mask = vals >= theta
    if not mask.any():
        return None
    coords = [np.broadcast_to(ax, grid.shape) for ax in grid.axes()]
    if direction is None:
        sq = coords[0] ** 2
        for c in coords[1:]:
            sq = sq + c ** 2
        reach = np.sqrt(sq)
    else:
        xi = np.atleast_1d(np.asarray(direction, dtype=float))
        if xi.shape != (grid.dims,):
            raise ValueError(f"direction must have {grid.dims} component(s)")
        norm = float(np.sqrt((xi ** 2).sum()))
        if norm == 0:
            raise ValueError("direction must be nonzero")
        xi = xi / norm
        reach = xi[0] * coords[0]
        for w, c in zip(xi[1:], coords[1:]):
            reach = reach + w * c
    flat = np.where(mask, reach, -np.inf).argmax()
    idx = np.unravel_index(flat, grid.shape)
    if direction is None:
        at_node = np.array([c[idx] for c in coords])
        axis = int(np.abs(at_node).argmax())
        sign = 1 if at_node[axis] >= 0 else -1
    else:
        axis = int(np.abs(xi).argmax())
        sign = 1 if xi[axis] >= 0 else -1
    nb = list(idx)
    nb[axis] += sign
    pos = float(reach[idx])
    if not 0 <= nb[axis] < grid.points[axis]:
        return pos  # level set touches the boundary; no outward neighbor
    nb = tuple(nb)
    u0, u1 = float(vals[idx]), float(vals[nb])
    if u1 >= theta:
        return pos
    frac = (u0 - theta) / (u0 - u1)
    return pos + frac * (float(reach[nb]) - pos)


@dataclass(frozen=True)
class SpeedFit:
    theta: float
    window: tuple[float, float]
    speed: float
    residual: float
    n_samples: int
    side: str

    def to_dict(self) -> dict:
        return {"theta": self.theta, "window": list(self.window),
                "speed": self.speed, "residual": self.residual,
                "n_samples": self.n_samples, "side": self.side}


def estimate_speed(traj: Trajectory, window_fraction: float = 0.5,
                   side: str = "plus") -> SpeedFit:
    """Least-squares front speed over the trailing part of a run.

    Fits position against time over the last window_fraction of the time
    span, using front_plus (side="plus") or the mirrored left front
    -front_minus (side="minus") so spreading always yields a positive
    slope.  Needs at least 10 records with a front in the window.
    """
    if not 0 < window_fraction <= 1:
        raise ValueError("window_fraction must lie in (0, 1]")
    if side not in ("plus", "minus"):
        raise ValueError("side must be 'plus' or 'minus'")
    pairs = []
    for r in traj.records:
        pos = r.front_plus if side == "plus" else (
            -r.front_minus if r.front_minus is not None else None)
        if pos is not None:
            pairs.append((r.t, pos))
    if not pairs:
        raise ValueError("trajectory has no front positions to fit")
    t_last = pairs[-1][0]
    t_first = pairs[0][0]
    t_lo = t_last - window_fraction * (t_last - t_first)
    window = [(t, x) for t, x in pairs if t >= t_lo - 1e-12]
    if len(window) < 10:
        raise ValueError(f"need at least 10 front samples in the fit window, "
                         f"have {len(window)}")
    ts = np.array([t for t, _ in window])
    xs = np.array([x for _, x in window])
    slope, intercept = np.polyfit(ts, xs, 1)
    resid = float(np.sqrt(np.mean((xs - (slope * ts + intercept)) ** 2)))
    if traj.theta is None:
        raise ValueError("trajectory carries no front threshold")
    return SpeedFit(theta=traj.theta, window=(float(ts[0]), float(ts[-1])),
                    speed=float(slope), residual=resid,
                    n_samples=len(window), side=side)


@dataclass(frozen=True)
class RectangleReport:
    m_lower: float
    m_upper: float
    tol: float
    worst_low_margin: float
    worst_high_margin: float
    first_violation_t: float | None
    passed: bool

    def to_dict(self) -> dict:
        return {"m_lower": self.m_lower, "m_upper": self.m_upper,
                "tol": self.tol, "worst_low_margin": self.worst_low_margin,
                "worst_high_margin": self.worst_high_margin,
                "first_violation_t": self.first_violation_t,
                "passed": self.passed}


def check_rectangle_invariance(traj: Trajectory, p: ParameterSet) -> RectangleReport:
    """Extrema must stay inside the attracting rectangle, with slack
    1e-4 * (m_upper - m_lower + 1) for discretization.  Reports the worst
    margins over all records (negative margin = excursion) and the time of
    the first record outside the widened rectangle, if any."""
    lo, hi = rectangle_bounds(p)
    tol = 1e-4 * (hi - lo + 1.0)
    worst_low = min(r.u_min - lo for r in traj.records)
    worst_high = min(hi - r.u_max for r in traj.records)
    first_bad = next((r.t for r in traj.records
                      if r.u_min - lo < -tol or hi - r.u_max < -tol), None)
    return RectangleReport(m_lower=lo, m_upper=hi, tol=tol,
                           worst_low_margin=worst_low,
                           worst_high_margin=worst_high,
                           first_violation_t=first_bad,
                           passed=first_bad is None)


@dataclass(frozen=True)
class PersistenceReport:
    skipped: bool
    reason: str
    floor_horizon: float
    worst_floor_margin: float | None
    empirical_floor: float | None
    floor: float | None
    final_u_min: float | None
    passed: bool

    def to_dict(self) -> dict:
        return {"skipped": self.skipped, "reason": self.reason,
                "floor_horizon": self.floor_horizon,
                "worst_floor_margin": self.worst_floor_margin,
                "empirical_floor": self.empirical_floor,
                "floor": self.floor,
                "final_u_min": self.final_u_min, "passed": self.passed}


def check_persistence(traj: Trajectory, p: ParameterSet,
                      floor_horizon: float = 1.0) -> PersistenceReport:
    """Density infimum must respect the short-time exponential floor and
    settle on a strictly positive plateau.

    On the window t - t0 <= floor_horizon each record must satisfy
    u_min >= finite_time_floor(...); over the latter half of the run the
    smallest u_min is the empirical floor, which must exceed 1e-8 (decay to
    zero is a persistence failure).  The reported floor combines both: the
    larger of the analytic short-time value and the slightly relaxed
    empirical plateau.  Initial data that already touches zero cannot
    persist pointwise, so the check is skipped for it.
    """
    first = traj.records[0]
    u0_inf, u0_sup = first.u_min, first.u_max
    if u0_inf <= 0:
        return PersistenceReport(
            skipped=True, reason="initial data is not strictly positive",
            floor_horizon=floor_horizon, worst_floor_margin=None,
            empirical_floor=None, floor=None, final_u_min=None, passed=True)
    horizon = min(floor_horizon, traj.t_final - traj.t0)
    worst = np.inf
    for r in traj.records:
        s = r.t - traj.t0
        if s <= horizon:
            floor = finite_time_floor(p, u0_inf, u0_sup, horizon, s)
            worst = min(worst, r.u_min - floor)
    mid = traj.t0 + 0.5 * (traj.t_final - traj.t0)
    tail_min = min(r.u_min for r in traj.records if r.t >= mid)
    final_u_min = traj.records[-1].u_min
    combined = max(finite_time_floor(p, u0_inf, u0_sup, horizon, horizon),
                   tail_min * (1.0 - 1e-3))
    passed = worst >= 0.0 and tail_min > 1e-8
    return PersistenceReport(skipped=False, reason="",
                             floor_horizon=horizon,
                             worst_floor_margin=float(worst),
                             empirical_floor=float(tail_min),
                             floor=float(combined),
                             final_u_min=float(final_u_min), passed=passed)


@dataclass(frozen=True)
class SpeedIntervalReport:
    c_minus: float
    c_plus: float
    delta: float
    speeds: tuple[float, ...]
    speeds_ok: bool
    decay_reach: float | None
    decay_sup: float | None
    decay_nodes: int
    decay_ok: bool
    passed: bool

    def to_dict(self) -> dict:
        return {"c_minus": self.c_minus, "c_plus": self.c_plus,
                "delta": self.delta, "speeds": list(self.speeds),
                "speeds_ok": self.speeds_ok, "decay_reach": self.decay_reach,
                "decay_sup": self.decay_sup, "decay_nodes": self.decay_nodes,
                "decay_ok": self.decay_ok, "passed": self.passed}


def check_speed_interval(p: ParameterSet, fits, final_u: ScalarField | None = None,
                         elapsed: float | None = None,
                         front_mode="radial") -> SpeedIntervalReport:
    """Measured speeds must land in [c_minus - delta, c_plus + delta] with
    delta = 0.1 (c_plus - c_minus + 1), and the density ahead of the cone
    moving at c_plus + 0.2 must have decayed below 1e-4.

    fits is one SpeedFit or a sequence of them (both sides of a spreading
    run).  The decay test needs the final field and the elapsed time; it is
    skipped when either is missing.
    """
    c_minus, c_plus = spreading_speeds(p)
    delta = 0.1 * (c_plus - c_minus + 1.0)
    if hasattr(fits, "speed"):
        fits = (fits,)
    speeds = tuple(float(f.speed) for f in fits)
    if not speeds:
        raise ValueError("need at least one speed fit")
    speeds_ok = all(c_minus - delta <= s <= c_plus + delta for s in speeds)
    decay_sup = None
    decay_reach = None
    n_nodes = 0
    decay_ok = True
    if final_u is not None and elapsed is not None and elapsed > 0:
        grid = final_u.grid
        coords = [np.broadcast_to(ax, grid.shape) for ax in grid.axes()]
        if front_mode == "radial" or front_mode is None:
            sq = coords[0] ** 2
            for c in coords[1:]:
                sq = sq + c ** 2
            reach = np.sqrt(sq)
        else:
            xi = np.asarray(front_mode, dtype=float)
            xi = xi / np.sqrt((xi ** 2).sum())
            reach = xi[0] * coords[0]
            for w, c in zip(xi[1:], coords[1:]):
                reach = reach + w * c
        decay_reach = (c_plus + 0.2) * elapsed
        region = reach >= decay_reach
        n_nodes = int(region.sum())
        if n_nodes:
            decay_sup = float(final_u.values[region].max())
            decay_ok = decay_sup <= 1e-4
    return SpeedIntervalReport(c_minus=c_minus, c_plus=c_plus, delta=delta,
                               speeds=speeds, speeds_ok=speeds_ok,
                               decay_reach=decay_reach, decay_sup=decay_sup,
                               decay_nodes=n_nodes, decay_ok=decay_ok,
                               passed=speeds_ok and decay_ok)


def boundary_margin_guard(front_plus: float | None, front_minus: float | None,
                          grid: Grid, margin: float = 0.1) -> bool:
    """True when a tracked front has entered the margin strip next to the
    domain boundary, meaning the run is about to become truncation-limited."""
    if not 0 < margin < 1:
        raise ValueError("margin must lie in (0, 1)")
    limit = (1.0 - margin) * min(grid.half_extents)
    if front_plus is not None and front_plus >= limit:
        return True
    if front_minus is not None and front_minus <= -limit:
        return True
    return False


def envelope_holds(p: ParameterSet, u0_sup: float, u_max: float,
                   elapsed: float) -> bool:
    """Live check: the density supremum sits under the logistic envelope
    started from the initial supremum (relative slack 1e-6)."""
    env = comparison_envelope(p, u0_sup, elapsed)
    if env == 0.0:
        return u_max <= 0.0
    return u_max <= env * (1.0 + 1e-6)


def global_bound_holds(p: ParameterSet, u0_sup: float, u_max: float) -> bool:
    """Live check: the density never exceeds max(initial sup, m_plus)
    plus 1e-6."""
    return u_max <= max(u0_sup, m_plus(p)) + 1e-6
