"""Time integration of the density equation with the chemical slaved.

One step is: conservative chemotaxis flux and logistic reaction taken
explicitly at the current time, diffusion taken implicitly in the grid's
transform basis, then a positivity clamp and a fresh chemical solve.  The
splitting is first order in dt and second order in the spacing.  The flux
form makes the transport term telescoping, so with the reaction switched
off the total mass is conserved to roundoff; this is what the conservation
tests lean on.

Values inside the numerical-zero band SNAP_BAND are snapped to exactly 0:
negative ones are counted (positivity pressure should be visible), positive
ones are transform dust that the logistic growth would otherwise amplify
into a phantom far field over long horizons.  Negatives between the snap
band and ABORT_FLOOR are left alone; they are node-scale splitting ripple
that implicit diffusion damps far faster than the reaction can grow it.
Anything below -ABORT_FLOOR aborts the run with the offending step and node
spelled out, because a large negative density means the step size or the
grid cannot carry the scenario.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analysis import (
    MonitorRecord,
    Trajectory,
    boundary_margin_guard,
    default_front_threshold,
    envelope_holds,
    front_position,
    global_bound_holds,
)
from .elliptic import BoundCheckError, SpectralWorkspace, verify_v_bounds
from .grid import Grid, ScalarField
from .params import CoefficientSpec, ParameterSet, check_h1
from .scenario import Scenario, make_initial

__all__ = [
    "NumericalAbort",
    "SimState",
    "init_state",
    "chemotaxis_divergence",
    "reaction_rate",
    "apply_positivity_clamp",
    "stable_dt",
    "step",
    "record_times",
    "run",
    "SNAP_BAND",
    "ABORT_FLOOR",
]

SNAP_BAND = 1e-12
ABORT_FLOOR = 1e-8


class NumericalAbort(RuntimeError):
    """The discrete solution left the physically meaningful set."""


@dataclass
class SimState:
    """Everything the integrator mutates while a run is in flight."""

    params: ParameterSet
    grid: Grid
    ws: SpectralWorkspace
    t: float
    u: np.ndarray
    v: np.ndarray
    clamp_count: int = 0
    step_index: int = 0
    # space factors of the coefficients, cached once per run (None when the
    # coefficient does not vary in space)
    a_space: np.ndarray | None = field(default=None, repr=False)
    b_space: np.ndarray | None = field(default=None, repr=False)

    def u_field(self) -> ScalarField:
        return ScalarField(self.grid, self.u.copy())

    def v_field(self) -> ScalarField:
        return ScalarField(self.grid, self.v.copy())


def init_state(p: ParameterSet, grid: Grid, u0: np.ndarray,
               t0: float = 0.0) -> SimState:
    if p.dims != grid.dims:
        raise ValueError("parameter and grid dimensions disagree")
    ws = SpectralWorkspace(grid)
    u = np.array(u0, dtype=float, copy=True)
    if u.shape != grid.shape:
        raise ValueError(f"initial data shape {u.shape} does not match "
                         f"grid shape {grid.shape}")
    if not np.isfinite(u).all() or u.min() < 0:
        raise ValueError("initial density must be finite and nonnegative")
    axes = grid.axes()
    state = SimState(params=p, grid=grid, ws=ws, t=t0, u=u,
                     v=ws.solve_helmholtz(u, p.lam, p.mu))
    if p.a.space_amplitude != 0.0:
        state.a_space = np.broadcast_to(p.a.space_factor(axes), grid.shape)
    if p.b.space_amplitude != 0.0:
        state.b_space = np.broadcast_to(p.b.space_factor(axes), grid.shape)
    return state


def _coefficient_now(spec: CoefficientSpec, space, t: float):
    val = spec.base + spec.time_amplitude * spec.time_factor(t)
    if space is None:
        return val
    return val + spec.space_amplitude * space


def chemotaxis_divergence(u: np.ndarray, v: np.ndarray, grid: Grid) -> np.ndarray:
    """div(u grad v) in conservative form with face-averaged density.

    Fluxes live on the faces between nodes: F = (u_i + u_{i+1})/2 *
    (v_{i+1} - v_i)/h, wrapping around on periodic grids and vanishing on
    the boundary faces of reflecting grids (no-flux).  The divergence of a
    face field telescopes, so summing the result over the grid gives zero
    to roundoff.
    """
    h = grid.spacing
    div = np.zeros_like(u)
    for ax in range(grid.dims):
        if grid.boundary == "periodic":
            u_next = np.roll(u, -1, axis=ax)
            v_next = np.roll(v, -1, axis=ax)
            flux = 0.5 * (u + u_next) * (v_next - v) / h
            div += (flux - np.roll(flux, 1, axis=ax)) / h
        else:
            sl_lo = [slice(None)] * grid.dims
            sl_hi = [slice(None)] * grid.dims
            sl_lo[ax] = slice(None, -1)
            sl_hi[ax] = slice(1, None)
            dv = (v[tuple(sl_hi)] - v[tuple(sl_lo)]) / h
            flux = 0.5 * (u[tuple(sl_lo)] + u[tuple(sl_hi)]) * dv
            pad = [(0, 0)] * grid.dims
            pad[ax] = (1, 1)
            padded = np.pad(flux, pad)  # zero flux through the walls
            div += np.diff(padded, axis=ax) / h
    return div


def reaction_rate(state: SimState) -> np.ndarray:
    """u (a(x,t) - b(x,t) u), coefficients sampled at the current time."""
    a_now = _coefficient_now(state.params.a, state.a_space, state.t)
    b_now = _coefficient_now(state.params.b, state.b_space, state.t)
    return state.u * (a_now - b_now * state.u)


def apply_positivity_clamp(u: np.ndarray, step_index: int, t: float,
                           grid: Grid) -> tuple[np.ndarray, int]:
    """Snap values inside the numerical-zero band to 0 (negative ones
    counted); abort on non-finite entries or anything below -ABORT_FLOOR,
    naming the worst node.  Negatives between the two thresholds pass
    through for diffusion to heal."""
    if not np.isfinite(u).all():
        bad = tuple(int(k) for k in
                    np.unravel_index(int(np.argmin(np.isfinite(u))), u.shape))
        loc = ", ".join(f"{grid.axis(i)[bad[i]]:g}" for i in range(grid.dims))
        raise NumericalAbort(
            f"non-finite density at step {step_index}, t = {t:g}, "
            f"node {bad} (x = {loc})")
    lowest = float(u.min())
    if lowest < -ABORT_FLOOR:
        bad = tuple(int(k) for k in
                    np.unravel_index(int(u.argmin()), u.shape))
        loc = ", ".join(f"{grid.axis(i)[bad[i]]:g}" for i in range(grid.dims))
        raise NumericalAbort(
            f"density {lowest:.3e} below -{ABORT_FLOOR:g} at step "
            f"{step_index}, t = {t:g}, node {bad} (x = {loc}); "
            f"reduce the step size or refine the grid")
    neg = (u >= -SNAP_BAND) & (u < 0.0)
    dust = (u > 0.0) & (u < SNAP_BAND)
    n = int(neg.sum())
    if n or dust.any():
        u = u.copy()
        u[neg | dust] = 0.0
    return u, n


def stable_dt(state: SimState) -> float:
    """Largest step the explicit pieces tolerate, with a 0.4 safety factor.

    Two restrictions: the advective CFL h / (chi * ||grad v||_inf) and the
    reaction scale 1 / (a_sup + 2 b_sup ||u||_inf).  Diffusion is implicit
    and does not restrict the step.
    """
    p = state.params
    grads = state.ws.spectral_gradient(state.v) \
        if state.grid.boundary == "periodic" else tuple(
            np.gradient(state.v, state.grid.spacing, axis=i, edge_order=2)
            for i in range(state.grid.dims))
    grad_max = max(float(np.abs(g).max()) for g in grads)
    advective = state.grid.spacing / (p.chi * grad_max + 1e-30)
    reactive = 1.0 / (p.a_sup + 2.0 * p.b_sup * float(state.u.max()) + 1e-30)
    return 0.4 * min(advective, reactive)


def step(state: SimState, dt: float) -> SimState:
    """Advance one step of size dt (explicit transport and reaction,
    implicit diffusion, clamp, chemical refresh).  Mutates the state."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    p = state.params
    rhs = reaction_rate(state) - p.chi * chemotaxis_divergence(
        state.u, state.v, state.grid)
    u_star = state.u + dt * rhs
    u_new = state.ws.implicit_diffusion(u_star, dt)
    u_new, clamped = apply_positivity_clamp(u_new, state.step_index,
                                            state.t + dt, state.grid)
    state.u = u_new
    state.v = state.ws.solve_helmholtz(u_new, p.lam, p.mu)
    state.t += dt
    state.step_index += 1
    state.clamp_count += clamped
    return state


def _front_pair(state: SimState, scn: Scenario, theta: float):
    """Front positions for the monitor: both directions for a spreading
    bump in 1D, the radial reach in 2D, the +x projection for a planar
    front.  None entries mean the mode does not track that side."""
    u = ScalarField(state.grid, state.u)
    if scn.initial_kind == "bump":
        if state.grid.dims == 1:
            plus = front_position(u, theta, direction=(1.0,))
            back = front_position(u, theta, direction=(-1.0,))
            minus = None if back is None else -back
            return plus, minus
        return front_position(u, theta), None
    if scn.initial_kind == "front_like":
        return front_position(u, theta, direction=scn.front_mode), None
    return None, None


def record_times(scn: Scenario) -> list[float]:
    """Monitor instants for a scenario: t0 + j * cadence, with t_end
    appended when the cadence does not land on it exactly."""
    times = []
    j = 0
    span = scn.t_end - scn.t0
    tol = 1e-9 * max(1.0, abs(span))
    while True:
        t_j = scn.t0 + j * scn.monitor_cadence
        if t_j > scn.t_end + tol:
            break
        times.append(min(t_j, scn.t_end))
        j += 1
    if times[-1] < scn.t_end - tol:
        times.append(scn.t_end)
    return times


def run(scn: Scenario, callback=None, guard_margin: float = 0.1) -> Trajectory:
    """Integrate a scenario and collect its diagnostic trajectory.

    Records are taken at t0 + j * monitor_cadence (and at t_end when the
    cadence does not land on it).  Tracked fronts arm a guard that ends the
    run early, flagged truncation_limited, once a front reaches the outer
    10% of the domain: beyond that point the boundary, not the equation,
    dictates the dynamics.  callback(index, state) fires at every record.
    """
    p = scn.params
    u0 = make_initial(scn)
    state = init_state(p, scn.grid, u0.values, scn.t0)
    theta = default_front_threshold(p) if scn.tracks_fronts else None
    u0_sup = float(u0.values.max())
    # the live bound flags only exist under the damping condition; outside
    # it they are omitted and the caller reports the check as skipped
    flags_live = check_h1(p)

    records = []
    halt = "completed"
    for idx, t_rec in enumerate(record_times(scn)):
        tiny = 1e-12 * max(1.0, abs(t_rec))
        while state.t < t_rec - tiny:
            dt = min(stable_dt(state), t_rec - state.t)
            if scn.dt_max is not None:
                dt = min(dt, scn.dt_max)
            step(state, dt)
        state.t = t_rec  # absorb roundoff so record times are exact

        fp, fm = (None, None) if theta is None else _front_pair(state, scn, theta)
        flags = {}
        if flags_live and "envelope" in scn.checks:
            flags["envelope"] = envelope_holds(
                p, u0_sup, float(state.u.max()), t_rec - scn.t0)
        if flags_live and "global_bound" in scn.checks:
            flags["global_bound"] = global_bound_holds(
                p, u0_sup, float(state.u.max()))
        if "v_bounds" in scn.checks:
            try:
                verify_v_bounds(state.u_field(), state.v_field(), p, state.ws)
                flags["v_bounds"] = True
            except BoundCheckError:
                flags["v_bounds"] = False
        records.append(MonitorRecord(
            t=t_rec, u_min=float(state.u.min()), u_max=float(state.u.max()),
            v_min=float(state.v.min()), v_max=float(state.v.max()),
            mass=float(state.u.sum()) * state.grid.cell_volume,
            front_plus=fp, front_minus=fm,
            clamp_count=state.clamp_count, flags=flags))
        if callback is not None:
            callback(idx, state)
        if theta is not None and boundary_margin_guard(fp, fm, scn.grid,
                                                       margin=guard_margin):
            halt = "truncation_limited"
            break

    return Trajectory(records=records, t0=scn.t0, t_end_requested=scn.t_end,
                      theta=theta, front_mode=scn.front_mode,
                      halt_reason=halt,
                      final_u=state.u_field(), final_v=state.v_field())
