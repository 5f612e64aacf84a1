"""Figure rendering for the report path.

Everything draws through the Agg backend into PNG files next to the
delimited output; nothing here ever opens a window.  The plots are
deliberately plain: final profiles with the rectangle bounds overlaid when
they exist, extrema against time, front position against time with the
predicted speed cone, and the sweep summary.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .analysis import Trajectory  # noqa: E402
from .params import TheoreticalBounds  # noqa: E402
from .scenario import Scenario  # noqa: E402

__all__ = [
    "save_final_state_figure",
    "save_extrema_figure",
    "save_front_figure",
    "save_sweep_figure",
]

_DPI = 120


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_final_state_figure(traj: Trajectory, scn: Scenario, path):
    """Final density (and concentration in 1D) over the domain."""
    bounds = TheoreticalBounds.from_params(scn.params)
    g = traj.final_u.grid
    fig, ax = plt.subplots(figsize=(7, 4))
    if g.dims == 1:
        x = g.axis(0)
        ax.plot(x, traj.final_u.values, label="u", lw=1.5)
        ax.plot(x, traj.final_v.values, label="v", lw=1.0, alpha=0.7)
        if bounds.m_lower is not None:
            ax.axhline(bounds.m_lower, ls="--", lw=0.8, color="gray")
            ax.axhline(bounds.m_upper, ls="--", lw=0.8, color="gray")
        ax.set_xlabel("x")
        ax.legend(loc="best")
    else:
        hx, hy = g.half_extents
        im = ax.imshow(traj.final_u.values.T, origin="lower",
                       extent=(-hx, hx, -hy, hy), aspect="equal",
                       cmap="viridis")
        fig.colorbar(im, ax=ax, label="u")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
    ax.set_title(f"{scn.name}: final state, t = {traj.t_final:g}")
    return _finish(fig, path)


def save_extrema_figure(traj: Trajectory, scn: Scenario, path):
    """Density and concentration extrema along the run."""
    bounds = TheoreticalBounds.from_params(scn.params)
    t = [r.t for r in traj.records]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(t, [r.u_max for r in traj.records], label="max u", lw=1.5)
    ax.plot(t, [r.u_min for r in traj.records], label="min u", lw=1.5)
    ax.plot(t, [r.v_max for r in traj.records], label="max v", lw=0.9,
            alpha=0.6)
    ax.plot(t, [r.v_min for r in traj.records], label="min v", lw=0.9,
            alpha=0.6)
    if bounds.m_lower is not None:
        ax.axhline(bounds.m_lower, ls="--", lw=0.8, color="gray")
        ax.axhline(bounds.m_upper, ls="--", lw=0.8, color="gray")
    ax.set_xlabel("t")
    ax.legend(loc="best", ncol=2, fontsize=8)
    ax.set_title(f"{scn.name}: extrema")
    return _finish(fig, path)


def save_front_figure(traj: Trajectory, scn: Scenario, path):
    """Tracked front positions with the predicted speed cone, when the
    parameter regime provides one."""
    bounds = TheoreticalBounds.from_params(scn.params)
    fig, ax = plt.subplots(figsize=(7, 4))
    plus = [(r.t, r.front_plus) for r in traj.records
            if r.front_plus is not None]
    minus = [(r.t, r.front_minus) for r in traj.records
             if r.front_minus is not None]
    if plus:
        ax.plot([t for t, _ in plus], [x for _, x in plus],
                label="front (+)", lw=1.5)
    if minus:
        ax.plot([t for t, _ in minus], [x for _, x in minus],
                label="front (-)", lw=1.5)
    if plus and bounds.c_minus is not None:
        t0, x0 = plus[0]
        ts = np.array([t for t, _ in plus])
        ax.plot(ts, x0 + bounds.c_plus * (ts - t0), ls=":", color="gray",
                lw=0.9, label="c+ guide")
        ax.plot(ts, x0 + bounds.c_minus * (ts - t0), ls=":", color="gray",
                lw=0.9, label="c- guide")
    ax.set_xlabel("t")
    ax.set_ylabel("position")
    ax.legend(loc="best", fontsize=8)
    ax.set_title(f"{scn.name}: front positions")
    return _finish(fig, path)


def save_sweep_figure(values, rows, axis_name: str, path):
    """Final extrema across a parameter sweep; failed points are marked."""
    fig, ax = plt.subplots(figsize=(7, 4))
    ok = [(v, r) for v, r in zip(values, rows) if r.get("final_u_max") is not None]
    if ok:
        ax.plot([v for v, _ in ok], [r["final_u_max"] for _, r in ok],
                marker="o", label="final max u")
        ax.plot([v for v, _ in ok], [r["final_u_min"] for _, r in ok],
                marker="o", label="final min u")
    bad = [v for v, r in zip(values, rows) if r.get("final_u_max") is None]
    for v in bad:
        ax.axvline(v, color="red", ls="--", lw=0.8)
    ax.set_xlabel(axis_name)
    ax.legend(loc="best", fontsize=8)
    ax.set_title(f"sweep over {axis_name}")
    return _finish(fig, path)
