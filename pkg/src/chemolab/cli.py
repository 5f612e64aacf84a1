"""Command line front end: simulate, sweep, bounds.

simulate runs one scenario file and writes its artifacts (trajectory.csv,
final_state.csv, final_v.csv, report.json, figures) into --out; sweep
repeats that over one varied parameter; bounds prints the closed-form
quantities for a scenario without running anything.

Exit codes: 0 all good, 1 a requested check failed, 2 the input could not
be parsed, 3 the integrator aborted, 4 the run was ended early because a
front reached the domain boundary.  When several apply the more urgent one
wins (2, then 3, then 4, then 1).
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .analysis import (
    check_persistence,
    check_rectangle_invariance,
    check_speed_interval,
    estimate_speed,
)
from .grid import write_field_csv
from .params import (
    TheoreticalBounds,
    check_h1,
    check_h2,
    check_h3,
    mn_sequence,
    rectangle_bounds,
)
from .scenario import Scenario, ScenarioError, load_scenario, parse_scenario
from .stepper import NumericalAbort, record_times, run

__all__ = [
    "EXIT_OK",
    "EXIT_CHECK_FAILED",
    "EXIT_CONFIG",
    "EXIT_ABORT",
    "EXIT_TRUNCATED",
    "grade_checks",
    "run_experiment",
    "entry",
    "main",
]

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_ABORT = 3
EXIT_TRUNCATED = 4


def grade_checks(scn: Scenario, traj) -> list[dict]:
    """Grade every check the scenario asked for.

    A check whose preconditions fail (wrong parameter regime, no fronts,
    initial data outside the rectangle) is reported as skipped rather than
    failed: it makes no claim, so it cannot be violated.
    """
    p = scn.params
    out = []

    def add(name, status, reason="", detail=None):
        entry = {"name": name, "status": status}
        if reason:
            entry["reason"] = reason
        if detail is not None:
            entry["detail"] = detail
        out.append(entry)

    for name in scn.checks:
        if name in ("envelope", "global_bound"):
            if not check_h1(p):
                add(name, "skipped", "requires b_inf > chi*mu")
                continue
            flags = [r.flags.get(name) for r in traj.records]
            bad = sum(1 for f in flags if f is False)
            add(name, "passed" if bad == 0 else "failed",
                detail={"records": len(flags), "violations": bad})
        elif name == "v_bounds":
            flags = [r.flags.get(name) for r in traj.records]
            bad = sum(1 for f in flags if f is False)
            add(name, "passed" if bad == 0 else "failed",
                detail={"records": len(flags), "violations": bad})
        elif name == "rectangle":
            if not check_h2(p):
                add(name, "skipped",
                    "requires b_inf > (1 + a_sup/a_inf) chi*mu")
                continue
            lo, hi = rectangle_bounds(p)
            tol = 1e-4 * (hi - lo + 1.0)
            first = traj.records[0]
            if first.u_min < lo - tol or first.u_max > hi + tol:
                add(name, "skipped",
                    f"initial data [{first.u_min:g}, {first.u_max:g}] "
                    f"starts outside the rectangle [{lo:g}, {hi:g}]")
                continue
            rep = check_rectangle_invariance(traj, p)
            add(name, "passed" if rep.passed else "failed",
                detail=rep.to_dict())
        elif name == "persistence":
            if not check_h1(p):
                add(name, "skipped", "requires b_inf > chi*mu")
                continue
            rep = check_persistence(traj, p)
            if rep.skipped:
                add(name, "skipped", rep.reason, detail=rep.to_dict())
            else:
                add(name, "passed" if rep.passed else "failed",
                    detail=rep.to_dict())
        elif name == "speed_interval":
            if not scn.tracks_fronts:
                add(name, "skipped", "scenario does not track fronts")
                continue
            if not check_h3(p):
                add(name, "skipped",
                    "requires the stronger damping condition that makes "
                    "the lower spreading speed positive")
                continue
            two_sided = (scn.initial_kind == "bump" and scn.grid.dims == 1
                         and any(r.front_minus is not None
                                 for r in traj.records))
            try:
                fits = [estimate_speed(traj)]
                if two_sided:
                    fits.append(estimate_speed(traj, side="minus"))
            except ValueError as e:
                add(name, "skipped", str(e))
                continue
            rep = check_speed_interval(p, fits, traj.final_u,
                                       traj.t_final - traj.t0,
                                       traj.front_mode)
            detail = rep.to_dict()
            detail["fits"] = [f.to_dict() for f in fits]
            add(name, "passed" if rep.passed else "failed", detail=detail)
    return out


def run_experiment(scn: Scenario, out_dir, make_figures: bool = True,
                   snapshots: int = 0) -> tuple[int, dict]:
    """Run one scenario and write its artifacts into out_dir.

    Returns (exit_code, report).  The report is also written as
    report.json; floats go through the default json repr, which round-trips
    doubles exactly.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    artifacts = []

    callback = None
    if snapshots > 0:
        n_expected = len(record_times(scn))
        wanted = set(int(i) for i in np.round(
            np.linspace(0, n_expected - 1, min(snapshots, n_expected))))

        def callback(idx, state):
            if idx in wanted:
                name = f"snapshot_{idx:04d}.csv"
                write_field_csv(state.u_field(), out / name)
                artifacts.append(name)

    traj = run(scn, callback=callback)

    traj.to_csv(out / "trajectory.csv")
    write_field_csv(traj.final_u, out / "final_state.csv")
    write_field_csv(traj.final_v, out / "final_v.csv")
    artifacts += ["trajectory.csv", "final_state.csv", "final_v.csv"]

    checks = grade_checks(scn, traj)
    any_failed = any(c["status"] == "failed" for c in checks)
    if traj.truncation_limited:
        code = EXIT_TRUNCATED
    elif any_failed:
        code = EXIT_CHECK_FAILED
    else:
        code = EXIT_OK

    if make_figures:
        from . import figures

        figures.save_final_state_figure(traj, scn, out / "final_state.png")
        figures.save_extrema_figure(traj, scn, out / "extrema.png")
        artifacts += ["final_state.png", "extrema.png"]
        if traj.theta is not None:
            figures.save_front_figure(traj, scn, out / "front.png")
            artifacts.append("front.png")

    last = traj.records[-1]
    report = {
        "scenario": scn.name,
        "exit_code": code,
        "halt_reason": traj.halt_reason,
        "t_final": traj.t_final,
        "t_end_requested": scn.t_end,
        "records": len(traj.records),
        "clamp_count": last.clamp_count,
        "front_threshold": traj.theta,
        "final_u_min": last.u_min,
        "final_u_max": last.u_max,
        "final_mass": last.mass,
        "bounds": TheoreticalBounds.from_params(scn.params).to_dict(),
        "checks": checks,
        "artifacts": sorted(artifacts),
    }
    with open(out / "report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    return code, report


def _cmd_simulate(args) -> int:
    try:
        scn = load_scenario(args.config)
    except ScenarioError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = args.out or f"{Path(args.config).stem}_out"
    try:
        code, report = run_experiment(scn, out_dir,
                                      make_figures=not args.no_figures,
                                      snapshots=args.snapshots)
    except NumericalAbort as e:
        print(f"numerical abort: {e}", file=sys.stderr)
        return EXIT_ABORT
    for c in report["checks"]:
        line = f"check {c['name']}: {c['status']}"
        if c.get("reason"):
            line += f" ({c['reason']})"
        print(line)
    print(f"run {report['halt_reason']} at t = {report['t_final']:g}, "
          f"{report['records']} records, exit {code}")
    print(f"artifacts in {out_dir}")
    return code


def _apply_override(raw: dict, path: str, value: float) -> None:
    keys = path.split(".")
    if keys[0] != "params" or len(keys) < 2:
        raise ScenarioError(
            f"sweep axis must name a parameter like params.chi or "
            f"params.a.base, got {path!r}")
    node = raw
    for k in keys[:-1]:
        if k not in node:
            raise ScenarioError(f"sweep axis {path!r} not found in config")
        nxt = node[k]
        if not isinstance(nxt, dict):
            # a scalar coefficient being swept through a subfield is
            # promoted to its object form
            if k in ("a", "b") and isinstance(nxt, (int, float)):
                node[k] = {"base": float(nxt)}
                nxt = node[k]
            else:
                raise ScenarioError(f"sweep axis {path!r} does not lead "
                                    f"to an object field")
        node = nxt
    node[keys[-1]] = value


def _sweep_point(job) -> dict:
    raw, name, axis, value, out_dir, make_figures = job
    modified = copy.deepcopy(raw)
    try:
        _apply_override(modified, axis, value)
        scn = parse_scenario(modified, name=name)
    except ScenarioError as e:
        return {"value": value, "exit_code": EXIT_CONFIG, "error": str(e)}
    row = {"value": value}
    row.update(TheoreticalBounds.from_params(scn.params).to_dict())
    row.pop("m_plus", None)
    try:
        code, report = run_experiment(scn, out_dir,
                                      make_figures=make_figures)
    except NumericalAbort as e:
        row.update(exit_code=EXIT_ABORT, error=str(e))
        return row
    speed = None
    for c in report["checks"]:
        if c["name"] == "speed_interval" and "detail" in c:
            fits = c["detail"].get("fits") or []
            if fits:
                speed = fits[0]["speed"]
    row.update(
        exit_code=code,
        halt_reason=report["halt_reason"],
        measured_speed=speed,
        final_u_min=report["final_u_min"],
        final_u_max=report["final_u_max"],
        checks_failed=sum(1 for c in report["checks"]
                          if c["status"] == "failed"),
    )
    return row


def _cmd_sweep(args) -> int:
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        print(f"could not parse --values {args.values!r} as numbers",
              file=sys.stderr)
        return EXIT_CONFIG
    path = Path(args.config)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        parse_scenario(copy.deepcopy(raw), name=path.stem)
    except ScenarioError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    out = Path(args.out or f"{path.stem}_sweep")
    out.mkdir(parents=True, exist_ok=True)
    width = max(2, len(str(len(values) - 1)))
    jobs = [
        (raw, f"{path.stem}_{i:0{width}d}", args.axis, v,
         str(out / f"point_{i:0{width}d}"), not args.no_figures)
        for i, v in enumerate(values)
    ]
    workers = int(os.environ.get("CHEMOLAB_THREADS", "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(j) for j in jobs]

    cols = ("value", "h1", "h2", "h3", "m_lower", "m_upper", "c_minus",
            "c_plus", "measured_speed", "exit_code", "halt_reason",
            "final_u_min", "final_u_max", "checks_failed", "error")
    with open(out / "sweep.csv", "w", encoding="utf-8") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            cells = []
            for c in cols:
                v = row.get(c)
                if v is None:
                    cells.append("")
                elif isinstance(v, bool):
                    cells.append("true" if v else "false")
                elif isinstance(v, float):
                    cells.append(f"{v:.17g}")
                elif c == "error":
                    cells.append('"' + str(v).replace('"', "'") + '"')
                else:
                    cells.append(str(v))
            fh.write(",".join(cells) + "\n")
    if rows and not args.no_figures:
        from . import figures

        figures.save_sweep_figure(values, rows, args.axis, out / "sweep.png")

    for v, row in zip(values, rows):
        note = row.get("error") or row.get("halt_reason", "")
        print(f"{args.axis} = {v:g}: exit {row['exit_code']} {note}")
    print(f"sweep artifacts in {out}")
    return EXIT_OK


def _cmd_bounds(args) -> int:
    try:
        scn = load_scenario(args.config)
    except ScenarioError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    p = scn.params
    doc = {
        "scenario": scn.name,
        "bounds": TheoreticalBounds.from_params(p).to_dict(),
    }
    if check_h2(p):
        doc["refinement_pairs"] = [list(pair) for pair in mn_sequence(p, 8)]
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="chemolab",
        description="Simulate the chemotaxis-logistic system and grade the "
                    "runs against their closed-form bounds.")
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one scenario file")
    sim.add_argument("config", help="scenario JSON file")
    sim.add_argument("--out", default=None,
                     help="output directory (default: <config stem>_out)")
    sim.add_argument("--no-figures", action="store_true",
                     help="skip PNG rendering")
    sim.add_argument("--snapshots", type=int, default=0, metavar="K",
                     help="also write K evenly spaced density snapshots")

    sw = sub.add_parser("sweep", help="rerun a scenario over one parameter")
    sw.add_argument("config", help="scenario JSON file")
    sw.add_argument("--axis", required=True,
                    help="parameter path, e.g. params.chi or params.a.base")
    sw.add_argument("--values", required=True,
                    help="comma separated numbers")
    sw.add_argument("--out", default=None,
                    help="output directory (default: <config stem>_sweep)")
    sw.add_argument("--no-figures", action="store_true",
                    help="skip PNG rendering")

    bo = sub.add_parser("bounds",
                        help="print the closed-form quantities for a "
                             "scenario without running it")
    bo.add_argument("config", help="scenario JSON file")
    return ap


def entry(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"simulate": _cmd_simulate, "sweep": _cmd_sweep,
               "bounds": _cmd_bounds}[args.command]
    return handler(args)


def main(argv=None) -> None:
    sys.exit(entry(argv))


if __name__ == "__main__":
    main()
