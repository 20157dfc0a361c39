"""Stable on-disk formats: trajectory CSV, report JSON, campaign outputs.

CSV floats carry 17 significant digits; JSON floats use Python's exact
round-trip representation. The campaign summary schema is versioned:
adding a column bumps SUMMARY_SCHEMA_VERSION.
"""

from __future__ import annotations

import csv
import json

import numpy as np

from tumblecap.capture import ChaserTrajectory, SolveReport, VerificationReport

SUMMARY_SCHEMA_VERSION = 1

TRAJECTORY_COLUMNS = ["t", "rx", "ry", "rz", "vx", "vy", "vz",
                      "ux", "uy", "uz", "rho", "alpha",
                      "qs", "qx", "qy", "qz"]

# summary.csv holds only run-deterministic values so identical seeds give
# byte-identical files regardless of worker count; machine timings go to
# timings.csv
SUMMARY_COLUMNS = ["case_id", "tumble_rate_deg_s", "initial_range_m", "chosen_n",
                   "outcome", "scp_iterations", "delta_v_m_s", "min_alpha",
                   "coast_fraction", "n_solves"]

TIMING_COLUMNS = ["case_id", "wall_time_s", "median_solve_time_s"]


def _g(x) -> str:
    return f"{float(x):.17g}"


def trajectory_to_csv(traj: ChaserTrajectory, path) -> None:
    """One row per node; the control column is zero on the terminal node."""
    n = traj.n_nodes
    us = np.vstack([traj.us, np.zeros(3)])
    alphas = traj.alphas if traj.alphas is not None else np.full(n, np.nan)
    atts = traj.attitudes if traj.attitudes is not None else np.full((n, 4), np.nan)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRAJECTORY_COLUMNS)
        for k, t in enumerate(traj.times()):
            row = [t, *traj.xs[k], *us[k], traj.rho[k], alphas[k], *atts[k]]
            writer.writerow([_g(v) for v in row])


def trajectory_from_csv(path) -> ChaserTrajectory:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != TRAJECTORY_COLUMNS:
            raise ValueError(f"unexpected trajectory header: {header}")
        rows = np.array([[float(v) for v in row] for row in reader])
    if len(rows) < 2:
        raise ValueError("trajectory needs at least two nodes")
    dt = float(rows[1, 0] - rows[0, 0])
    xs = rows[:, 1:7]
    us = rows[:-1, 7:10]
    rho = rows[:, 10]
    alphas = rows[:, 11] if np.all(np.isfinite(rows[:, 11])) else None
    atts = rows[:, 12:16] if np.all(np.isfinite(rows[:, 12:16])) else None
    return ChaserTrajectory(dt=dt, xs=xs, us=us, rho=rho,
                            alphas=alphas, attitudes=atts)


def verification_to_dict(ver: VerificationReport) -> dict:
    return {
        "ok": ver.ok,
        "delta_v_m_s": ver.delta_v,
        "relaxation_tightness_m": ver.tightness,
        "rows": [{"name": r.name, "value": r.value, "limit": r.limit, "ok": r.ok}
                 for r in ver.rows],
    }


def report_to_dict(rep: SolveReport) -> dict:
    return {
        "outcome": rep.outcome,
        "success": rep.success,
        "iterations": rep.iterations,
        "delta_v_m_s": rep.delta_v,
        "alpha_min_history": list(rep.alpha_min_history),
        "penalty_history": list(rep.penalty_history),
        "solver_statuses": list(rep.statuses),
        "solve_times_s": list(rep.solve_times),
        "wall_time_s": rep.wall_time,
        "verification": verification_to_dict(rep.verification) if rep.verification else None,
    }


def report_to_json(rep: SolveReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(report_to_dict(rep), fh, indent=2)
        fh.write("\n")


def _write_rows(rows: list[dict], columns: list[str], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            out = []
            for col in columns:
                v = row[col]
                if isinstance(v, float):
                    out.append(_g(v))
                elif v is None:
                    out.append("")
                else:
                    out.append(str(v))
            writer.writerow(out)


def write_summary_csv(rows: list[dict], path) -> None:
    _write_rows(rows, SUMMARY_COLUMNS, path)


def write_timings_csv(rows: list[dict], path) -> None:
    _write_rows(rows, TIMING_COLUMNS, path)


def write_aggregate_json(aggregate: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(aggregate, fh, indent=2, sort_keys=True)
        fh.write("\n")
