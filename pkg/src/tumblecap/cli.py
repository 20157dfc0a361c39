"""Command-line interface.

Subcommands:
  solve      one scenario file -> trajectory CSV + report JSON
  campaign   Monte Carlo run -> summary CSV + aggregate JSON
  verify     re-check a trajectory CSV against its scenario
  plotdata   emit plot-ready time series (thrust profile, collision-metric
             history, campaign success scatter)

Exit codes: 0 success/safe, 2 infeasible or verification failure, 1 error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from tumblecap import capture, fileio, harness, scenario

if sys.version_info >= (3, 11):
    from tomllib import TOMLDecodeError
else:
    from tomli import TOMLDecodeError


def _load_scenario_or_exit(path: str) -> scenario.Scenario:
    try:
        return scenario.load_scenario(path)
    except FileNotFoundError:
        print(f"{path}: file not found", file=sys.stderr)
        raise SystemExit(1)
    except TOMLDecodeError as exc:
        # the decoder message carries the line/column anchor
        print(f"{path}: {exc}", file=sys.stderr)
        raise SystemExit(1)
    except (ValueError, TypeError, KeyError) as exc:
        print(f"{path}: invalid scenario: {exc}", file=sys.stderr)
        raise SystemExit(1)


def cmd_solve(args) -> int:
    s = _load_scenario_or_exit(args.scenario)
    rep = capture.solve_capture(s)
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    report_path = outdir / "report.json"
    fileio.report_to_json(rep, report_path)
    if rep.trajectory is not None:
        fileio.trajectory_to_csv(rep.trajectory, outdir / "trajectory.csv")
    if rep.repro:
        (outdir / "repro_program.txt").write_text(rep.repro)
    print(f"outcome: {rep.outcome} (iterations {rep.iterations}), "
          f"report: {report_path}")
    if rep.success:
        print(f"delta-v: {rep.delta_v:.4f} m/s, "
              f"min alpha: {rep.alpha_min_history[-1]:.3f}")
        return 0
    return 2


def cmd_campaign(args) -> int:
    cfg = harness.CampaignConfig(
        n_samples=args.samples, seed=args.seed, n_min=args.n_min,
        n_max=args.n_max, n_step=args.n_step,
        rate_max=np.deg2rad(args.rate_max_deg),
        template=args.template, workers=args.workers, outdir=args.out_dir)
    summary = harness.run_campaign(cfg)
    agg = summary.aggregate()
    print(f"success: {agg['success_count']}/{agg['n_samples']} "
          f"({100 * agg['success_fraction']:.1f}%)")
    print(f"files in {args.out_dir}: summary.csv, aggregate.json")
    return 0


def cmd_verify(args) -> int:
    s = _load_scenario_or_exit(args.scenario)
    try:
        traj = fileio.trajectory_from_csv(args.trajectory)
    except (OSError, ValueError) as exc:
        print(f"{args.trajectory}: {exc}", file=sys.stderr)
        return 1
    s = s.with_n(traj.n_nodes)
    ver = capture.verify_solution(s, traj)
    out = fileio.verification_to_dict(ver)
    if args.out:
        Path(args.out).write_text(json.dumps(out, indent=2) + "\n")
    else:
        json.dump(out, sys.stdout, indent=2)
        print()
    return 0 if ver.ok else 2


def cmd_plotdata(args) -> int:
    if not args.scenario and not args.summary:
        print("plotdata needs --scenario and/or --summary", file=sys.stderr)
        return 1
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    if args.scenario:
        s = _load_scenario_or_exit(args.scenario)
        rep = capture.solve_capture(s)
        if rep.trajectory is None:
            print(f"no trajectory to plot: outcome {rep.outcome}", file=sys.stderr)
            return 2
        times = rep.trajectory.times()
        with open(outdir / "thrust_profile.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "ux", "uy", "uz", "u_norm"])
            for k, u in enumerate(rep.trajectory.us):
                writer.writerow([f"{v:.17g}" for v in
                                 [times[k], *u, float(np.linalg.norm(u))]])
        written.append("thrust_profile.csv")
        with open(outdir / "alpha_history.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            iters = len(rep.alpha_node_history)
            writer.writerow(["t"] + [f"iter{j}" for j in range(iters)])
            for k in range(rep.trajectory.n_nodes):
                row = [times[k]] + [rep.alpha_node_history[j][k] for j in range(iters)]
                writer.writerow([f"{v:.17g}" for v in row])
        written.append("alpha_history.csv")

    if args.summary:
        with open(args.summary, newline="") as fh:
            rows = list(csv.DictReader(fh))
        with open(outdir / "success_scatter.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["tumble_rate_deg_s", "initial_range_m", "success"])
            for row in rows:
                writer.writerow([row["tumble_rate_deg_s"], row["initial_range_m"],
                                 1 if row["outcome"] == harness.CASE_SUCCESS else 0])
        written.append("success_scatter.csv")

    print(f"wrote {', '.join(written)} to {outdir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tumblecap",
        description="Soft-capture trajectory optimization for tumbling targets")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one scenario file")
    p.add_argument("scenario", help="scenario TOML file")
    p.add_argument("--out-dir", default="out", help="output directory")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("campaign", help="run a Monte Carlo campaign")
    p.add_argument("--samples", type=int, default=250)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-min", type=int, default=40)
    p.add_argument("--n-max", type=int, default=350)
    p.add_argument("--n-step", type=int, default=10)
    p.add_argument("--rate-max-deg", type=float, default=10.0)
    p.add_argument("--template", default=None,
                   help="scenario TOML providing non-sampled settings")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir", default="campaign_out")
    p.set_defaults(func=cmd_campaign)

    p = sub.add_parser("verify", help="re-check a trajectory CSV")
    p.add_argument("trajectory", help="trajectory CSV file")
    p.add_argument("scenario", help="scenario TOML file")
    p.add_argument("--out", default=None, help="write the residual report here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plotdata", help="emit plot-ready time series")
    p.add_argument("--scenario", default=None)
    p.add_argument("--summary", default=None, help="campaign summary.csv")
    p.add_argument("--out-dir", default="plot_out")
    p.set_defaults(func=cmd_plotdata)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1


if __name__ == "__main__":
    sys.exit(main())
