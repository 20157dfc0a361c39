"""Monte Carlo campaign: sampling, per-case horizon search, statistics.

Each case pairs a random initial tumble (attitude uniform on the rotation
group, rate uniform up to the cap) with a random passively safe relative
orbit. The node count N is swept upward from n_min in steps of n_step
until a solve both clears the collision check and passes the full
a-posteriori verification; if no N in the range does, the case is
infeasible.

Reproducibility: case i draws from a substream spawned as
SeedSequence(seed, spawn_key=(i,)), so results are identical for any
worker count. The generator family and seed are recorded in the
aggregate output.
"""

from __future__ import annotations

import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from tumblecap import capture, fileio, relmotion, scenario, target
from tumblecap.capture import SolveReport
from tumblecap.scenario import Scenario

CASE_SUCCESS = "success"
CASE_INFEASIBLE = "infeasible"
CASE_FAILURE = "numerical-failure"


@dataclass(frozen=True)
class CampaignConfig:
    n_samples: int = 250
    seed: int = 0
    n_min: int = 40
    n_max: int = 350
    n_step: int = 10
    rate_max: float = np.deg2rad(10.0)
    a0_range: tuple[float, float] = (15.0, 25.0)
    b0_range: tuple[float, float] = (10.0, 25.0)
    template: str | None = None       # scenario file providing non-sampled settings
    workers: int = 1
    outdir: str | None = None

    def __post_init__(self):
        if self.n_min >= self.n_max or self.n_step <= 0:
            raise ValueError("need n_min < n_max and positive n_step")
        if self.n_samples <= 0 or self.rate_max <= 0.0:
            raise ValueError("n_samples and rate_max must be positive")


@dataclass
class CaseResult:
    case_id: int
    tumble_rate_deg_s: float
    initial_range_m: float
    chosen_n: int | None
    outcome: str
    scp_iterations: int | None
    delta_v_m_s: float | None
    min_alpha: float | None
    wall_time_s: float
    coast_fraction: float | None
    solve_times: list[float] = field(default_factory=list)
    n_solves: int = 0
    penalty_history: list[float] = field(default_factory=list)
    report: SolveReport | None = None

    def row(self) -> dict:
        return {
            "case_id": self.case_id,
            "tumble_rate_deg_s": self.tumble_rate_deg_s,
            "initial_range_m": self.initial_range_m,
            "chosen_n": self.chosen_n,
            "outcome": self.outcome,
            "scp_iterations": self.scp_iterations,
            "delta_v_m_s": self.delta_v_m_s,
            "min_alpha": self.min_alpha,
            "coast_fraction": self.coast_fraction,
            "n_solves": self.n_solves,
        }

    def timing_row(self) -> dict:
        return {
            "case_id": self.case_id,
            "wall_time_s": self.wall_time_s,
            "median_solve_time_s": (float(np.median(self.solve_times))
                                    if self.solve_times else None),
        }


@dataclass
class CampaignSummary:
    config: CampaignConfig
    results: list[CaseResult]

    @property
    def successes(self) -> list[CaseResult]:
        return [r for r in self.results if r.outcome == CASE_SUCCESS]

    @property
    def success_fraction(self) -> float:
        return len(self.successes) / len(self.results)

    def iteration_histogram(self) -> dict[int, int]:
        hist: dict[int, int] = {}
        for r in self.successes:
            hist[r.scp_iterations] = hist.get(r.scp_iterations, 0) + 1
        return dict(sorted(hist.items()))

    def all_solve_times(self) -> list[float]:
        return [t for r in self.results for t in r.solve_times]

    def aggregate(self) -> dict:
        times = self.all_solve_times()
        monotone = [r for r in self.successes if len(r.penalty_history) >= 2]
        monotone_ok = sum(
            1 for r in monotone
            if all(b <= a + 1e-9 for a, b in zip(r.penalty_history,
                                                 r.penalty_history[1:])))
        coast = [r.coast_fraction for r in self.successes if r.coast_fraction is not None]
        return {
            "schema_version": fileio.SUMMARY_SCHEMA_VERSION,
            "n_samples": len(self.results),
            "seed": self.config.seed,
            "rng": "numpy PCG64, SeedSequence(seed, spawn_key=(case_id,))",
            "success_count": len(self.successes),
            "success_fraction": self.success_fraction,
            "iteration_histogram": {str(k): v for k, v in self.iteration_histogram().items()},
            "mean_iter_solve_time_s": float(np.mean(times)) if times else None,
            "median_solve_time_s": float(np.median(times)) if times else None,
            "penalty_monotone_fraction": (monotone_ok / len(monotone)
                                          if monotone else None),
            "mean_coast_fraction": float(np.mean(coast)) if coast else None,
        }


def case_scenario(cfg: CampaignConfig, case_id: int) -> Scenario:
    """Deterministic scenario of one campaign case."""
    base = (scenario.load_scenario(cfg.template) if cfg.template
            else scenario.default_scenario(seed=0))
    rng = np.random.default_rng(np.random.SeedSequence(entropy=cfg.seed,
                                                       spawn_key=(case_id,)))
    tumble0 = target.sample_random_tumble(rng, cfg.rate_max)
    x0 = relmotion.sample_safe_orbit(rng, cfg.a0_range, cfg.b0_range, base.ctx)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # over-bound rates are a valid experiment
        return replace(base, x0=x0, target0=tumble0)


def coast_fraction(rep: SolveReport, u_max: float) -> float:
    """Fraction of thrust nodes that are essentially off (bang-off-bang proxy)."""
    mags = np.linalg.norm(rep.trajectory.us, axis=1)
    return float((mags < 0.01 * u_max).mean())


def n_search(case: Scenario, cfg: CampaignConfig, case_id: int = 0) -> CaseResult:
    """Sweep N upward until a verified-safe solve; infeasible if none is."""
    t0 = time.perf_counter()
    horizon = cfg.n_max * case.disc.dt
    tumble = target.propagate(case.target0, case.J, horizon=horizon, dt=case.disc.dt)
    result = CaseResult(
        case_id=case_id,
        tumble_rate_deg_s=float(np.rad2deg(np.linalg.norm(case.target0.omega))),
        initial_range_m=float(np.linalg.norm(case.x0.r)),
        chosen_n=None, outcome=CASE_INFEASIBLE, scp_iterations=None,
        delta_v_m_s=None, min_alpha=None, wall_time_s=0.0, coast_fraction=None)
    for n in range(cfg.n_min, cfg.n_max + 1, cfg.n_step):
        rep = capture.solve_capture(case.with_n(n), tumble)
        result.n_solves += 1
        result.solve_times.extend(rep.solve_times)
        if rep.success:
            result.chosen_n = n
            result.outcome = CASE_SUCCESS
            result.scp_iterations = rep.iterations
            result.delta_v_m_s = rep.delta_v
            result.min_alpha = float(rep.trajectory.alphas.min())
            result.coast_fraction = coast_fraction(rep, case.limits.u_max)
            result.penalty_history = list(rep.penalty_history)
            result.report = rep
            break
    result.wall_time_s = time.perf_counter() - t0
    return result


def _run_case(cfg: CampaignConfig, case_id: int) -> CaseResult:
    try:
        case = case_scenario(cfg, case_id)
        result = n_search(case, cfg, case_id)
    except Exception:
        return CaseResult(case_id=case_id, tumble_rate_deg_s=math.nan,
                          initial_range_m=math.nan, chosen_n=None,
                          outcome=CASE_FAILURE, scp_iterations=None,
                          delta_v_m_s=None, min_alpha=None, wall_time_s=0.0,
                          coast_fraction=None)
    if cfg.outdir and result.outcome == CASE_SUCCESS:
        outdir = Path(cfg.outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        fileio.trajectory_to_csv(result.report.trajectory,
                                 outdir / f"case_{case_id:04d}_trajectory.csv")
    result.report = None   # keep the cross-process payload small
    return result


def run_campaign(cfg: CampaignConfig) -> CampaignSummary:
    """Run every case; emits summary files when an output directory is set."""
    ids = list(range(cfg.n_samples))
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_case, [cfg] * len(ids), ids, chunksize=1))
    else:
        results = [_run_case(cfg, i) for i in ids]
    results.sort(key=lambda r: r.case_id)
    summary = CampaignSummary(config=cfg, results=results)
    if cfg.outdir:
        outdir = Path(cfg.outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        fileio.write_summary_csv([r.row() for r in results], outdir / "summary.csv")
        fileio.write_timings_csv([r.timing_row() for r in results],
                                 outdir / "timings.csv")
        fileio.write_aggregate_json(summary.aggregate(), outdir / "aggregate.json")
    return summary
