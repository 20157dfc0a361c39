"""Minimum-fuel soft-capture trajectory optimization for tumbling targets."""

from tumblecap.capture import (ChaserTrajectory, SolveReport, VerificationReport,
                               build_problem2, build_problem3, solve_capture,
                               verify_solution)
from tumblecap.collision import (AlphaResult, CaptureGeometry, ConvexPolytope,
                                 Pose, alpha, alpha_gradient,
                                 composed_alpha_and_gradient)
from tumblecap.conic import ConicProgram, SolverOutcome, l1_epigraph, solve
from tumblecap.harness import (CampaignConfig, CampaignSummary, CaseResult,
                               n_search, run_campaign)
from tumblecap.relmotion import (ChaserState, DiscreteDynamics, OrbitContext,
                                 cw_continuous, discretize, sample_safe_orbit)
from tumblecap.scenario import Scenario, default_scenario, load_scenario
from tumblecap.target import (TargetState, TumbleTrajectory, propagate,
                              sample_random_tumble, tumble_derivative)

__version__ = "0.1.0"

__all__ = [
    "AlphaResult", "CampaignConfig", "CampaignSummary", "CaptureGeometry",
    "CaseResult", "ChaserState", "ChaserTrajectory", "ConicProgram",
    "ConvexPolytope", "DiscreteDynamics", "OrbitContext", "Pose", "Scenario",
    "SolveReport", "SolverOutcome", "TargetState", "TumbleTrajectory",
    "VerificationReport", "alpha", "alpha_gradient", "build_problem2",
    "build_problem3", "composed_alpha_and_gradient", "cw_continuous",
    "default_scenario", "discretize", "l1_epigraph", "load_scenario",
    "n_search", "propagate", "run_campaign", "sample_random_tumble",
    "sample_safe_orbit", "solve", "solve_capture", "tumble_derivative",
    "verify_solution",
]
