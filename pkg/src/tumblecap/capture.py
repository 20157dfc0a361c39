"""Soft-capture trajectory optimization pipeline.

Two-stage scheme: an initial convex SOCP drives the chaser from its
passively safe relative orbit to the predicted capture pose without
collision-avoidance constraints; a sequential convex loop then re-solves
the same program augmented with the linearized collision metric until the
full nonlinear collision check clears (min_k alpha_k > 1), or the
iteration budget runs out.

Node k (1-based, k = 1..N) lives at time k*dt; node 1 is pinned to the
chaser's current state and node N is the capture node. All constraints on
the tumbling target sample its predicted attitude at the node times.

Degrees of freedom per node: state x = [r, v], thrust u (nodes 1..N-1),
the position-norm slack rho of the lossless field-of-view relaxation and,
in the corrective stage, one collision slack s per node.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from tumblecap import collision, conic, quat, relmotion, target
from tumblecap.collision import CollisionError
from tumblecap.scenario import CORRECTED, Scenario
from tumblecap.target import TumbleTrajectory

OUTCOME_SAFE = "safe"
OUTCOME_INFEASIBLE_INITIAL = "infeasible-problem2"
OUTCOME_SCP_EXHAUSTED = "scp-exhausted"
OUTCOME_NUMERICAL = "numerical-failure"

# residual tolerances for the a-posteriori verification of a solution
DYN_RESIDUAL_TOL = 1e-6
THRUST_TOL = 1e-6
VELOCITY_TOL = 1e-9
GENERIC_TOL = 1e-6
# a safe solution must leave the position-norm relaxation essentially tight;
# a looser result means the horizon pressed the convex FOV cone and the
# solution does not honor the lossless-relaxation contract at this N
TIGHTNESS_TOL = 1e-3

_SQ15 = np.sqrt(1.5)
_SQ05 = np.sqrt(0.5)


def fov_soc_data(omega_max: float, dt: float, form: str) -> tuple[np.ndarray, float]:
    """Square-root matrix and slack coefficient of the convex FOV cone.

    The line-of-sight constraint between successive nodes bounds the angle
    between r_k and r_{k+1} by phi = omega_max*dt. With the slack pair
    y = (rho_k, rho_{k+1}) it becomes || M [r_k; r_{k+1}] || <= coeff*(rho_k
    + rho_{k+1}). The "corrected" form uses the difference quadratic
    (off-diagonal -I/2) and coeff = sqrt(2 - cos phi)/2, which reduces
    exactly to the original angle constraint at tight, equal slacks. The
    "literal" form keeps the +I/2 off-diagonal and coeff = sin(phi/2) for
    comparison; it is unsatisfiable for small phi at tight slacks.
    """
    phi = omega_max * dt
    a = (_SQ15 + _SQ05) / 2.0
    b = (_SQ05 - _SQ15) / 2.0
    M = np.zeros((6, 6))
    off = b if form == CORRECTED else -b
    M[:3, :3] = a * np.eye(3)
    M[3:, 3:] = a * np.eye(3)
    M[:3, 3:] = off * np.eye(3)
    M[3:, :3] = off * np.eye(3)
    coeff = np.sqrt(2.0 - np.cos(phi)) / 2.0 if form == CORRECTED else np.sin(phi / 2.0)
    return M, coeff


@dataclass
class ProblemLayout:
    """Variable indices and constraint census of a built capture program."""
    n_nodes: int
    x: np.ndarray            # (N, 6)
    u: np.ndarray            # (N-1, 3)
    rho: np.ndarray          # (N,)
    t_l1: np.ndarray
    s: np.ndarray | None     # (N,) collision slacks, corrective stage only
    fov_cones: int = 0
    dock_cones: int = 0
    collision_rows: int = 0


@dataclass
class ChaserTrajectory:
    """Discrete chaser solution with derived pointing attitudes."""
    dt: float
    xs: np.ndarray                     # (N, 6)
    us: np.ndarray                     # (N-1, 3)
    rho: np.ndarray                    # (N,)
    s: np.ndarray | None = None        # collision slacks
    attitudes: np.ndarray | None = None   # (N, 4)
    alphas: np.ndarray | None = None      # (N,) nonlinear collision metric

    @property
    def n_nodes(self) -> int:
        return len(self.xs)

    @property
    def rs(self) -> np.ndarray:
        return self.xs[:, :3]

    @property
    def vs(self) -> np.ndarray:
        return self.xs[:, 3:]

    def times(self) -> np.ndarray:
        return self.dt * np.arange(1, self.n_nodes + 1)

    def delta_v(self, m_c: float) -> float:
        return float(np.linalg.norm(self.us, axis=1).sum() * self.dt / m_c)


def derive_attitudes(rs: np.ndarray, tumble: TumbleTrajectory, dt: float) -> np.ndarray:
    """Reference attitudes: chained pointing law, terminal capture attitude."""
    n = len(rs)
    out = np.empty((n, 4))
    q = quat.canonical_pointing(rs[0])
    out[0] = q
    for k in range(1, n - 1):
        q = quat.pointing_attitude(rs[k], q)
        out[k] = q
    out[n - 1] = quat.terminal_attitude(tumble.sample(n * dt).q)
    return out


def _discrete_dynamics(s: Scenario) -> relmotion.DiscreteDynamics:
    A, B = relmotion.cw_continuous(s.ctx)
    return relmotion.discretize(A, B, s.disc.dt)


def _require_prediction(s: Scenario, tumble: TumbleTrajectory) -> None:
    needed = s.disc.n * s.disc.dt
    if tumble.horizon < needed - 1e-9:
        raise ValueError(
            f"tumble prediction covers {tumble.horizon} s but the problem "
            f"needs {needed} s")


def _build_core(s: Scenario, tumble: TumbleTrajectory,
                gamma: float) -> tuple[conic.ConicProgram, ProblemLayout]:
    """Common constraint set of both stages (everything but collision)."""
    _require_prediction(s, tumble)
    n = s.disc.n
    dt = s.disc.dt
    dyn = _discrete_dynamics(s)

    prog = conic.ConicProgram()
    x_idx = prog.add_vars(6 * n).reshape(n, 6)
    u_idx = prog.add_vars(3 * (n - 1)).reshape(n - 1, 3)
    rho_idx = prog.add_vars(n, lb=0.0, ub=s.limits.r_max)
    layout = ProblemLayout(n_nodes=n, x=x_idx, u=u_idx, rho=rho_idx,
                           t_l1=np.empty(0, dtype=int), s=None)

    # initial state
    x0 = s.x0.as_vector()
    for j in range(6):
        prog.add_eq([x_idx[0, j]], [1.0], x0[j])

    # discrete dynamics
    for k in range(n - 1):
        for j in range(6):
            idx = np.concatenate([[x_idx[k + 1, j]], x_idx[k], u_idx[k]])
            cof = np.concatenate([[1.0], -dyn.A_d[j], -dyn.B_d[j]])
            prog.add_eq(idx, cof, 0.0)

    # thrust and velocity magnitude bounds
    for k in range(n - 1):
        head = prog.add_vars(1)[0]
        prog.add_eq([head], [1.0], s.limits.u_max)
        prog.add_soc(head, u_idx[k])
    for k in range(n):
        head = prog.add_vars(1)[0]
        prog.add_eq([head], [1.0], s.limits.v_max)
        prog.add_soc(head, x_idx[k, 3:6])

    # lossless position-norm slack: ||r_k|| <= rho_k
    for k in range(n):
        prog.add_soc(rho_idx[k], x_idx[k, 0:3])

    # convexified field of view between successive nodes
    M, coeff = fov_soc_data(s.limits.omega_max, dt, s.scp.fov_form)
    for k in range(n - 1):
        z = prog.add_vars(6)
        stacked = np.concatenate([x_idx[k, 0:3], x_idx[k + 1, 0:3]])
        for j in range(6):
            prog.add_eq(np.concatenate([[z[j]], stacked]),
                        np.concatenate([[1.0], -M[j]]), 0.0)
        head = prog.add_vars(1)[0]
        prog.add_eq([head, rho_idx[k], rho_idx[k + 1]], [1.0, -coeff, -coeff], 0.0)
        prog.add_soc(head, z)
        layout.fov_cones += 1

    # docking corridor over the final nodes: within a cone of half-angle
    # theta_dock around the rotating target capture axis
    tan_theta = np.tan(s.docking.theta_dock)
    for k in range(n - s.docking.n_dock, n):
        R_t = tumble.attitude_matrix((k + 1) * dt)
        apex = R_t @ s.geometry.d_t
        axis = R_t[:, 2]
        w = prog.add_vars(2)
        for j in range(2):
            prog.add_eq(np.concatenate([[w[j]], x_idx[k, 0:3]]),
                        np.concatenate([[1.0], -R_t[:, j]]),
                        -float(R_t[:, j] @ apex))
        head = prog.add_vars(1)[0]
        prog.add_eq(np.concatenate([[head], x_idx[k, 0:3]]),
                    np.concatenate([[1.0], -tan_theta * axis]),
                    -tan_theta * float(axis @ apex))
        prog.add_soc(head, w)
        layout.dock_cones += 1

    # terminal capture: chaser center at the opposed capture-vector pose,
    # velocity matching the target capture point
    R_final = tumble.attitude_matrix(n * dt)
    p_capture = R_final @ (s.geometry.d_c + s.geometry.d_t)
    e = prog.add_vars(3)
    for j in range(3):
        prog.add_eq([e[j], x_idx[n - 1, j]], [1.0, -1.0], -p_capture[j])
    head = prog.add_vars(1)[0]
    prog.add_eq([head], [1.0], s.tolerances.eps_p)
    prog.add_soc(head, e)

    omega_final = tumble.sample((n - 1) * dt).omega
    v_capture = R_final @ np.cross(omega_final, s.geometry.d_t)
    e = prog.add_vars(3)
    for j in range(3):
        prog.add_eq([e[j], x_idx[n - 1, 3 + j]], [1.0, -1.0], -v_capture[j])
    head = prog.add_vars(1)[0]
    prog.add_eq([head], [1.0], s.tolerances.eps_v)
    prog.add_soc(head, e)

    # minimum-fuel L1 objective plus the slack terms that keep the
    # relaxation tight
    layout.t_l1 = conic.l1_epigraph(prog, list(u_idx))
    if gamma != 1.0:
        prog.add_objective(layout.t_l1, np.full(len(layout.t_l1), gamma - 1.0))
    prog.add_objective(rho_idx, np.ones(n))
    return prog, layout


def build_problem2(s: Scenario, tumble: TumbleTrajectory) -> conic.ConicProgram:
    """Initial convex capture problem (no collision-avoidance constraints)."""
    gamma = s.scp.gamma if s.scp.gamma_in_initial else 1.0
    prog, layout = _build_core(s, tumble, gamma)
    prog.layout = layout
    return prog


def collision_linearization(s: Scenario, tumble: TumbleTrajectory,
                            rs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nonlinear collision metric and Jacobian at every node of a reference.

    A degenerate evaluation is retried once from a point perturbed by
    1e-6 m before giving up.
    """
    n = len(rs)
    alphas = np.empty(n)
    jacs = np.empty((n, 3))
    for k in range(n):
        t = (k + 1) * s.disc.dt
        try:
            alphas[k], jacs[k] = collision.composed_alpha_and_gradient(
                rs[k], t, tumble, s.geometry)
        except CollisionError:
            r = rs[k]
            nr = np.linalg.norm(r)
            r_pert = r + (1e-6 * r / nr if nr > 1e-9 else np.array([1e-6, 0.0, 0.0]))
            alphas[k], jacs[k] = collision.composed_alpha_and_gradient(
                r_pert, t, tumble, s.geometry)
    return alphas, jacs


def build_problem3(s: Scenario, tumble: TumbleTrajectory,
                   x_ref: np.ndarray, u_ref: np.ndarray,
                   lin: tuple[np.ndarray, np.ndarray] | None = None) -> conic.ConicProgram:
    """Corrective convex subproblem with linearized collision avoidance.

    Internally solved in absolute variables (reference plus correction has
    the same feasible set); the collision rows hold the first-order model
    alpha_ref + J (r - r_ref) + s >= alpha_min with slack s >= 0 penalized
    in the objective, which keeps every subproblem feasible.
    """
    prog, layout = _build_core(s, tumble, s.scp.gamma)
    if lin is None:
        lin = collision_linearization(s, tumble, x_ref[:, :3])
    alphas_ref, jacs = lin

    n = s.disc.n
    s_idx = prog.add_vars(n, lb=0.0)
    layout.s = s_idx
    for k in range(n):
        w = prog.add_vars(1)[0]
        rhs = s.scp.alpha_min - alphas_ref[k] + float(jacs[k] @ x_ref[k, :3])
        prog.add_eq(np.concatenate([[w], layout.x[k, 0:3], [s_idx[k]]]),
                    np.concatenate([[1.0], -jacs[k], [-1.0]]), -rhs)
        prog.add_nonneg([w])
        layout.collision_rows += 1
    prog.add_objective(s_idx, np.full(n, s.scp.psi))
    prog.layout = layout
    return prog


def extract_trajectory(s: Scenario, out: conic.SolverOutcome,
                       layout: ProblemLayout) -> ChaserTrajectory:
    xs = out.x[layout.x.ravel()].reshape(layout.n_nodes, 6)
    us = out.x[layout.u.ravel()].reshape(layout.n_nodes - 1, 3)
    rho = out.x[layout.rho]
    slack = out.x[layout.s] if layout.s is not None else None
    return ChaserTrajectory(dt=s.disc.dt, xs=xs, us=us, rho=rho, s=slack)


@dataclass
class CheckRow:
    name: str
    value: float
    limit: float | None
    ok: bool | None       # None for purely informational rows


@dataclass
class VerificationReport:
    rows: list[CheckRow]
    delta_v: float
    tightness: float      # max_k (rho_k - ||r_k||), m

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows if r.ok is not None)

    def failed(self) -> list[CheckRow]:
        return [r for r in self.rows if r.ok is False]


def verify_solution(s: Scenario, traj: ChaserTrajectory,
                    tumble: TumbleTrajectory | None = None) -> VerificationReport:
    """Check a trajectory against the original nonconvex constraint set."""
    if tumble is None:
        tumble = target.propagate(s.target0, s.J,
                                  horizon=traj.n_nodes * s.disc.dt, dt=s.disc.dt)
    n = traj.n_nodes
    dt = s.disc.dt
    dyn = _discrete_dynamics(s)
    rows: list[CheckRow] = []

    pred = traj.xs[:-1] @ dyn.A_d.T + traj.us @ dyn.B_d.T
    dyn_res = float(np.linalg.norm(traj.xs[1:] - pred, axis=1).max()) if n > 1 else 0.0
    rows.append(CheckRow("dynamics_residual", dyn_res, DYN_RESIDUAL_TOL,
                         dyn_res <= DYN_RESIDUAL_TOL))

    u_exc = float((np.linalg.norm(traj.us, axis=1) - s.limits.u_max).max()) if len(traj.us) else -s.limits.u_max
    rows.append(CheckRow("thrust_bound_excess", u_exc, THRUST_TOL, u_exc <= THRUST_TOL))

    v_exc = float((np.linalg.norm(traj.vs, axis=1) - s.limits.v_max).max())
    rows.append(CheckRow("velocity_bound_excess", v_exc, VELOCITY_TOL,
                         v_exc <= VELOCITY_TOL))

    # docking corridor on the final nodes
    tan_theta = float(np.tan(s.docking.theta_dock))
    worst_dock = np.inf
    for k in range(n - s.docking.n_dock, n):
        R_t = tumble.attitude_matrix((k + 1) * dt)
        X = traj.rs[k] - R_t @ s.geometry.d_t
        margin = tan_theta * float(R_t[:, 2] @ X) - float(np.hypot(R_t[:, 0] @ X,
                                                                   R_t[:, 1] @ X))
        worst_dock = min(worst_dock, margin)
    rows.append(CheckRow("docking_cone_margin", worst_dock, -GENERIC_TOL,
                         worst_dock >= -GENERIC_TOL))

    # original line-of-sight angle bound between successive nodes
    fov_limit = s.limits.omega_max * dt
    worst_fov = 0.0
    for k in range(n - 1):
        a, b = traj.rs[k], traj.rs[k + 1]
        ang = float(np.arctan2(np.linalg.norm(np.cross(a, b)), float(a @ b)))
        worst_fov = max(worst_fov, ang)
    rows.append(CheckRow("fov_angle", worst_fov, fov_limit + GENERIC_TOL,
                         worst_fov <= fov_limit + GENERIC_TOL))

    R_final = tumble.attitude_matrix(n * dt)
    p_err = float(np.linalg.norm(traj.rs[-1] - R_final @ (s.geometry.d_c + s.geometry.d_t)))
    rows.append(CheckRow("terminal_position_residual", p_err,
                         s.tolerances.eps_p + GENERIC_TOL,
                         p_err <= s.tolerances.eps_p + GENERIC_TOL))
    v_cap = R_final @ np.cross(tumble.sample((n - 1) * dt).omega, s.geometry.d_t)
    v_err = float(np.linalg.norm(traj.vs[-1] - v_cap))
    rows.append(CheckRow("terminal_velocity_residual", v_err,
                         s.tolerances.eps_v + GENERIC_TOL,
                         v_err <= s.tolerances.eps_v + GENERIC_TOL))

    alphas = np.array([collision.composed_alpha(traj.rs[k], (k + 1) * dt,
                                                tumble, s.geometry)
                       for k in range(n)])
    rows.append(CheckRow("collision_alpha_min", float(alphas.min()), 1.0,
                         bool(alphas.min() > 1.0)))

    tightness = float((traj.rho - np.linalg.norm(traj.rs, axis=1)).max())
    rows.append(CheckRow("relaxation_tightness", tightness, None, None))

    return VerificationReport(rows=rows, delta_v=traj.delta_v(s.ctx.m_c),
                              tightness=tightness)


@dataclass
class SolveReport:
    outcome: str
    trajectory: ChaserTrajectory | None
    iterations: int
    alpha_min_history: list[float] = field(default_factory=list)
    alpha_node_history: list[np.ndarray] = field(default_factory=list)
    penalty_history: list[float] = field(default_factory=list)
    solve_times: list[float] = field(default_factory=list)
    statuses: list[str] = field(default_factory=list)
    delta_v: float | None = None
    wall_time: float = 0.0
    verification: VerificationReport | None = None
    repro: str | None = None

    @property
    def success(self) -> bool:
        """Safe, verified against every original constraint, and tight.

        This is the acceptance gate the horizon search and the CLI use: the
        collision loop converged, the independent re-check of the nonconvex
        constraint set passed, and the position-norm relaxation is lossless.
        """
        return (self.outcome == OUTCOME_SAFE and self.verification is not None
                and self.verification.ok
                and self.verification.tightness <= TIGHTNESS_TOL)


def solve_capture(s: Scenario, tumble: TumbleTrajectory | None = None) -> SolveReport:
    """Run the full pipeline on one scenario."""
    t_start = time.perf_counter()
    if tumble is None:
        tumble = target.propagate(s.target0, s.J,
                                  horizon=s.disc.n * s.disc.dt, dt=s.disc.dt)

    prog = build_problem2(s, tumble)
    out = conic.solve(prog, s.scp.solver_tol)
    report = SolveReport(outcome="", trajectory=None, iterations=0)
    report.solve_times.append(out.solve_time)
    report.statuses.append(out.status)
    if out.status == "infeasible":
        report.outcome = OUTCOME_INFEASIBLE_INITIAL
        report.wall_time = time.perf_counter() - t_start
        return report
    if out.status != "optimal":
        report.outcome = OUTCOME_NUMERICAL
        report.repro = prog.dump()
        report.wall_time = time.perf_counter() - t_start
        return report

    traj = extract_trajectory(s, out, prog.layout)
    for iteration in range(s.scp.i_max + 1):
        alphas, jacs = collision_linearization(s, tumble, traj.rs)
        report.alpha_min_history.append(float(alphas.min()))
        report.alpha_node_history.append(alphas)
        if alphas.min() > 1.0:
            traj.alphas = alphas
            traj.attitudes = derive_attitudes(traj.rs, tumble, s.disc.dt)
            report.outcome = OUTCOME_SAFE
            report.trajectory = traj
            report.iterations = iteration
            report.delta_v = traj.delta_v(s.ctx.m_c)
            report.verification = verify_solution(s, traj, tumble)
            break
        if iteration == s.scp.i_max:
            traj.alphas = alphas
            traj.attitudes = derive_attitudes(traj.rs, tumble, s.disc.dt)
            report.outcome = OUTCOME_SCP_EXHAUSTED
            report.trajectory = traj
            report.iterations = iteration
            report.delta_v = traj.delta_v(s.ctx.m_c)
            break

        prog = build_problem3(s, tumble, traj.xs, traj.us, lin=(alphas, jacs))
        out = conic.solve(prog, s.scp.solver_tol)
        report.solve_times.append(out.solve_time)
        report.statuses.append(out.status)
        if out.status != "optimal":
            report.outcome = OUTCOME_NUMERICAL
            report.trajectory = traj
            report.iterations = iteration
            report.repro = prog.dump()
            break
        traj = extract_trajectory(s, out, prog.layout)
        report.penalty_history.append(float(traj.s.sum()))

    report.wall_time = time.perf_counter() - t_start
    return report
