"""Minimum-inflation collision metric between posed convex polytopes.

Both bodies are convex polytopes A y <= b about their own centers. The
metric is the smallest uniform inflation factor alpha such that the two
inflated, posed hulls share a point:

    minimize  alpha  over (y, alpha)
    s.t.      A1 R1^T (y - r1) <= alpha b1
              A2 R2^T (y - r2) <= alpha b2

alpha < 1 means the uninflated hulls intersect. The optimal value is
differentiable almost everywhere in the poses; gradients come for free
from the LP duals, with a central finite-difference fallback when the
active set is degenerate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from tumblecap import quat
from tumblecap.target import TumbleTrajectory

LP_TOL = 1e-8
FD_STEP = 1e-5          # m, central differences
_ACTIVE_TOL = 1e-7


class CollisionError(RuntimeError):
    """LP failure; carries the problem data for reproduction."""

    def __init__(self, message: str, data: dict | None = None):
        super().__init__(message)
        self.data = data or {}


@dataclass(frozen=True)
class ConvexPolytope:
    A: np.ndarray   # (m, 3) outward face normals, unit rows
    b: np.ndarray   # (m,) offsets, strictly positive

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float)
        norms = np.linalg.norm(A, axis=1)
        if np.any(norms < 1e-12):
            raise ValueError("zero face normal")
        A = A / norms[:, None]
        b = b / norms
        if np.any(b <= 0.0):
            raise ValueError("origin must be strictly interior (b > 0)")
        # bounded iff the origin lies in the interior of the normals' hull:
        # max eps s.t. sum(lam_i a_i) = 0, sum(lam_i) = 1, lam_i >= eps
        m = len(b)
        A_eq = np.vstack([A.T, np.ones(m)])
        A_eq = np.hstack([A_eq, np.zeros((4, 1))])
        b_eq = np.array([0.0, 0.0, 0.0, 1.0])
        A_ub = np.hstack([-np.eye(m), np.ones((m, 1))])
        res = linprog(c=np.concatenate([np.zeros(m), [-1.0]]),
                      A_ub=A_ub, b_ub=np.zeros(m), A_eq=A_eq, b_eq=b_eq,
                      bounds=[(0, None)] * m + [(None, None)], method="highs")
        if res.status != 0 or res.x[-1] <= 1e-12:
            raise ValueError("face normals do not positively span 3-space (unbounded hull)")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @staticmethod
    def box(half_extents) -> "ConvexPolytope":
        h = np.asarray(half_extents, dtype=float)
        return ConvexPolytope(np.vstack([np.eye(3), -np.eye(3)]),
                              np.concatenate([h, h]))


@dataclass(frozen=True)
class Pose:
    position: np.ndarray
    attitude: np.ndarray   # quaternion, body -> {O}

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "attitude", quat.qnormalize(self.attitude))


@dataclass(frozen=True)
class CaptureGeometry:
    """Hulls of both bodies plus the capture vectors in their body frames."""
    chaser: ConvexPolytope
    target: ConvexPolytope
    d_c: np.ndarray   # chaser capture vector in {C}, m
    d_t: np.ndarray   # target capture vector in {T}, m

    def __post_init__(self):
        object.__setattr__(self, "d_c", np.asarray(self.d_c, dtype=float))
        object.__setattr__(self, "d_t", np.asarray(self.d_t, dtype=float))


@dataclass
class AlphaResult:
    alpha: float
    witness: np.ndarray          # intersection point of the inflated hulls, m
    grad_r: np.ndarray | None    # d alpha / d (body-1 position), from LP duals
    active_set: np.ndarray       # indices of tight rows (body1 then body2)
    duals: np.ndarray = field(repr=False, default=None)
    degenerate: bool = False


def _lp_data(p1, pose1, p2, pose2):
    R1 = quat.rot_matrix(pose1.attitude)
    R2 = quat.rot_matrix(pose2.attitude)
    G1 = p1.A @ R1.T
    G2 = p2.A @ R2.T
    A_ub = np.block([[G1, -p1.b[:, None]], [G2, -p2.b[:, None]]])
    b_ub = np.concatenate([G1 @ pose1.position, G2 @ pose2.position])
    return A_ub, b_ub, G1, G2


def alpha(p1: ConvexPolytope, pose1: Pose, p2: ConvexPolytope, pose2: Pose) -> AlphaResult:
    """Solve the inflation LP; collision iff result.alpha < 1."""
    A_ub, b_ub, G1, G2 = _lp_data(p1, pose1, p2, pose2)
    res = linprog(c=[0.0, 0.0, 0.0, 1.0], A_ub=A_ub, b_ub=b_ub,
                  bounds=[(None, None)] * 3 + [(0.0, None)], method="highs")
    if res.status != 0:
        raise CollisionError(
            f"inflation LP failed (status {res.status}: {res.message})",
            data={"A_ub": A_ub, "b_ub": b_ub})
    a = float(res.x[3])
    witness = res.x[:3]
    residual = A_ub @ res.x - b_ub
    active = np.flatnonzero(residual > -_ACTIVE_TOL * max(1.0, a))
    # a nondegenerate vertex of the 4-variable LP has exactly 4 tight rows
    degenerate = len(active) != 4
    m = res.ineqlin.marginals   # d alpha / d b_ub
    m1 = m[:len(p1.b)]
    grad_r = m1 @ G1            # b_ub rows of body 1 are G1 r1
    return AlphaResult(alpha=a, witness=witness, grad_r=grad_r,
                       active_set=active, duals=m, degenerate=degenerate)


@dataclass
class AlphaGradient:
    grad_r: np.ndarray           # d alpha / d (body-1 position)
    grad_q: np.ndarray | None    # d alpha / d (body-1 attitude quaternion)
    method: str                  # "dual" or "fd"


def _fd_alpha_position(p1, pose1, p2, pose2) -> np.ndarray:
    g = np.empty(3)
    for i in range(3):
        e = np.zeros(3)
        e[i] = FD_STEP
        ap = alpha(p1, Pose(pose1.position + e, pose1.attitude), p2, pose2).alpha
        am = alpha(p1, Pose(pose1.position - e, pose1.attitude), p2, pose2).alpha
        g[i] = (ap - am) / (2 * FD_STEP)
    return g


def alpha_gradient(p1: ConvexPolytope, pose1: Pose,
                   p2: ConvexPolytope, pose2: Pose) -> AlphaGradient:
    """Gradient of alpha w.r.t. body-1 position and attitude.

    Uses LP sensitivities (duals) when the optimal basis is nondegenerate,
    otherwise falls back to central finite differences for the position
    part. The attitude gradient is the Lagrangian envelope term through the
    rotation-matrix entries.
    """
    res = alpha(p1, pose1, p2, pose2)
    if res.degenerate:
        try:
            return AlphaGradient(grad_r=_fd_alpha_position(p1, pose1, p2, pose2),
                                 grad_q=None, method="fd")
        except CollisionError as exc:
            raise CollisionError("degenerate active set and finite-difference "
                                 "fallback failed", exc.data) from exc
    lam1 = -res.duals[:len(p1.b)]          # >= 0 multipliers of body-1 rows
    R1 = quat.rot_matrix(pose1.attitude)
    grad_r = res.grad_r
    # envelope term: rows of body 1 are A1 R^T (y - r1) - alpha b1 <= 0
    dR = quat.drot_dq(pose1.attitude)
    offset = res.witness - pose1.position
    grad_q = np.array([lam1 @ (p1.A @ dR[j].T @ offset) for j in range(4)])
    return AlphaGradient(grad_r=grad_r, grad_q=grad_q, method="dual")


def composed_alpha(r: np.ndarray, t: float, traj: TumbleTrajectory,
                   geometry: CaptureGeometry) -> float:
    """alpha with the chaser in its canonical pointing attitude at position r."""
    pose_c = Pose(r, quat.canonical_pointing(r))
    pose_t = Pose(np.zeros(3), traj.sample(t).q)
    return alpha(geometry.chaser, pose_c, geometry.target, pose_t).alpha


def composed_alpha_and_gradient(r: np.ndarray, t: float, traj: TumbleTrajectory,
                                geometry: CaptureGeometry) -> tuple[float, np.ndarray]:
    """alpha and its full position Jacobian along the pointing-attitude chain.

    The chaser attitude is itself a function of position, so the Jacobian
    is d(alpha)/dr at fixed attitude plus the attitude sensitivity chained
    through d(pointing)/dr (central finite differences of the pointing map).
    """
    r = np.asarray(r, dtype=float)
    if np.linalg.norm(r) < 1e-9:
        raise CollisionError("chaser position coincides with the target origin")
    q_c = quat.canonical_pointing(r)
    pose_c = Pose(r, q_c)
    pose_t = Pose(np.zeros(3), traj.sample(t).q)
    res = alpha(geometry.chaser, pose_c, geometry.target, pose_t)

    if not res.degenerate:
        grad = alpha_gradient(geometry.chaser, pose_c, geometry.target, pose_t)
        dq_dr = np.empty((4, 3))
        for i in range(3):
            e = np.zeros(3)
            e[i] = FD_STEP
            qp = quat.canonical_pointing(r + e)
            qm = quat.canonical_pointing(r - e)
            if np.dot(qp, qm) < 0.0:
                qm = -qm
            dq_dr[:, i] = (qp - qm) / (2 * FD_STEP)
        return res.alpha, grad.grad_r + grad.grad_q @ dq_dr

    # degenerate basis: difference the full composed map instead
    jac = np.empty(3)
    for i in range(3):
        e = np.zeros(3)
        e[i] = FD_STEP
        jac[i] = (composed_alpha(r + e, t, traj, geometry)
                  - composed_alpha(r - e, t, traj, geometry)) / (2 * FD_STEP)
    return res.alpha, jac
