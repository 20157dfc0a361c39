"""Clohessy-Wiltshire relative dynamics and passively safe orbit sampling.

Frame {O} is the target-centered LVLH frame: x radial, y along-track,
z along the orbital angular momentum. The chaser is a point mass driven
by a thrust vector u (N); states are stacked as [r, v].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

MU_EARTH = 3.986004418e14  # m^3/s^2


@dataclass(frozen=True)
class OrbitContext:
    a: float                  # target orbit semi-major axis, m
    m_c: float                # chaser mass, kg
    mu: float = MU_EARTH

    def __post_init__(self):
        if self.a <= 0.0 or self.m_c <= 0.0 or self.mu <= 0.0:
            raise ValueError("orbit parameters must be positive")

    @property
    def n(self) -> float:
        """Orbital mean motion, rad/s."""
        return np.sqrt(self.mu / self.a ** 3)


@dataclass(frozen=True)
class ChaserState:
    r: np.ndarray   # m, {O}
    v: np.ndarray   # m/s, {O}

    def __post_init__(self):
        object.__setattr__(self, "r", np.asarray(self.r, dtype=float))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))
        if not (np.all(np.isfinite(self.r)) and np.all(np.isfinite(self.v))):
            raise ValueError("chaser state must be finite")

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.r, self.v])

    @staticmethod
    def from_vector(x: np.ndarray) -> "ChaserState":
        return ChaserState(x[:3], x[3:6])


def cw_continuous(ctx: OrbitContext) -> tuple[np.ndarray, np.ndarray]:
    """Continuous-time matrices of x_dot = A x + B u for the CW equations."""
    n = ctx.n
    A = np.zeros((6, 6))
    A[0:3, 3:6] = np.eye(3)
    A[3, 0] = 3.0 * n * n
    A[3, 4] = 2.0 * n
    A[4, 3] = -2.0 * n
    A[5, 2] = -n * n
    B = np.zeros((6, 3))
    B[3:6, :] = np.eye(3) / ctx.m_c
    return A, B


@dataclass(frozen=True)
class DiscreteDynamics:
    A_d: np.ndarray
    B_d: np.ndarray
    dt: float

    def step(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        return self.A_d @ x + self.B_d @ u


def discretize(A: np.ndarray, B: np.ndarray, dt: float) -> DiscreteDynamics:
    """Exact zero-order-hold discretization via the augmented matrix exponential."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    n, m = B.shape
    M = np.zeros((n + m, n + m))
    M[:n, :n] = A
    M[:n, n:] = B
    E = expm(M * dt)
    return DiscreteDynamics(A_d=E[:n, :n], B_d=E[:n, n:], dt=dt)


def safe_orbit_state(a0: float, b0: float, phase_ip: float, phase_ct: float,
                     ctx: OrbitContext) -> ChaserState:
    """Closed-form drift-free centered relative orbit.

    r_x = A0 sin(phase), r_y = 2 A0 cos(phase), r_z = B0 sin(phase_ct); the
    construction satisfies both the no-drift (v_y = -2 n r_x) and no-offset
    (r_y = 2 v_x / n) conditions exactly.
    """
    n = ctx.n
    sp, cp = np.sin(phase_ip), np.cos(phase_ip)
    sc, cc = np.sin(phase_ct), np.cos(phase_ct)
    r = np.array([a0 * sp, 2.0 * a0 * cp, b0 * sc])
    v = np.array([a0 * n * cp, -2.0 * a0 * n * sp, b0 * n * cc])
    return ChaserState(r, v)


def sample_safe_orbit(rng: np.random.Generator,
                      a0_range: tuple[float, float],
                      b0_range: tuple[float, float],
                      ctx: OrbitContext) -> ChaserState:
    """Random passively safe relative orbit with uniform amplitudes and phases."""
    if min(a0_range) <= 0.0 or min(b0_range) <= 0.0:
        raise ValueError("amplitude ranges must be positive")
    a0 = rng.uniform(*a0_range)
    b0 = rng.uniform(*b0_range)
    return safe_orbit_state(a0, b0, rng.uniform(0.0, 2 * np.pi),
                            rng.uniform(0.0, 2 * np.pi), ctx)
