"""Tumbling-target attitude propagation and sampling.

The target is a torque-free rigid body. Its state is the attitude
quaternion q_t ({T} -> {O}) and the angular velocity omega expressed in
the body frame {T}. Propagation integrates the rigid-body Euler equations
with classical RK4 at a fixed step, renormalizing the quaternion each
step; continuous-time queries go through componentwise cubic splines.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from tumblecap import quat

DEFAULT_RATE_CAP = np.deg2rad(10.0)


@dataclass(frozen=True)
class TargetState:
    q: np.ndarray       # attitude quaternion, {T} -> {O}
    omega: np.ndarray   # rad/s, body frame

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        # renormalize only on actual drift so node states round-trip bit-exactly
        if abs(np.linalg.norm(q) - 1.0) > 1e-12:
            q = quat.qnormalize(q)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "omega", np.asarray(self.omega, dtype=float))
        if not np.all(np.isfinite(self.omega)):
            raise ValueError("angular velocity must be finite")


def validate_inertia(J: np.ndarray) -> np.ndarray:
    """Check a 3x3 inertia matrix: symmetric, positive definite, physical.

    The principal moments of any rigid body obey the triangle inequalities
    (each moment is at most the sum of the other two).
    """
    J = np.asarray(J, dtype=float)
    if J.shape != (3, 3):
        raise ValueError("inertia matrix must be 3x3")
    if np.abs(J - J.T).max() > 1e-12:
        raise ValueError("inertia matrix must be symmetric")
    eig = np.linalg.eigvalsh(J)
    if eig.min() <= 0.0:
        raise ValueError("inertia matrix must be positive definite")
    i1, i2, i3 = eig
    if i1 + i2 < i3 - 1e-12 * i3:
        raise ValueError("principal moments violate the triangle inequality")
    return J


def tumble_derivative(state: TargetState, J: np.ndarray) -> np.ndarray:
    """Time derivative [q_dot, omega_dot] of the torque-free tumble state."""
    return _derivative(np.concatenate([state.q, state.omega]), J, np.linalg.inv(validate_inertia(J)))


def _derivative(x: np.ndarray, J: np.ndarray, Jinv: np.ndarray) -> np.ndarray:
    q, w = x[:4], x[4:]
    q_dot = 0.5 * (quat.lmult(q) @ np.concatenate([[0.0], w]))
    w_dot = Jinv @ (-np.cross(w, J @ w))
    return np.concatenate([q_dot, w_dot])


def kinetic_energy(omega: np.ndarray, J: np.ndarray) -> float:
    return 0.5 * float(omega @ J @ omega)


def momentum_magnitude(omega: np.ndarray, J: np.ndarray) -> float:
    return float(np.linalg.norm(J @ omega))


@dataclass
class TumbleTrajectory:
    """Uniformly-spaced tumble history with spline interpolation."""

    dt: float
    qs: np.ndarray       # (n, 4)
    omegas: np.ndarray   # (n, 3)
    J: np.ndarray
    _q_spline: CubicSpline = field(init=False, repr=False)
    _w_spline: CubicSpline = field(init=False, repr=False)

    def __post_init__(self):
        self.qs = np.asarray(self.qs, dtype=float)
        self.omegas = np.asarray(self.omegas, dtype=float)
        # align double-cover signs so componentwise splines stay smooth
        for k in range(1, len(self.qs)):
            if np.dot(self.qs[k - 1], self.qs[k]) < 0.0:
                self.qs[k] = -self.qs[k]
        t = self.dt * np.arange(len(self.qs))
        self._q_spline = CubicSpline(t, self.qs, axis=0)
        self._w_spline = CubicSpline(t, self.omegas, axis=0)

    @property
    def horizon(self) -> float:
        return self.dt * (len(self.qs) - 1)

    def sample(self, t: float) -> TargetState:
        """Interpolated state at time t in [0, horizon]; exact at the nodes."""
        if t < 0.0 or t > self.horizon + 1e-9:
            raise ValueError(f"sample time {t} outside [0, {self.horizon}]")
        k = int(round(t / self.dt))
        if abs(t - k * self.dt) < 1e-12 * max(1.0, self.horizon) and 0 <= k < len(self.qs):
            return TargetState(self.qs[k], self.omegas[k])
        return TargetState(quat.qnormalize(self._q_spline(t)), self._w_spline(t))

    def attitude_matrix(self, t: float) -> np.ndarray:
        return quat.rot_matrix(self.sample(t).q)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "qs", "qx", "qy", "qz", "wx", "wy", "wz"])
            for k in range(len(self.qs)):
                row = [self.dt * k, *self.qs[k], *self.omegas[k]]
                writer.writerow([f"{v:.17g}" for v in row])


def propagate(x0: TargetState, J: np.ndarray, horizon: float, dt: float) -> TumbleTrajectory:
    """RK4 propagation of the tumble over [0, horizon] at step dt."""
    if horizon <= 0.0 or dt <= 0.0:
        raise ValueError("horizon and dt must be positive")
    J = validate_inertia(J)
    Jinv = np.linalg.inv(J)
    n_steps = int(np.floor(horizon / dt + 1e-9))
    x = np.concatenate([x0.q, x0.omega])
    qs = np.empty((n_steps + 1, 4))
    ws = np.empty((n_steps + 1, 3))
    qs[0], ws[0] = x[:4], x[4:]
    for k in range(n_steps):
        k1 = _derivative(x, J, Jinv)
        k2 = _derivative(x + 0.5 * dt * k1, J, Jinv)
        k3 = _derivative(x + 0.5 * dt * k2, J, Jinv)
        k4 = _derivative(x + dt * k3, J, Jinv)
        x = x + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        x[:4] /= np.linalg.norm(x[:4])
        qs[k + 1], ws[k + 1] = x[:4], x[4:]
    return TumbleTrajectory(dt=dt, qs=qs, omegas=ws, J=J)


def sample_random_tumble(rng: np.random.Generator,
                         rate_max: float = DEFAULT_RATE_CAP) -> TargetState:
    """Random initial tumble: uniform attitude, rate uniform in [0, rate_max].

    A normalized 4-D Gaussian is uniform on the unit quaternion sphere; the
    spin direction is uniform on the 2-sphere.
    """
    if rate_max <= 0.0:
        raise ValueError("rate_max must be positive")
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    return TargetState(q, rng.uniform(0.0, rate_max) * direction)
