"""Quaternion algebra and the chaser's position-dependent pointing attitude.

Conventions used throughout the package:

- Quaternions are plain length-4 numpy arrays, scalar-first: q = [q_s, q_v].
- Hamilton product, right-handed frames.
- A body attitude quaternion q maps body-frame vectors into the reference
  frame {O}: v_O = rot_matrix(q) @ v_B.
- The chaser's capture axis is body +z (the direction of its capture
  vector), and the pointing law keeps that axis on the target at the
  origin of {O}.
- q and -q encode the same rotation; attitude outputs are canonicalized
  to q_s >= 0 so serialized results are reproducible.
"""

from __future__ import annotations

import numpy as np

_X = np.array([1.0, 0.0, 0.0])
_Z = np.array([0.0, 0.0, 1.0])


def qeye() -> np.ndarray:
    """Identity quaternion [1, 0, 0, 0]."""
    return np.array([1.0, 0.0, 0.0, 0.0])


def qnormalize(q: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(q)
    if n < 1e-12:
        raise ValueError("cannot normalize near-zero quaternion")
    return np.asarray(q, dtype=float) / n


def canonical(q: np.ndarray) -> np.ndarray:
    """Unit quaternion with the sign fixed so q_s >= 0."""
    q = qnormalize(q)
    return -q if q[0] < 0.0 else q


def skew(v: np.ndarray) -> np.ndarray:
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def lmult(q: np.ndarray) -> np.ndarray:
    """Left-multiplication matrix L(q), so lmult(q2) @ q1 is q2 * q1."""
    s, v = q[0], np.asarray(q[1:], dtype=float)
    L = np.empty((4, 4))
    L[0, 0] = s
    L[0, 1:] = -v
    L[1:, 0] = v
    L[1:, 1:] = s * np.eye(3) + skew(v)
    return L


def qmul(q2: np.ndarray, q1: np.ndarray) -> np.ndarray:
    """Hamilton product q2 * q1 (apply q1's rotation first, then q2's)."""
    return lmult(q2) @ np.asarray(q1, dtype=float)


def qconj(q: np.ndarray) -> np.ndarray:
    out = -np.asarray(q, dtype=float)
    out[0] = q[0]
    return out


def rot_matrix(q: np.ndarray) -> np.ndarray:
    """Rotation matrix of q (body -> {O}).

    Non-unit input is normalized first; the returned matrix is always
    proper orthogonal.
    """
    q = qnormalize(q)
    s, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - s * z), 2 * (x * z + s * y)],
        [2 * (x * y + s * z), 1 - 2 * (x * x + z * z), 2 * (y * z - s * x)],
        [2 * (x * z - s * y), 2 * (y * z + s * x), 1 - 2 * (x * x + y * y)],
    ])


def drot_dq(q: np.ndarray) -> np.ndarray:
    """Partials of rot_matrix w.r.t. the four quaternion components.

    Returns a (4, 3, 3) array of the unnormalized quadratic formula's
    derivatives; contracting with a tangent direction of the unit sphere
    gives the directional derivative of the rotation.
    """
    s, x, y, z = q
    d = np.empty((4, 3, 3))
    d[0] = 2.0 * np.array([[0, -z, y], [z, 0, -x], [-y, x, 0]], dtype=float)
    d[1] = 2.0 * np.array([[0, y, z], [y, -2 * x, -s], [z, s, -2 * x]], dtype=float)
    d[2] = 2.0 * np.array([[-2 * y, x, s], [x, 0, z], [-s, z, -2 * y]], dtype=float)
    d[3] = 2.0 * np.array([[-2 * z, -s, x], [s, -2 * z, y], [x, y, 0]], dtype=float)
    return d


def from_axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n < 1e-12:
        raise ValueError("rotation axis has near-zero magnitude")
    half = 0.5 * angle
    return np.concatenate([[np.cos(half)], np.sin(half) * axis / n])


def rotation_angle(q1: np.ndarray, q2: np.ndarray) -> float:
    """Geodesic rotation angle between two unit quaternions, in [0, pi]."""
    dot = min(abs(float(np.dot(q1, q2))), 1.0)
    return 2.0 * np.arccos(dot)


def pointing_attitude(r: np.ndarray, q_prev: np.ndarray) -> np.ndarray:
    """Attitude aligning the body capture axis (+z) with -r/||r||.

    The update is the minimum-angle rotation taking the current capture
    axis direction onto the target line of sight. When the two are exactly
    antiparallel the rotation axis is undefined; the tie is broken by
    rotating 180 deg about body +x.
    """
    r = np.asarray(r, dtype=float)
    dist = np.linalg.norm(r)
    if dist < 1e-9:
        raise ValueError("pointing direction undefined at the target origin")
    target_dir = -r / dist

    R_prev = rot_matrix(q_prev)
    axis_now = R_prev @ _Z
    c = float(np.dot(axis_now, target_dir))
    cross = np.cross(axis_now, target_dir)
    s = np.linalg.norm(cross)

    if s < 1e-12:
        if c > 0.0:
            return canonical(q_prev)
        # antiparallel: rotate pi about body +x, expressed in {O}
        q_inc = from_axis_angle(R_prev @ _X, np.pi)
    else:
        q_inc = from_axis_angle(cross / s, np.arctan2(s, c))
    return canonical(qmul(q_inc, q_prev))


def canonical_pointing(r: np.ndarray) -> np.ndarray:
    """Deterministic target-pointing attitude depending on position only.

    Minimum rotation from the identity attitude taking +z onto -r/||r||;
    used wherever the collision metric needs an attitude that is a pure
    function of chaser position.
    """
    return pointing_attitude(r, qeye())


def terminal_attitude(q_t_final: np.ndarray) -> np.ndarray:
    """Chaser capture attitude: target attitude composed with 180 deg about y.

    The composed rotation flips the chaser capture axis against the target's,
    so the two capture vectors oppose each other at contact.
    """
    q_y180 = np.array([0.0, 0.0, 1.0, 0.0])
    return canonical(qmul(qnormalize(q_t_final), q_y180))
