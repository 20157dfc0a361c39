import numpy as np
import pytest

from tumblecap import quat


def random_unit_quat(rng):
    q = rng.normal(size=4)
    return q / np.linalg.norm(q)


def hamilton_oracle(q2, q1):
    # componentwise Hamilton product, written out independently of lmult
    a1, b1, c1, d1 = q2
    a2, b2, c2, d2 = q1
    return np.array([
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ])


class TestLmult:
    def test_identity(self):
        assert np.allclose(quat.lmult(quat.qeye()), np.eye(4))

    def test_times_conjugate_is_identity(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            q = random_unit_quat(rng)
            qq = quat.lmult(q) @ quat.qconj(q)
            assert np.allclose(qq, quat.qeye(), atol=1e-12)

    def test_against_hamilton_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            qa = random_unit_quat(rng)
            qb = random_unit_quat(rng)
            err = np.abs(quat.lmult(qa) @ qb - hamilton_oracle(qa, qb))
            assert err.max() <= 1e-12

    def test_block_structure(self):
        rng = np.random.default_rng(3)
        q = random_unit_quat(rng)
        L = quat.lmult(q)
        assert L[0, 0] == q[0]
        assert np.allclose(L[1:, 1:], q[0] * np.eye(3) + quat.skew(q[1:]))


class TestRotMatrix:
    def test_identity(self):
        assert np.allclose(quat.rot_matrix(quat.qeye()), np.eye(3))

    def test_90deg_about_z_maps_x_to_y(self):
        q = np.array([np.cos(np.pi / 4), 0.0, 0.0, np.sin(np.pi / 4)])
        R = quat.rot_matrix(q)
        assert np.allclose(R @ [1, 0, 0], [0, 1, 0], atol=1e-12)

    def test_homomorphism(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            q1 = random_unit_quat(rng)
            q2 = random_unit_quat(rng)
            R_prod = quat.rot_matrix(quat.qmul(q2, q1))
            err = np.abs(R_prod - quat.rot_matrix(q2) @ quat.rot_matrix(q1))
            assert err.max() <= 1e-12

    def test_proper_orthogonal(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            R = quat.rot_matrix(random_unit_quat(rng))
            assert np.allclose(R.T @ R, np.eye(3), atol=1e-12)
            assert np.isclose(np.linalg.det(R), 1.0, atol=1e-12)

    def test_normalizes_non_unit_input(self):
        q = 3.0 * np.array([np.cos(0.3), 0.0, np.sin(0.3), 0.0])
        assert np.allclose(quat.rot_matrix(q), quat.rot_matrix(q / 3.0))


class TestDrotDq:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(6)
        h = 1e-6
        for _ in range(20):
            q = random_unit_quat(rng)
            d = quat.drot_dq(q)
            for j in range(4):
                e = np.zeros(4)
                e[j] = h
                # unnormalized central difference of the quadratic formula
                qp, qm = q + e, q - e
                sp, xp, yp, zp = qp
                sm, xm, ym, zm = qm

                def raw(s, x, y, z):
                    return np.array([
                        [1 - 2 * (y * y + z * z), 2 * (x * y - s * z), 2 * (x * z + s * y)],
                        [2 * (x * y + s * z), 1 - 2 * (x * x + z * z), 2 * (y * z - s * x)],
                        [2 * (x * z - s * y), 2 * (y * z + s * x), 1 - 2 * (x * x + y * y)],
                    ])

                fd = (raw(sp, xp, yp, zp) - raw(sm, xm, ym, zm)) / (2 * h)
                assert np.abs(fd - d[j]).max() <= 1e-8


class TestPointing:
    def test_already_pointing_unchanged(self):
        r = np.array([3.0, -2.0, 5.0])
        q0 = quat.canonical_pointing(r)
        q1 = quat.pointing_attitude(r, q0)
        assert np.abs(q1 - q0).max() <= 1e-12

    def test_antiparallel_tie_break_about_body_x(self):
        # capture axis +z in {O}, target straight below: rotation of pi about +x
        r = np.array([0.0, 0.0, 4.0])
        q = quat.pointing_attitude(r, quat.qeye())
        expected = quat.canonical(quat.from_axis_angle([1.0, 0.0, 0.0], np.pi))
        assert np.abs(q - expected).max() <= 1e-12
        R = quat.rot_matrix(q)
        assert np.allclose(R @ [0, 0, 1], [0, 0, -1], atol=1e-12)

    def test_alignment_on_random_inputs(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            r = rng.uniform(-50, 50, size=3)
            if np.linalg.norm(r) < 1e-6:
                continue
            q_prev = random_unit_quat(rng)
            q = quat.pointing_attitude(r, q_prev)
            axis = quat.rot_matrix(q) @ [0, 0, 1]
            target_dir = -r / np.linalg.norm(r)
            angle = np.arctan2(np.linalg.norm(np.cross(axis, target_dir)),
                               np.dot(axis, target_dir))
            assert angle <= 1e-9
            assert abs(np.linalg.norm(q) - 1.0) <= 1e-9

    def test_idempotent(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            r = rng.uniform(-20, 20, size=3)
            if np.linalg.norm(r) < 1e-6:
                continue
            q1 = quat.pointing_attitude(r, random_unit_quat(rng))
            q2 = quat.pointing_attitude(r, q1)
            assert np.abs(q2 - q1).max() <= 1e-9

    def test_minimum_angle_increment(self):
        # the applied increment never exceeds the geodesic angle between axes
        rng = np.random.default_rng(9)
        for _ in range(200):
            r = rng.uniform(-20, 20, size=3)
            if np.linalg.norm(r) < 1e-6:
                continue
            q_prev = random_unit_quat(rng)
            axis_before = quat.rot_matrix(q_prev) @ [0, 0, 1]
            needed = np.arccos(np.clip(np.dot(axis_before, -r / np.linalg.norm(r)), -1, 1))
            applied = quat.rotation_angle(quat.pointing_attitude(r, q_prev), q_prev)
            assert applied <= needed + 1e-9

    def test_degenerate_position_raises(self):
        with pytest.raises(ValueError):
            quat.pointing_attitude(np.zeros(3), quat.qeye())


class TestTerminalAttitude:
    def test_identity_target_flips_z_and_x(self):
        R = quat.rot_matrix(quat.terminal_attitude(quat.qeye()))
        assert np.allclose(R @ [0, 0, 1], [0, 0, -1], atol=1e-12)
        assert np.allclose(R @ [1, 0, 0], [-1, 0, 0], atol=1e-12)
        assert np.allclose(R @ [0, 1, 0], [0, 1, 0], atol=1e-12)

    def test_capture_axes_oppose(self):
        rng = np.random.default_rng(10)
        for _ in range(100):
            q_t = random_unit_quat(rng)
            chaser_axis = quat.rot_matrix(quat.terminal_attitude(q_t)) @ [0, 0, 1]
            target_axis = quat.rot_matrix(q_t) @ [0, 0, 1]
            assert np.abs(chaser_axis + target_axis).max() <= 1e-12

    def test_double_composition_is_involution(self):
        rng = np.random.default_rng(11)
        q_t = random_unit_quat(rng)
        q_y180 = np.array([0.0, 0.0, 1.0, 0.0])
        twice = quat.qmul(quat.terminal_attitude(q_t), q_y180)
        assert np.allclose(quat.rot_matrix(twice), quat.rot_matrix(q_t), atol=1e-12)


def test_outputs_are_canonical_sign():
    rng = np.random.default_rng(12)
    for _ in range(100):
        r = rng.uniform(-10, 10, size=3)
        if np.linalg.norm(r) < 1e-6:
            continue
        assert quat.pointing_attitude(r, random_unit_quat(rng))[0] >= 0.0
        assert quat.terminal_attitude(random_unit_quat(rng))[0] >= 0.0
