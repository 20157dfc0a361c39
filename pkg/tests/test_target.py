import numpy as np
import pytest

from tumblecap import quat, target

# inertia of the simulated tumbling client vehicle, kg m^2
J_CLIENT = np.array([
    [5.89056, 0.0, 0.0],
    [0.0, 11.4462, 0.233516],
    [0.0, 0.233516, 11.5365],
])


class TestDerivative:
    def test_rest_state_is_stationary(self):
        x = target.TargetState(quat.qeye(), np.zeros(3))
        assert np.allclose(target.tumble_derivative(x, J_CLIENT), 0.0)

    def test_principal_axis_spin_has_zero_angular_acceleration(self):
        eigval, eigvec = np.linalg.eigh(J_CLIENT)
        for i in range(3):
            x = target.TargetState(quat.qeye(), 0.1 * eigvec[:, i])
            d = target.tumble_derivative(x, J_CLIENT)
            assert np.abs(d[4:]).max() <= 1e-15

    def test_quaternion_derivative_orthogonal_to_q(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            q = rng.normal(size=4)
            q /= np.linalg.norm(q)
            x = target.TargetState(q, rng.uniform(-0.2, 0.2, size=3))
            d = target.tumble_derivative(x, J_CLIENT)
            assert abs(np.dot(q, d[:4])) <= 1e-12

    def test_singular_inertia_rejected(self):
        with pytest.raises(ValueError):
            target.validate_inertia(np.diag([1.0, 1.0, 0.0]))
        with pytest.raises(ValueError):
            target.validate_inertia(np.diag([1.0, 1.0, 5.0]))  # unphysical moments


class TestPropagate:
    def test_static_target_stays_put(self):
        x0 = target.TargetState(np.array([0.5, 0.5, 0.5, 0.5]), np.zeros(3))
        traj = target.propagate(x0, J_CLIENT, horizon=10.0, dt=1.0)
        assert len(traj.qs) == 11
        for k in range(11):
            assert np.allclose(traj.qs[k], x0.q, atol=1e-15)
            assert np.allclose(traj.omegas[k], 0.0)

    def test_axisymmetric_precession_matches_closed_form(self):
        # symmetric body about +z: J = diag(Jt, Jt, Ja). In 3-1-3 Euler angles
        # aligned with the (conserved) angular momentum the motion is
        # R(t) = Rz(phi_dot t) Rx(theta) Rz(psi0 + psi_dot t) with
        # phi_dot = H/Jt, psi_dot = w3 (Jt - Ja)/Jt, theta fixed.
        Jt, Ja = 8.0, 4.0
        J = np.diag([Jt, Jt, Ja])
        w_perp, w3 = 0.12, 0.09
        H = np.hypot(Jt * w_perp, Ja * w3)
        theta = np.arctan2(Jt * w_perp, Ja * w3)
        phi_dot = H / Jt
        psi_dot = w3 * (Jt - Ja) / Jt
        psi0 = np.pi / 2

        def Rz(a):
            c, s = np.cos(a), np.sin(a)
            return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])

        def Rx(a):
            c, s = np.cos(a), np.sin(a)
            return np.array([[1.0, 0, 0], [0, c, -s], [0, s, c]])

        R0 = Rz(0.0) @ Rx(theta) @ Rz(psi0)
        # quaternion of R0 (scalar-first), via the trace formula
        qs = 0.5 * np.sqrt(max(1.0 + np.trace(R0), 0.0))
        qv = np.array([R0[2, 1] - R0[1, 2], R0[0, 2] - R0[2, 0], R0[1, 0] - R0[0, 1]]) / (4 * qs)
        x0 = target.TargetState(np.concatenate([[qs], qv]), np.array([w_perp, 0.0, w3]))

        traj = target.propagate(x0, J, horizon=300.0, dt=0.1)
        worst = 0.0
        for t in [30.0, 120.0, 225.0, 300.0]:
            R_num = quat.rot_matrix(traj.sample(t).q)
            R_ana = Rz(phi_dot * t) @ Rx(theta) @ Rz(psi0 + psi_dot * t)
            # rotation angle of the discrepancy
            cos_err = 0.5 * (np.trace(R_ana.T @ R_num) - 1.0)
            worst = max(worst, np.arccos(np.clip(cos_err, -1, 1)))
        assert worst <= 1e-6

    def test_energy_and_momentum_conserved(self):
        rng = np.random.default_rng(1)
        w0 = rng.normal(size=3)
        w0 *= np.deg2rad(10.0) / np.linalg.norm(w0)
        x0 = target.TargetState(target.sample_random_tumble(rng).q, w0)
        traj = target.propagate(x0, J_CLIENT, horizon=300.0, dt=1.0)
        e0 = target.kinetic_energy(w0, J_CLIENT)
        h0 = target.momentum_magnitude(w0, J_CLIENT)
        for w in traj.omegas:
            assert abs(target.kinetic_energy(w, J_CLIENT) - e0) / e0 <= 1e-6
            assert abs(target.momentum_magnitude(w, J_CLIENT) - h0) / h0 <= 1e-6


class TestSample:
    def test_nodes_reproduced_exactly(self):
        rng = np.random.default_rng(2)
        x0 = target.sample_random_tumble(rng)
        traj = target.propagate(x0, J_CLIENT, horizon=30.0, dt=1.0)
        for k in [0, 7, 30]:
            s = traj.sample(k * 1.0)
            assert np.array_equal(s.q, traj.qs[k])
            assert np.array_equal(s.omega, traj.omegas[k])

    def test_static_target_sample_anywhere(self):
        x0 = target.TargetState(np.array([0.0, 1.0, 0.0, 0.0]), np.zeros(3))
        traj = target.propagate(x0, J_CLIENT, horizon=20.0, dt=1.0)
        for t in [0.0, 3.3, 11.71, 20.0]:
            assert np.abs(np.abs(np.dot(traj.sample(t).q, x0.q)) - 1.0) <= 1e-12

    def test_interpolation_against_fine_repropagation(self):
        rng = np.random.default_rng(3)
        w0 = rng.normal(size=3)
        w0 *= np.deg2rad(10.0) / np.linalg.norm(w0)
        x0 = target.TargetState(target.sample_random_tumble(rng).q, w0)
        coarse = target.propagate(x0, J_CLIENT, horizon=60.0, dt=1.0)
        fine = target.propagate(x0, J_CLIENT, horizon=60.0, dt=0.001)
        for t in [5.5, 17.25, 42.75, 59.5]:
            q_i = coarse.sample(t).q
            q_ref = fine.sample(t).q
            assert quat.rotation_angle(q_i, q_ref) <= 1e-4

    def test_out_of_range_rejected(self):
        traj = target.propagate(target.TargetState(quat.qeye(), np.zeros(3)),
                                J_CLIENT, horizon=10.0, dt=1.0)
        with pytest.raises(ValueError):
            traj.sample(-0.5)
        with pytest.raises(ValueError):
            traj.sample(10.5)


class TestRandomTumble:
    def test_deterministic_for_fixed_seed(self):
        a = target.sample_random_tumble(np.random.default_rng(99))
        b = target.sample_random_tumble(np.random.default_rng(99))
        assert np.array_equal(a.q, b.q)
        assert np.array_equal(a.omega, b.omega)

    def test_rate_bounded(self):
        rng = np.random.default_rng(4)
        cap = np.deg2rad(10.0)
        for _ in range(500):
            s = target.sample_random_tumble(rng, cap)
            assert np.linalg.norm(s.omega) <= cap

    def test_attitude_uniformity_statistic(self):
        # for q uniform on S^3, E[q_s q_vi] = 0 with Var = 1/24 per sample
        rng = np.random.default_rng(5)
        n = 10_000
        prods = np.empty((n, 3))
        for i in range(n):
            q = target.sample_random_tumble(rng).q
            prods[i] = q[0] * q[1:]
        sigma_mean = np.sqrt(1.0 / 24.0 / n)
        assert np.abs(prods.mean(axis=0)).max() <= 3.0 * sigma_mean


def test_csv_export(tmp_path):
    x0 = target.TargetState(quat.qeye(), np.array([0.0, 0.0, 0.1]))
    traj = target.propagate(x0, J_CLIENT, horizon=5.0, dt=1.0)
    path = tmp_path / "tumble.csv"
    traj.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "t,qs,qx,qy,qz,wx,wy,wz"
    assert len(lines) == 7
