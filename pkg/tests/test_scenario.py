import numpy as np
import pytest

from tumblecap import scenario


class TestRoundTrip:
    def test_toml_round_trip_preserves_scenario(self, tmp_path):
        s = scenario.default_scenario(seed=42)
        path = tmp_path / "scenario.toml"
        path.write_text(scenario.scenario_to_toml(s))
        again = scenario.load_scenario(path)
        assert np.array_equal(again.x0.r, s.x0.r)
        assert np.array_equal(again.x0.v, s.x0.v)
        assert np.array_equal(again.target0.q, s.target0.q)
        assert np.array_equal(again.target0.omega, s.target0.omega)
        assert np.array_equal(again.J, s.J)
        assert np.array_equal(again.geometry.chaser.A, s.geometry.chaser.A)
        assert np.array_equal(again.geometry.chaser.b, s.geometry.chaser.b)
        assert again.limits == s.limits
        assert again.tolerances == s.tolerances
        assert again.docking == s.docking
        assert again.scp == s.scp
        assert again.disc == s.disc


class TestDefaults:
    def test_table_defaults(self):
        s = scenario.default_scenario(seed=1)
        assert s.ctx.a == 7.738e6
        assert s.ctx.m_c == 1500.0
        assert s.limits.u_max == 100.0
        assert s.limits.v_max == 1.5
        assert s.limits.omega_max == 0.2
        assert s.limits.r_max == 100.0
        assert s.tolerances.eps_p == 0.35
        assert s.tolerances.eps_v == 0.03
        assert s.docking.n_dock == 5
        assert abs(s.docking.theta_dock - np.deg2rad(30.0)) <= 1e-15
        assert s.scp.alpha_min == 1.3
        assert s.scp.psi == 750.0
        assert s.scp.gamma == 5.0
        assert s.scp.i_max == 15
        assert s.disc.dt == 1.0
        assert np.array_equal(s.geometry.d_c, [0.0, 0.0, 2.7])
        assert np.array_equal(s.geometry.d_t, [0.0, 0.0, 2.7])

    def test_sampled_orbit_within_table_ranges(self):
        for seed in range(5):
            s = scenario.default_scenario(seed=seed)
            a0 = np.sqrt((s.x0.v[0] / s.ctx.n) ** 2 + s.x0.r[0] ** 2)
            b0 = np.sqrt((s.x0.v[2] / s.ctx.n) ** 2 + s.x0.r[2] ** 2)
            assert 15.0 <= a0 <= 25.0
            assert 10.0 <= b0 <= 25.0


class TestValidation:
    def test_missing_initial_state_rejected(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("[orbit]\na = 7.0e6\n")
        with pytest.raises(ValueError, match="initial_state"):
            scenario.load_scenario(path)

    def test_unknown_fov_form_rejected(self, tmp_path):
        s = scenario.default_scenario(seed=1)
        text = scenario.scenario_to_toml(s).replace('fov_form = "corrected"',
                                                    'fov_form = "bogus"')
        path = tmp_path / "bad.toml"
        path.write_text(text)
        with pytest.raises(ValueError, match="fov_form"):
            scenario.load_scenario(path)

    def test_box_shorthand(self, tmp_path):
        s = scenario.default_scenario(seed=1)
        text = scenario.scenario_to_toml(s)
        # replace explicit rows with the box shorthand
        lines = [l for l in text.splitlines()
                 if not l.startswith(("chaser_A", "chaser_b", "target_A", "target_b"))]
        idx = lines.index("[geometry]") + 1
        lines[idx:idx] = ["chaser_box = [1.0, 1.0, 1.5]", "target_box = [1.0, 1.0, 1.0]"]
        path = tmp_path / "box.toml"
        path.write_text("\n".join(lines))
        again = scenario.load_scenario(path)
        assert np.allclose(again.geometry.chaser.b, [1.0, 1.0, 1.5, 1.0, 1.0, 1.5])
