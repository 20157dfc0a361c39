import math

import numpy as np
import pytest

from tumblecap import conic, relmotion


class TestConstruction:
    def test_cone_index_reuse_rejected(self):
        prog = conic.ConicProgram()
        x = prog.add_vars(4)
        prog.add_soc(x[0], x[1:3])
        with pytest.raises(ValueError):
            prog.add_nonneg([x[1]])
        with pytest.raises(ValueError):
            prog.add_soc(x[3], [x[0]])

    def test_nonfinite_coefficients_rejected(self):
        prog = conic.ConicProgram()
        x = prog.add_vars(2)
        with pytest.raises(ValueError):
            prog.add_eq(x, [1.0, np.nan], 0.0)
        with pytest.raises(ValueError):
            prog.add_objective(x[0], math.inf)


class TestSoc:
    def test_head_fixed_to_zero_forces_tail_zero(self):
        prog = conic.ConicProgram()
        x = prog.add_vars(3)
        prog.add_soc(x[0], x[1:])
        prog.add_eq([x[0]], [1.0], 0.0)
        prog.add_objective(x[1], -1.0)  # try to push tail up
        out = conic.solve(prog)
        assert out.status == "optimal"
        assert np.abs(out.x).max() <= 1e-7

    def test_two_dim_tail_maximize_component(self):
        prog = conic.ConicProgram()
        x = prog.add_vars(3)
        prog.add_soc(x[0], x[1:])
        prog.add_eq([x[0]], [1.0], 1.0)
        prog.add_objective(x[1], -1.0)
        out = conic.solve(prog)
        assert out.status == "optimal"
        assert np.allclose(out.x, [1.0, 1.0, 0.0], atol=1e-7)

    def test_empty_tail_is_nonnegativity(self):
        prog = conic.ConicProgram()
        x = prog.add_vars(1)
        prog.add_soc(x[0], [])
        prog.add_objective(x[0], 1.0)
        out = conic.solve(prog)
        assert out.status == "optimal"
        assert abs(out.x[0]) <= 1e-8


class TestL1Epigraph:
    def test_free_control_collapses_to_zero(self):
        prog = conic.ConicProgram()
        u = prog.add_vars(3)
        conic.l1_epigraph(prog, [u])
        out = conic.solve(prog)
        assert out.status == "optimal"
        assert abs(out.objective) <= 1e-8
        assert np.abs(out.x[u]).max() <= 1e-7

    def test_fixed_control_gives_l1_norm(self):
        prog = conic.ConicProgram()
        u = prog.add_vars(3)
        for i, v in enumerate([3.0, -4.0, 0.0]):
            prog.add_eq([u[i]], [1.0], v)
        conic.l1_epigraph(prog, [u])
        out = conic.solve(prog)
        assert out.status == "optimal"
        assert abs(out.objective - 7.0) <= 1e-7

    def test_single_step_reachability_against_grid_oracle(self):
        # reach a radial/along-track position target in one step, minimum L1
        ctx = relmotion.OrbitContext(a=7.738e6, m_c=1.0)
        A, B = relmotion.cw_continuous(ctx)
        dyn = relmotion.discretize(A, B, 1.0)
        rng = np.random.default_rng(11)
        x0 = rng.uniform(-5, 5, size=6)
        u_star = rng.uniform(-2, 2, size=3)
        M = dyn.B_d[:2, :]
        d = M @ u_star

        prog = conic.ConicProgram()
        u = prog.add_vars(3)
        conic.l1_epigraph(prog, [u])
        for i in range(2):
            prog.add_eq(u, M[i], d[i])
        out = conic.solve(prog)
        assert out.status == "optimal"

        # oracle: scan the 1-D feasible manifold u = u_p + tau * w exhaustively
        u_p, *_ = np.linalg.lstsq(M, d, rcond=None)
        w = np.linalg.svd(M)[2][-1]
        taus = np.linspace(-10.0, 10.0, 200001)
        costs = np.abs(u_p[None, :] + taus[:, None] * w[None, :]).sum(axis=1)
        best = costs.min()
        lo = taus[max(costs.argmin() - 2, 0)]
        hi = taus[min(costs.argmin() + 2, len(taus) - 1)]
        taus = np.linspace(lo, hi, 20001)
        costs = np.abs(u_p[None, :] + taus[:, None] * w[None, :]).sum(axis=1)
        best = min(best, costs.min())
        assert abs(out.objective - best) <= 1e-4


class TestSolve:
    def test_contradictory_equalities_infeasible(self):
        prog = conic.ConicProgram()
        x = prog.add_vars(1)
        prog.add_eq([x[0]], [1.0], 0.0)
        prog.add_eq([x[0]], [1.0], 1.0)
        assert conic.solve(prog).status == "infeasible"

    def test_simple_bound_minimum(self):
        prog = conic.ConicProgram()
        x = prog.add_vars(1, lb=3.0)
        prog.add_objective(x[0], 1.0)
        out = conic.solve(prog)
        assert out.status == "optimal"
        assert abs(out.objective - 3.0) <= 1e-7

    def test_unbounded_detected(self):
        prog = conic.ConicProgram()
        x = prog.add_vars(1)
        prog.add_objective(x[0], 1.0)
        assert conic.solve(prog).status == "unbounded"

    def test_deterministic(self):
        def build():
            prog = conic.ConicProgram()
            x = prog.add_vars(4, lb=-10.0, ub=10.0)
            prog.add_soc(x[0], x[1:3])
            prog.add_eq(x[:2], [1.0, 2.0], 3.0)
            prog.add_objective(x, [1.0, -1.0, 0.5, 0.0])
            return prog
        a = conic.solve(build())
        b = conic.solve(build())
        assert np.array_equal(a.x, b.x)


class TestDumpRoundTrip:
    def test_round_trip_identity(self):
        prog = conic.ConicProgram()
        x = prog.add_vars(6, lb=0.0)
        y = prog.add_vars(3)
        prog.set_bounds(int(y[0]), -1.5, 2.5)
        prog.add_eq(x[:3], [1.0, -2.0, 0.25], 4.0)
        prog.add_eq([x[3], y[1]], [1.0, 1.0], -1.0)
        prog.add_soc(y[0], y[1:])
        prog.add_nonneg(x[4:6])
        prog.add_objective([x[0], y[2]], [3.0, -0.125])
        text = prog.dump()
        again = conic.ConicProgram.parse(text)
        assert again.dump() == text
        # and the two programs solve identically
        s1, s2 = conic.solve(prog), conic.solve(again)
        assert s1.status == s2.status
        if s1.status == "optimal":
            assert np.allclose(s1.x, s2.x)

    def test_parse_error_carries_line_number(self):
        with pytest.raises(ValueError, match="line 3"):
            conic.ConicProgram.parse("socp 1\nnvars 2\nbogus 1 2\nend\n")
