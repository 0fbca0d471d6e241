import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import random_feasible_lp, vertex_enumeration
from skmzbf import (DimensionError, FormatError, LinearProgram, LpStatus, solve_bounded, solve_lp,
                    verify_solution)
from skmzbf.lp import dump_lp, load_lp


@pytest.fixture
def corner_lp():
    # min x1 + x2  s.t.  x1 + x2 >= 2,  x1 >= 0.5
    return LinearProgram([1.0, 1.0], [[1.0, 1.0], [1.0, 0.0]], [2.0, 0.5])


class TestSolveLp:
    def test_single_bound(self):
        sol = solve_lp(LinearProgram([1.0], [[1.0]], [1.0]))
        assert sol.status is LpStatus.OPTIMAL
        assert sol.x.tolist() == [1.0]
        assert sol.objective_value == 1.0

    def test_two_variable_corner(self, corner_lp):
        sol = solve_lp(corner_lp)
        ref, _ = vertex_enumeration(corner_lp.c, corner_lp.A, corner_lp.b)
        assert sol.optimal
        assert sol.objective_value == pytest.approx(2.0, abs=1e-12)
        assert sol.objective_value == pytest.approx(ref, abs=1e-12)

    def test_contradictory_bounds(self):
        sol = solve_lp(LinearProgram([1.0], [[1.0], [-1.0]], [1.0, 0.0]))
        assert sol.status is LpStatus.INFEASIBLE

    def test_unbounded(self):
        sol = solve_lp(LinearProgram([-1.0], [[1.0]], [0.0]))
        assert sol.status is LpStatus.UNBOUNDED

    def test_nonzero_lower_bounds(self):
        lp = LinearProgram([1.0, 2.0], [[1.0, 1.0]], [0.0], lower=[-1.0, 0.5])
        sol = solve_lp(lp)
        # x2 sits on its bound 0.5, then x1 = -0.5 makes the row tight
        np.testing.assert_allclose(sol.x, [-0.5, 0.5], atol=1e-12)
        assert sol.objective_value == pytest.approx(0.5, abs=1e-12)
        assert verify_solution(lp, sol).feasible

    def test_iteration_limit(self, rng):
        c, A, b = random_feasible_lp(rng, 8, 10)
        assert solve_lp(LinearProgram(c, A, b), max_iters=1).status is LpStatus.ITER_LIMIT

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            LinearProgram([1.0, 1.0], [[1.0, 1.0]], [1.0, 2.0])

    def test_matches_vertex_enumeration(self, rng):
        for _ in range(100):
            n, m = rng.integers(1, 7, size=2)
            c, A, b = random_feasible_lp(rng, int(n), int(m) + 1)
            ref, _ = vertex_enumeration(c, A, b)
            sol = solve_lp(LinearProgram(c, A, b))
            assert sol.optimal
            assert sol.objective_value == pytest.approx(ref, rel=1e-7, abs=1e-9)

    def test_weak_duality_spot_check(self, rng):
        for _ in range(20):
            c, A, b = random_feasible_lp(rng, 5, 8)
            lp = LinearProgram(c, A, b)
            opt = solve_lp(lp).objective_value
            pts = rng.uniform(0, 10.0 / 5, size=(2000, 5))
            feasible = np.all(pts @ A.T >= b, axis=1)
            assert np.all(pts[feasible] @ c >= opt - 1e-9)

    def test_deterministic(self, rng):
        c, A, b = random_feasible_lp(rng, 10, 12)
        lp = LinearProgram(c, A, b)
        first, second = solve_lp(lp), solve_lp(lp)
        assert first.x.tobytes() == second.x.tobytes()
        assert first.basis == second.basis

    def test_warm_start_keeps_objective(self, rng):
        for _ in range(10):
            c, A, b = random_feasible_lp(rng, 6, 9)
            lp = LinearProgram(c, A, b)
            cold = solve_lp(lp)
            warm = solve_lp(lp, x0=cold.x + rng.uniform(0, 1e-3, size=6))
            assert warm.objective_value == pytest.approx(cold.objective_value, abs=1e-7)

    def test_infeasible_warm_start_is_ignored(self, corner_lp):
        sol = solve_lp(corner_lp, x0=[0.0, 0.0])
        assert sol.objective_value == pytest.approx(2.0)


class TestVerifySolution:
    def test_feasible_point(self, corner_lp):
        assert len(verify_solution(corner_lp, solve_lp(corner_lp), 1e-9)) == 0

    def test_perturbed_active_row(self, corner_lp):
        x = solve_lp(corner_lp).x.copy()
        active = np.flatnonzero(np.abs(corner_lp.A @ x - corner_lp.b) < 1e-12)
        row = int(active[0])
        j = int(np.flatnonzero(corner_lp.A[row])[0])
        x[j] -= 1e-3 / corner_lp.A[row, j]
        report = verify_solution(corner_lp, x, 1e-9)
        assert row in [r for r, _ in report.rows]

    def test_negative_variable_reported(self, corner_lp):
        report = verify_solution(corner_lp, [-1.0, 5.0])
        assert report.bounds == [(0, -1.0)]


class TestSolveBounded:
    @staticmethod
    def as_primal(obj, G, rhs, equality, upper):
        """The same problem as a minimisation in ``A y >= b`` form."""
        rows, rhs_rows = [-G], [-rhs]
        if equality is not None and equality.any():
            rows.append(G[equality])
            rhs_rows.append(rhs[equality])
        finite = np.isfinite(upper)
        rows.append(-np.eye(G.shape[1])[finite])
        rhs_rows.append(-upper[finite])
        return LinearProgram(-obj, np.vstack(rows), np.concatenate(rhs_rows))

    def test_against_primal_solver(self, rng):
        for _ in range(40):
            N, m = int(rng.integers(2, 6)), int(rng.integers(2, 10))
            G = rng.normal(size=(N, m))
            rhs = rng.uniform(0, 2, size=N)
            upper = np.where(rng.random(m) < 0.5, rng.uniform(0.5, 2, size=m), np.inf)
            upper[:] = np.where(np.isfinite(upper), upper, 5.0) if rng.random() < 0.5 else upper
            obj = rng.normal(size=m)
            sol = solve_bounded(obj, G, rhs, upper=upper)
            ref = solve_lp(self.as_primal(obj, G, rhs, None, upper))
            if ref.status is LpStatus.UNBOUNDED:
                assert sol.status is LpStatus.UNBOUNDED
                continue
            assert sol.optimal
            assert sol.objective_value == pytest.approx(-ref.objective_value, abs=1e-8)
            assert np.all(G @ sol.y <= rhs + 1e-9)

    def test_equality_rows_with_zero_rhs(self, rng):
        for _ in range(20):
            N, m = 3, 12
            G = rng.normal(size=(N, m))
            rhs = np.zeros(N)
            eq = np.ones(N, dtype=bool)
            upper = np.ones(m)
            obj = rng.uniform(0, 1, size=m)
            sol = solve_bounded(obj, G, rhs, equality=eq, upper=upper)
            ref = solve_lp(self.as_primal(obj, G, rhs, eq, upper))
            assert sol.optimal
            assert sol.objective_value == pytest.approx(-ref.objective_value, abs=1e-8)
            np.testing.assert_allclose(G @ sol.y, 0.0, atol=1e-9)
            assert np.all((sol.y >= -1e-12) & (sol.y <= 1 + 1e-12))

    def test_multipliers_solve_the_dual(self, rng):
        N, m = 4, 9
        G = np.abs(rng.normal(size=(N, m))) + 0.1
        rhs = np.ones(N)
        obj = np.ones(m)
        sol = solve_bounded(obj, G, rhs)
        assert sol.optimal
        # min rhs.pi  s.t.  G^T pi >= obj, pi >= 0  has the same value
        assert np.all(G.T @ sol.multipliers >= obj - 1e-9)
        assert rhs @ sol.multipliers == pytest.approx(sol.objective_value, abs=1e-9)

    def test_unbounded(self):
        sol = solve_bounded([1.0, 1.0], [[1.0, -1.0]], [1.0])
        assert sol.status is LpStatus.UNBOUNDED


class TestDump:
    def test_round_trip(self, rng):
        c, A, b = random_feasible_lp(rng, 4, 6)
        lp = LinearProgram(c, A, b, lower=rng.normal(size=4))
        back = load_lp(dump_lp(lp))
        for name in ("c", "A", "b", "lower"):
            assert np.array_equal(getattr(back, name), getattr(lp, name))

    def test_missing_operator(self):
        with pytest.raises(FormatError, match="line 2"):
            load_lp("1 1\n1 1 2\n")

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=2),
           st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=2), st.floats(-1e6, 1e6))
    def test_round_trip_property(self, c, row, rhs):
        lp = LinearProgram(c, [row], [rhs])
        back = load_lp(dump_lp(lp))
        assert np.array_equal(back.A, lp.A) and np.array_equal(back.b, lp.b)
