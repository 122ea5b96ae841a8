import math

import numpy as np
import pytest

from ircg import (
    InfeasibleOracle,
    OracleMatrixProblem,
    ZeroMatrix,
    lmo_nuclear,
    nb_blo,
    nuclear_norm,
    project_nuclear,
    snb_lo,
)
from ircg.numerics import brent_min, sigma_max


class TestLmoNuclear:
    def test_diagonal(self):
        V = lmo_nuclear(np.diag([2.0, 1.0]), 1.0)
        assert np.allclose(V, np.diag([-1.0, 0.0]), atol=1e-12)
        assert float(np.vdot(np.diag([2.0, 1.0]), V)) == pytest.approx(-2.0)

    def test_offdiagonal_scaled(self):
        C = np.array([[0.0, 3.0], [0.0, 0.0]])
        V = lmo_nuclear(C, 2.0)
        assert np.allclose(V, [[0.0, -2.0], [0.0, 0.0]], atol=1e-12)
        assert float(np.vdot(C, V)) == pytest.approx(-6.0)

    def test_zero_cost_returns_zero(self):
        assert np.array_equal(lmo_nuclear(np.zeros((4, 3)), 7.0), np.zeros((4, 3)))

    @pytest.mark.parametrize("shape", [(6, 5), (40, 30)])
    def test_objective_matches_dense_svd(self, shape):
        rng = np.random.default_rng(sum(shape))
        for _ in range(50):
            C = rng.standard_normal(shape)
            delta = 0.5 + rng.random()
            V = lmo_nuclear(C, delta)
            target = -delta * float(np.linalg.svd(C, compute_uv=False)[0])
            assert abs(float(np.vdot(C, V)) - target) <= 1e-8 * abs(target)
            # minimizers of a nonzero linear form sit on the boundary
            assert abs(nuclear_norm(V) - delta) <= 1e-8


class TestNbBlo:
    def test_tie_break_picks_secondary_minimizer(self):
        V = nb_blo(np.eye(2), np.diag([1.0, 2.0]), 1.0, rel_gap_tol=1e-6)
        assert np.allclose(V, np.diag([0.0, -1.0]), atol=1e-10)
        assert float(np.vdot(np.diag([1.0, 2.0]), V)) == pytest.approx(-2.0)

    def test_unique_leading_direction_ignores_secondary(self):
        rng = np.random.default_rng(0)
        for _ in range(5):
            Q = rng.standard_normal((2, 2))
            V = nb_blo(np.diag([4.0, 1.0]), Q, 1.0)
            assert np.allclose(V, np.diag([-1.0, 0.0]), atol=1e-10)

    def test_sign_indefinite_leading_block(self):
        V = nb_blo(np.diag([1.0, -1.0]), np.diag([1.0, 0.0]), 1.0, rel_gap_tol=1e-6)
        assert np.allclose(V, np.diag([-1.0, 0.0]), atol=1e-10)

    def test_zero_matrix_raises(self):
        with pytest.raises(ZeroMatrix):
            nb_blo(np.zeros((3, 3)), np.eye(3), 1.0)

    def test_matches_rank_one_enumeration(self):
        # brute force over the rank-one family built from the leading subspace
        rng = np.random.default_rng(42)
        for _ in range(20):
            Q = rng.standard_normal((3, 3))
            P = np.diag([2.0, 2.0, 0.5])  # two-dimensional leading block
            delta = 1.3
            V = nb_blo(P, Q, delta, rel_gap_tol=1e-9)
            got = float(np.vdot(Q, V))
            best = np.inf
            for theta in np.linspace(0.0, np.pi, 20001):
                v = np.array([np.cos(theta), np.sin(theta), 0.0])
                cand = -(delta / 2.0) * np.outer(P @ v, v)
                best = min(best, float(np.vdot(Q, cand)))
            assert got <= best + 1e-6
            assert abs(float(np.vdot(P, V)) + delta * 2.0) <= 1e-8


class TestSnbLo:
    def test_vacuous_constraint_reduces_to_ball_oracle(self):
        sol = snb_lo(OracleMatrixProblem(np.diag([2.0, 1.0]), np.zeros((2, 2)), 0.0, 1.0))
        assert sol.lambda_star == 0.0
        assert np.allclose(sol.V, np.diag([-1.0, 0.0]), atol=1e-10)
        assert sol.primal_value == pytest.approx(-2.0)
        assert sol.dual_value == pytest.approx(-2.0)
        assert sol.certified

    def test_boundary_branch(self):
        sol = snb_lo(OracleMatrixProblem(np.diag([1.0, 2.0]), np.eye(2), -1.0, 1.0))
        assert np.allclose(sol.V, np.diag([0.0, -1.0]), atol=1e-10)
        assert sol.primal_value == pytest.approx(-2.0)
        assert math.isinf(sol.lambda_star)
        assert float(np.vdot(np.eye(2), sol.V)) <= -1.0 + 1e-8

    def test_inactive_multiplier(self):
        sol = snb_lo(OracleMatrixProblem(np.diag([2.0, 1.0]), np.diag([1.0, 0.0]), -0.5, 1.0))
        assert sol.lambda_star == pytest.approx(0.0, abs=1e-9)
        assert np.allclose(sol.V, np.diag([-1.0, 0.0]), atol=1e-9)
        assert sol.primal_value == pytest.approx(-2.0)
        assert float(np.vdot(np.diag([1.0, 0.0]), sol.V)) <= -0.5 + 1e-8

    def test_infeasible_rejected(self):
        with pytest.raises(InfeasibleOracle):
            snb_lo(OracleMatrixProblem(np.eye(2), np.eye(2), -5.0, 1.0))

    def test_random_instances_certified(self):
        rng = np.random.default_rng(77)
        for _ in range(200):
            C = rng.standard_normal((6, 5))
            A = rng.standard_normal((6, 5))
            delta = 1.0 + rng.random()
            sA = float(np.linalg.svd(A, compute_uv=False)[0])
            b = -delta * sA + rng.random() * 2.0 * delta * sA
            sol = snb_lo(OracleMatrixProblem(C, A, b, delta))
            assert sol.certified
            assert abs(sol.primal_value - sol.dual_value) <= 1e-6 * (1.0 + abs(sol.dual_value))
            assert float(np.vdot(A, sol.V)) <= b + 1e-8
            assert nuclear_norm(sol.V) <= delta + 1e-8

    def test_literal_mode_skips_blend(self):
        # dual minimizer at the singular-value crossing of C + lam*A
        # (lam* = 1/2): the leading space is two-dimensional there, the bare
        # tie-break leaves constraint slack and a real duality gap, and the
        # blend closes both
        C = np.diag([2.0, 1.0])
        A = np.diag([-1.0, 1.0])
        delta, b = 1.0, -0.3
        literal = snb_lo(OracleMatrixProblem(C, A, b, delta), correction=False)
        fixed = snb_lo(OracleMatrixProblem(C, A, b, delta), correction=True)
        assert literal.lambda_star == pytest.approx(0.5, abs=1e-9)
        assert float(np.vdot(A, literal.V)) <= b + 1e-8  # feasible but slack
        assert not literal.certified
        assert abs(literal.primal_value - literal.dual_value) == pytest.approx(0.35, abs=1e-6)
        assert fixed.certified
        assert abs(float(np.vdot(A, fixed.V)) - b) <= 1e-8
        assert abs(fixed.primal_value - fixed.dual_value) <= 1e-8
        assert fixed.primal_value == pytest.approx(-1.35, abs=1e-8)

    def test_interval_bound_contains_minimizer(self):
        rng = np.random.default_rng(5)
        for _ in range(40):
            C = rng.standard_normal((6, 5))
            A = rng.standard_normal((6, 5))
            delta = 1.0 + rng.random()
            sA = float(np.linalg.svd(A, compute_uv=False)[0])
            b = -delta * sA + rng.random() * 2.0 * delta * sA
            hi = 2.0 * delta * sigma_max(C) / (b + delta * sA)
            psi = lambda lam: delta * sigma_max(C + lam * A) + b * lam
            _, v1 = brent_min(psi, 0.0, hi, tol=1e-11, cap=300)
            _, v4 = brent_min(psi, 0.0, 4.0 * hi, tol=1e-11, cap=300)
            assert v1 - v4 <= 1e-9


class TestProjectNuclear:
    def test_diagonal_projection(self):
        got = project_nuclear(np.diag([3.0, 1.0]), 2.0)
        assert np.allclose(got, np.diag([2.0, 0.0]), atol=1e-10)

    def test_inside_ball_unchanged(self):
        X = 0.1 * np.array([[1.0, 2.0], [3.0, 4.0]])
        assert np.array_equal(project_nuclear(X, 5.0), X)

    def test_rank_one_rescaled(self):
        rng = np.random.default_rng(1)
        u = rng.standard_normal(6)
        v = rng.standard_normal(4)
        u /= np.linalg.norm(u)
        v /= np.linalg.norm(v)
        got = project_nuclear(5.0 * np.outer(u, v), 1.0)
        assert np.allclose(got, np.outer(u, v), atol=1e-10)

    def test_variational_inequality_and_nonexpansive(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            X = rng.standard_normal((6, 5)) * 2.0
            Y = rng.standard_normal((6, 5)) * 2.0
            delta = 0.5 + rng.random()
            PX, PY = project_nuclear(X, delta), project_nuclear(Y, delta)
            Z = rng.standard_normal((6, 5))
            Z *= rng.random() * delta / nuclear_norm(Z)
            assert float(np.vdot(X - PX, Z - PX)) <= 1e-8
            assert np.linalg.norm(PX - PY) <= np.linalg.norm(X - Y) + 1e-12
