import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ircg import (
    BilevelProblem,
    DimensionMismatch,
    NonFiniteValue,
    check_gradients,
    eval_phi,
    grad_phi,
    gen_synthetic_completion,
    make_ball_quadratic,
    make_least_norm,
    make_matrix_completion,
)


def scalar_problem():
    # f(x) = x, g(x) = x^2 on [-1, 1]
    return BilevelProblem(
        name="scalar",
        shape=(1,),
        eval_f=lambda x: float(x[0]),
        grad_f=lambda x: np.ones(1),
        eval_g=lambda x: float(x[0] ** 2),
        grad_g=lambda x: 2.0 * x,
        lmo=lambda d: -np.sign(d),
        L_f=1.0,
        L_g=2.0,
        diameter_D=2.0,
        x0=np.zeros(1),
        sample_interior=lambda rng: rng.uniform(-0.9, 0.9, size=1),
    )


@pytest.fixture(scope="module")
def shipped_instances():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((4, 9))
    b = A @ rng.standard_normal(9)
    obs = gen_synthetic_completion(12, 9, rank=2, density=0.5, seed=1, nuclear_scale=2.7)
    return [
        make_least_norm(A, b),
        make_ball_quadratic(np.eye(3), np.zeros(3), np.array([0.4, -0.1, 0.2])),
        make_matrix_completion(obs, 3.0),
    ]


class TestEvalPhi:
    def test_linear_plus_quadratic(self):
        prob = scalar_problem()
        assert eval_phi(prob, 1.0, np.array([2.0])) == pytest.approx(6.0)

    def test_sigma_zero_rejected(self):
        with pytest.raises(ValueError):
            eval_phi(scalar_problem(), 0.0, np.array([1.0]))

    def test_half_squared_objectives(self):
        prob = make_least_norm(np.array([[1.0, 1.0]]), np.array([1.0]), radius=2.0)
        assert eval_phi(prob, 0.5, np.array([1.0, 0.0])) == pytest.approx(0.25)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            eval_phi(scalar_problem(), 1.0, np.array([1.0, 2.0]))

    def test_non_finite_point(self):
        with pytest.raises(NonFiniteValue):
            eval_phi(scalar_problem(), 1.0, np.array([np.nan]))

    @settings(max_examples=50, deadline=None)
    @given(st.floats(1e-6, 10.0), st.floats(-3.0, 3.0))
    def test_linearity_in_sigma(self, sigma, x0):
        prob = scalar_problem()
        x = np.array([x0])
        expected = sigma * prob.eval_f(x) + prob.eval_g(x)
        assert eval_phi(prob, sigma, x) == expected


class TestGradPhi:
    def test_linear_plus_quadratic(self):
        got = grad_phi(scalar_problem(), 1.0, np.array([2.0]))
        assert got == pytest.approx([5.0])

    def test_zero_gradients(self):
        prob = BilevelProblem(
            name="flat", shape=(2,),
            eval_f=lambda x: 1.0, grad_f=lambda x: np.zeros(2),
            eval_g=lambda x: 2.0, grad_g=lambda x: np.zeros(2),
            lmo=lambda d: np.zeros(2),
            L_f=1.0, L_g=1.0, diameter_D=1.0, x0=np.zeros(2),
        )
        assert np.array_equal(grad_phi(prob, 3.7, np.zeros(2)), np.zeros(2))

    def test_against_hand_derivative(self):
        prob = make_least_norm(np.array([[1.0, 1.0]]), np.array([1.0]), radius=2.0)
        got = grad_phi(prob, 0.5, np.array([1.0, 0.0]))
        # 0.5 * x + A^T(Ax - b); at (1,0): 0.5*(1,0) + (0,0)
        assert got == pytest.approx([0.5, 0.0])


class TestCheckGradients:
    def test_quadratic_matches_tightly(self):
        prob = make_ball_quadratic(np.eye(2), np.zeros(2), np.array([0.3, 0.1]))
        report = check_gradients(prob, samples=10, h=1e-5, seed=0)
        assert max(report.max_rel_err_f, report.max_rel_err_g) <= 1e-5

    def test_linear_outer_exact(self):
        report = check_gradients(scalar_problem(), samples=5, h=1e-3, seed=1)
        assert report.max_rel_err_f <= 1e-9

    def test_completion_objectives(self):
        obs = gen_synthetic_completion(10, 8, rank=2, density=0.4, seed=3)
        prob = make_matrix_completion(obs, 2.0)
        report = check_gradients(prob, samples=5, h=1e-5, seed=2)
        assert max(report.max_rel_err_f, report.max_rel_err_g) <= 1e-5

    def test_bad_gradient_detected(self):
        prob = scalar_problem()
        broken = BilevelProblem(
            name="broken", shape=(1,),
            eval_f=prob.eval_f, grad_f=lambda x: 2.0 * np.ones(1),
            eval_g=prob.eval_g, grad_g=prob.grad_g,
            lmo=prob.lmo, L_f=1.0, L_g=2.0, diameter_D=2.0,
            x0=np.zeros(1), sample_interior=prob.sample_interior,
        )
        report = check_gradients(broken, samples=3, h=1e-6, seed=0)
        assert report.max_rel_err_f > 0.3


class TestShippedInstanceContracts:
    def test_gradient_consistency(self, shipped_instances):
        for prob in shipped_instances:
            report = check_gradients(prob, samples=25, h=1e-6, seed=11)
            assert max(report.max_rel_err_f, report.max_rel_err_g) <= 1e-4, prob.name

    def test_lmo_feasibility(self, shipped_instances):
        rng = np.random.default_rng(5)
        for prob in shipped_instances:
            for _ in range(100):
                d = rng.standard_normal(prob.shape)
                assert prob.membership(prob.lmo(d)), prob.name

    def test_x0_feasible(self, shipped_instances):
        for prob in shipped_instances:
            assert prob.membership(prob.x0), prob.name
