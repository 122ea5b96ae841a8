import numpy as np
import pytest

from ircg import (
    BiSGParams,
    CGBiOParams,
    IRPGParams,
    MissingProjection,
    bisg_step,
    cgbio_step,
    cgbio_warm_start,
    initial_baseline_state,
    irpg_step,
    make_least_norm,
    run_baseline,
)
from ircg.baselines import BaselineState
from tests.test_solver import interval_problem


def no_proj_problem():
    prob = interval_problem()
    from dataclasses import replace

    return replace(prob, proj=None)


class TestIrpgStep:
    def test_plain_projected_gradient(self):
        # f = 0 via sigma ~ 0 is not expressible; use the interval problem
        # with the step built so alpha = 0.25 and a negligible outer weight
        prob = interval_problem()
        params = IRPGParams(varsigma=1e-12, theta=0.5, alpha_bar=0.25, eta=0.0)
        state = BaselineState(t=0, x=np.array([0.5]))
        out = irpg_step(state, prob, params)
        assert out.x == pytest.approx([0.25], abs=1e-9)

    def test_projection_clips(self):
        prob = interval_problem()
        params = IRPGParams(varsigma=1e-12, theta=0.5, alpha_bar=2.0, eta=0.0)
        state = BaselineState(t=0, x=np.array([0.5]))
        out = irpg_step(state, prob, params)
        assert out.x == pytest.approx([-1.0])

    def test_fixed_point_at_flat_gradient(self):
        # at the inner optimum of g = x^2 with tiny outer weight the step stalls
        prob = interval_problem()
        params = IRPGParams(varsigma=1e-14, theta=0.5, alpha_bar=0.5, eta=0.5)
        state = BaselineState(t=3, x=np.array([0.0]))
        out = irpg_step(state, prob, params)
        assert abs(float(out.x[0])) <= 1e-12

    def test_requires_projection(self):
        with pytest.raises(MissingProjection):
            irpg_step(BaselineState(0, np.array([0.0])), no_proj_problem(), IRPGParams())

    def test_step_and_weight_schedules(self):
        params = IRPGParams(varsigma=0.05, theta=0.5, alpha_bar=0.5, eta=0.5)
        assert params.sigma(0) == pytest.approx(0.05)
        assert params.sigma(3) == pytest.approx(0.025)
        assert params.alpha(3) == pytest.approx(0.25)


class TestCgbioStep:
    def test_cut_parameters_forwarded(self):
        prob = interval_problem()
        captured = {}

        def oracle(c, a, b):
            captured["c"], captured["a"], captured["b"] = c, a, b
            return np.array([-1.0])

        state = BaselineState(t=0, x=np.array([0.5]), aux={"g_warm": 0.25})
        cgbio_step(state, prob, CGBiOParams(), snb_oracle=oracle)
        # c = grad f(x) = x + 1, a = grad g(x) = 2x,
        # b = <a, x> + g_warm - g(x) = 0.5 + 0.25 - 0.25
        assert captured["c"] == pytest.approx([1.5])
        assert captured["a"] == pytest.approx([1.0])
        assert captured["b"] == pytest.approx(0.5)

    def test_cut_feasible_at_warm_start(self):
        prob = interval_problem()
        x = np.array([0.5])
        g_warm = float(prob.eval_g(x))
        a = prob.grad_g(x)
        b = float(a @ x) + g_warm - float(prob.eval_g(x))
        assert float(a @ x) <= b + 1e-15  # v = x_t satisfies the cut

    def test_interval_cut_selects_negative_end(self):
        # cut 1*(v - 0.5) <= 0 keeps [-1, 0.5]; outer gradient picks -1
        prob = interval_problem()
        state = BaselineState(t=0, x=np.array([0.5]), aux={"g_warm": 0.25})

        def interval_sliced(c, a, b):
            lo, hi = -1.0, 1.0
            if a[0] > 0:
                hi = min(hi, b / a[0])
            elif a[0] < 0:
                lo = max(lo, b / a[0])
            return np.array([lo if c[0] > 0 else hi])

        out = cgbio_step(state, prob, CGBiOParams(), snb_oracle=interval_sliced)
        # alpha_0 = 1 jumps to the oracle point
        assert out.x == pytest.approx([-1.0])

    def test_warm_start_quality(self):
        rng = np.random.default_rng(1)
        A = rng.standard_normal((3, 6))
        prob = make_least_norm(A, A @ rng.standard_normal(6))
        x0p, g_warm, gap = cgbio_warm_start(prob, CGBiOParams(eps_g=2e-3, warm_max_iters=400_000))
        assert gap <= 1e-3  # eps_g / 2
        assert g_warm <= prob.metadata.g_opt + gap + 1e-12


class TestBisgStep:
    def test_reduces_to_inner_projected_gradient(self):
        # outer term vanishes when f's gradient is zero at the post-step point
        prob = interval_problem()
        params = BiSGParams(alpha_exp=0.99, c=0.25)
        state = BaselineState(t=10**9, x=np.array([0.5]))
        out = bisg_step(state, prob, params)
        # inner step: 0.5 - 0.25 * 2 * 0.5 = 0.25; outer step is ~1e-9 scale
        assert out.x == pytest.approx([0.25], abs=1e-6)

    def test_outer_step_moves_at_inner_optimum(self):
        prob = interval_problem()
        params = BiSGParams(alpha_exp=0.6, c=1.0)
        state = BaselineState(t=0, x=np.array([0.0]))
        out = bisg_step(state, prob, params)
        # grad g(0) = 0; outer pulls toward lower f by c * 1^-0.6 * grad f(0)
        assert out.x == pytest.approx([-1.0])

    def test_outer_step_vanishes_with_exponent_near_one(self):
        prob = interval_problem()
        big_t = BaselineState(t=10**6, x=np.array([0.0]))
        near_one = bisg_step(big_t, prob, BiSGParams(alpha_exp=0.99, c=1.0))
        mid = bisg_step(big_t, prob, BiSGParams(alpha_exp=0.6, c=1.0))
        assert abs(float(near_one.x[0])) < abs(float(mid.x[0]))

    def test_requires_projection(self):
        with pytest.raises(MissingProjection):
            bisg_step(BaselineState(0, np.array([0.0])), no_proj_problem(), BiSGParams())

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            BiSGParams(alpha_exp=0.4)
        with pytest.raises(ValueError):
            BiSGParams(c=0.0)


@pytest.fixture(scope="module")
def least_norm():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((4, 10))
    return make_least_norm(A, A @ rng.standard_normal(10))


class TestRunBaseline:

    def test_all_baselines_feasible_and_converging(self, least_norm):
        prob = least_norm
        r = prob.diameter_D / 2.0
        # CG-BiO keeps its inner value at the cut-slack level by design, so
        # the smoke bound is on the best value seen within the budget
        for params, iters in ((IRPGParams(varsigma=0.05), 20_000),
                              (BiSGParams(c=min(1.0, 1.0 / prob.L_g)), 20_000),
                              (CGBiOParams(eps_g=1e-2, warm_max_iters=100_000), 3_000)):
            trace = run_baseline(prob, params, max_iters=iters, record_every=200)
            g = trace.column("g_x")
            assert min(g) - prob.metadata.g_opt <= 1e-3, type(params).__name__
            assert np.all(np.isfinite(g))
        # every baseline's iterates stay inside the domain
        for stepper in (
            lambda s: irpg_step(s, prob, IRPGParams(varsigma=0.05)),
            lambda s: bisg_step(s, prob, BiSGParams(c=min(1.0, 1.0 / prob.L_g))),
            lambda s: cgbio_step(s, prob, CGBiOParams()),
        ):
            state = initial_baseline_state(prob)
            state.aux["g_warm"] = float(prob.eval_g(state.x))
            for _ in range(200):
                state = stepper(state)
                assert np.linalg.norm(state.x) <= r + 1e-8

    def test_trace_shape(self, least_norm):
        trace = run_baseline(least_norm, IRPGParams(), max_iters=10)
        assert trace.header["solver"] == "irpg"
        assert trace.rows[0][0] == 0 and trace.rows[-1][0] == 10
        assert trace.rows[1][4] is None and trace.rows[1][5] is None  # no averaged columns
