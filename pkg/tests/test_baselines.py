import numpy as np
import numpy.testing as npt
import pytest

from tests.conftest import make_quadratic_problem
from trisplit import (
    CompositeProblem,
    DysParams,
    InputError,
    QuadraticTerm,
    RealVector,
    StoppingRule,
    ZeroProxTerm,
    dys_step,
    run_dys,
)
from tests.test_splitting import convex_l1_problem


class TestDysParams:
    def test_validation(self):
        with pytest.raises(InputError):
            DysParams(gamma=0.0)
        with pytest.raises(InputError):
            DysParams(gamma=0.1, lam=3.0)
        with pytest.raises(InputError):
            DysParams(gamma=0.1, roles=("f1", "f1", "f3"))

    def test_default_roles_put_nonsmooth_in_backward_slot(self):
        p = DysParams(gamma=0.1)
        assert p.roles == ("f2", "f3", "f1")


class TestDysStep:
    def test_one_step_by_hand_in_1d(self):
        # f2 = x^2/2 (prox slot), f3 = 0 (second prox slot), f1 = x^2/2 (gradient slot)
        prob = CompositeProblem(
            f1=QuadraticTerm(matrix=np.eye(1), center=np.zeros(1)),
            f2=QuadraticTerm(matrix=np.eye(1), center=np.zeros(1)),
            f3=ZeroProxTerm(),
            shape=(1,),
        )
        g, lam = 0.25, 1.1
        params = DysParams(gamma=g, lam=lam)
        z = 1.4
        x_f = z / (1 + g)
        x_g = 2 * x_f - z - g * x_f  # identity prox of the zero term
        z_plus, got_f, got_g = dys_step(prob, params, RealVector([z], (1,)))
        assert got_f.data[0] == pytest.approx(x_f, rel=1e-15)
        assert got_g.data[0] == pytest.approx(x_g, rel=1e-15)
        assert z_plus.data[0] == pytest.approx(z + lam * (x_g - x_f), rel=1e-15)

    def test_rejects_gamma_at_or_above_gradient_cap(self):
        prob, _ = convex_l1_problem(d=2, a=1.0, b=2.0)
        # gradient slot holds f1 with L = 1 by default
        with pytest.raises(InputError):
            dys_step(prob, DysParams(gamma=1.0), prob.zeros())

    def test_rejects_nonsmooth_term_in_gradient_slot(self):
        prob, _ = convex_l1_problem(d=2)
        with pytest.raises(InputError):
            dys_step(prob, DysParams(gamma=0.1, roles=("f1", "f2", "f3")), prob.zeros())


class TestRunDys:
    def test_converges_to_analytic_minimizer(self):
        prob, xstar = convex_l1_problem(d=5, seed=21)
        params = DysParams(gamma=0.9 / prob.f1.lipschitz)
        state, trace = run_dys(prob, params, stop=StoppingRule(tol=1e-9, max_iter=50000))
        assert (state.x_g - xstar).norm() < 1e-6
        assert trace[-1].residual < 1e-9

    def test_role_permutations_reach_the_same_point(self):
        prob, xstar = convex_l1_problem(d=4, seed=13, a=1.5, b=0.8)
        stop = StoppingRule(tol=1e-10, max_iter=50000)
        ends = []
        for roles in (("f2", "f3", "f1"), ("f1", "f3", "f2"), ("f3", "f1", "f2")):
            h = dict(f1=prob.f1, f2=prob.f2, f3=prob.f3)[roles[2]]
            params = DysParams(gamma=0.9 / h.lipschitz, roles=roles)
            state, _ = run_dys(prob, params, stop=stop)
            ends.append(state.x_g.data)
            assert (state.x_g - xstar).norm() < 1e-6
        npt.assert_allclose(ends[0], ends[1], atol=1e-6)

    def test_fixed_point_start_returns_empty_trace(self):
        prob, xstar = convex_l1_problem(d=3, seed=30)
        g = 0.3
        params = DysParams(gamma=g)
        # z such that x_f = prox_{g f2}(z) = xstar: z = xstar + g grad f2(xstar)
        z0 = xstar + prob.f2.grad(xstar) * g
        state, trace = run_dys(prob, params, z0=z0)
        assert trace == []
        assert (state.x_g - xstar).norm() < 1e-9

    def test_trace_schema_padding(self):
        prob, _ = convex_l1_problem(d=3, seed=17)
        params = DysParams(gamma=0.3)
        _, trace = run_dys(prob, params, stop=StoppingRule(tol=1e-8, max_iter=10))
        for r in trace:
            assert r.envelope is None
            assert r.dz2 == 0.0 and r.dx2 == 0.0 and r.gap32 == 0.0
            assert r.gamma == 0.3

    def test_convex_gap_is_nonincreasing(self, rng):
        # for a fully convex triple the fixed-point map is averaged, so the
        # per-step gap ||x_g - x_f|| cannot grow
        prob = make_quadratic_problem(rng, d=6, f3="l1")
        params = DysParams(gamma=0.5 / prob.f1.lipschitz)
        _, trace = run_dys(prob, params, stop=StoppingRule(tol=1e-12, max_iter=400))
        gaps = [r.gap31 for r in trace]
        assert all(b <= a + 1e-10 * (1 + a) for a, b in zip(gaps, gaps[1:]))
