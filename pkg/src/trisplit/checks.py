"""Self-contained diagnostic suite backing the `check` CLI subcommand.

Hermetic and fast: fixed seeds, no file or network access, a few seconds of
compute. Each check raises AssertionError on failure; the runner prints one
PASS/FAIL line per check.
"""

from __future__ import annotations

import numpy as np

from .bench import build_problem, generate_instance
from .core import RealVector, gradient_check, lipschitz_probe
from .proxlib import (
    QuadraticTerm,
    ScaledL1Term,
    brute_force_prox_1d,
    default_prox_bracket,
    mcp_value,
    prox_scalar_mcp,
)
from .splitting import (
    RelaxationParams,
    StoppingRule,
    composite_residual,
    descent_constants,
    identity_check,
    lagrangian_value,
    make_state,
    run_ryu,
    ryu_envelope,
    ryu_envelope_moreau,
    ryu_step,
    state_envelope,
)
from .baselines import DysParams, dys_step, run_dys
from .core import CompositeProblem
from .stepsize import alpha_lower_bound, eps1_interval, eps2_lower, plan

SMALL_BENCH = dict(m=12, n=9, r=3, s=40, seed=7)


def _small_bench_problem():
    inst = generate_instance(**SMALL_BENCH)
    return build_problem(inst)


def _random_quadratic_problem(rng, d=8, f3_weight=0.3):
    def psd(scale):
        q = rng.standard_normal((d, d))
        a = q.T @ q
        a *= scale / np.linalg.eigvalsh(a)[-1]
        return a

    f1 = QuadraticTerm(psd(rng.uniform(0.5, 4.0)), rng.standard_normal(d))
    f2 = QuadraticTerm(psd(rng.uniform(0.5, 4.0)), rng.standard_normal(d))
    return CompositeProblem(f1=f1, f2=f2, f3=ScaledL1Term(f3_weight), shape=(d,))


def check_gradient_oracles():
    p = _small_bench_problem()
    rng = np.random.default_rng(0)
    x = RealVector(rng.standard_normal(p.dim), p.shape)
    for name, term in (("f1", p.f1), ("f2", p.f2)):
        err = gradient_check(term, x)
        assert err <= 1e-6, f"{name} gradient check failed: {err}"


def check_lipschitz_bounds():
    p = _small_bench_problem()
    for name, term in (("f1", p.f1), ("f2", p.f2)):
        ratio = lipschitz_probe(term, trials=50, seed=1, shape=p.shape)
        bound = term.lipschitz * (1 + 1e-12)
        assert ratio <= bound, f"{name} gradient ratio {ratio} above modulus {term.lipschitz}"


def check_prox_oracles():
    rng = np.random.default_rng(2)
    for _ in range(60):
        w, tau, gamma = rng.uniform(0.1, 3.0), rng.uniform(0.5, 5.0), rng.uniform(0.01, 1.0)
        if gamma * w >= tau:
            gamma = 0.5 * tau / w
        v = rng.uniform(-6.0, 6.0)
        lo, hi = default_prox_bracket(v, gamma * w)
        ref = brute_force_prox_1d(
            lambda t: gamma * w * mcp_value(t, tau) + 0.5 * (t - v) ** 2, lo, hi, 1000
        )
        got = prox_scalar_mcp(w, tau, gamma, v)
        assert abs(got - ref) <= 1e-6, f"scalar MCP prox off: {got} vs {ref}"
    p = _small_bench_problem()
    gamma = 0.07
    v = float(rng.uniform(-3, 3))
    lo, hi = default_prox_bracket(v, gamma * p.f1.weight)
    ref = brute_force_prox_1d(
        lambda t: gamma * 0.5 * p.f1.weight * np.minimum(t, 0.0) ** 2 + 0.5 * (t - v) ** 2,
        lo,
        hi,
        1000,
    )
    got = p.f1.prox(gamma, RealVector([v] * p.dim, p.shape)).data[0]
    assert abs(got - ref) <= 1e-6, f"nonneg-distance prox off: {got} vs {ref}"


def check_spectral_prox():
    rng = np.random.default_rng(3)
    p = _small_bench_problem()
    x = RealVector(rng.standard_normal(p.dim), p.shape)
    gamma = 0.05
    out = p.f3.prox(gamma, x)
    s_in = np.linalg.svd(x.mat, compute_uv=False)
    s_out = np.linalg.svd(out.mat, compute_uv=False)
    expected = prox_scalar_mcp(p.f3.weight, p.f3.tau, gamma, s_in)
    assert np.allclose(s_out, expected, atol=1e-10), "spectral prox singular values off"


def check_planner():
    sp = plan(10.0, 1.0, 1.0, 0.99)
    assert sp.gamma_ryu > 0 and sp.gamma_ryu < 1.0 / 11.0
    assert min(sp.gbar0, sp.gbar1, sp.gbar2, sp.gbar3) > 0
    lo, hi = eps1_interval(sp.lam, sp.alpha)
    assert lo < sp.eps1 < hi and sp.eps2 > eps2_lower(1.0, sp.lam, sp.alpha)
    dc = descent_constants(
        10.0, 1.0, RelaxationParams(sp.gamma_ryu, sp.lam, sp.alpha), sp.eps1, sp.eps2
    )
    assert dc.C0 >= 0 and dc.C1 >= 0 and dc.C2 > 0 and dc.C3 > 0 and dc.M > 0
    rng = np.random.default_rng(4)
    for _ in range(100):
        lam = rng.uniform(0.1, 1.9)
        abar = alpha_lower_bound(lam)
        lo_a = abar + 1e-3
        if lo_a >= 1 - 1e-3:
            continue
        alpha = rng.uniform(lo_a, 1 - 1e-3)
        sp2 = plan(rng.uniform(0.5, 10), rng.uniform(0.5, 10), lam, alpha)
        assert min(sp2.gbar0, sp2.gbar1, sp2.gbar2, sp2.gbar3) > 0
        assert sp2.gamma_ryu > 0


def check_identities():
    rng = np.random.default_rng(5)
    p = _random_quadratic_problem(rng)
    sp = plan(p.f1.lipschitz, p.f2.lipschitz, 1.0, 0.9)
    params = RelaxationParams(sp.gamma_ryu, 1.0, 0.9)
    s = make_state(p, params, RealVector(rng.standard_normal(p.dim)), RealVector(rng.standard_normal(p.dim)))
    for _ in range(50):
        nxt = ryu_step(p, params, s)
        lhs1, rhs1, lhs2, rhs2 = identity_check(p, params, s, nxt)
        assert abs(lhs1 - rhs1) <= 1e-10 * (1 + abs(lhs1)), "first displacement identity failed"
        assert abs(lhs2 - rhs2) <= 1e-10 * (1 + abs(lhs2)), "second displacement identity failed"
        s = nxt


def check_envelope_consistency():
    rng = np.random.default_rng(6)
    for p in (_random_quadratic_problem(rng), _small_bench_problem()):
        L = p.f1.lipschitz + p.f2.lipschitz
        params = RelaxationParams(0.5 / L, 1.0, 0.9)
        for _ in range(20):
            z1 = RealVector(rng.standard_normal(p.dim), p.shape)
            z2 = RealVector(rng.standard_normal(p.dim), p.shape)
            val, x3 = ryu_envelope(p, params, z1, z2)
            other = ryu_envelope_moreau(p, params, z1, z2)
            assert abs(val - other) <= 1e-8 * (1 + abs(val)), "envelope forms disagree"
            s = make_state(p, params, z1, z2)
            mu1 = (s.x1 - s.z1) / params.gamma
            mu2 = (params.alpha * (s.x2 - s.x1) - s.z2) / params.gamma
            lag = lagrangian_value(
                p, 1 / params.gamma1, 1 / params.gamma2, s.x1, s.x2, s.x3, mu1, mu2
            )
            assert abs(val - lag) <= 1e-10 * (1 + abs(val)), "envelope != Lagrangian"


def check_descent():
    rng = np.random.default_rng(7)
    p = _random_quadratic_problem(rng, d=20)
    lam = 1.0
    alpha = 0.5 * (alpha_lower_bound(lam) + 1.0)
    sp = plan(p.f1.lipschitz, p.f2.lipschitz, lam, alpha)
    params = RelaxationParams(sp.gamma_ryu, lam, alpha)
    m_const = descent_constants(p.f1.lipschitz, p.f2.lipschitz, params, sp.eps1, sp.eps2).M
    assert m_const > 0
    s = make_state(p, params, RealVector(rng.standard_normal(p.dim)), RealVector(rng.standard_normal(p.dim)))
    env = state_envelope(p, params, s)
    for _ in range(300):
        nxt = ryu_step(p, params, s)
        env_next = state_envelope(p, params, nxt)
        drop = env - env_next
        need = m_const * ((nxt.z1 - s.z1).norm() ** 2 + (nxt.z2 - s.z2).norm() ** 2)
        assert drop >= need - 1e-9 * (1 + abs(env)), f"descent violated: {drop} < {need}"
        s, env = nxt, env_next


def check_convex_sanity():
    f1 = QuadraticTerm(np.eye(1), np.zeros(1))
    f2 = QuadraticTerm(np.eye(1), np.zeros(1))
    p = CompositeProblem(f1=f1, f2=f2, f3=ScaledL1Term(1.0), shape=(1,))
    lam = 1.0
    alpha = 0.5 * (alpha_lower_bound(lam) + 1.0)
    sp = plan(1.0, 1.0, lam, alpha)
    params = RelaxationParams(sp.gamma_ryu, lam, alpha)
    stop = StoppingRule(tol=1e-9, max_iter=5000)
    state, _ = run_ryu(p, params, RealVector([3.0]), RealVector([-2.0]), stop)
    assert abs(state.x3.data[0]) <= 1e-6, f"expected minimizer 0, got {state.x3.data[0]}"


def check_dys_transcription():
    d = 4
    f = QuadraticTerm(np.eye(d), np.zeros(d))
    p = CompositeProblem(f1=f, f2=f, f3=ScaledL1Term(0.5), shape=(d,))
    params = DysParams(gamma=0.4, lam=1.0, roles=("f1", "f3", "f2"))
    z = RealVector(np.full(d, 2.0))
    z_plus, x_f, x_g = dys_step(p, params, z)
    x_f_ref = z.data / 1.4
    anchor = 2 * x_f_ref - z.data - 0.4 * x_f_ref
    x_g_ref = np.sign(anchor) * np.maximum(np.abs(anchor) - 0.4 * 0.5, 0.0)
    assert np.allclose(x_f.data, x_f_ref, atol=1e-12)
    assert np.allclose(x_g.data, x_g_ref, atol=1e-12)
    assert np.allclose(z_plus.data, z.data + x_g_ref - x_f_ref, atol=1e-12)
    state, _ = run_dys(p, params, z, StoppingRule(tol=1e-9, max_iter=5000))
    assert composite_residual(p, 5e-3, state.x_g) < 1e-9


ALL_CHECKS = (
    ("gradient-oracles", check_gradient_oracles),
    ("lipschitz-bounds", check_lipschitz_bounds),
    ("prox-oracles", check_prox_oracles),
    ("spectral-prox", check_spectral_prox),
    ("stepsize-planner", check_planner),
    ("displacement-identities", check_identities),
    ("envelope-consistency", check_envelope_consistency),
    ("sufficient-descent", check_descent),
    ("convex-sanity", check_convex_sanity),
    ("davis-yin-baseline", check_dys_transcription),
)


def run_all_checks(out=print) -> bool:
    ok = True
    for name, fn in ALL_CHECKS:
        try:
            fn()
        except AssertionError as exc:
            ok = False
            out(f"FAIL {name}: {exc}")
        else:
            out(f"PASS {name}")
    return ok
