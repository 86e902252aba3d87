"""Stepsize planning: admissibility bounds, epsilon optimization, adaptive control.

For relaxation lam in (0,2) the admissible alpha interval is (alpha_bar, 1)
with alpha_bar = (2 lam - 3 + sqrt(9 - 4 lam))/2. Given free parameters
eps1, eps2 the four stepsize caps are

    gbar0 = lam / (2 L1)
    gbar1 = lam / (2 L2) - alpha / (2 eps2)
    gbar2 = alpha (2 - lam - (1-alpha) eps1) / (alpha eps2 + 2 (1-alpha) L1)
    gbar3 = (1-alpha)(eps1 (2 alpha - lam) - alpha) / (2 alpha L2 eps1)

all positive when eps1 in I1 = (alpha/(2 alpha - lam), (2-lam)/(1-alpha)) and
eps2 in I2 = (alpha L2 / lam, inf). The planner picks (eps1, eps2) to
maximize min{gbar1, gbar2, gbar3} and returns

    gamma_ryu = 0.99 * min{gbar0, gbar1, gbar2, gbar3, 1/(L1+L2)}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import bisect

from .core import InputError

__all__ = [
    "PlanInfeasibleError",
    "StepsizePlan",
    "AdaptiveController",
    "alpha_lower_bound",
    "eps1_interval",
    "eps2_lower",
    "gamma_bounds",
    "eps2_star",
    "optimize_epsilons",
    "plan",
    "adaptive_update",
]


class PlanInfeasibleError(ValueError):
    """No admissible (eps1, eps2) pair could be constructed."""


def alpha_lower_bound(lam: float) -> float:
    """Smallest admissible alpha, (2 lam - 3 + sqrt(9 - 4 lam))/2; in (lam/2, 1)."""
    if not 0 < lam <= 2:
        raise InputError(f"lam must lie in (0, 2], got {lam}")
    return (2.0 * lam - 3.0 + math.sqrt(9.0 - 4.0 * lam)) / 2.0


def _validate_lam_alpha(lam: float, alpha: float) -> None:
    if not 0 < lam < 2:
        raise InputError(f"lam must lie in (0, 2), got {lam}")
    abar = alpha_lower_bound(lam)
    if not abar < alpha < 1:
        raise InputError(f"alpha must lie in ({abar}, 1) for lam={lam}, got {alpha}")


def eps1_interval(lam: float, alpha: float) -> tuple[float, float]:
    """Admissible eps1 interval I1 (open); nonempty for alpha in (alpha_bar, 1)."""
    _validate_lam_alpha(lam, alpha)
    return alpha / (2.0 * alpha - lam), (2.0 - lam) / (1.0 - alpha)


def eps2_lower(L2: float, lam: float, alpha: float) -> float:
    """Left end of the open admissible eps2 interval I2 = (alpha L2 / lam, inf)."""
    return alpha * L2 / lam


def gamma_bounds(
    L1: float, L2: float, lam: float, alpha: float, eps1: float, eps2: float
) -> tuple[float, float, float, float]:
    """The four stepsize caps (gbar0, gbar1, gbar2, gbar3) for given epsilons."""
    if min(L1, L2) <= 0:
        raise InputError("L1 and L2 must be positive")
    if min(eps1, eps2) <= 0:
        raise InputError("eps1 and eps2 must be positive")
    _validate_lam_alpha(lam, alpha)
    g0 = lam / (2.0 * L1)
    g1 = lam / (2.0 * L2) - alpha / (2.0 * eps2)
    g2 = alpha * (2.0 - lam - (1.0 - alpha) * eps1) / (alpha * eps2 + 2.0 * (1.0 - alpha) * L1)
    g3 = (1.0 - alpha) * (eps1 * (2.0 * alpha - lam) - alpha) / (2.0 * alpha * L2 * eps1)
    return g0, g1, g2, g3


def eps2_star(L1: float, L2: float, lam: float, alpha: float, eps1: float) -> float:
    """The root of gbar1(eps2) = gbar2(eps1, eps2) inside I2, for fixed eps1.

    Clearing denominators gives the quadratic

        lam*alpha*e^2
        + (2 lam (1-alpha) L1 - alpha^2 L2 - 2 alpha L2 (2 - lam - (1-alpha) eps1)) e
        - 2 alpha (1-alpha) L1 L2 = 0

    whose constant term is negative, so there is exactly one positive root
    and (since gbar1 vanishes at the left end of I2 while gbar2 is positive
    on I1) it lies in I2.
    """
    A = lam * alpha
    B = (
        2.0 * lam * (1.0 - alpha) * L1
        - alpha * alpha * L2
        - 2.0 * alpha * L2 * (2.0 - lam - (1.0 - alpha) * eps1)
    )
    C = -2.0 * alpha * (1.0 - alpha) * L1 * L2
    disc = B * B - 4.0 * A * C
    if disc < 0:
        raise PlanInfeasibleError(f"no real eps2 root for lam={lam}, alpha={alpha}")
    sq = math.sqrt(disc)
    q = -0.5 * (B + math.copysign(sq, B if B != 0 else 1.0))
    roots = [q / A]
    if q != 0:
        roots.append(C / q)
    lower = eps2_lower(L2, lam, alpha)
    inside = [r for r in roots if r > lower]
    if not inside:
        raise PlanInfeasibleError(f"no eps2 root inside I2 for lam={lam}, alpha={alpha}")
    if len(inside) == 1:
        return inside[0]
    # graceful degradation: two admissible roots, keep the better one
    return max(inside, key=lambda e2: min(gamma_bounds(L1, L2, lam, alpha, eps1, e2)[1:]))


def optimize_epsilons(L1: float, L2: float, lam: float, alpha: float) -> tuple[float, float]:
    """Pick (eps1, eps2) maximizing min{gbar1, gbar2, gbar3}.

    For fixed eps1, eps2_star balances gbar1 = gbar2 (optimal since gbar1
    increases and gbar2 decreases in eps2). Over eps1, h(eps1) =
    gbar1(eps2_star) decreases while gbar3 increases, so their crossing —
    found by bisection at 1e-12 relative tolerance — is the max-min point.
    Without a sign change the I1 endpoints (inset by 1e-6 relative) are both
    evaluated and the better one wins.
    """
    if min(L1, L2) <= 0:
        raise InputError("L1 and L2 must be positive")
    lo, hi = eps1_interval(lam, alpha)
    if not lo < hi:
        raise PlanInfeasibleError(f"empty eps1 interval for lam={lam}, alpha={alpha}")
    a = lo * (1.0 + 1e-6)
    b = hi * (1.0 - 1e-6)
    if a >= b:
        mid = 0.5 * (lo + hi)
        return mid, eps2_star(L1, L2, lam, alpha, mid)

    def crossing(e1: float) -> float:
        e2 = eps2_star(L1, L2, lam, alpha, e1)
        _, g1, _, g3 = gamma_bounds(L1, L2, lam, alpha, e1, e2)
        return g1 - g3

    fa, fb = crossing(a), crossing(b)
    if fa == 0.0:
        eps1 = a
    elif fb == 0.0:
        eps1 = b
    elif fa * fb < 0:
        eps1 = bisect(crossing, a, b, xtol=1e-15, rtol=1e-12, maxiter=200)
    else:

        def minimum_cap(e1: float) -> float:
            e2 = eps2_star(L1, L2, lam, alpha, e1)
            return min(gamma_bounds(L1, L2, lam, alpha, e1, e2)[1:])

        eps1 = max((a, b), key=minimum_cap)
    return eps1, eps2_star(L1, L2, lam, alpha, eps1)


@dataclass(frozen=True)
class StepsizePlan:
    """Everything the solvers need to pick a safe stepsize."""

    l1: float
    l2: float
    lam: float
    alpha: float
    alpha_bar: float
    eps1: float
    eps2: float
    gbar0: float
    gbar1: float
    gbar2: float
    gbar3: float
    gamma_upper: float
    gamma_ryu: float
    thm2_cap: float

    @property
    def gamma_in_thm2_cap(self) -> bool:
        """Whether gamma_ryu also satisfies the stronger subsequential-convergence cap."""
        return self.gamma_ryu <= self.thm2_cap

    def as_dict(self) -> dict:
        return {
            "alpha_bar": self.alpha_bar,
            "eps1": self.eps1,
            "eps2": self.eps2,
            "gbar0": self.gbar0,
            "gbar1": self.gbar1,
            "gbar2": self.gbar2,
            "gbar3": self.gbar3,
            "gamma_ryu": self.gamma_ryu,
            "thm2_cap": self.thm2_cap,
            "gamma_in_thm2_cap": self.gamma_in_thm2_cap,
        }


def plan(L1: float, L2: float, lam: float = 1.0, alpha: float = 0.99) -> StepsizePlan:
    """Optimize the epsilons and assemble the stepsize plan.

    gamma_ryu = 0.99 min{gbar0..gbar3, 1/(L1+L2)} always lies strictly inside
    the admissible interval; thm2_cap = min{alpha/L1, (1-alpha)/L2} is the
    extra cap under which subsequential convergence to critical points is
    guaranteed, reported separately and never enforced.
    """
    eps1, eps2 = optimize_epsilons(L1, L2, lam, alpha)
    g0, g1, g2, g3 = gamma_bounds(L1, L2, lam, alpha, eps1, eps2)
    prox_cap = 1.0 / (L1 + L2)
    gamma_upper = min(min(g0, g1), min(g2, g3, prox_cap))
    gamma_ryu = 0.99 * min(g0, g1, g2, g3, prox_cap)
    if not gamma_ryu > 0:
        raise PlanInfeasibleError(
            f"nonpositive stepsize cap for lam={lam}, alpha={alpha}: "
            f"gbar=({g0}, {g1}, {g2}, {g3})"
        )
    return StepsizePlan(
        l1=L1,
        l2=L2,
        lam=lam,
        alpha=alpha,
        alpha_bar=alpha_lower_bound(lam),
        eps1=eps1,
        eps2=eps2,
        gbar0=g0,
        gbar1=g1,
        gbar2=g2,
        gbar3=g3,
        gamma_upper=gamma_upper,
        gamma_ryu=gamma_ryu,
        thm2_cap=min(alpha / L1, (1.0 - alpha) / L2),
    )


@dataclass
class AdaptiveController:
    """Shrinking-stepsize rule: start large, halve on instability symptoms.

    At iterate k >= 1, while gamma_current > gamma_ryu, the stepsize is cut
    to max(shrink * gamma_current, 0.99 * gamma_ryu) whenever the smaller
    shadow-point displacement exceeds c0/k or the smaller shadow-point norm
    exceeds c1. gamma_current never drops below the floor 0.99 * gamma_ryu
    (and is clamped up to it at construction), so it is nonincreasing over a
    run and always ends in the certified-descent range after finitely many
    cuts.
    """

    gamma_ryu: float
    gamma_current: float
    c0: float = 1e3
    c1: float = 1e10
    shrink: float = 0.5

    def __post_init__(self):
        if self.gamma_ryu <= 0 or self.gamma_current <= 0:
            raise InputError("gamma_ryu and gamma_current must be positive")
        if not 0 < self.shrink < 1:
            raise InputError("shrink factor must lie in (0, 1)")
        if min(self.c0, self.c1) <= 0:
            raise InputError("c0 and c1 must be positive")
        self.gamma_current = max(self.gamma_current, self.floor)

    @property
    def floor(self) -> float:
        return 0.99 * self.gamma_ryu

    def update(
        self, k: int, dx1_norm: float, dx2_norm: float, x1_norm: float, x2_norm: float
    ) -> float:
        if k < 1:
            raise InputError("adaptive update needs k >= 1")
        if self.gamma_current > self.gamma_ryu and (
            min(dx1_norm, dx2_norm) > self.c0 / k or min(x1_norm, x2_norm) > self.c1
        ):
            self.gamma_current = max(self.shrink * self.gamma_current, self.floor)
        return self.gamma_current


def adaptive_update(
    ctrl: AdaptiveController,
    k: int,
    dx1_norm: float,
    dx2_norm: float,
    x1_norm: float,
    x2_norm: float,
) -> float:
    """Apply the shrink rule once and return the (possibly updated) stepsize."""
    return ctrl.update(k, dx1_norm, dx2_norm, x1_norm, x2_norm)
