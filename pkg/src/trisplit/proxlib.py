"""Closed-form gradient/prox oracles for the benchmark terms plus generic test terms.

Benchmark triple (matrix completion with a nonnegativity push and a spectral
MCP penalty):

* ``NonnegDistanceTerm``   f1(X) = (w/2) ||min(X, 0)||_F^2
* ``MaskedQuadraticTerm``  f2(X) = (1/2) ||P(X - M)||_F^2 on an entry mask P
* ``SpectralMCPTerm``      f3(X) = w * sum_i mcp(sigma_i(X); tau)

Every closed form is certified in the tests against ``brute_force_prox_1d``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import InputError, NumericalError, ProxTerm, RealVector, SmoothTerm

__all__ = [
    "NonnegDistanceTerm",
    "MaskedQuadraticTerm",
    "SpectralMCPTerm",
    "QuadraticTerm",
    "ScaledL1Term",
    "SeparableMCPTerm",
    "ZeroSmoothTerm",
    "ZeroProxTerm",
    "mcp_value",
    "prox_scalar_mcp",
    "prox_nonneg_distance",
    "prox_masked_quadratic",
    "prox_spectral_mcp",
    "soft_threshold",
    "brute_force_prox_1d",
    "default_prox_bracket",
]


def mcp_value(t, tau: float):
    """Minimax-concave penalty |t| - t^2/(2 tau), saturating at tau/2."""
    a = np.abs(np.asarray(t, dtype=np.float64))
    return np.where(a <= tau, a - a * a / (2.0 * tau), tau / 2.0)


def soft_threshold(v, thresh: float):
    v = np.asarray(v, dtype=np.float64)
    return np.sign(v) * np.maximum(np.abs(v) - thresh, 0.0)


def prox_scalar_mcp(weight: float, tau: float, gamma: float, v):
    """Minimizer of gamma*weight*mcp(t; tau) + (t - v)^2 / 2 (firm threshold).

    For gamma*weight < tau the objective is strongly convex and the firm
    threshold applies: 0, then linear rescaling, then identity past tau.
    For gamma*weight >= tau the middle piece turns concave and only 0 and
    sign(v)*max(tau, |v|) can minimize; they are compared directly with ties
    broken toward the smaller magnitude.
    """
    if weight < 0:
        raise InputError("weight must be nonnegative")
    if tau <= 0 or gamma <= 0:
        raise InputError("tau and gamma must be positive")
    a = gamma * weight
    arr = np.asarray(v, dtype=np.float64)
    if a >= tau:
        big = np.sign(arr) * np.maximum(tau, np.abs(arr))
        at_zero = 0.5 * arr * arr
        at_big = a * (tau / 2.0) + 0.5 * (big - arr) ** 2
        out = np.where(at_big < at_zero, big, 0.0)
    else:
        av = np.abs(arr)
        mid = np.sign(arr) * (av - a) / (1.0 - a / tau)
        out = np.where(av <= a, 0.0, np.where(av <= tau, mid, arr))
    if np.ndim(v) == 0:
        return float(out)
    return out


def brute_force_prox_1d(objective, lo: float, hi: float, steps: int = 2000) -> float:
    """Grid minimization of a scalar objective with local ternary refinement.

    Accurate to (hi - lo)/steps from the grid pass, then refined to 1e-8 on
    the bracketing interval. Used purely as a certification oracle.
    """
    if not lo < hi:
        raise InputError("need lo < hi")
    if steps < 1000:
        raise InputError("need steps >= 1000")
    xs = np.linspace(lo, hi, int(steps) + 1)
    try:
        fs = np.asarray(objective(xs), dtype=np.float64)
        if fs.shape != xs.shape:
            raise TypeError
    except Exception:
        fs = np.array([float(objective(t)) for t in xs])
    i = int(np.argmin(fs))
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, len(xs) - 1)]
    while b - a > 1e-9:
        m1 = a + (b - a) / 3.0
        m2 = b - (b - a) / 3.0
        if float(objective(m1)) <= float(objective(m2)):
            b = m2
        else:
            a = m1
    return 0.5 * (a + b)


def default_prox_bracket(v: float, gamma_times_weight: float) -> tuple[float, float]:
    """Search interval guaranteed to contain any shrinkage-type prox output."""
    pad = 5.0 * gamma_times_weight + 1.0
    return v - pad, v + pad


@dataclass(frozen=True)
class NonnegDistanceTerm(SmoothTerm):
    """(w/2) * squared distance to the nonnegative orthant; smooth, convex."""

    weight: float = 1.0

    def __post_init__(self):
        if self.weight < 0:
            raise InputError("weight must be nonnegative")

    @property
    def lipschitz(self) -> float:
        # gradient is w * min(x, 0): modulus w, but any positive bound works
        return self.weight if self.weight > 0 else 1.0

    def value(self, x: RealVector) -> float:
        neg = np.minimum(x.data, 0.0)
        return 0.5 * self.weight * float(neg @ neg)

    def grad(self, x: RealVector) -> RealVector:
        return x.with_data(self.weight * np.minimum(x.data, 0.0))

    def prox(self, gamma: float, x: RealVector) -> RealVector:
        return prox_nonneg_distance(self, gamma, x)


def prox_nonneg_distance(t: NonnegDistanceTerm, gamma: float, x: RealVector) -> RealVector:
    """Componentwise: keep nonnegative entries, shrink negatives by 1/(1+gamma*w)."""
    if gamma <= 0:
        raise InputError("gamma must be positive")
    d = x.data
    return x.with_data(np.where(d >= 0.0, d, d / (1.0 + gamma * t.weight)))


@dataclass(frozen=True, eq=False)
class MaskedQuadraticTerm(SmoothTerm):
    """(1/2) ||P(X - M)||_F^2 where P keeps the masked entries; smooth, convex, L=1."""

    target: RealVector
    mask: np.ndarray

    def __post_init__(self):
        m = self.mask
        if isinstance(m, np.ndarray) and m.dtype == np.bool_:
            mask = m
        else:
            if len(self.target.shape) != 2:
                raise InputError("index-pair masks require a matrix-shaped target")
            mask = np.zeros(self.target.shape, dtype=bool)
            for i, j in m:
                mask[int(i), int(j)] = True
        if mask.shape != self.target.shape:
            raise InputError(
                f"mask shape {mask.shape} does not match target shape {self.target.shape}"
            )
        mask = mask.copy()
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    lipschitz = 1.0

    def _masked_diff(self, x: RealVector) -> np.ndarray:
        if x.shape != self.target.shape:
            raise InputError(f"point shape {x.shape} does not match target {self.target.shape}")
        diff = x.data - self.target.data
        return np.where(self.mask.reshape(-1), diff, 0.0)

    def value(self, x: RealVector) -> float:
        d = self._masked_diff(x)
        return 0.5 * float(d @ d)

    def grad(self, x: RealVector) -> RealVector:
        return x.with_data(self._masked_diff(x))

    def prox(self, gamma: float, x: RealVector) -> RealVector:
        return prox_masked_quadratic(self, gamma, x)


def prox_masked_quadratic(t: MaskedQuadraticTerm, gamma: float, x: RealVector) -> RealVector:
    """X - gamma/(1+gamma) * P(X - M); entries outside the mask pass through."""
    if gamma <= 0:
        raise InputError("gamma must be positive")
    return x.with_data(x.data - (gamma / (1.0 + gamma)) * t._masked_diff(x))


@dataclass(frozen=True)
class SpectralMCPTerm(ProxTerm):
    """w * sum of MCP penalties of the singular values; nonconvex, prox via SVD."""

    weight: float = 1.0
    tau: float = 1.0

    def __post_init__(self):
        if self.weight < 0 or self.tau <= 0:
            raise InputError("need weight >= 0 and tau > 0")

    def _mat(self, x: RealVector) -> np.ndarray:
        if len(x.shape) != 2:
            raise InputError("spectral MCP term requires matrix-shaped vectors")
        return x.mat

    def value(self, x: RealVector) -> float:
        s = np.linalg.svd(self._mat(x), compute_uv=False)
        return self.weight * float(np.sum(mcp_value(s, self.tau)))

    def prox(self, gamma: float, z: RealVector) -> RealVector:
        return self.prox_with_value(gamma, z)[0]

    def prox_with_value(self, gamma: float, z: RealVector) -> tuple[RealVector, float]:
        if gamma <= 0:
            raise InputError("gamma must be positive")
        try:
            u, s, vt = np.linalg.svd(self._mat(z), full_matrices=False)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"SVD failed in spectral MCP prox: {exc}") from None
        s_new = prox_scalar_mcp(self.weight, self.tau, gamma, s)
        point = z.with_data((u * s_new) @ vt)
        # scalar prox is monotone on sorted values, so s_new are the output's
        # singular values and the penalty value comes for free
        val = self.weight * float(np.sum(mcp_value(s_new, self.tau)))
        return point, val


def prox_spectral_mcp(t: SpectralMCPTerm, gamma: float, x: RealVector) -> RealVector:
    """Thin SVD, firm-threshold each singular value, reconstruct."""
    return t.prox(gamma, x)


@dataclass(frozen=True, eq=False)
class QuadraticTerm(SmoothTerm):
    """(1/2)(x - c)^T A (x - c) with symmetric PSD A; prox by direct solve."""

    matrix: np.ndarray
    center: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.matrix, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InputError("matrix must be square")
        if not np.allclose(a, a.T, atol=1e-12):
            raise InputError("matrix must be symmetric")
        c = np.asarray(self.center, dtype=np.float64).reshape(-1)
        if c.size != a.shape[0]:
            raise InputError("center length must match matrix size")
        eigs = np.linalg.eigvalsh(a)
        if eigs[0] < -1e-12:
            raise InputError("matrix must be positive semidefinite")
        object.__setattr__(self, "matrix", a)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "lipschitz", max(float(eigs[-1]), 1e-12))

    def value(self, x: RealVector) -> float:
        d = x.data - self.center
        return 0.5 * float(d @ (self.matrix @ d))

    def grad(self, x: RealVector) -> RealVector:
        return x.with_data(self.matrix @ (x.data - self.center))

    def prox(self, gamma: float, z: RealVector) -> RealVector:
        d = self.matrix.shape[0]
        rhs = z.data + gamma * (self.matrix @ self.center)
        return z.with_data(np.linalg.solve(np.eye(d) + gamma * self.matrix, rhs))


@dataclass(frozen=True)
class ScaledL1Term(ProxTerm):
    """w * ||x||_1 with the soft-threshold prox."""

    weight: float = 1.0

    def __post_init__(self):
        if self.weight < 0:
            raise InputError("weight must be nonnegative")

    def value(self, x: RealVector) -> float:
        return self.weight * float(np.sum(np.abs(x.data)))

    def prox(self, gamma: float, z: RealVector) -> RealVector:
        return z.with_data(soft_threshold(z.data, gamma * self.weight))


@dataclass(frozen=True)
class SeparableMCPTerm(ProxTerm):
    """w * sum_i mcp(x_i; tau): the coordinatewise (nonconvex) MCP penalty."""

    weight: float = 1.0
    tau: float = 1.0

    def __post_init__(self):
        if self.weight < 0 or self.tau <= 0:
            raise InputError("need weight >= 0 and tau > 0")

    def value(self, x: RealVector) -> float:
        return self.weight * float(np.sum(mcp_value(x.data, self.tau)))

    def prox(self, gamma: float, z: RealVector) -> RealVector:
        return z.with_data(prox_scalar_mcp(self.weight, self.tau, gamma, z.data))


@dataclass(frozen=True)
class ZeroSmoothTerm(SmoothTerm):
    """Identically zero smooth term (with an arbitrary declared modulus)."""

    lipschitz: float = 1.0

    def value(self, x: RealVector) -> float:
        return 0.0

    def grad(self, x: RealVector) -> RealVector:
        return x.with_data(np.zeros_like(x.data))

    def prox(self, gamma: float, x: RealVector) -> RealVector:
        return x


@dataclass(frozen=True)
class ZeroProxTerm(ProxTerm):
    """Identically zero prox-friendly term; prox is the identity."""

    def value(self, x: RealVector) -> float:
        return 0.0

    def prox(self, gamma: float, z: RealVector) -> RealVector:
        return z

    def prox_with_value(self, gamma: float, z: RealVector) -> tuple[RealVector, float]:
        return z, 0.0
