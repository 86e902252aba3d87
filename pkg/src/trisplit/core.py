"""Vector primitives, function-term interfaces, and composite-problem assembly.

The solvers minimize f1(x) + f2(x) + f3(x) where f1, f2 are convex and
L-smooth and f3 is proper lower semicontinuous with a computable proximal
map (possibly nonconvex, possibly set-valued prox).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "InputError",
    "NumericalError",
    "DivergenceError",
    "RealVector",
    "SmoothTerm",
    "CallableSmoothTerm",
    "ProxTerm",
    "CompositeProblem",
    "evaluate_objective",
    "gradient_check",
    "lipschitz_probe",
]


class InputError(ValueError):
    """Malformed input: bad shape, out-of-range parameter, non-finite data."""


class NumericalError(ArithmeticError):
    """A computation lost numerical meaning (NaN, failed factorization)."""


class DivergenceError(NumericalError):
    """Iterates escaped to non-finite values."""


def _normalize_shape(shape) -> tuple[int, ...]:
    if isinstance(shape, (int, np.integer)):
        shape = (int(shape),)
    shape = tuple(int(s) for s in shape)
    if len(shape) not in (1, 2) or any(s <= 0 for s in shape):
        raise InputError(f"shape must be (d,) or (m, n) with positive sizes, got {shape}")
    return shape


@dataclass(frozen=True)
class RealVector:
    """Immutable finite float64 vector; matrix problems carry an (m, n) shape.

    Data is stored flattened row-major; `mat` gives the shaped view.
    Construction rejects NaN/Inf: non-finite numbers are errors, never
    sentinels.
    """

    data: np.ndarray
    shape: tuple[int, ...]

    def __init__(self, data, shape=None):
        arr = np.asarray(data, dtype=np.float64)
        if shape is None:
            shape = arr.shape if arr.ndim > 0 else (1,)
        shape = _normalize_shape(shape)
        arr = arr.reshape(-1)
        if arr.size != math.prod(shape):
            raise InputError(f"data length {arr.size} does not match shape {shape}")
        if not np.isfinite(arr).all():
            raise InputError("RealVector entries must be finite")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "shape", shape)

    @classmethod
    def zeros(cls, shape) -> "RealVector":
        shape = _normalize_shape(shape)
        return cls(np.zeros(math.prod(shape)), shape)

    @property
    def dim(self) -> int:
        return self.data.size

    @property
    def mat(self) -> np.ndarray:
        """Read-only view reshaped to the stored shape."""
        return self.data.reshape(self.shape)

    def with_data(self, arr) -> "RealVector":
        """Same-shape vector taking ownership of a freshly computed array.

        Unlike the constructor this does not copy; callers must not mutate
        `arr` afterwards. Finiteness is still enforced.
        """
        a = np.asarray(arr, dtype=np.float64).reshape(-1)
        if a.size != self.data.size:
            raise InputError(f"data length {a.size} does not match shape {self.shape}")
        if not np.isfinite(a).all():
            raise InputError("RealVector entries must be finite")
        if a.flags.writeable:
            a.setflags(write=False)
        v = object.__new__(RealVector)
        object.__setattr__(v, "data", a)
        object.__setattr__(v, "shape", self.shape)
        return v

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def _check_same_shape(self, other: "RealVector") -> None:
        if self.shape != other.shape:
            raise InputError(f"shape mismatch: {self.shape} vs {other.shape}")

    def dot(self, other: "RealVector") -> float:
        self._check_same_shape(other)
        return float(self.data @ other.data)

    def __add__(self, other: "RealVector") -> "RealVector":
        self._check_same_shape(other)
        return self.with_data(self.data + other.data)

    def __sub__(self, other: "RealVector") -> "RealVector":
        self._check_same_shape(other)
        return self.with_data(self.data - other.data)

    def __mul__(self, c: float) -> "RealVector":
        return self.with_data(self.data * float(c))

    __rmul__ = __mul__

    def __truediv__(self, c: float) -> "RealVector":
        return self.with_data(self.data / float(c))

    def __neg__(self) -> "RealVector":
        return self.with_data(-self.data)


class SmoothTerm:
    """Differentiable term with an L-Lipschitz gradient.

    Subclasses set `lipschitz` (any valid upper bound on the gradient's
    Lipschitz modulus) and `convex`, and implement `value` and `grad`.
    Oracles must be pure functions of their inputs.
    """

    lipschitz: float = 1.0
    convex: bool = True

    def value(self, x: RealVector) -> float:
        raise NotImplementedError

    def grad(self, x: RealVector) -> RealVector:
        raise NotImplementedError


@dataclass(frozen=True)
class CallableSmoothTerm(SmoothTerm):
    """Smooth term built from plain callables (handy for tests and the CLI)."""

    value_fn: Callable[[RealVector], float] = None
    grad_fn: Callable[[RealVector], RealVector] = None
    lipschitz: float = 1.0
    convex: bool = True

    def value(self, x: RealVector) -> float:
        return float(self.value_fn(x))

    def grad(self, x: RealVector) -> RealVector:
        return self.grad_fn(x)


class ProxTerm:
    """Proper lsc term with value in R ∪ {+inf} and a proximal oracle.

    `prox(gamma, z)` returns one minimizer of f(y) + ||y - z||^2 / (2 gamma);
    it must be deterministic, and where the minimizer set has several points
    a fixed tie-break applies (see the prox library).
    """

    def value(self, x: RealVector) -> float:
        raise NotImplementedError

    def prox(self, gamma: float, z: RealVector) -> RealVector:
        raise NotImplementedError

    def prox_with_value(self, gamma: float, z: RealVector) -> tuple[RealVector, float]:
        """Prox point together with f(point); override when that is cheaper."""
        p = self.prox(gamma, z)
        return p, self.value(p)

    def moreau_envelope(self, gamma: float, z: RealVector) -> float:
        """min_y f(y) + ||y - z||^2 / (2 gamma), evaluated at the prox point."""
        p, fp = self.prox_with_value(gamma, z)
        return fp + (p - z).norm() ** 2 / (2.0 * gamma)


@dataclass(frozen=True)
class CompositeProblem:
    """The triple (f1, f2, f3) over vectors of a fixed shape."""

    f1: SmoothTerm
    f2: SmoothTerm
    f3: ProxTerm
    shape: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "shape", _normalize_shape(self.shape))
        for name, t in (("f1", self.f1), ("f2", self.f2)):
            if not (t.lipschitz > 0):
                raise InputError(f"{name}.lipschitz must be positive, got {t.lipschitz}")
            if not t.convex:
                raise InputError(f"{name} must be convex for this method")

    @property
    def dim(self) -> int:
        return math.prod(self.shape)

    def zeros(self) -> RealVector:
        return RealVector.zeros(self.shape)

    def check_shape(self, x: RealVector, name: str = "x") -> None:
        if x.shape != self.shape:
            raise InputError(f"{name} has shape {x.shape}, problem expects {self.shape}")


def evaluate_objective(p: CompositeProblem, x: RealVector) -> float:
    """f1(x) + f2(x) + f3(x); +inf exactly when f3(x) = +inf."""
    p.check_shape(x)
    smooth = float(p.f1.value(x)) + float(p.f2.value(x))
    if not np.isfinite(smooth):
        raise NumericalError(f"smooth terms returned non-finite value {smooth}")
    v3 = float(p.f3.value(x))
    if math.isnan(v3):
        raise NumericalError("f3 returned NaN")
    return smooth + v3


def gradient_check(t: SmoothTerm, x: RealVector, h: float = 1e-6) -> float:
    """Max relative error between central differences and the gradient oracle."""
    if not h > 0:
        raise InputError("h must be positive")
    g = t.grad(x).data
    base = np.asarray(x.data, dtype=np.float64)
    err = 0.0
    for i in range(base.size):
        e = np.zeros_like(base)
        e[i] = h
        fp = t.value(x.with_data(base + e))
        fm = t.value(x.with_data(base - e))
        cd = (fp - fm) / (2.0 * h)
        err = max(err, abs(cd - g[i]) / (1.0 + abs(g[i])))
    return err


def lipschitz_probe(t: SmoothTerm, trials: int, seed: int, shape) -> float:
    """Max of ||grad f(x) - grad f(y)|| / ||x - y|| over random Gaussian pairs.

    The caller asserts the result against the declared modulus; `shape` is
    needed because terms do not carry the ambient dimension.
    """
    if trials < 1:
        raise InputError("trials must be >= 1")
    shape = _normalize_shape(shape)
    rng = np.random.default_rng(seed)
    d = math.prod(shape)
    worst = 0.0
    for _ in range(trials):
        xa = rng.standard_normal(d) * rng.uniform(0.1, 10.0)
        ya = rng.standard_normal(d) * rng.uniform(0.1, 10.0)
        gap = float(np.linalg.norm(xa - ya))
        if gap == 0.0:
            continue
        gx = t.grad(RealVector(xa, shape)).data
        gy = t.grad(RealVector(ya, shape)).data
        worst = max(worst, float(np.linalg.norm(gx - gy)) / gap)
    return worst
