"""Domain types, ground costs, plan evaluation and synthetic instance generators.

Indices are 0-based throughout the Python API; the sentinel ``NONE == -1``
marks a source point that is destroyed (not transported).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

NONE = -1


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""


@dataclass(frozen=True)
class CostSpec:
    """Ground cost ``c(a, b) = |a - b|**p`` with ``p > 1``."""

    p: float = 2.0

    def __post_init__(self):
        if not (self.p > 1.0) or not math.isfinite(self.p):
            raise ValidationError(
                f"cost exponent p must be a finite real > 1, got {self.p!r}; "
                "p = 1 is not strictly convex and the monotone-map reduction "
                "does not apply"
            )

    def __call__(self, a, b):
        d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
        if self.p == 2.0:
            return d * d
        return d**self.p

    def matrix(self, x, y) -> np.ndarray:
        """Dense ``len(x) x len(y)`` cost matrix."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return self(x[:, None], y[None, :])


def as_sorted_samples(values, name: str = "samples") -> np.ndarray:
    """Validate and return a contiguous float64 copy of non-decreasing samples."""
    arr = np.array(values, dtype=float, copy=True).reshape(-1)
    if np.isnan(arr).any():
        raise ValidationError(f"{name} contains NaN")
    if not np.isfinite(arr).all():
        raise ValidationError(f"{name} contains non-finite values")
    if arr.size > 1 and np.any(np.diff(arr) < 0):
        raise ValidationError(f"{name} must be sorted non-decreasing")
    return np.ascontiguousarray(arr)


@dataclass(frozen=True)
class PartialPlan:
    """Monotone partial injection ``L: [0, n) -> {NONE} U [0, m)``."""

    assignment: np.ndarray
    m: int

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64).reshape(-1)
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)
        validate_plan(a, a.size, self.m)

    @property
    def n(self) -> int:
        return int(self.assignment.size)

    @property
    def domain(self) -> np.ndarray:
        """Indices of transported source points."""
        return np.flatnonzero(self.assignment != NONE)

    @property
    def size(self) -> int:
        return int(np.count_nonzero(self.assignment != NONE))

    def pairs(self) -> np.ndarray:
        """``(k, 2)`` array of matched ``(i, j)`` pairs, sorted by ``i``."""
        dom = self.domain
        return np.column_stack([dom, self.assignment[dom]]).astype(np.int64)

    def inverse(self) -> np.ndarray:
        """Inverse map over targets; ``NONE`` for created (unmatched) targets."""
        inv = np.full(self.m, NONE, dtype=np.int64)
        dom = self.domain
        inv[self.assignment[dom]] = dom
        return inv


def validate_plan(assignment, n: int, m: int) -> None:
    """Raise :class:`ValidationError` unless ``assignment`` is a valid plan."""
    a = np.asarray(assignment)
    if a.shape != (n,):
        raise ValidationError(f"plan has shape {a.shape}, expected ({n},)")
    matched = a[a != NONE]
    if matched.size and (matched.min() < 0 or matched.max() >= m):
        raise ValidationError(f"plan index out of range [0, {m})")
    if np.any(a < NONE):
        raise ValidationError("plan contains negative indices other than NONE")
    if matched.size > 1 and np.any(np.diff(matched) <= 0):
        raise ValidationError("plan is not strictly increasing on its domain")


@dataclass(frozen=True)
class DualPair:
    """Dual potentials ``phi`` (sources) and ``psi`` (targets)."""

    phi: np.ndarray
    psi: np.ndarray


@dataclass(frozen=True)
class SolveStats:
    iterations: int = 0
    chain_steps: int = 0
    max_chain: int = 0
    conflicts: int = 0


@dataclass(frozen=True)
class Solution:
    plan: PartialPlan
    duals: DualPair
    value: float
    stats: SolveStats = field(default_factory=SolveStats)

    @property
    def assignment(self) -> np.ndarray:
        return self.plan.assignment

    def dual_value(self, lam: float) -> float:
        """Dual objective ``sum min(phi, lam) + sum min(psi, lam)``."""
        return math.fsum(np.minimum(self.duals.phi, lam)) + math.fsum(
            np.minimum(self.duals.psi, lam)
        )


def eval_plan_cost(x, y, plan, lam: float, cost: CostSpec | None = None) -> float:
    """Objective of a partial plan: matched cost plus ``lam`` per unmatched point.

    Parameters
    ----------
    x, y : array_like
        Sorted source and target coordinates.
    plan : PartialPlan or array_like of int
        Assignment with ``NONE`` for destroyed source points.
    lam : float
        Finite, non-negative creation/destruction penalty.
    cost : CostSpec, optional
        Defaults to the quadratic cost.
    """
    cost = cost or CostSpec()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = plan.assignment if isinstance(plan, PartialPlan) else np.asarray(plan)
    validate_plan(a, x.size, y.size)
    if not math.isfinite(lam) or lam < 0:
        raise ValidationError(f"lam must be finite and >= 0, got {lam!r}")
    dom = np.flatnonzero(a != NONE)
    matched = math.fsum(cost(x[dom], y[a[dom]])) if dom.size else 0.0
    return matched + lam * (x.size + y.size - 2 * dom.size)


def symmetric_shift(value_sym: float, lam1: float, lam2: float, n: int, m: int) -> float:
    """Convert a symmetric-penalty optimum (``lam = (lam1+lam2)/2``) to the
    asymmetric problem with penalties ``lam1`` on sources and ``lam2`` on targets."""
    if not (math.isfinite(lam1) and math.isfinite(lam2)) or lam1 < 0 or lam2 < 0:
        raise ValidationError("penalties must be finite and >= 0")
    return value_sym + (lam1 - lam2) / 2 * n + (lam2 - lam1) / 2 * m


def _check_range(r, name):
    a, b = float(r[0]), float(r[1])
    if not (a < b):
        raise ValidationError(f"{name} must satisfy a < b, got {r!r}")
    return a, b


def gen_uniform(n, m, x_range=(-20.0, 20.0), y_range=(-40.0, 40.0), seed=0,
                sort=True):
    """I.i.d. uniform samples on ``x_range`` and ``y_range``, sorted unless
    ``sort`` is false."""
    if n < 0 or m < 0:
        raise ValidationError("sizes must be >= 0")
    xa, xb = _check_range(x_range, "x_range")
    ya, yb = _check_range(y_range, "y_range")
    rng = np.random.default_rng(seed)
    x = rng.uniform(xa, xb, size=n)
    y = rng.uniform(ya, yb, size=m)
    if sort:
        x, y = np.sort(x), np.sort(y)
    return x, y


X_MIXTURE_MEANS = np.array([-4.0 + 2 * k for k in range(1, 6)])
Y_MIXTURE_MEANS = np.array([-5.0 + 2 * k for k in range(1, 7)])


def gen_gaussian_mixture(n, m, seed=0, return_components=False, sort=True):
    """Sorted samples from equal-weight unit-variance Gaussian mixtures.

    Sources use means ``-4 + 2k`` for ``k = 1..5``; targets use ``-5 + 2k``
    for ``k = 1..6``. With ``return_components`` the per-sample component
    labels (in generation order, before sorting) are returned as well.
    """
    if n < 0 or m < 0:
        raise ValidationError("sizes must be >= 0")
    rng = np.random.default_rng(seed)
    cx = rng.integers(0, X_MIXTURE_MEANS.size, size=n)
    cy = rng.integers(0, Y_MIXTURE_MEANS.size, size=m)
    x = X_MIXTURE_MEANS[cx] + rng.standard_normal(n)
    y = Y_MIXTURE_MEANS[cy] + rng.standard_normal(m)
    if sort:
        x, y = np.sort(x), np.sort(y)
    if return_components:
        return x, y, cx, cy
    return x, y
