"""Sliced optimal partial transport: random projections and the Monte-Carlo
estimator built on the 1-D solver."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import NONE, CostSpec, ValidationError
from .solver import SolverConfig, solve


def as_point_cloud(points, name: str = "cloud") -> np.ndarray:
    """Validate an ``(n, d)`` array of finite coordinates; 1-D input is ``d = 1``."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[1] < 1:
        raise ValidationError(f"{name} must have shape (n, d) with d >= 1")
    if not np.isfinite(arr).all():
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class DirectionSet:
    directions: np.ndarray
    seed: int | None = None

    def __len__(self):
        return self.directions.shape[0]

    @property
    def dim(self) -> int:
        return self.directions.shape[1]


def sample_directions(d: int, N: int, seed: int) -> DirectionSet:
    """``N`` i.i.d. uniform unit vectors in dimension ``d`` (normalised Gaussians)."""
    if d < 1:
        raise ValidationError("dimension must be >= 1")
    if N < 1:
        raise ValidationError("number of directions must be >= 1")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((N, d))
    norms = np.linalg.norm(g, axis=1)
    # a zero draw has probability zero; redraw to stay well defined
    while np.any(norms == 0):
        bad = norms == 0
        g[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(g, axis=1)
    return DirectionSet(g / norms[:, None], seed)


def project(cloud, theta):
    """Project onto ``theta``; returns ``(sorted values, permutation)`` with
    ``values == (cloud @ theta)[perm]``."""
    cloud = as_point_cloud(cloud)
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.size != cloud.shape[1]:
        raise ValidationError(
            f"direction has dimension {theta.size}, cloud has {cloud.shape[1]}")
    # fixed-order accumulation: a point's projection does not depend on its
    # row position (BLAS kernels may round differently per row)
    raw = cloud[:, 0] * theta[0]
    for k in range(1, theta.size):
        raw = raw + cloud[:, k] * theta[k]
    perm = np.argsort(raw, kind="stable")
    return raw[perm], perm


@dataclass(frozen=True)
class SOPTEstimate:
    value: float
    per_slice: np.ndarray
    directions: DirectionSet
    p: float = 2.0

    def metric(self) -> float:
        """``value ** (1/p)``, the metric form of the estimate."""
        return self.value ** (1.0 / self.p)


def _slice_value(X, Y, theta, cfg):
    xs, _ = project(X, theta)
    ys, _ = project(Y, theta)
    return solve(xs, ys, cfg).value


def sopt_estimate(X, Y, lam: float, N: int = 64, seed: int = 0,
                  cost: CostSpec | None = None, directions: DirectionSet | None = None,
                  workers: int = 1) -> SOPTEstimate:
    """Monte-Carlo sliced partial transport between two point clouds.

    Averages the 1-D optimal partial transport value over ``N`` random
    directions. Pass ``directions`` to share one direction set across
    several estimates; ``N`` and ``seed`` are then ignored. Slices run on
    ``workers`` threads but are always reduced in slice order.
    """
    cost = cost or CostSpec()
    X = as_point_cloud(X, "X")
    Y = as_point_cloud(Y, "Y")
    if X.shape[1] != Y.shape[1]:
        raise ValidationError("clouds have different dimensions")
    if not (lam > 0) or not math.isfinite(lam):
        raise ValidationError("lam must be finite and > 0")
    if directions is None:
        directions = sample_directions(X.shape[1], N, seed)
    elif directions.dim != X.shape[1]:
        raise ValidationError("direction set dimension does not match clouds")
    cfg = SolverConfig(lam=lam, cost=cost)
    thetas = list(directions.directions)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            vals = list(pool.map(lambda t: _slice_value(X, Y, t, cfg), thetas))
    else:
        vals = [_slice_value(X, Y, t, cfg) for t in thetas]
    per_slice = np.array(vals)
    return SOPTEstimate(math.fsum(per_slice) / len(vals), per_slice, directions,
                        cost.p)


def sopt_slice_displacement(X_hat, Y, theta, lam: float,
                            cost: CostSpec | None = None):
    """Move matched points of ``X_hat`` along ``theta`` onto their 1-D targets.

    Returns ``(displacements, matched)`` where ``displacements`` has the shape
    of ``X_hat`` (zero rows for unmatched points) and ``matched`` maps each
    matched source index (original order) to its target index in ``Y``.
    """
    cost = cost or CostSpec()
    X_hat = as_point_cloud(X_hat, "X_hat")
    Y = as_point_cloud(Y, "Y")
    theta = np.asarray(theta, dtype=float).reshape(-1)
    xs, px = project(X_hat, theta)
    ys, py = project(Y, theta)
    sol = solve(xs, ys, SolverConfig(lam=lam, cost=cost))
    L = sol.assignment
    dom = np.flatnonzero(L != NONE)
    src = px[dom]
    tgt = py[L[dom]]
    disp = np.zeros_like(X_hat)
    disp[src] = np.outer(ys[L[dom]] - xs[dom], theta)
    order = np.argsort(src)
    return disp, MatchedDomain(src[order], tgt[order])


@dataclass(frozen=True)
class MatchedDomain:
    """Matched source indices and their target indices, both in original order."""

    source: np.ndarray
    target: np.ndarray

    def __len__(self):
        return int(self.source.size)
