"""Rigid-plus-scale point cloud registration driven by sliced partial transport.

Each iteration draws one direction, matches the current estimate ``sRX + b``
to the target along it with the 1-D partial solver, nudges the matched
points onto their targets along the direction, and refits the similarity
transform in closed form. The penalty ``lam`` is steered so that the number
of matches tracks the known count of clean source points.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .core import CostSpec, ValidationError
from .sliced import as_point_cloud, sample_directions, sopt_slice_displacement

log = logging.getLogger(__name__)


class DegenerateFitError(ValidationError):
    """The source points do not span enough dimensions for a unique fit."""


@dataclass(frozen=True)
class Transform:
    """Similarity transform ``T(x) = s R x + beta``."""

    R: np.ndarray
    s: float
    beta: np.ndarray

    @classmethod
    def identity(cls, d: int = 3) -> "Transform":
        return cls(np.eye(d), 1.0, np.zeros(d))

    def __call__(self, points) -> np.ndarray:
        P = np.asarray(points, dtype=float)
        return self.s * P @ self.R.T + self.beta

    def matrix(self) -> np.ndarray:
        """The ``d x (d+1)`` matrix ``[sR | beta]``."""
        return np.hstack([self.s * self.R, self.beta[:, None]])

    def is_proper(self, tol: float = 1e-9) -> bool:
        d = self.R.shape[0]
        return (np.allclose(self.R.T @ self.R, np.eye(d), atol=tol)
                and abs(np.linalg.det(self.R) - 1.0) <= tol and self.s > 0)

    def to_dict(self) -> dict:
        return {"R": self.R.reshape(-1).tolist(), "s": float(self.s),
                "beta": self.beta.tolist(), "dim": int(self.R.shape[0])}

    @classmethod
    def from_dict(cls, data: dict) -> "Transform":
        beta = np.asarray(data["beta"], dtype=float)
        d = beta.size
        return cls(np.asarray(data["R"], dtype=float).reshape(d, d),
                   float(data["s"]), beta)


def umeyama_fit(source, target) -> Transform:
    """Least-squares similarity transform mapping ``source`` onto ``target``.

    Raises :class:`DegenerateFitError` if the centred source points are rank
    deficient.
    """
    X = as_point_cloud(source, "source")
    Y = as_point_cloud(target, "target")
    if X.shape != Y.shape:
        raise ValidationError(f"point sets differ in shape: {X.shape} vs {Y.shape}")
    k, d = X.shape
    if k < d + 1:
        raise DegenerateFitError(f"need at least {d + 1} pairs, got {k}")
    mx = X.mean(axis=0)
    my = Y.mean(axis=0)
    Xc = X - mx
    Yc = Y - my
    var_x = float((Xc * Xc).sum()) / k
    sv = np.linalg.svd(Xc, compute_uv=False)
    if var_x == 0.0 or sv[-1] <= 1e-12 * sv[0]:
        raise DegenerateFitError(
            f"source spans fewer than {d} dimensions (singular values {sv})")
    cov = Yc.T @ Xc / k
    U, D, Vt = np.linalg.svd(cov)
    S = np.ones(d)
    if np.linalg.det(U) * np.linalg.det(Vt) < 0:
        S[-1] = -1.0
    R = (U * S) @ Vt
    s = float((D * S).sum() / var_x)
    beta = my - s * R @ mx
    return Transform(R, s, beta)


def transform_error(T_hat: Transform, T_true: Transform) -> float:
    """Frobenius norm of ``[sR | beta]`` differences."""
    if T_hat.R.shape != T_true.R.shape:
        raise ValidationError("transforms have different dimensions")
    return float(np.linalg.norm(T_hat.matrix() - T_true.matrix()))


@dataclass(frozen=True)
class RegistrationConfig:
    n0: int
    N: int = 1500
    lam0: float | None = None
    decrease: float = 0.98
    increase: float = 1.02
    seed: int = 0
    cost: CostSpec = field(default_factory=CostSpec)

    def __post_init__(self):
        if self.N < 1:
            raise ValidationError("N must be >= 1")
        if not (0 < self.decrease < 1) or not (self.increase > 1):
            raise ValidationError("need 0 < decrease < 1 < increase")
        if self.lam0 is not None and not (self.lam0 > 0):
            raise ValidationError("lam0 must be > 0")


@dataclass
class RegistrationResult:
    transform: Transform
    lam: np.ndarray
    matched: np.ndarray
    warnings: list = field(default_factory=list)

    def trace_rows(self):
        for it, (lam, k) in enumerate(zip(self.lam, self.matched)):
            yield it, float(lam), int(k)


def register(X, Y, config: RegistrationConfig, callback=None) -> RegistrationResult:
    """Estimate ``T`` with ``T(X) ~ Y`` by iterative sliced partial transport.

    ``callback(iteration, transform)`` is invoked after each refit.
    """
    X = as_point_cloud(X, "X")
    Y = as_point_cloud(Y, "Y")
    n, d = X.shape
    if Y.shape[1] != d:
        raise ValidationError("clouds have different dimensions")
    if not (0 < config.n0 <= n):
        raise ValidationError(f"n0 must lie in (0, {n}], got {config.n0}")

    T = Transform(np.eye(d), 1.0, Y.mean(axis=0) - X.mean(axis=0))
    if config.lam0 is None:
        extent = Y.max(axis=0) - Y.min(axis=0)
        lam = float(extent @ extent)
    else:
        lam = float(config.lam0)
    thetas = sample_directions(d, config.N, config.seed).directions

    lams = np.empty(config.N)
    matched = np.empty(config.N, dtype=np.int64)
    warnings = []
    for it in range(config.N):
        theta = thetas[it]
        Y_hat = T(X)
        disp, dom = sopt_slice_displacement(Y_hat, Y, theta, lam, config.cost)
        Y_hat += disp
        k = len(dom)
        lams[it] = lam
        matched[it] = k
        if k >= d + 1:
            try:
                T = umeyama_fit(X[dom.source], Y_hat[dom.source])
            except DegenerateFitError as exc:
                warnings.append((it, str(exc)))
                log.warning("iteration %d: fit skipped: %s", it, exc)
        else:
            msg = f"only {k} matches, fit skipped"
            warnings.append((it, msg))
            log.warning("iteration %d: %s", it, msg)
        if callback is not None:
            callback(it, T)
        lam *= config.decrease if k > config.n0 else config.increase
        if not math.isfinite(lam):
            raise ValidationError("lam diverged; check n0 against the data")
    return RegistrationResult(T, lams, matched, warnings)


# anisotropic blobs at fixed asymmetric offsets; no rotational symmetry
_SHAPE_CENTRES = np.array([[0.0, 0.0, 0.0], [1.6, 0.4, -0.3], [-0.9, 1.3, 0.5],
                           [0.3, -1.1, 1.2], [-1.4, -0.6, -0.9]])
_SHAPE_SCALES = np.array([[0.9, 0.5, 0.3], [0.3, 0.6, 0.2], [0.4, 0.2, 0.5],
                          [0.2, 0.4, 0.3], [0.5, 0.3, 0.2]])
_SHAPE_WEIGHTS = np.array([0.35, 0.2, 0.2, 0.15, 0.1])


def make_shape(n: int, seed: int) -> np.ndarray:
    """Sample ``n`` points from a fixed asymmetric 3-D shape."""
    rng = np.random.default_rng(seed)
    comp = rng.choice(len(_SHAPE_WEIGHTS), size=n, p=_SHAPE_WEIGHTS)
    return _SHAPE_CENTRES[comp] + rng.standard_normal((n, 3)) * _SHAPE_SCALES[comp]


def rotation_from_angles(a, b, c) -> np.ndarray:
    """Rotation ``Rz(c) Ry(b) Rx(a)``."""
    ca, sa, cb, sb, cc, sc = np.cos(a), np.sin(a), np.cos(b), np.sin(b), np.cos(c), np.sin(c)
    Rx = np.array([[1, 0, 0], [0, ca, -sa], [0, sa, ca]])
    Ry = np.array([[cb, 0, sb], [0, 1, 0], [-sb, 0, cb]])
    Rz = np.array([[cc, -sc, 0], [sc, cc, 0], [0, 0, 1]])
    return Rz @ Ry @ Rx


def random_transform(points, rng) -> Transform:
    """Angles in ``[-pi/3, pi/3]``, scale in ``(0, 2]``, translation within
    two standard deviations of ``points`` per axis."""
    angles = rng.uniform(-np.pi / 3, np.pi / 3, size=3)
    s = float(2.0 - rng.uniform(0.0, 2.0))
    std = np.asarray(points).std(axis=0)
    beta = rng.uniform(-2 * std, 2 * std)
    return Transform(rotation_from_angles(*angles), s, beta)


def add_uniform_noise(points, fraction: float, rng) -> np.ndarray:
    """Append ``fraction * n`` points drawn uniformly from ``[-M, M]^d`` with
    ``M`` the largest point norm."""
    P = np.asarray(points, dtype=float)
    count = int(round(fraction * P.shape[0]))
    M = float(np.linalg.norm(P, axis=1).max())
    noise = rng.uniform(-M, M, size=(count, P.shape[1]))
    return np.vstack([P, noise])
