"""Primal-dual solver for one-dimensional optimal partial transport.

Sources are inserted one at a time in sorted order. Each new point either
is destroyed (its potential reaches ``lam``), takes a free target, or starts
a conflict chain whose potentials are raised together until one of the
boundary constraints becomes tight. Dual increments along the chain are
deferred and settled once per conflict, giving ``O(n * max(n, m))`` worst
case time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernel
from .core import (
    NONE,
    CostSpec,
    DualPair,
    PartialPlan,
    Solution,
    SolveStats,
    ValidationError,
    as_sorted_samples,
    eval_plan_cost,
)

__all__ = [
    "InvariantViolation",
    "OptimalityReport",
    "SolverConfig",
    "check_invariants",
    "solve",
    "solve_pot",
    "verify_optimality",
]


class InvariantViolation(AssertionError):
    """An instrumented solve found a broken loop invariant."""


@dataclass(frozen=True)
class SolverConfig:
    """Solver parameters.

    ``lam`` is the per-point creation/destruction penalty. ``lam = inf``
    selects the mode where every source point must be transported; the
    targets then keep the finite penalty ``pot_penalty``.
    """

    lam: float = 1.0
    cost: CostSpec = field(default_factory=CostSpec)
    eps: float = 1e-12
    debug_invariants: bool = False
    pot_penalty: float = 0.0

    def __post_init__(self):
        if math.isnan(self.lam) or self.lam < 0:
            raise ValidationError(f"lam must be >= 0, got {self.lam!r}")
        if not math.isfinite(self.pot_penalty) or self.pot_penalty < 0:
            raise ValidationError("pot_penalty must be finite and >= 0")
        if self.eps < 0:
            raise ValidationError("eps must be >= 0")

    @classmethod
    def pot(cls, penalty: float = 0.0, **kwargs) -> "SolverConfig":
        return cls(lam=math.inf, pot_penalty=penalty, **kwargs)

    @property
    def is_pot(self) -> bool:
        return math.isinf(self.lam)


def _check_tol(x, y, lam, p):
    scale = 1.0
    if x.size and y.size:
        lo = min(x[0], y[0])
        hi = max(x[-1], y[-1])
        scale = max(scale, (hi - lo) ** p)
    if math.isfinite(lam):
        scale = max(scale, lam)
    return 1e-9 * scale


def check_invariants(x, y, lam, psi_free, p, L, Linv, phi, psi, k, tol):
    """Assert the loop invariants after the source points ``[0, k)`` are placed.

    Raises :class:`InvariantViolation` naming the first broken invariant.
    """
    bound_x = lam
    bound_y = lam if math.isfinite(lam) else psi_free
    done = slice(0, k)
    if np.any(psi > bound_y + tol):
        raise InvariantViolation("I: psi exceeds its bound")
    unassigned_y = Linv == NONE
    if np.any(psi[unassigned_y] < bound_y - tol):
        raise InvariantViolation("II: psi below bound on a free target")
    if np.any(phi[done] > bound_x + tol):
        raise InvariantViolation("III: phi exceeds lam")
    free_x = L[done] == NONE
    if np.any(phi[done][free_x] < bound_x - tol):
        raise InvariantViolation("IV: phi below lam on a destroyed source")
    if k and y.size:
        slack = CostSpec(p).matrix(x[done], y) - phi[done, None] - psi[None, :]
        if slack.min() < -tol:
            raise InvariantViolation("V: dual constraint violated")
    dom = np.flatnonzero(L[done] != NONE)
    if dom.size:
        c = CostSpec(p)(x[dom], y[L[dom]])
        if np.any(np.abs(phi[dom] + psi[L[dom]] - c) > tol):
            raise InvariantViolation("VI: inactive constraint on a matched pair")
        if np.any(np.diff(L[dom]) <= 0):
            raise InvariantViolation("VII: assignment is not monotone")
        if np.any(Linv[L[dom]] != dom) or np.count_nonzero(~unassigned_y) != dom.size:
            raise InvariantViolation("inverse assignment out of sync")
    if np.any(L[k:] != NONE):
        raise InvariantViolation("future source already assigned")


def _run_instrumented(x, y, lam, psi_free, p, eps):
    n, m = x.size, y.size
    L = np.full(n, NONE, dtype=np.int64)
    Linv = np.full(m, NONE, dtype=np.int64)
    phi = np.full(n, -np.inf)
    psi = np.full(m, float(psi_free))
    d = np.zeros(max(n, 1))
    state = np.zeros(_kernel.STATE_SIZE, dtype=np.int64)
    tol = _check_tol(x, y, lam, p)
    cost = CostSpec(p)
    check_invariants(x, y, lam, psi_free, p, L, Linv, phi, psi, 0, tol)
    for k in range(n):
        if m:
            # the candidate search must agree with a full scan over j >= j_last
            lo = state[_kernel.J_LAST] if state[_kernel.ANY_ASSIGNED] else 0
            j, r = _kernel.best_target(
                x[k], y, psi, float(psi_free), state[_kernel.J_LAST],
                bool(state[_kernel.ANY_ASSIGNED]), p,
            )
            brute = (cost(x[k], y[lo:]) - psi[lo:]).min()
            if abs(r - brute) > tol:
                raise InvariantViolation("candidate search missed the minimiser")
        try:
            _kernel.step(x, y, lam, float(psi_free), p, eps, L, Linv, phi, psi,
                         d, state, k, True, tol)
        except AssertionError as exc:
            raise InvariantViolation(str(exc)) from None
        check_invariants(x, y, lam, psi_free, p, L, Linv, phi, psi, k + 1, tol)
    return L, Linv, phi, psi, state


def _solve_sorted(x, y, lam, psi_free, cfg: SolverConfig):
    p = float(cfg.cost.p)
    if cfg.debug_invariants:
        L, _, phi, psi, state = _run_instrumented(x, y, lam, psi_free, p, cfg.eps)
    else:
        L, _, phi, psi, state = _kernel.run(x, y, float(lam), float(psi_free), p,
                                            float(cfg.eps))
    stats = SolveStats(
        iterations=int(x.size),
        chain_steps=int(state[_kernel.CHAIN_STEPS]),
        max_chain=int(state[_kernel.MAX_CHAIN]),
        conflicts=int(state[_kernel.CONFLICTS]),
    )
    return L, phi, psi, stats


def solve(x, y, config: SolverConfig | None = None) -> Solution:
    """Optimal partial transport between two sorted 1-D point lists.

    Parameters
    ----------
    x, y : array_like
        Source and target coordinates, sorted non-decreasing. Duplicates are
        allowed.
    config : SolverConfig, optional
        ``lam = inf`` is forwarded to :func:`solve_pot`.

    Returns
    -------
    Solution
        Optimal plan, optimal potentials and the primal objective
        ``sum c(x_i, y_L[i]) + lam * (n + m - 2|dom L|)``.

    Examples
    --------
    >>> sol = solve([0.0, 3.0], [1.0], SolverConfig(lam=2.0))
    >>> sol.value, sol.assignment.tolist()
    (3.0, [0, -1])
    """
    cfg = config or SolverConfig()
    if cfg.is_pot:
        return solve_pot(x, y, cfg)
    x = as_sorted_samples(x, "x")
    y = as_sorted_samples(y, "y")
    L, phi, psi, stats = _solve_sorted(x, y, cfg.lam, cfg.lam, cfg)
    plan = PartialPlan(L, y.size)
    value = eval_plan_cost(x, y, plan, cfg.lam, cfg.cost)
    return Solution(plan, DualPair(phi, psi), value, stats)


def solve_pot(x, y, config: SolverConfig | None = None, *, allow_flip: bool = True
              ) -> Solution:
    """Partial transport where every source point must be matched.

    Targets left unmatched cost ``config.pot_penalty`` each, so the reported
    value is ``sum c(x_i, y_L[i]) + pot_penalty * (m - n)``. When ``n > m``
    the roles are swapped (every target is matched, surplus sources pay the
    penalty) and the plan is reported from the source side.
    """
    cfg = config or SolverConfig.pot()
    if not cfg.is_pot:
        cfg = SolverConfig.pot(cfg.pot_penalty, cost=cfg.cost, eps=cfg.eps,
                               debug_invariants=cfg.debug_invariants)
    x = as_sorted_samples(x, "x")
    y = as_sorted_samples(y, "y")
    n, m = x.size, y.size
    penalty = cfg.pot_penalty
    if n > m:
        if not allow_flip:
            raise ValidationError(
                f"full source transport needs n <= m, got n={n}, m={m}")
        Lf, phi_y, psi_x, stats = _solve_sorted(y, x, math.inf, penalty, cfg)
        L = np.full(n, NONE, dtype=np.int64)
        L[Lf] = np.arange(m)
        phi, psi = psi_x, phi_y
    else:
        L, phi, psi, stats = _solve_sorted(x, y, math.inf, penalty, cfg)
    plan = PartialPlan(L, m)
    dom = plan.domain
    matched = math.fsum(cfg.cost(x[dom], y[L[dom]])) if dom.size else 0.0
    value = matched + penalty * abs(m - n)
    return Solution(plan, DualPair(phi, psi), value, stats)


@dataclass
class OptimalityReport:
    """Pass/fail per optimality condition, with the worst violation seen."""

    checks: dict = field(default_factory=dict)
    worst: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def failed(self) -> list:
        return [k for k, v in self.checks.items() if not v]

    def __str__(self):
        lines = [f"{'PASS' if v else 'FAIL'} {k} (worst {self.worst.get(k, 0.0):.3g})"
                 for k, v in self.checks.items()]
        return "\n".join(lines)


def verify_optimality(x, y, solution: Solution, lam: float,
                      cost: CostSpec | None = None, tol: float = 1e-9,
                      penalty: float = 0.0) -> OptimalityReport:
    """Check a solution against the primal-dual optimality conditions.

    Never raises on a bad solution; every condition is reported. ``tol`` is
    relative to ``max(1, lam, |value|)``. For ``lam = inf`` the target-side
    bound is ``penalty``.
    """
    cost = cost or CostSpec()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    L = np.asarray(solution.plan.assignment)
    phi = np.asarray(solution.duals.phi, dtype=float)
    psi = np.asarray(solution.duals.psi, dtype=float)
    finite = math.isfinite(lam)
    n, m = x.size, y.size
    if finite:
        bound_x = bound_y = lam
    elif n <= m:
        bound_x, bound_y = math.inf, penalty
    else:
        bound_x, bound_y = penalty, math.inf
    scale = max(1.0, abs(solution.value), lam if finite else penalty)
    atol = tol * scale
    rep = OptimalityReport()

    def record(name, ok, worst=0.0):
        rep.checks[name] = bool(ok)
        rep.worst[name] = float(worst)

    shapes_ok = L.shape == (n,) and phi.shape == (n,) and psi.shape == (m,)
    record("shapes", shapes_ok)
    if not shapes_ok:
        return rep

    dom = np.flatnonzero(L != NONE)
    in_range = bool(np.all((L[dom] >= 0) & (L[dom] < m))) if dom.size else True
    record("plan_in_range", in_range)
    if not in_range:
        return rep
    tgt = L[dom]
    record("monotone", dom.size < 2 or bool(np.all(np.diff(tgt) > 0)))

    worst = 0.0
    for start in range(0, n, 1024):
        blk = slice(start, min(n, start + 1024))
        if m:
            viol = phi[blk, None] + psi[None, :] - cost.matrix(x[blk], y)
            worst = max(worst, float(viol.max()))
    record("dual_feasible", worst <= atol, max(worst, 0.0))

    c_match = cost(x[dom], y[tgt]) if dom.size else np.zeros(0)
    gap = np.abs(phi[dom] + psi[tgt] - c_match) if dom.size else np.zeros(0)
    record("active_on_support", bool(np.all(gap <= atol)), gap.max(initial=0.0))

    free_x = np.ones(n, dtype=bool)
    free_x[dom] = False
    free_y = np.ones(m, dtype=bool)
    free_y[tgt] = False
    lo = bound_x - phi[free_x]
    record("phi_below_lam_assigned", bool(np.all(lo <= atol)), lo.max(initial=0.0))
    lo = bound_y - psi[free_y]
    record("psi_below_lam_assigned", bool(np.all(lo <= atol)), lo.max(initial=0.0))
    over = np.concatenate([phi - bound_x, psi - bound_y])
    record("potentials_bounded", bool(np.all(over <= atol)), over.max(initial=0.0))

    dual = (math.fsum(np.minimum(phi, bound_x))
            + math.fsum(np.minimum(psi, bound_y)))
    if finite:
        primal = math.fsum(c_match) + lam * (n + m - 2 * dom.size)
        record("truncation_2lam", bool(np.all(c_match <= 2 * lam + atol)),
               (c_match - 2 * lam).max(initial=0.0))
    else:
        primal = math.fsum(c_match) + penalty * abs(m - n)
    record("strong_duality", abs(primal - dual) <= atol, abs(primal - dual))
    record("value_consistent", abs(primal - solution.value) <= atol,
           abs(primal - solution.value))
    return rep
