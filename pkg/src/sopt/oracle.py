"""Slow, independent reference solvers used to validate :mod:`sopt.solver`.

None of these share code with the primal-dual solver beyond the cost
function. They trade speed for transparency:

* :func:`oracle_enumerate` tries every strictly increasing partial map.
* :func:`oracle_dp` runs the edit-distance style recursion on ``c - 2*lam``.
* :func:`oracle_dp_full` is the same recursion with source destruction banned.
* :func:`oracle_extended_balanced` solves the equivalent balanced assignment
  on the problem augmented with one reservoir slot per point.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import NONE, CostSpec, ValidationError

ENUM_MAX = 14
DP_MAX_CELLS = 10_000_000
EXT_MAX = 200


@lru_cache(maxsize=None)
def _combos(n: int, k: int) -> np.ndarray:
    if k == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.array(list(combinations(range(n), k)), dtype=np.int64)


def oracle_enumerate(x, y, lam1: float, lam2: float | None = None,
                     cost: CostSpec | None = None):
    """Exhaustive minimum over strictly increasing partial maps.

    The objective is ``sum c + lam1 * (n - k) + lam2 * (m - k)`` for a plan
    with ``k`` matches. Returns ``(value, assignment)``.
    """
    cost = cost or CostSpec()
    lam2 = lam1 if lam2 is None else lam2
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, m = x.size, y.size
    if n > ENUM_MAX or m > ENUM_MAX:
        raise ValidationError(f"enumeration limited to n, m <= {ENUM_MAX}")
    C = cost.matrix(x, y)
    best = lam1 * n + lam2 * m
    best_plan = np.full(n, NONE, dtype=np.int64)
    for k in range(1, min(n, m) + 1):
        cx = _combos(n, k)
        cy = _combos(m, k)
        total = np.zeros((cx.shape[0], cy.shape[0]))
        for r in range(k):
            total += C[np.ix_(cx[:, r], cy[:, r])]
        flat = int(np.argmin(total))
        val = total.flat[flat] + lam1 * (n - k) + lam2 * (m - k)
        if val < best:
            best = float(val)
            a, b = divmod(flat, cy.shape[0])
            best_plan = np.full(n, NONE, dtype=np.int64)
            best_plan[cx[a]] = cy[b]
    return best, best_plan


def _dp_table(x, y, lam, cost):
    n, m = x.size, y.size
    D = np.zeros((n + 1, m + 1))
    for i in range(1, n + 1):
        shifted = cost(x[i - 1], y) - 2.0 * lam
        A = np.empty(m + 1)
        A[0] = 0.0
        A[1:] = np.minimum(D[i - 1, 1:], D[i - 1, :-1] + shifted)
        D[i] = np.minimum.accumulate(A)
    return D


def oracle_dp(x, y, lam: float, cost: CostSpec | None = None,
              return_plan: bool = False):
    """Dynamic program over the truncated objective.

    ``D[i][j] = min(D[i-1][j], D[i][j-1], D[i-1][j-1] + c_ij - 2*lam)`` and
    the optimum is ``D[n][m] + lam * (n + m)``. With ``return_plan`` the
    table is backtracked into a monotone assignment as well.
    """
    cost = cost or CostSpec()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, m = x.size, y.size
    if (n + 1) * (m + 1) > DP_MAX_CELLS:
        raise ValidationError("instance exceeds the DP memory budget")
    D = _dp_table(x, y, lam, cost)
    value = float(D[n, m] + lam * (n + m))
    if not return_plan:
        return value
    plan = np.full(n, NONE, dtype=np.int64)
    i, j = n, m
    while i > 0 and j > 0:
        if D[i, j] == D[i - 1, j]:
            i -= 1
        elif D[i, j] == D[i, j - 1]:
            j -= 1
        else:
            plan[i - 1] = j - 1
            i -= 1
            j -= 1
    return value, plan


def oracle_dp_full(x, y, cost: CostSpec | None = None,
                   lam2_for_report: float = 0.0) -> float:
    """Dynamic program in which every source point must be matched.

    ``D[i][j] = min(D[i][j-1], D[i-1][j-1] + c_ij)`` with ``D[i][j] = inf``
    for ``j < i``. Returns ``D[n][m] + lam2_for_report * (m - n)``.
    """
    cost = cost or CostSpec()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, m = x.size, y.size
    if n > m:
        raise ValidationError(f"full transport needs n <= m, got n={n}, m={m}")
    if (n + 1) * (m + 1) > DP_MAX_CELLS:
        raise ValidationError("instance exceeds the DP memory budget")
    prev = np.zeros(m + 1)
    for i in range(1, n + 1):
        A = np.full(m + 1, np.inf)
        A[1:] = prev[:-1] + cost(x[i - 1], y)
        prev = np.minimum.accumulate(A)
    return float(prev[m] + lam2_for_report * (m - n))


def extended_cost(x, y, lam: float, cost: CostSpec | None = None) -> np.ndarray:
    """Square ``(n+m) x (n+m)`` cost with ``c - 2*lam`` on the original block
    and zeros against the reservoir slots."""
    cost = cost or CostSpec()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, m = x.size, y.size
    M = np.zeros((n + m, n + m))
    M[:n, :m] = cost.matrix(x, y) - 2.0 * lam
    return M


def oracle_extended_balanced(x, y, lam: float, cost: CostSpec | None = None,
                             return_plan: bool = False):
    """Exact balanced assignment on the reservoir-extended problem.

    The plan need not be monotone here, which makes this an independent
    check of the monotone reduction.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, m = x.size, y.size
    if n + m > EXT_MAX:
        raise ValidationError(f"extended oracle limited to n + m <= {EXT_MAX}")
    if n + m == 0:
        return (0.0, np.zeros(0, dtype=np.int64)) if return_plan else 0.0
    M = extended_cost(x, y, lam, cost)
    rows, cols = linear_sum_assignment(M)
    value = math.fsum(M[rows, cols]) + lam * (n + m)
    if not return_plan:
        return value
    plan = np.full(n, NONE, dtype=np.int64)
    real = (rows < n) & (cols < m)
    plan[rows[real]] = cols[real]
    return value, plan
