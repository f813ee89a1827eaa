"""Compiled primal-dual kernel for 1-D optimal partial transport.

All arrays are 0-based; ``-1`` marks an unassigned point. The kernel works on
caller-owned state so that the Python driver can inspect invariants between
main-loop iterations.
"""

import numpy as np
from numba import njit

# layout of the int64 ``state`` array
J_LAST = 0
ANY_ASSIGNED = 1
CHAIN_STEPS = 2
MAX_CHAIN = 3
CONFLICTS = 4
STATE_SIZE = 5


@njit(cache=True, nogil=True)
def cost(a, b, p):
    d = abs(a - b)
    if p == 2.0:
        return d * d
    return d**p


@njit(cache=True, nogil=True)
def best_target(xk, y, psi, psi_free, j_last, any_assigned, p):
    """Minimiser of ``c(xk, y_j) - psi_j`` over ``j >= j_last``.

    Every target above ``j_last`` is still free and carries ``psi_free``, so
    on that range the reduced cost is convex in ``y_j`` and the minimiser is
    a neighbour of ``xk`` in sorted order. Ties go to the smallest index.
    """
    m = y.shape[0]
    best_j = -1
    best = np.inf
    lo = 0
    if any_assigned:
        best_j = j_last
        best = cost(xk, y[j_last], p) - psi[j_last]
        lo = j_last + 1
    if lo < m:
        pos = lo + np.searchsorted(y[lo:], xk)
        if pos > lo:
            left = pos - 1
            # smallest index carrying the same coordinate
            left = lo + np.searchsorted(y[lo:], y[left])
            r = cost(xk, y[left], p) - psi_free
            if r < best:
                best = r
                best_j = left
        if pos < m:
            r = cost(xk, y[pos], p) - psi_free
            if r < best:
                best = r
                best_j = pos
    return best_j, best


@njit(cache=True, nogil=True)
def _check_chain(x, y, lam, p, L, phi, psi, d, k, jstar, i_min, j_min, v,
                 lam_d, tol):
    # chain property: L[i_min + r] = j_min + r, with active constraints
    for r in range(k - i_min):
        i = i_min + r
        if L[i] != j_min + r:
            raise AssertionError("invariant VIII: chain is not contiguous")
        if abs(phi[i] + psi[L[i]] - cost(x[i], y[L[i]], p)) > tol:
            raise AssertionError("invariant VIII: inactive chain constraint")
    if abs(phi[k] + psi[jstar] + d[k - 1] - cost(x[k], y[jstar], p)) > tol:
        raise AssertionError("invariant VIII: new point not tight on j*")
    if np.isfinite(lam):
        best = lam - (phi[k] + v)
        for i in range(i_min, k):
            g = lam - (phi[i] + v - d[i])
            if g < best:
                best = g
        if abs(best - lam_d) > tol:
            raise AssertionError("running minimum of lam - phi is stale")


@njit(cache=True, nogil=True)
def _settle_duals(L, phi, psi, d, i_min, k, v):
    # apply the deferred increments accumulated in (v, d)
    for i in range(i_min, k):
        inc = v - d[i]
        phi[i] += inc
        psi[L[i]] -= inc
    phi[k] += v


@njit(cache=True, nogil=True)
def resolve_conflict(x, y, lam, p, eps, L, Linv, phi, psi, d, state, k, jstar,
                     debug, tol):
    m = y.shape[0]
    owner = Linv[jstar]
    state[CONFLICTS] += 1
    if owner < k - 1:
        # duplicate sources: owner carries phi == lam and can be dropped
        L[owner] = -1
        L[k] = jstar
        Linv[jstar] = k
        return

    i_min = k - 1
    j_min = jstar
    v = 0.0
    d[k] = 0.0
    d[k - 1] = 0.0
    if lam - phi[k] < lam - phi[k - 1]:
        i_delta = k
        lam_d = lam - phi[k]
    else:
        i_delta = k - 1
        lam_d = lam - phi[k - 1]

    while True:
        state[CHAIN_STEPS] += 1
        if debug:
            _check_chain(x, y, lam, p, L, phi, psi, d, k, jstar, i_min, j_min,
                         v, lam_d, tol)
        if jstar + 1 < m:
            alpha = cost(x[k], y[jstar + 1], p) - (phi[k] + v) - psi[jstar + 1]
            if alpha < 0.0:
                alpha = 0.0
        else:
            alpha = np.inf
        if j_min > 0:
            beta = (cost(x[i_min], y[j_min - 1], p)
                    - (phi[i_min] + v - d[i_min]) - psi[j_min - 1])
            if beta < 0.0:
                beta = 0.0
        else:
            beta = np.inf

        if lam_d <= min(alpha, beta) + eps:
            if not np.isfinite(lam_d):
                raise AssertionError("unbounded dual ascent in conflict resolution")
            # destroy the chain member whose potential reaches lam
            v += lam_d
            _settle_duals(L, phi, psi, d, i_min, k, v)
            phi[i_delta] = lam
            if i_delta < k:
                for i in range(k - 1, i_delta, -1):
                    L[i] = L[i] - 1
                L[k] = jstar
                L[i_delta] = -1
                for i in range(i_delta + 1, k + 1):
                    Linv[L[i]] = i
            break
        elif alpha <= min(lam_d, beta) + eps:
            # x_k moves to the free target right of the chain
            v += alpha
            _settle_duals(L, phi, psi, d, i_min, k, v)
            L[k] = jstar + 1
            Linv[jstar + 1] = k
            state[J_LAST] = jstar + 1
            break
        else:
            v += beta
            jprev = j_min - 1
            prev_owner = Linv[jprev]
            if prev_owner != -1 and prev_owner < i_min - 1:
                # duplicate sources below the chain: owner has phi == lam
                L[prev_owner] = -1
                Linv[jprev] = -1
                prev_owner = -1
            if prev_owner == -1:
                # shift the whole chain one target to the left
                _settle_duals(L, phi, psi, d, i_min, k, v)
                for i in range(i_min, k):
                    L[i] = L[i] - 1
                L[k] = jstar
                for i in range(i_min, k + 1):
                    Linv[L[i]] = i
                break
            # extend the chain by the pair (i_min - 1, j_min - 1)
            i_min -= 1
            j_min -= 1
            d[i_min] = v
            lam_d -= beta
            if lam - phi[i_min] < lam_d:
                lam_d = lam - phi[i_min]
                i_delta = i_min

    length = k - i_min + 1
    if length > state[MAX_CHAIN]:
        state[MAX_CHAIN] = length


@njit(cache=True, nogil=True)
def step(x, y, lam, psi_free, p, eps, L, Linv, phi, psi, d, state, k, debug,
         tol):
    """One main-loop iteration: insert source point ``k``."""
    m = y.shape[0]
    if m == 0:
        phi[k] = lam
        return
    jstar, reduced = best_target(x[k], y, psi, psi_free, state[J_LAST],
                                 state[ANY_ASSIGNED] == 1, p)
    if reduced >= lam - eps:
        phi[k] = min(reduced, lam)
        return
    phi[k] = reduced
    if Linv[jstar] == -1:
        L[k] = jstar
        Linv[jstar] = k
        state[J_LAST] = jstar
        state[ANY_ASSIGNED] = 1
        return
    resolve_conflict(x, y, lam, p, eps, L, Linv, phi, psi, d, state, k, jstar,
                     debug, tol)


@njit(cache=True, nogil=True)
def run(x, y, lam, psi_free, p, eps):
    n = x.shape[0]
    m = y.shape[0]
    L = np.full(n, -1, dtype=np.int64)
    Linv = np.full(m, -1, dtype=np.int64)
    phi = np.full(n, -np.inf)
    psi = np.full(m, psi_free)
    d = np.zeros(max(n, 1))
    state = np.zeros(STATE_SIZE, dtype=np.int64)
    for k in range(n):
        step(x, y, lam, psi_free, p, eps, L, Linv, phi, psi, d, state, k,
             False, 0.0)
    return L, Linv, phi, psi, state
