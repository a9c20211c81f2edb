"""Compiled inner loops for the DPG and PDS iterations.

Arrays are laid out edge-major with the batch axis last so the innermost loops
run over contiguous memory.  The pure-numpy step functions in
:mod:`bgsl.solvers` are the reference these kernels are tested against.
"""
from __future__ import annotations

import numpy as np
from numba import njit

# iterates beyond this magnitude count as divergent
BLOWUP = 1e100


@njit(cache=True)
def _all_nodes_covered(a, n, rows, cols, deg):
    deg[:] = 0.0
    for q in range(a.shape[0]):
        deg[rows[q]] += a[q]
        deg[cols[q]] += a[q]
    for i in range(n):
        if deg[i] <= 0.0:
            return False
    return True


@njit(cache=True)
def dpg_iterate(e, n, rows, cols, a, lam, max_iter, rel_tol):
    """Run DPG on a single (already theta-scaled) input until convergence.

    Updates ``a`` and ``lam`` in place.  Returns ``(iters, rel_change, status)``
    where status is 0 for converged, 1 for budget exhausted, 2 for non-finite.
    """
    K = e.shape[0]
    nm1 = n - 1.0
    deg = np.empty(n)
    rel = np.inf
    for it in range(1, max_iter + 1):
        deg[:] = 0.0
        for q in range(K):
            deg[rows[q]] += a[q]
            deg[cols[q]] += a[q]
        finite = True
        for i in range(n):
            d = deg[i] - nm1 * lam[i]
            lam[i] = (np.sqrt(d * d + 4.0 * nm1) - d) / (2.0 * nm1)
        diff = 0.0
        norm = 0.0
        for q in range(K):
            old = a[q]
            new = 0.5 * (lam[rows[q]] + lam[cols[q]]) - e[q]
            if new < 0.0:
                new = 0.0
            if not np.isfinite(new):
                finite = False
            a[q] = new
            diff += (new - old) * (new - old)
            norm += old * old
        if not finite:
            return it, np.nan, 2
        rel = np.sqrt(diff) / max(np.sqrt(norm), 1e-300)
        # the optimum has no isolated node, so an iterate with one is still moving in lam
        if rel <= rel_tol and _all_nodes_covered(a, n, rows, cols, deg):
            return it, rel, 0
    return max_iter, rel, 1


@njit(cache=True)
def pds_iterate(e, n, rows, cols, alpha, beta, gamma, a, v, max_iter, rel_tol):
    """Primal-dual splitting iterations; same return contract as ``dpg_iterate``."""
    K = e.shape[0]
    r1 = np.empty(K)
    p1 = np.empty(K)
    r2 = np.empty(n)
    p2 = np.empty(n)
    Sa = np.empty(n)
    Sp1 = np.empty(n)
    rel = np.inf
    for it in range(1, max_iter + 1):
        Sa[:] = 0.0
        for q in range(K):
            Sa[rows[q]] += a[q]
            Sa[cols[q]] += a[q]
        for q in range(K):
            r1[q] = a[q] - gamma * (2.0 * beta * a[q] + 2.0 * e[q] + v[rows[q]] + v[cols[q]])
            p1[q] = r1[q] if r1[q] > 0.0 else 0.0
        for i in range(n):
            r2[i] = v[i] + gamma * Sa[i]
            p2[i] = 0.5 * (r2[i] - np.sqrt(r2[i] * r2[i] + 4.0 * alpha * gamma))
        Sp1[:] = 0.0
        for q in range(K):
            Sp1[rows[q]] += p1[q]
            Sp1[cols[q]] += p1[q]
        diff = 0.0
        norm = 0.0
        finite = True
        for q in range(K):
            q1 = p1[q] - gamma * (2.0 * beta * p1[q] + 2.0 * e[q] + p2[rows[q]] + p2[cols[q]])
            old = a[q]
            new = old - r1[q] + q1
            # far past any meaningful weight rounding can freeze the update, so cap the magnitude
            if not np.isfinite(new) or abs(new) > BLOWUP:
                finite = False
            a[q] = new
            diff += (new - old) * (new - old)
            norm += old * old
        for i in range(n):
            q2 = p2[i] + gamma * Sp1[i]
            v[i] = v[i] - r2[i] + q2
            if not np.isfinite(v[i]) or abs(v[i]) > BLOWUP:
                finite = False
        if not finite:
            return it, np.nan, 2
        rel = np.sqrt(diff) / max(np.sqrt(norm), 1e-300)
        if rel <= rel_tol:
            return it, rel, 0
    return max_iter, rel, 1


# fast-math without the no-nan/no-inf flags, so overflow still propagates
_FAST = {"nsz", "arcp", "contract", "afn", "reassoc"}


@njit(cache=True, fastmath=_FAST)
def unroll_batch(E, theta, n, rows, cols, depth, a0, lam0, with_tangent):
    """Depth-``depth`` DPG unrolling over a batch of columns.

    ``E`` has shape ``(K, B)`` and ``theta`` shape ``(B,)``: column ``b`` is
    the input ``theta[b] * E[:, b]``.  When ``with_tangent`` is set the second
    output holds the derivative of the output with respect to ``log(theta)``;
    otherwise it is an empty array.
    """
    K, B = E.shape
    nm1 = n - 1.0
    a = np.empty((K, B))
    lam = np.empty((n, B))
    deg = np.empty((n, B))
    for q in range(K):
        for b in range(B):
            a[q, b] = a0
    for i in range(n):
        for b in range(B):
            lam[i, b] = lam0
    if with_tangent:
        da = np.zeros((K, B))
        dlam = np.zeros((n, B))
        ddeg = np.empty((n, B))
    else:
        da = np.zeros((0, 0))
        dlam = np.zeros((0, 0))
        ddeg = np.zeros((0, 0))
    for _ in range(depth):
        deg[:] = 0.0
        for q in range(K):
            r = rows[q]
            c = cols[q]
            for b in range(B):
                deg[r, b] += a[q, b]
                deg[c, b] += a[q, b]
        if with_tangent:
            ddeg[:] = 0.0
            for q in range(K):
                r = rows[q]
                c = cols[q]
                for b in range(B):
                    ddeg[r, b] += da[q, b]
                    ddeg[c, b] += da[q, b]
            for i in range(n):
                for b in range(B):
                    d = deg[i, b] - nm1 * lam[i, b]
                    dd = ddeg[i, b] - nm1 * dlam[i, b]
                    s = np.sqrt(d * d + 4.0 * nm1)
                    lam[i, b] = (s - d) / (2.0 * nm1)
                    dlam[i, b] = dd * (d / s - 1.0) / (2.0 * nm1)
            for q in range(K):
                r = rows[q]
                c = cols[q]
                for b in range(B):
                    te = theta[b] * E[q, b]
                    pre = 0.5 * (lam[r, b] + lam[c, b]) - te
                    if pre > 0.0:
                        a[q, b] = pre
                        da[q, b] = 0.5 * (dlam[r, b] + dlam[c, b]) - te
                    else:
                        a[q, b] = 0.0
                        da[q, b] = 0.0
        else:
            for i in range(n):
                for b in range(B):
                    d = deg[i, b] - nm1 * lam[i, b]
                    lam[i, b] = (np.sqrt(d * d + 4.0 * nm1) - d) / (2.0 * nm1)
            for q in range(K):
                r = rows[q]
                c = cols[q]
                for b in range(B):
                    pre = 0.5 * (lam[r, b] + lam[c, b]) - theta[b] * E[q, b]
                    a[q, b] = pre if pre > 0.0 else 0.0
    return a, da
