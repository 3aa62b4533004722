"""Compiled inner loops for the classical-correlation supremum.

A two-qubit state enters through its Bloch data: local vectors ``a``, ``b``
and correlation matrix ``T`` with ``rho = (II + a.s x I + I x b.s + T_kl s_k x s_l) / 4``.
Outcome probabilities for projectors along unit vectors ``n`` (side A) and
``m`` (side B) are then ``(1 + s a.n + t b.m + s t n.T.m) / 4``, ``s, t = +-1``.
"""

import math

import numpy as np
from numba import njit

_LOG2 = math.log(2.0)


@njit(cache=True, nogil=True)
def _xlog2x(p):
    if p <= 0.0:
        return 0.0
    return p * math.log(p) / _LOG2


@njit(cache=True, nogil=True)
def classical_mi(x, a, b, t):
    """Classical mutual information (bits) of the two-side outcome table."""
    sa, ca = math.sin(x[0]), math.cos(x[0])
    sb, cb = math.sin(x[2]), math.cos(x[2])
    n0, n1, n2 = sa * math.cos(x[1]), sa * math.sin(x[1]), ca
    m0, m1, m2 = sb * math.cos(x[3]), sb * math.sin(x[3]), cb
    an = a[0] * n0 + a[1] * n1 + a[2] * n2
    bm = b[0] * m0 + b[1] * m1 + b[2] * m2
    tm0 = t[0, 0] * m0 + t[0, 1] * m1 + t[0, 2] * m2
    tm1 = t[1, 0] * m0 + t[1, 1] * m1 + t[1, 2] * m2
    tm2 = t[2, 0] * m0 + t[2, 1] * m1 + t[2, 2] * m2
    ntm = n0 * tm0 + n1 * tm1 + n2 * tm2
    h_joint = (
        _xlog2x(0.25 * (1.0 + an + bm + ntm))
        + _xlog2x(0.25 * (1.0 + an - bm - ntm))
        + _xlog2x(0.25 * (1.0 - an + bm - ntm))
        + _xlog2x(0.25 * (1.0 - an - bm + ntm))
    )
    h_a = _xlog2x(0.5 * (1.0 + an)) + _xlog2x(0.5 * (1.0 - an))
    h_b = _xlog2x(0.5 * (1.0 + bm)) + _xlog2x(0.5 * (1.0 - bm))
    # H(A) + H(B) - H(AB) with H = -sum p log p
    return h_joint - h_a - h_b


@njit(cache=True, nogil=True)
def _neg_mi(x, a, b, t):
    return -classical_mi(x, a, b, t)


@njit(cache=True, nogil=True)
def nelder_mead(x0, a, b, t, step, fatol, xatol, maxiter):
    """Minimize -classical_mi from x0. Returns (x, f, converged)."""
    dim = x0.shape[0]
    sim = np.empty((dim + 1, dim))
    fs = np.empty(dim + 1)
    for i in range(dim + 1):
        for j in range(dim):
            sim[i, j] = x0[j]
        if i > 0:
            sim[i, i - 1] += step
        fs[i] = _neg_mi(sim[i], a, b, t)

    xr = np.empty(dim)
    xe = np.empty(dim)
    xc = np.empty(dim)
    cen = np.empty(dim)
    converged = False
    for _ in range(maxiter):
        order = np.argsort(fs)
        sim = sim[order]
        fs = fs[order]

        fspread = 0.0
        xspread = 0.0
        for i in range(1, dim + 1):
            fspread = max(fspread, abs(fs[i] - fs[0]))
            for j in range(dim):
                xspread = max(xspread, abs(sim[i, j] - sim[0, j]))
        if fspread <= fatol and xspread <= xatol:
            converged = True
            break

        for j in range(dim):
            s = 0.0
            for i in range(dim):
                s += sim[i, j]
            cen[j] = s / dim

        for j in range(dim):
            xr[j] = 2.0 * cen[j] - sim[dim, j]
        fr = _neg_mi(xr, a, b, t)

        if fr < fs[0]:
            for j in range(dim):
                xe[j] = 3.0 * cen[j] - 2.0 * sim[dim, j]
            fe = _neg_mi(xe, a, b, t)
            if fe < fr:
                sim[dim] = xe
                fs[dim] = fe
            else:
                sim[dim] = xr
                fs[dim] = fr
            continue
        if fr < fs[dim - 1]:
            sim[dim] = xr
            fs[dim] = fr
            continue

        shrink = False
        if fr < fs[dim]:
            for j in range(dim):
                xc[j] = 1.5 * cen[j] - 0.5 * sim[dim, j]
            fc = _neg_mi(xc, a, b, t)
            if fc <= fr:
                sim[dim] = xc
                fs[dim] = fc
            else:
                shrink = True
        else:
            for j in range(dim):
                xc[j] = 0.5 * cen[j] + 0.5 * sim[dim, j]
            fc = _neg_mi(xc, a, b, t)
            if fc < fs[dim]:
                sim[dim] = xc
                fs[dim] = fc
            else:
                shrink = True
        if shrink:
            for i in range(1, dim + 1):
                for j in range(dim):
                    sim[i, j] = sim[0, j] + 0.5 * (sim[i, j] - sim[0, j])
                fs[i] = _neg_mi(sim[i], a, b, t)

    best = np.argmin(fs)
    return sim[best].copy(), fs[best], converged


@njit(cache=True, nogil=True)
def sup_batch(a, b, t, starts, step, fatol, xatol, maxiter):
    """Multistart maximum of classical_mi for each state in a batch.

    Returns (values, argmax angles, number of non-converged starts) per state.
    Ties between starts keep the earliest start.
    """
    n = a.shape[0]
    values = np.empty(n)
    args = np.empty((n, 4))
    failures = np.zeros(n, dtype=np.int64)
    for k in range(n):
        best = -1.0
        for s in range(starts.shape[0]):
            x, f, ok = nelder_mead(starts[s], a[k], b[k], t[k], step, fatol, xatol, maxiter)
            if not ok:
                failures[k] += 1
            if -f > best:
                best = -f
                args[k] = x
        values[k] = best
    return values, args, failures
