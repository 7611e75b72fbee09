"""Compiled dynamic-programming kernels.

Every engine returns, for each component l, the level sums D_{c,l} for
c = 1..qmax in one sweep, so all q <= qmax come out of a single pass.
Layout convention: D[c, k] is the level-c sum restricted to the first k rows.
"""
import numpy as np
from numba import njit


def order1_levels(A: np.ndarray, qmax: int) -> np.ndarray:
    """Elementary symmetric sums e_c of each column of A, c = 1..qmax.

    Runs the recursion D_c(m) = D_c(m-1) + D_{c-1}(m-1) a_m as a cumulative
    sum, vectorised over columns.  Returns shape (qmax, L).
    """
    n, L = A.shape
    out = np.empty((qmax, L))
    prev = np.ones((n, L))  # D_{c-1}(m-1) for m = 1..n, here D_0 = 1
    for c in range(1, qmax + 1):
        cur = np.cumsum(prev * A, axis=0)  # D_c(m), m = 1..n
        out[c - 1] = cur[-1]
        prev = np.empty_like(cur)
        prev[0] = 0.0
        prev[1:] = cur[:-1]
    return out


@njit(cache=True)
def sign_tensor(X):
    """S[k, u, v] = sgn(X[u, k] - X[v, k]), shape (p, n, n)."""
    n, p = X.shape
    S = np.empty((p, n, n))
    for k in range(p):
        for u in range(n):
            xu = X[u, k]
            for v in range(n):
                d = xu - X[v, k]
                S[k, u, v] = 1.0 if d > 0 else (-1.0 if d < 0 else 0.0)
    return S


@njit(cache=True, fastmath=True)
def _push_levels(D, h, m, qmax):
    # D[c, m + 1] = D[c, m] + sum_{i < m} D[c - 1, i] * h[i]
    for c in range(1, qmax + 1):
        acc = 0.0
        for i in range(m):
            acc += D[c - 1, i] * h[i]
        D[c, m + 1] = D[c, m] + acc


@njit(cache=True, fastmath=True)
def monotone_r2_signs(S, pairs, qmax):
    """Kendall-type kernel h(i, m) = S[a, m, i] * S[b, m, i]."""
    L = pairs.shape[0]
    n = S.shape[1]
    out = np.zeros((L, qmax))
    D = np.zeros((qmax + 1, n + 1))
    h = np.empty(n)
    for l in range(L):
        a = pairs[l, 0]
        b = pairs[l, 1]
        D[:, :] = 0.0
        D[0, :] = 1.0
        for m in range(n):
            for i in range(m):
                h[i] = S[a, m, i] * S[b, m, i]
            _push_levels(D, h, m, qmax)
        for c in range(qmax):
            out[l, c] = D[c + 1, n]
    return out


@njit(cache=True, fastmath=True)
def monotone_r2_linreg(X, e, qmax):
    """Regression kernel h_l(i, m) = (x_il - x_ml)(e_i - e_m) / 2."""
    n, p = X.shape
    out = np.zeros((p, qmax))
    D = np.zeros((qmax + 1, n + 1))
    h = np.empty(n)
    for l in range(p):
        D[:, :] = 0.0
        D[0, :] = 1.0
        for m in range(n):
            xm = X[m, l]
            em = e[m]
            for i in range(m):
                h[i] = 0.5 * (X[i, l] - xm) * (e[i] - em)
            _push_levels(D, h, m, qmax)
        for c in range(qmax):
            out[l, c] = D[c + 1, n]
    return out


@njit(cache=True)
def _spearman_h(Sa, Sb, i, j, k):
    return (Sa[i, j] * Sb[i, k] + Sa[i, k] * Sb[i, j]
            + Sa[j, i] * Sb[j, k] + Sa[j, k] * Sb[j, i]
            + Sa[k, i] * Sb[k, j] + Sa[k, j] * Sb[k, i]) / 6.0


@njit(cache=True, fastmath=True)
def _cross(ua, ub, va, vb, lo, hi):
    acc = 0.0
    for j in range(lo, hi):
        acc += ua[j] * vb[j] + ub[j] * va[j]
    return acc


@njit(cache=True, fastmath=True)
def monotone_r3_spearman(S, pairs, qmax):
    """Order-3 symmetrised Spearman kernel.

    g[i] = sum_{i < j < m} h(i, j, m) does not depend on the level, so it is
    formed once per m and pushed through every level.  With U = triu(S, 1)
    and S antisymmetric, four of the six sign products in h reduce to prefix
    sums over one index; only U_a[i, j] U_b[j, m] + U_b[i, j] U_a[j, m]
    needs a loop over j.
    """
    L = pairs.shape[0]
    n = S.shape[1]
    out = np.zeros((L, qmax))
    D = np.zeros((qmax + 1, n + 1))
    g = np.empty(n)
    Ua = np.zeros((n, n))
    Ub = np.zeros((n, n))
    UaT = np.zeros((n, n))
    UbT = np.zeros((n, n))
    Ca = np.zeros((n, n + 1))  # Ca[i, m] = sum_{j < m} Ua[i, j]
    Cb = np.zeros((n, n + 1))
    for l in range(L):
        Sa = S[pairs[l, 0]]
        Sb = S[pairs[l, 1]]
        for i in range(n):
            for j in range(n):
                if j > i:
                    Ua[i, j] = Sa[i, j]
                    Ub[i, j] = Sb[i, j]
                else:
                    Ua[i, j] = 0.0
                    Ub[i, j] = 0.0
                UaT[j, i] = Ua[i, j]
                UbT[j, i] = Ub[i, j]
                Ca[i, j + 1] = Ca[i, j] + Ua[i, j]
                Cb[i, j + 1] = Cb[i, j] + Ub[i, j]
        D[:, :] = 0.0
        D[0, :] = 1.0
        for m in range(n):
            # column suffix sums over i < j < m, built downwards from j = m - 1
            qa = 0.0
            qb = 0.0
            for i in range(m - 1, -1, -1):
                ra = Ca[i, m]
                rb = Cb[i, m]
                cross = _cross(Ua[i], Ub[i], UaT[m], UbT[m], i + 1, m)
                uam = Ua[i, m]
                ubm = Ub[i, m]
                g[i] = (ubm * (ra + qa) + uam * (rb + qb) - cross) / 6.0
                qa += Ua[i, m]
                qb += Ub[i, m]
            _push_levels(D, g, m, qmax)
        for c in range(qmax):
            out[l, c] = D[c + 1, n]
    return out


@njit(cache=True)
def monotone_two_sample(K, qmax):
    """Two-sample order-(1,1) recursion on an (n+1) x (m+1) grid per level."""
    L, n, m = K.shape
    out = np.zeros((L, qmax))
    D = np.zeros((qmax + 1, n + 1, m + 1))
    for l in range(L):
        D[:, :, :] = 0.0
        D[0, :, :] = 1.0
        for c in range(1, qmax + 1):
            for i in range(1, n + 1):
                for j in range(1, m + 1):
                    D[c, i, j] = (D[c - 1, i - 1, j - 1] * K[l, i - 1, j - 1]
                                  + D[c, i - 1, j] + D[c, i, j - 1] - D[c, i - 1, j - 1])
        for c in range(qmax):
            out[l, c] = D[c + 1, n, m]
    return out
