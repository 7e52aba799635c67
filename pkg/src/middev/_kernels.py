"""Compiled inner loops.

Sums use error-free transformations (TwoSum / Dekker TwoProduct, i.e. the
Ogita-Rump-Oishi ``Sum2``/``Dot2`` schemes) so the exact decomposition
identities stay at round-off level for long paths.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_SPLIT = 134217729.0  # 2**27 + 1

# Layout of the vector returned by ``accumulate``.
ACC_FIELDS = (
    "M", "N", "U",
    "S", "P", "Q", "T", "W",
    "L", "Lambda", "bracket_M",
    "X_n", "X_nm1", "eps_n",
    "maxX2", "maxEps2", "maxV2",
)
ACC_INDEX = {name: i for i, name in enumerate(ACC_FIELDS)}


@njit(cache=True, nogil=True)
def ar_path(V, theta, rho):
    """eps_k = rho eps_{k-1} + V_k, X_k = theta X_{k-1} + eps_k with zero start."""
    n = V.shape[0]
    eps = np.zeros(n + 1)
    X = np.zeros(n + 1)
    e = 0.0
    x = 0.0
    for k in range(n):
        e = rho * e + V[k]
        x = theta * x + e
        eps[k + 1] = e
        X[k + 1] = x
    return eps, X


@njit(cache=True, nogil=True, inline="always")
def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@njit(cache=True, nogil=True, inline="always")
def _two_prod(a, b):
    p = a * b
    t = _SPLIT * a
    ah = t - (t - a)
    al = a - ah
    t = _SPLIT * b
    bh = t - (t - b)
    bl = b - bh
    return p, al * bl - (((p - ah * bh) - al * bh) - ah * bl)


@njit(cache=True, nogil=True)
def csum(a):
    s = 0.0
    c = 0.0
    for i in range(a.shape[0]):
        s, e = _two_sum(s, a[i])
        c += e
    return s + c


@njit(cache=True, nogil=True)
def cdot(a, b):
    s = 0.0
    c = 0.0
    for i in range(a.shape[0]):
        p, ep = _two_prod(a[i], b[i])
        s, es = _two_sum(s, p)
        c += ep + es
    return s + c


@njit(cache=True, nogil=True)
def cdot3(a, b, w):
    """Compensated ``sum a_i b_i w_i`` (the inner product is rounded once)."""
    s = 0.0
    c = 0.0
    for i in range(a.shape[0]):
        p, ep = _two_prod(a[i] * b[i], w[i])
        s, es = _two_sum(s, p)
        c += ep + es
    return s + c


@njit(cache=True, nogil=True, inline="always")
def _dd_mul(ah, al, b):
    """(ah + al) * b as a double-double pair."""
    p, e = _two_prod(ah, b)
    return p, e + al * b


@njit(cache=True, nogil=True)
def lag_deviation(X, theta, rho):
    """Compensated ``sum_k X_{k-1} ((1 + theta rho) X_k - (theta + rho) X_{k-1})``.

    Equals ``(1 + theta rho) P - (theta + rho) S_{n-1}``, i.e.
    ``(1 + theta rho)(theta_hat - theta*) S_{n-1}``, without rounding either
    ``theta_hat`` or ``theta*``. Both coefficients are carried as
    double-double values and every product is split exactly.
    """
    tr, tre = _two_prod(theta, rho)
    c1h, c1l = _two_sum(1.0, tr)
    c1l += tre
    c2h, c2l = _two_sum(theta, rho)
    t = 0.0
    c = 0.0
    for k in range(1, X.shape[0]):
        x = X[k - 1]
        for ch, cl, y in ((c1h, c1l, X[k]), (-c2h, -c2l, x)):
            a, ae = _dd_mul(ch, cl, y)
            p, pe = _two_prod(a, x)
            t, es = _two_sum(t, p)
            c += pe + es + ae * x
    return t + c


@njit(cache=True, nogil=True)
def accumulate(V, theta, rho):
    """Single pass over the noise: every terminal sum, without storing the path."""
    out = np.zeros(len(ACC_FIELDS))
    # running (sum, compensation) pairs
    sM = cM = sN = cN = sU = cU = 0.0
    sS = cS = sP = cP = sQ = cQ = sT = cT = sW = cW = 0.0
    sL = cL = sLa = cLa = sB = cB = 0.0
    x2 = x1 = e1 = 0.0  # X_{k-2}, X_{k-1}, eps_{k-1}
    mx = me = mv = 0.0
    for k in range(V.shape[0]):
        v = V[k]
        e = rho * e1 + v
        x = theta * x1 + e

        p, ep = _two_prod(x1, v)
        sM, es = _two_sum(sM, p)
        cM += ep + es
        p, ep = _two_prod(x2, v)
        sN, es = _two_sum(sN, p)
        cN += ep + es
        p, ep = _two_prod(e1, v)
        sU, es = _two_sum(sU, p)
        cU += ep + es

        p, ep = _two_prod(x, x)
        sS, es = _two_sum(sS, p)
        cS += ep + es
        p, ep = _two_prod(x, x1)
        sP, es = _two_sum(sP, p)
        cP += ep + es
        p, ep = _two_prod(x, e)
        sQ, es = _two_sum(sQ, p)
        cQ += ep + es
        p, ep = _two_prod(e, e)
        sT, es = _two_sum(sT, p)
        cT += ep + es
        p, ep = _two_prod(x, x2)
        sW, es = _two_sum(sW, p)
        cW += ep + es

        v2 = v * v
        sL, es = _two_sum(sL, v2)
        cL += es
        sLa, es = _two_sum(sLa, v2 * v2)
        cLa += es
        sB, es = _two_sum(sB, x1 * x1 * v2)
        cB += es

        if x * x > mx:
            mx = x * x
        if e * e > me:
            me = e * e
        if v2 > mv:
            mv = v2
        x2 = x1
        x1 = x
        e1 = e

    out[0] = sM + cM
    out[1] = sN + cN
    out[2] = sU + cU
    out[3] = sS + cS
    out[4] = sP + cP
    out[5] = sQ + cQ
    out[6] = sT + cT
    out[7] = sW + cW
    out[8] = sL + cL
    out[9] = sLa + cLa
    out[10] = sB + cB
    out[11] = x1
    out[12] = x2
    out[13] = e1
    out[14] = mx
    out[15] = me
    out[16] = mv
    return out
