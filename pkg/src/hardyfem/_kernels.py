"""Sequential tridiagonal recurrences compiled with numba.

The pivots of ``T = K - sigma*M`` are carried in difference form. Writing
``K_ii = s_i + c_{i-1} + c_i`` with ``c_i = -K_{i,i+1}`` and row sums ``s_i``,
the LDL^T pivots are ``d_i = c_i + g_i`` (``c_{N-1} = 0``) with

    g_0     = s_0 - sigma*M_00
    g_{i+1} = s_{i+1} - sigma*M_{i+1,i+1}
              + (c_i*(g_i - 2*sigma*mu_i) - (sigma*mu_i)^2) / d_i

where ``mu_i = M_{i,i+1}``. This never forms ``c_{i-1} + c_i`` and then
subtracts it again, which matters on fine meshes where ``c ~ 1/h``.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def negative_pivot_count(Ko, rowsum, Md, Mo, sigma):
    """Negative pivots of K - sigma*M; -1 on an exactly zero pivot."""
    n = rowsum.size
    count = 0
    g = rowsum[0] - sigma * Md[0]
    for i in range(n):
        c = -Ko[i] if i < n - 1 else 0.0
        d = c + g
        if d == 0.0:
            return -1
        if d < 0.0:
            count += 1
        if i < n - 1:
            smu = sigma * Mo[i]
            g = rowsum[i + 1] - sigma * Md[i + 1] + (c * (g - 2.0 * smu) - smu * smu) / d
    return count


@njit(cache=True)
def ldl_factor(Ko, rowsum, Md, Mo, sigma):
    """LDL^T of K - sigma*M without pivoting: returns (d, l)."""
    n = rowsum.size
    d = np.empty(n)
    l = np.empty(max(n - 1, 0))
    g = rowsum[0] - sigma * Md[0]
    for i in range(n):
        c = -Ko[i] if i < n - 1 else 0.0
        d[i] = c + g
        if i < n - 1:
            smu = sigma * Mo[i]
            l[i] = -(c + smu) / d[i]
            g = rowsum[i + 1] - sigma * Md[i + 1] + (c * (g - 2.0 * smu) - smu * smu) / d[i]
    return d, l


@njit(cache=True)
def ldl_solve(d, l, rhs):
    n = d.size
    x = rhs.copy()
    for i in range(1, n):
        x[i] -= l[i - 1] * x[i - 1]
    for i in range(n):
        x[i] /= d[i]
    for i in range(n - 2, -1, -1):
        x[i] -= l[i] * x[i + 1]
    return x
