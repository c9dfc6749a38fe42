"""Pure-Python tridiagonal kernels, used when the compiled extension is missing.

Same algorithms and same floating-point operation order as ``_ckernels.pyx``.
"""
import math

import numpy as np

EPS = float(np.finfo(np.float64).eps)


def _ql_first_row(d, e, z, max_iter):
    n = len(d)
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= EPS * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_iter:
                return l
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi = z[i + 1]
                z[i + 1] = s * z[i] + c * zi
                z[i] = c * z[i] - s * zi
                i -= 1
            if r == 0.0 and i >= l:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return -1


def tridiag_eigh_first_row(diag, offdiag, max_iter=50):
    d = [float(x) for x in diag]
    n = len(d)
    e = [float(x) for x in offdiag] + [0.0]
    z = [0.0] * n
    z[0] = 1.0
    failed = _ql_first_row(d, e, z, max_iter)
    return np.array(d), np.array(z), failed


def tridiag_moments(diag, offdiag, K):
    a = [float(x) for x in diag]
    b = [float(x) for x in offdiag]
    n = len(a)
    m = min(n, K // 2 + 2)
    v = [0.0] * m
    w = [0.0] * m
    v[0] = 1.0
    out = [1.0]
    for k in range(1, K + 1):
        top = min(m, k + 1)
        for i in range(top):
            w[i] = a[i] * v[i]
            if i > 0:
                w[i] += b[i - 1] * v[i - 1]
            if i < m - 1:
                w[i] += b[i] * v[i + 1]
        v[:top] = w[:top]
        out.append(v[0])
    return np.array(out)
