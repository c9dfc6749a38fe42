# cython: language_level=3
"""Compiled tridiagonal kernels.  Mirrors ``_pykernels`` line for line."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, hypot, copysign

cnp.import_array()

cdef double EPS = np.finfo(np.float64).eps


cdef Py_ssize_t _ql_first_row(double[::1] d, double[::1] e, double[::1] z,
                               int max_iter) noexcept nogil:
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t l, m, i
    cdef int it
    cdef double g, r, s, c, p, f, b, dd, zi
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = fabs(d[m]) + fabs(d[m + 1])
                if fabs(e[m]) <= EPS * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_iter:
                return l
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = hypot(f, g)
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


def tridiag_eigh_first_row(diag, offdiag, int max_iter=50):
    """Eigenvalues and first eigenvector components of a symmetric tridiagonal matrix.

    Returns ``(eigenvalues, first_row, failed_index)``; ``failed_index`` is -1
    on success.  Output is unsorted.
    """
    cdef double[::1] d = np.array(diag, dtype=np.float64, copy=True)
    cdef Py_ssize_t n = d.shape[0]
    e_arr = np.zeros(n, dtype=np.float64)
    e_arr[:n - 1] = offdiag
    cdef double[::1] e = e_arr
    z_arr = np.zeros(n, dtype=np.float64)
    z_arr[0] = 1.0
    cdef double[::1] z = z_arr
    cdef Py_ssize_t failed
    with nogil:
        failed = _ql_first_row(d, e, z, max_iter)
    return np.asarray(d), z_arr, int(failed)


def tridiag_moments(diag, offdiag, int K):
    """``[J^k]_{11}`` for ``k = 0..K`` by repeated tridiagonal products."""
    cdef double[::1] a = np.ascontiguousarray(diag, dtype=np.float64)
    cdef double[::1] b = np.ascontiguousarray(offdiag, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0]
    # J^k e1 is supported on the first k+1 rows, and only the first K//2+1 rows reach back to row 1
    cdef Py_ssize_t m = min(n, K // 2 + 2)
    out_arr = np.empty(K + 1, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double[::1] v = np.zeros(m, dtype=np.float64)
    cdef double[::1] w = np.zeros(m, dtype=np.float64)
    cdef Py_ssize_t k, i, top
    with nogil:
        v[0] = 1.0
        out[0] = 1.0
        for k in range(1, K + 1):
            top = min(m, k + 1)
            for i in range(top):
                w[i] = a[i] * v[i]
                if i > 0:
                    w[i] += b[i - 1] * v[i - 1]
                if i < m - 1:
                    w[i] += b[i] * v[i + 1]
            for i in range(top):
                v[i] = w[i]
            out[k] = v[0]
    return out_arr
