# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops: Chebyshev tables and contour moments."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def cheb_v_table(z, Py_ssize_t kmax):
    """Table of ``V_k(z)`` for ``k = -1 .. kmax``; column ``k + 1`` holds ``V_k``."""
    cdef double complex[::1] zv = np.ascontiguousarray(z, dtype=np.complex128)
    cdef Py_ssize_t n = zv.shape[0]
    out_arr = np.empty((n, kmax + 2), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    cdef Py_ssize_t i, k
    cdef double complex tz, a, b, c
    for i in range(n):
        tz = 2.0 * zv[i]
        a = 0.0
        out[i, 0] = a
        if kmax < 0:
            continue
        b = 1.0
        out[i, 1] = b
        for k in range(2, kmax + 2):
            c = tz * b - a
            out[i, k] = c
            a = b
            b = c
    return out_arr


def contour_moments(F, w, x, Py_ssize_t mmax):
    """``M[r, m] = sum_k F[r, k] w[k] x[k]^(-m)`` for ``m = 0 .. mmax``.

    The weighted power table is built in C; the product goes to BLAS.
    """
    cdef double complex[::1] wv = np.ascontiguousarray(w, dtype=np.complex128)
    cdef double complex[::1] xv = np.ascontiguousarray(x, dtype=np.complex128)
    cdef Py_ssize_t nodes = xv.shape[0]
    P_arr = np.empty((nodes, mmax + 1), dtype=np.complex128)
    cdef double complex[:, ::1] P = P_arr
    cdef Py_ssize_t k, m
    cdef double complex xi
    for k in range(nodes):
        xi = 1.0 / xv[k]
        P[k, 0] = wv[k]
        for m in range(1, mmax + 1):
            P[k, m] = P[k, m - 1] * xi
    return np.dot(np.ascontiguousarray(F, dtype=np.complex128), P_arr)


def pair_product(x, a, b):
    """``prod_j (x - a_j)(x - b_j)`` for every entry of the 1-D array ``x``."""
    cdef double complex[::1] xv = np.ascontiguousarray(x, dtype=np.complex128)
    cdef double complex[::1] av = np.ascontiguousarray(a, dtype=np.complex128)
    cdef double complex[::1] bv = np.ascontiguousarray(b, dtype=np.complex128)
    cdef Py_ssize_t n = xv.shape[0], J = av.shape[0]
    out_arr = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double complex acc, xi
    for i in range(n):
        xi = xv[i]
        acc = 1.0
        for j in range(J):
            acc = acc * (xi - av[j]) * (xi - bv[j])
        out[i] = acc
    return out_arr
