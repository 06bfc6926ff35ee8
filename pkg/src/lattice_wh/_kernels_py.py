"""Pure numpy versions of the hot loops (fallback for the compiled core)."""
import numpy as np


def cheb_v_table(z, kmax):
    """Table of ``V_k(z)`` for ``k = -1 .. kmax``; column ``k + 1`` holds ``V_k``."""
    z = np.ascontiguousarray(z, dtype=complex)
    out = np.empty((z.shape[0], kmax + 2), dtype=complex)
    out[:, 0] = 0.0
    if kmax >= 0:
        out[:, 1] = 1.0
    two_z = 2.0 * z
    for k in range(2, kmax + 2):
        out[:, k] = two_z * out[:, k - 1] - out[:, k - 2]
    return out


def contour_moments(F, w, x, mmax):
    """``M[r, m] = sum_k F[r, k] w[k] x[k]^(-m)`` for ``m = 0 .. mmax``."""
    F = np.ascontiguousarray(F, dtype=complex)
    w = np.ascontiguousarray(w, dtype=complex)
    xinv = 1.0 / np.ascontiguousarray(x, dtype=complex)
    P = np.empty((xinv.shape[0], mmax + 1), dtype=complex)
    P[:, 0] = w
    for m in range(1, mmax + 1):
        P[:, m] = P[:, m - 1] * xinv
    return F @ P


def pair_product(x, a, b):
    """``prod_j (x - a_j)(x - b_j)`` for every entry of the 1-D array ``x``."""
    x = np.ascontiguousarray(x, dtype=complex)
    out = np.ones_like(x)
    for aj, bj in zip(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)):
        out = out * (x - aj) * (x - bj)
    return out
