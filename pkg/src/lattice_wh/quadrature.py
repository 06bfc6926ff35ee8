"""Adaptive trapezoidal quadrature for inverse discrete Fourier transforms.

The inverse transforms used throughout have the form

.. math::

    I_m = \\frac{1}{2\\pi i} \\oint F(x)\\, x^{-m-1}\\, dx, \\qquad m \\ge 0 .

At real frequency the propagating poles sit on the unit circle: the
physical ones (``e^{iK}``, upper half plane) must be enclosed, their
reciprocals excluded.  Rather than pushing the poles off the circle with a
tiny absorption (which would need an enormous number of nodes), the contour
itself is deformed,

.. math::

    x(\\phi) = \\exp(i\\phi + \\delta \\sin\\phi),

which passes outside the unit circle in the upper half plane and inside it
in the lower half plane.  The integrand is periodic and analytic on a strip
around the contour, so the trapezoid rule converges geometrically.  Node
counts double (reusing previous nodes) until two successive estimates agree.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .kernels import contour_moments
from .lattice_core import ConvergenceError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuadraturePolicy:
    """Node-doubling policy.

    Parameters
    ----------
    initial_nodes : int
        First trapezoid level (power of two).
    tol : float
        Absolute tolerance between successive levels.
    max_nodes : int
        Cap on the number of nodes; exceeding it raises ConvergenceError.
    delta : float, optional
        Contour deformation; chosen from the largest moment order if None.
    """

    initial_nodes: int = 1024
    tol: float = 1e-11
    max_nodes: int = 2 ** 20
    delta: Optional[float] = None

    @classmethod
    def from_doublings(cls, initial_nodes: int, tol: float, max_doublings: int,
                       delta: Optional[float] = None) -> "QuadraturePolicy":
        return cls(initial_nodes, tol, initial_nodes * 2 ** max_doublings, delta)


def default_delta(mmax: int) -> float:
    """Deformation keeping ``|x|^(+-mmax)`` within a factor ``e^4`` on the contour."""
    return float(min(0.5, 4.0 / max(mmax, 1)))


def contour_nodes(count: int, delta: float, offset: float = 0.0):
    """Nodes ``x_k`` and trapezoid weights for ``(1/2 pi i) dx / x``."""
    phi = 2.0 * np.pi * (np.arange(count) + offset) / count
    x = np.exp(1j * phi + delta * np.sin(phi))
    w = 1.0 - 1j * delta * np.cos(phi)
    return x, w


@dataclass
class QuadratureResult:
    moments: np.ndarray
    nodes: int
    achieved: float
    delta: float


def adaptive_moments(integrand: Callable[[np.ndarray], np.ndarray], mmax: int,
                     policy: QuadraturePolicy = QuadraturePolicy()) -> QuadratureResult:
    """Compute ``I[r, m]`` for ``m = 0 .. mmax`` by node doubling.

    Parameters
    ----------
    integrand : callable
        Maps contour nodes (1-D complex array) to values of shape
        ``(rows, nodes)``.
    mmax : int
        Largest moment order.
    policy : QuadraturePolicy
    """
    delta = policy.delta if policy.delta is not None else default_delta(mmax)
    count = int(policy.initial_nodes)
    x, w = contour_nodes(count, delta)
    F = np.atleast_2d(integrand(x))
    _check_finite(F)
    total = contour_moments(F, w, x, mmax)
    estimate = total / count
    diff = np.inf
    while True:
        if 2 * count > policy.max_nodes:
            raise ConvergenceError(
                f"contour quadrature did not converge with {count} nodes "
                f"(last change {diff:.3e}, tol {policy.tol:.1e})", achieved=float(diff))
        xn, wn = contour_nodes(count, delta, offset=0.5)
        Fn = np.atleast_2d(integrand(xn))
        _check_finite(Fn)
        total = total + contour_moments(Fn, wn, xn, mmax)
        count *= 2
        new = total / count
        diff = float(np.max(np.abs(new - estimate))) if new.size else 0.0
        estimate = new
        if diff < policy.tol:
            logger.debug("quadrature converged: %d nodes, change %.2e", count, diff)
            return QuadratureResult(estimate, count, diff, delta)


def _check_finite(F: np.ndarray) -> None:
    if not np.all(np.isfinite(F)):
        raise ConvergenceError("integrand is not finite on the contour (node on a pole)")
