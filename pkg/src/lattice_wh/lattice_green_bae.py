"""Tailored Green's function of the Dirichlet duct and the boundary algebraic solver.

Green's function
----------------
``G(m, n; m0, n0)`` solves ``Delta G + Omega^2 G = delta`` with ``G = 0`` on
both walls.  Its transform in ``m`` is, for ``n <= n0``,

.. math::

    \\hat G(x; n, n0) = -\\frac{V_{N_2 - n_0 - 1}(z)\\, V_{n + N_1 - 1}(z)}{V_{N-1}(z)}\\, x^{-m_0},

(symmetric in ``n, n0``) with ``z = -Lambda(x)/2``.  The ratio form is
rational in ``x``, so no branch of ``sqrt(Lambda^2 - 4)`` is ever chosen.
Values are obtained by the same deformed-contour trapezoid rule as the
Wiener-Hopf field; the modal sum over the ``N - 1`` duct modes is kept as an
independent oracle.

Boundary algebraic equations
----------------------------
The scattered field is represented through its values on the column next to
the screen, ``u_{1,n}``, and the two corner values ``u*`` just outside the
screen ends.  Writing ``A = (I - G_N)^{-1}`` the corner values solve a 2 x 2
system; the screen unknowns then follow by back substitution.  The
factorisation of ``I - G_N`` is reused for every right-hand side.

Any geometry with both gaps at least 2 rows and any propagating incident
mode is supported.
"""
from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .kernels import cheb_v_table
from .lattice_core import (AdmissibilityError, ComplexField, DegenerateConfigurationError,
                           LatticeFrequency, WaveguideGeometry, incident_field, mode, modes)
from .quadrature import QuadraturePolicy, adaptive_moments

logger = logging.getLogger(__name__)

#: Condition number above which a BAE matrix is declared singular.
MAX_CONDITION = 1e14


def green_hat(x, n: int, n0: int, m0: int, g: WaveguideGeometry, f: LatticeFrequency):
    """Spectral Green's function ``G^(x; n, n0)`` for a source at ``(m0, n0)``."""
    for r in (n, n0):
        if not (-g.N1 <= r <= g.N2):
            raise AdmissibilityError(f"row {r} outside [-N1, N2]")
    x = np.asarray(x, dtype=complex)
    lo, hi = min(n, n0), max(n, n0)
    z = -(f.omega_sq - 4.0 + x + 1.0 / x) / 2.0
    V = cheb_v_table(np.atleast_1d(z).reshape(-1), g.N)
    out = -(V[:, g.N2 - hi] * V[:, lo + g.N1]) / V[:, g.N] * np.atleast_1d(x).reshape(-1) ** (-m0)
    out = out.reshape(x.shape)
    return complex(out) if out.ndim == 0 else out


class TailoredGreen:
    """Green's function of one duct at one frequency, with a memo table.

    Parameters
    ----------
    g : WaveguideGeometry
    f : LatticeFrequency
    method : {"quadrature", "residue"}
        Contour quadrature of the ratio form, or the modal residue sum.
    policy : QuadraturePolicy
    """

    def __init__(self, g: WaveguideGeometry, f: LatticeFrequency, method: str = "quadrature",
                 policy: QuadraturePolicy = QuadraturePolicy()):
        if method not in ("quadrature", "residue"):
            raise ValueError(f"unknown method {method!r}")
        self.geometry = g
        self.frequency = f
        self.method = method
        self.policy = policy
        self._modes = modes(g, f)              # raises at an exact cut-off
        self._table = np.zeros((0, g.N + 1, g.N + 1), dtype=complex)
        self._lock = threading.Lock()
        self.quadrature_nodes = 0

    # -- tables -------------------------------------------------------------
    def _pairs(self):
        N1, N2 = self.geometry.N1, self.geometry.N2
        inner = np.arange(-N1 + 1, N2)
        lo, hi = np.triu_indices(inner.size)
        return inner[lo], inner[hi]

    def _quadrature_table(self, kmax: int) -> np.ndarray:
        g, f = self.geometry, self.frequency
        lo, hi = self._pairs()

        def integrand(x):
            z = -(f.omega_sq - 4.0 + x + 1.0 / x) / 2.0
            V = cheb_v_table(z, g.N)
            return -(V[:, g.N2 - hi] * V[:, lo + g.N1]).T / V[:, g.N][None, :]

        res = adaptive_moments(integrand, kmax, self.policy)
        self.quadrature_nodes = max(self.quadrature_nodes, res.nodes)
        return self._scatter(lo, hi, res.moments)

    def _residue_table(self, kmax: int) -> np.ndarray:
        g = self.geometry
        lo, hi = self._pairs()
        a = np.array([md.x_factor for md in self._modes])
        th = np.array([md.theta for md in self._modes])
        w = (2.0 / g.N) / (a - 1.0 / a)
        sl = np.sin(np.outer(lo + g.N1, th))
        sh = np.sin(np.outer(hi + g.N1, th))
        powers = a[None, :] ** np.arange(kmax + 1)[:, None]
        mom = np.einsum("rj,kj->rk", sl * sh * w, powers)
        return self._scatter(lo, hi, mom)

    def _scatter(self, lo, hi, moments) -> np.ndarray:
        g = self.geometry
        kmax = moments.shape[1] - 1
        tab = np.zeros((kmax + 1, g.N + 1, g.N + 1), dtype=complex)
        i, j = lo + g.N1, hi + g.N1
        tab[:, i, j] = moments.T
        tab[:, j, i] = moments.T
        return tab

    def table(self, kmax: int) -> np.ndarray:
        """``T[k, n + N1, n0 + N1] = G(k; n, n0)`` for ``k = 0 .. kmax`` (walls are 0)."""
        if kmax < 0:
            raise ValueError("kmax must be >= 0")
        with self._lock:
            if self._table.shape[0] <= kmax:
                size = max(kmax, 2 * (self._table.shape[0] - 1), 4)
                if self.method == "quadrature":
                    self._table = self._quadrature_table(size)
                else:
                    self._table = self._residue_table(size)
            return self._table[:kmax + 1]

    # -- point evaluation ---------------------------------------------------
    def __call__(self, m: int, n: int, m0: int, n0: int) -> complex:
        """``G(m, n; m0, n0)``."""
        g = self.geometry
        for r in (n, n0):
            if not (-g.N1 <= r <= g.N2):
                raise AdmissibilityError(f"row {r} outside [-N1, N2]")
        k = abs(m - m0)
        return complex(self.table(k)[k, n + g.N1, n0 + g.N1])

    def residue_value(self, m: int, n: int, m0: int, n0: int) -> complex:
        """Modal residue sum (oracle)."""
        g = self.geometry
        if n in (-g.N1, g.N2) or n0 in (-g.N1, g.N2):
            return 0j
        k = abs(m - m0)
        total = 0j
        for md in self._modes:
            a = md.x_factor
            total += (2.0 / g.N) * np.sin(md.theta * (n + g.N1)) * np.sin(md.theta * (n0 + g.N1)) \
                * a ** k / (a - 1.0 / a)
        return complex(total)


def green(m: int, n: int, m0: int, n0: int, g: WaveguideGeometry, f: LatticeFrequency,
          policy: QuadraturePolicy = QuadraturePolicy()) -> complex:
    """One Green's function value by contour quadrature."""
    return TailoredGreen(g, f, "quadrature", policy)(m, n, m0, n0)


# ---------------------------------------------------------------------------
# BAE
# ---------------------------------------------------------------------------

@dataclass
class BaeSystem:
    """Assembled BAE matrices (screen rows ``-n1 .. n2``)."""

    G_N: np.ndarray
    p_vec: np.ndarray
    q_vec: np.ndarray
    g_vec: np.ndarray
    h_vec: np.ndarray
    G_2: np.ndarray
    H_2: np.ndarray
    corner_matrix: np.ndarray
    corner_rhs: np.ndarray
    condition: float
    corner_condition: float


@dataclass
class BaeSolution:
    """Screen unknowns ``u^sc_{1,n}`` and corner values of the scattered field."""

    geometry: WaveguideGeometry
    frequency: LatticeFrequency
    p: int
    screen_u: np.ndarray
    u_star: np.ndarray
    system: BaeSystem
    green: TailoredGreen = field(repr=False)

    @property
    def u_star_lower(self) -> complex:
        """``u^sc(0, -n1 - 1)``."""
        return complex(self.u_star[0])

    @property
    def u_star_upper(self) -> complex:
        """``u^sc(0, n2 + 1)``."""
        return complex(self.u_star[1])


def _check_condition(mat: np.ndarray, label: str) -> float:
    cond = float(np.linalg.cond(mat))
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise DegenerateConfigurationError(
            f"resonant configuration: {label} is singular (condition {cond:.3e})")
    return cond


def solve_bae(g: WaveguideGeometry, f: LatticeFrequency, p: int,
              green_fn: Optional[TailoredGreen] = None,
              policy: QuadraturePolicy = QuadraturePolicy()) -> BaeSolution:
    """Assemble and solve the BAE system for incident mode ``p``."""
    md = mode(p, g, f)
    if not md.propagating:
        raise AdmissibilityError(
            f"incident mode p={p} is below cut-off (omega={f.omega} <= {md.cutoff:.6g})")
    G = green_fn or TailoredGreen(g, f, "quadrature", policy)
    T = G.table(1)
    rows = g.screen_rows
    idx = rows + g.N1
    lo_c, hi_c = -g.n1 - 1 + g.N1, g.n2 + 1 + g.N1     # corner rows
    i_lo, i_hi = -g.n1 + g.N1, g.n2 + g.N1              # screen end rows

    G_N = 2.0 * T[1][np.ix_(idx, idx)]
    p_vec = T[1][idx, i_hi]
    q_vec = T[1][idx, i_lo]
    g_vec = T[0][lo_c, idx]
    h_vec = T[0][hi_c, idx]
    G_2 = np.array([[T[0][lo_c, i_lo], T[0][lo_c, i_hi]],
                    [T[0][hi_c, i_lo], T[0][hi_c, i_hi]]])

    uin = incident_field(p, g, f, [-1, 0, 1])
    uin_avg = 0.5 * (uin.column(-1) + uin.column(1))[idx]
    uin_star = np.array([uin.column(0)[lo_c], uin.column(0)[hi_c]])

    I_minus = np.eye(len(rows)) - G_N
    cond = _check_condition(I_minus, "I - G_N")
    lu = scipy.linalg.lu_factor(I_minus)
    Aq = scipy.linalg.lu_solve(lu, q_vec)
    Ap = scipy.linalg.lu_solve(lu, p_vec)
    AGu = scipy.linalg.lu_solve(lu, G_N @ uin_avg)
    H_2 = np.array([[g_vec @ Aq, g_vec @ Ap], [h_vec @ Aq, h_vec @ Ap]])
    corner = np.eye(2) - G_2 - 2.0 * H_2
    inner = uin_avg + AGu
    rhs = (G_2 + 2.0 * H_2) @ uin_star + 2.0 * np.array([g_vec @ inner, h_vec @ inner])
    ccond = _check_condition(corner, "corner matrix")
    u_star = np.linalg.solve(corner, rhs)
    c = u_star + uin_star
    screen_u = AGu + Ap * c[1] + Aq * c[0]
    system = BaeSystem(G_N=G_N, p_vec=p_vec, q_vec=q_vec, g_vec=g_vec, h_vec=h_vec,
                       G_2=G_2, H_2=H_2, corner_matrix=corner, corner_rhs=rhs,
                       condition=cond, corner_condition=ccond)
    return BaeSolution(geometry=g, frequency=f, p=p, screen_u=screen_u, u_star=u_star,
                       system=system, green=G)


def _density(sol: BaeSolution) -> np.ndarray:
    """Source strengths ``sigma_n`` on the screen column."""
    g, f = sol.geometry, sol.frequency
    idx = g.screen_rows + g.N1
    uin = incident_field(sol.p, g, f, [-1, 0, 1])
    sigma = 2.0 * sol.screen_u + (uin.column(-1) + uin.column(1))[idx]
    sigma[-1] += sol.u_star[1] + uin.column(0)[g.n2 + 1 + g.N1]
    sigma[0] += sol.u_star[0] + uin.column(0)[-g.n1 - 1 + g.N1]
    return sigma


def field_bae(sol: BaeSolution, m_values: Sequence[int]) -> ComplexField:
    """Scattered field on the given columns from the screen densities."""
    g = sol.geometry
    m_values = np.asarray(m_values, dtype=int)
    kmax = int(np.abs(m_values).max()) if m_values.size else 0
    T = sol.green.table(kmax)
    idx = g.screen_rows + g.N1
    sigma = _density(sol)
    vals = T[np.abs(m_values)][:, :, idx] @ sigma
    return ComplexField(m_values, -g.N1, g.N2, vals, g,
                        {"method": "bae", "nodes": sol.green.quadrature_nodes})


def total_field(scattered: ComplexField, p: int, f: LatticeFrequency) -> ComplexField:
    """Scattered plus incident field."""
    return scattered + incident_field(p, scattered.geometry, f, scattered.m_values)


def solve_density(g: WaveguideGeometry, f: LatticeFrequency, p: int,
                  green_fn: Optional[TailoredGreen] = None) -> np.ndarray:
    """Oracle: single-layer densities on the screen column from ``sum_n0 G(0; n, n0) s_n0 = -u_in(0, n)``."""
    G = green_fn or TailoredGreen(g, f, "residue")
    idx = g.screen_rows + g.N1
    A = G.table(0)[0][np.ix_(idx, idx)]
    _check_condition(A, "single-layer matrix")
    rhs = -incident_field(p, g, f, [0]).column(0)[idx]
    return np.linalg.solve(A, rhs)


def field_density(g: WaveguideGeometry, f: LatticeFrequency, p: int, m_values: Sequence[int],
                  green_fn: Optional[TailoredGreen] = None) -> ComplexField:
    """Oracle scattered field from the single-layer densities."""
    G = green_fn or TailoredGreen(g, f, "residue")
    sig = solve_density(g, f, p, G)
    m_values = np.asarray(m_values, dtype=int)
    kmax = int(np.abs(m_values).max()) if m_values.size else 0
    idx = g.screen_rows + g.N1
    vals = G.table(kmax)[np.abs(m_values)][:, :, idx] @ sig
    return ComplexField(m_values, -g.N1, g.N2, vals, g, {"method": "density"})
