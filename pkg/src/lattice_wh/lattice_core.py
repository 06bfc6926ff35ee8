"""Core lattice quantities for the Dirichlet waveguide.

The duct occupies rows ``-N1 <= n <= N2`` of the square lattice; the walls
are the rows ``n = -N1`` and ``n = N2``.  A field ``u`` satisfies the
discrete Helmholtz equation

.. math::

    u_{m+1,n} + u_{m-1,n} + u_{m,n+1} + u_{m,n-1} + (\\Omega^2 - 4) u_{m,n} = 0

away from the screen, which occupies the column ``m = 0`` for
``-n1 <= n <= n2``.  The transform variable ``x`` enters through

.. math::

    \\Lambda(x) = \\Omega^2 - 4 + x + x^{-1},

and the transverse factor ``y`` is the root of ``y^2 + \\Lambda y + 1 = 0``
lying inside the unit circle under limiting absorption.

Branch selection
----------------
At real frequency the propagating roots have unit modulus and "inside" is
ambiguous.  The classification is made with a probe frequency
``Omega + 1e-8 i``; the root that moves inside the unit circle under the
probe is the physical one.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

#: Imaginary frequency used only to classify unit-modulus roots.
PROBE_EPS = 1e-8
#: Frequencies at which the lattice is resonant.
RESONANT_OMEGAS = (0.0, 2.0, 2.0 * np.sqrt(2.0))
#: Tolerance deciding that two roots of a palindromic quadratic have equal modulus.
_MODULUS_TIE = 1e-12
#: ``|gamma^2 - 4|`` below this marks a confluent (branch-point) pair.
_CONFLUENT_TOL = 1e-14


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------

class LatticeError(Exception):
    """Base class for all errors raised by the package."""


class AdmissibilityError(LatticeError, ValueError):
    """Input violates an admissibility rule (geometry, frequency or mode)."""


class ResonantFrequencyError(AdmissibilityError):
    """Frequency sits on a resonance or exactly on a mode cut-off."""


class DegenerateConfigurationError(LatticeError):
    """The configuration sits on a degeneracy (confluent roots, singular system)."""


class ConvergenceError(LatticeError):
    """An iterative procedure failed to reach its tolerance."""

    def __init__(self, message: str, achieved: float = float("nan")):
        super().__init__(message)
        self.achieved = achieved


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WaveguideGeometry:
    """Duct walls and screen extent.

    Parameters
    ----------
    n1, n2 : int
        Screen occupies rows ``-n1 .. n2`` of column ``m = 0``.
    N1, N2 : int
        Walls are the rows ``-N1`` and ``N2``.
    """

    n1: int
    n2: int
    N1: int
    N2: int

    def __post_init__(self):
        for name in ("n1", "n2", "N1", "N2"):
            if int(getattr(self, name)) != getattr(self, name):
                raise AdmissibilityError(f"{name} must be an integer")
        if self.n1 < 0 or self.n2 < 0:
            raise AdmissibilityError("screen extents n1, n2 must be >= 0")
        if not (-self.N1 < -self.n1 and self.n2 < self.N2):
            raise AdmissibilityError("screen must lie strictly inside the duct")
        if self.l1 < 2 or self.l2 < 2:
            raise AdmissibilityError(
                f"gap lengths must be >= 2 (got l1={self.l1}, l2={self.l2})")

    @property
    def N(self) -> int:
        return self.N1 + self.N2

    @property
    def l1(self) -> int:
        return self.N1 - self.n1

    @property
    def l2(self) -> int:
        return self.N2 - self.n2

    @property
    def l0(self) -> int:
        return self.n1 + self.n2 + 1

    @property
    def symmetric(self) -> bool:
        return self.l1 == self.l2

    @property
    def rows(self) -> np.ndarray:
        """Row indices ``-N1 .. N2`` including both walls."""
        return np.arange(-self.N1, self.N2 + 1)

    @property
    def screen_rows(self) -> np.ndarray:
        return np.arange(-self.n1, self.n2 + 1)

    @classmethod
    def symmetric_normal_form(cls, l: int, l0: int) -> "WaveguideGeometry":
        """Symmetric duct with the screen starting at row 0."""
        return cls(n1=0, n2=l0 - 1, N1=l, N2=l + l0 - 1)


@dataclass(frozen=True)
class LatticeFrequency:
    """Real frequency ``omega`` with limiting-absorption part ``eps``.

    The effective frequency is ``omega + 1j * eps``.
    """

    omega: float
    eps: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.omega) or not (0.0 < self.omega < 2.0 * np.sqrt(2.0)):
            raise AdmissibilityError(
                f"omega must lie in (0, 2*sqrt(2)); got {self.omega}")
        if abs(self.omega - 2.0) < 1e-14:
            raise ResonantFrequencyError("omega = 2 is a resonant degeneracy")
        if self.eps < 0:
            raise AdmissibilityError("eps must be >= 0")

    @property
    def complex_omega(self) -> complex:
        return complex(self.omega, self.eps)

    @property
    def omega_sq(self) -> complex:
        w = self.complex_omega
        return w * w

    def with_eps(self, eps: float) -> "LatticeFrequency":
        return LatticeFrequency(self.omega, eps)


@dataclass(frozen=True)
class WaveguideMode:
    """Transverse duct mode ``s_j(n + N1) x_j^m``.

    The mode propagates for ``cutoff < Omega < upper_cutoff``; outside that
    band ``x_factor`` is real with modulus below one.
    """

    j: int
    theta: float
    x_factor: complex
    cutoff: float
    propagating: bool
    upper_cutoff: float = float("inf")

    @property
    def K(self) -> complex:
        """Bloch wavenumber with ``x_factor = exp(iK)``."""
        return complex(-1j * np.log(self.x_factor))

    @property
    def y(self) -> complex:
        return complex(np.exp(1j * self.theta))


@dataclass
class ComplexField:
    """Complex field on a window of lattice columns and all duct rows.

    ``values[i, k]`` is the value at ``m = m_values[i]`` and
    ``n = -N1 + k``.
    """

    m_values: np.ndarray
    n_min: int
    n_max: int
    values: np.ndarray
    geometry: Optional[WaveguideGeometry] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.m_values = np.asarray(self.m_values, dtype=int)
        self.values = np.asarray(self.values, dtype=complex)
        expected = (len(self.m_values), self.n_max - self.n_min + 1)
        if self.values.shape != expected:
            raise ValueError(f"values shape {self.values.shape} != {expected}")

    @property
    def n_values(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    def _m_index(self, m: int) -> int:
        hits = np.nonzero(self.m_values == m)[0]
        if hits.size == 0:
            raise KeyError(f"column m={m} outside window")
        return int(hits[0])

    def column(self, m: int) -> np.ndarray:
        return self.values[self._m_index(m)]

    def at(self, m: int, n: int) -> complex:
        return complex(self.values[self._m_index(m), n - self.n_min])

    def __add__(self, other: "ComplexField") -> "ComplexField":
        if not np.array_equal(self.m_values, other.m_values):
            raise ValueError("window mismatch")
        return ComplexField(self.m_values, self.n_min, self.n_max,
                            self.values + other.values, self.geometry)

    def __sub__(self, other: "ComplexField") -> "ComplexField":
        if not np.array_equal(self.m_values, other.m_values):
            raise ValueError("window mismatch")
        return ComplexField(self.m_values, self.n_min, self.n_max,
                            self.values - other.values, self.geometry)


# ---------------------------------------------------------------------------
# Root selection
# ---------------------------------------------------------------------------

def _palindromic_roots(gamma: complex) -> tuple[complex, complex]:
    """Roots of ``t^2 + gamma t + 1 = 0``, computed without cancellation."""
    gamma = complex(gamma)
    d = np.sqrt(gamma * gamma - 4.0)
    # pick the sign that avoids subtracting nearly equal numbers
    big = (-gamma - d) / 2 if abs(-gamma - d) >= abs(-gamma + d) else (-gamma + d) / 2
    if big == 0:
        return 0j, 0j
    return complex(1.0 / big), complex(big)


def select_inside_root(gamma_of: Callable[[complex], complex],
                       f: LatticeFrequency) -> tuple[complex, complex, bool]:
    """Split the roots of ``t^2 + gamma t + 1`` into inside/outside members.

    Parameters
    ----------
    gamma_of : callable
        Maps a complex frequency to the linear coefficient ``gamma``.
    f : LatticeFrequency

    Returns
    -------
    inside, outside : complex
        ``|inside| <= 1 <= |outside|`` (product equal to one).
    confluent : bool
        True when the two roots coincide (``gamma = +-2``).
    """
    gamma = gamma_of(f.complex_omega)
    r1, r2 = _palindromic_roots(gamma)
    # rounding leaves |gamma^2 - 4| ~ 1e-16 at an exact branch point
    confluent = abs(gamma * gamma - 4.0) < _CONFLUENT_TOL
    if abs(abs(r1) - abs(r2)) > _MODULUS_TIE:
        inside, outside = (r1, r2) if abs(r1) < abs(r2) else (r2, r1)
        return inside, outside, confluent
    # unit-modulus pair: classify with the probe frequency
    probe = gamma_of(complex(f.omega, f.eps + PROBE_EPS))
    p1, p2 = _palindromic_roots(probe)
    p_in = p1 if abs(p1) < abs(p2) else p2
    inside, outside = (r1, r2) if abs(r1 - p_in) <= abs(r2 - p_in) else (r2, r1)
    return inside, outside, confluent


# ---------------------------------------------------------------------------
# Auxiliary functions
# ---------------------------------------------------------------------------

def lambda_of_x(x, f: LatticeFrequency):
    """``Lambda(x) = (Omega + i eps)^2 - 4 + x + 1/x``."""
    x = np.asarray(x, dtype=complex)
    if np.any(x == 0):
        raise AdmissibilityError("Lambda(x) is undefined at x = 0")
    out = f.omega_sq - 4.0 + x + 1.0 / x
    return complex(out) if out.ndim == 0 else out


def y_of_x(x: complex, f: LatticeFrequency) -> tuple[complex, bool]:
    """Transverse factor ``y(x)`` with ``|y| <= 1``.

    Returns
    -------
    y : complex
    branch_point : bool
        True when ``Lambda(x) = +-2`` and the two roots coincide.
    """
    x = complex(x)
    if x == 0:
        raise AdmissibilityError("y(x) is undefined at x = 0")

    def gamma_of(w: complex) -> complex:
        return w * w - 4.0 + x + 1.0 / x

    y_in, _, confluent = select_inside_root(gamma_of, f)
    if confluent:
        logger.debug("y_of_x: branch point at x=%s", x)
    return y_in, confluent


def sine_c_funcs(y, n: int):
    """``s(n) = y^n - y^-n`` and ``c(n) = y^n + y^-n``."""
    y = np.asarray(y, dtype=complex)
    if np.any(y == 0):
        raise AdmissibilityError("s(n), c(n) undefined at y = 0")
    yn = y ** n
    yi = 1.0 / yn
    s, c = yn - yi, yn + yi
    if s.ndim == 0:
        return complex(s), complex(c)
    return s, c


def chebyshev_V(n: int, z):
    """Chebyshev polynomial of the second kind by three-term recurrence.

    ``V_{-1} = 0``, ``V_0 = 1``, ``V_{k+1} = 2 z V_k - V_{k-1}``; negative
    orders follow the same recurrence backwards (``V_{-2} = -1``).
    """
    z = np.asarray(z, dtype=complex)
    if n < -1:
        # V_{-k} = -V_{k-2}
        return -chebyshev_V(-n - 2, z)
    prev, cur = np.zeros_like(z), np.ones_like(z)
    if n == -1:
        cur = prev
    for _ in range(max(n, 0)):
        prev, cur = cur, 2.0 * z * cur - prev
    return complex(cur) if cur.ndim == 0 else cur


def chebyshev_T(n: int, z):
    """Chebyshev polynomial of the first kind, ``T_0 = 1``, ``T_1 = z``."""
    z = np.asarray(z, dtype=complex)
    n = abs(n)
    prev, cur = np.ones_like(z), z.copy()
    if n == 0:
        cur = prev
    for _ in range(max(n - 1, 0)):
        prev, cur = cur, 2.0 * z * cur - prev
    return complex(cur) if cur.ndim == 0 else cur


# ---------------------------------------------------------------------------
# Modes
# ---------------------------------------------------------------------------

def cutoff_frequency(j: int, N: int) -> float:
    """``Omega_j = sqrt(2 - 2 cos(j pi / N))``."""
    return float(np.sqrt(2.0 - 2.0 * np.cos(j * np.pi / N)))


def upper_cutoff_frequency(j: int, N: int) -> float:
    """Upper band edge ``sqrt(6 - 2 cos(j pi / N))``; above it mode ``j`` is evanescent again."""
    return float(np.sqrt(6.0 - 2.0 * np.cos(j * np.pi / N)))


def mode(j: int, g: WaveguideGeometry, f: LatticeFrequency) -> WaveguideMode:
    """Waveguide mode ``j`` at frequency ``f``."""
    N = g.N
    if not (1 <= j <= N - 1):
        raise AdmissibilityError(f"mode index j={j} outside [1, {N - 1}]")
    theta = j * np.pi / N
    ct = np.cos(theta)

    def gamma_of(w: complex) -> complex:
        return w * w - 4.0 + 2.0 * ct

    x_in, _, confluent = select_inside_root(gamma_of, f)
    if confluent:
        raise ResonantFrequencyError(
            f"omega={f.omega} coincides with the cut-off of mode {j}")
    cut = cutoff_frequency(j, N)
    upper = upper_cutoff_frequency(j, N)
    return WaveguideMode(j=j, theta=theta, x_factor=x_in, cutoff=cut,
                         propagating=bool(cut < f.omega < upper), upper_cutoff=upper)


def modes(g: WaveguideGeometry, f: LatticeFrequency) -> list[WaveguideMode]:
    """All ``N - 1`` modes of the duct."""
    return [mode(j, g, f) for j in range(1, g.N)]


def mode_profile(q: int, g: WaveguideGeometry) -> np.ndarray:
    """``s_q(n + N1)`` over rows ``-N1 .. N2`` (purely imaginary, exact zeros on walls)."""
    k = np.arange(0, g.N + 1)
    prof = 2j * np.sin(q * np.pi * k / g.N)
    prof[0] = 0.0
    prof[-1] = 0.0
    return prof


def incident_field(p: int, g: WaveguideGeometry, f: LatticeFrequency,
                   m_values: Sequence[int]) -> ComplexField:
    """Incident duct mode ``u_in(m, n) = x_p^m s_p(n + N1)``."""
    md = mode(p, g, f)
    if not md.propagating:
        raise AdmissibilityError(
            f"incident mode p={p} is below cut-off (omega={f.omega} <= {md.cutoff:.6g})")
    m_values = np.asarray(m_values, dtype=int)
    vals = np.power(md.x_factor, m_values.astype(float))[:, None] * mode_profile(p, g)[None, :]
    return ComplexField(m_values, -g.N1, g.N2, vals, g)


def helmholtz_residual(u: ComplexField, f: LatticeFrequency,
                       exclude_screen: bool = True) -> float:
    """Max of ``|Delta u + Omega^2 u|`` over interior, off-screen nodes.

    Columns must be consecutive.  Screen nodes are skipped when the field
    carries its geometry and ``exclude_screen`` is set.
    """
    m = u.m_values
    if len(m) < 3 or u.values.shape[1] < 3:
        raise ValueError("window must be at least 3x3")
    if np.any(np.diff(m) != 1):
        raise ValueError("helmholtz_residual needs consecutive columns")
    v = u.values
    lap = (v[2:, 1:-1] + v[:-2, 1:-1] + v[1:-1, 2:] + v[1:-1, :-2]
           + (f.omega_sq - 4.0) * v[1:-1, 1:-1])
    res = np.abs(lap)
    if exclude_screen and u.geometry is not None:
        g = u.geometry
        inner_m = m[1:-1]
        hit = np.nonzero(inner_m == 0)[0]
        if hit.size:
            rows = np.arange(u.n_min + 1, u.n_max)
            mask = (rows >= -g.n1) & (rows <= g.n2)
            res[hit[0], mask] = 0.0
    return float(res.max()) if res.size else 0.0


def mode_inner_product(column: np.ndarray, q: int, g: WaveguideGeometry) -> complex:
    """``<f, s_q> = sum_n f(n) conj(s_q(n + N1))`` over ``n = -N1 .. N2``."""
    if not (1 <= q <= g.N - 1):
        raise AdmissibilityError(f"mode index q={q} outside [1, {g.N - 1}]")
    column = np.asarray(column, dtype=complex)
    return complex(np.sum(column * np.conj(mode_profile(q, g))))


def mode_norm(q: int, g: WaveguideGeometry) -> float:
    """Computed ``<s_q, s_q>`` (equals ``2N`` for every q)."""
    prof = mode_profile(q, g)
    return float(np.real(np.sum(prof * np.conj(prof))))
