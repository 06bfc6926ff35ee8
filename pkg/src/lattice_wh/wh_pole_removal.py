"""Exact Wiener-Hopf solution for the symmetric duct by pole removal.

Geometry is handled in its normal form: gap length ``l`` on both sides,
screen rows ``t = 0 .. l0-1`` (``t = n + n1`` in user coordinates), walls at
``t = -l`` and ``t = l + l0 - 1``.  The incident mode ``p`` must be odd.

Unknowns
--------
With ``U0+`` and ``U1+`` the plus half-transforms on the screen edge row and
on the first gap row, the splitting leaves

.. math::

    U_1^+ = \\frac{K_0 \\sum_j w^{(1)}_j F^{(1)}_j + \\sum_j w^{(0)}_j F^{(0)}_j
             + G_0 + K_0 G_1}{1 + K_0 K_1},
    \\qquad
    U_0^+ = -U_1^+ K_1 + \\sum_j w^{(1)}_j F^{(1)}_j + G_1,

where ``w`` are the values of ``U+`` at the outside kernel poles.  The
numerator must vanish at every outside root of ``1 + K0 K1``; when such a
root coincides with a kernel pole (a cancelled pole), the matching
condition is replaced by a completion equation:

* cancelled ``K0`` pole: the residue of the numerator vanishes there;
* cancelled ``K1`` pole: ``U1+`` evaluated there equals its own ``w``.

Limits at cancelled points are taken as Cauchy means over a small circle,
which returns the regular part of the function exactly up to a
geometrically small error.

Incident mode on a K1 pole
--------------------------
If ``x_p`` coincides with an inside ``K1`` pole then ``s_p(l-1) = 0`` and the
product ``s_p(l-1) Pi(x) K1(x)`` vanishes identically.  Every term carrying
``s_p(l-1)`` is then dropped and ``P(x)`` reduces to ``s_p(l) x / (x - x_p)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from .kernels import cheb_v_table
from .lattice_core import (AdmissibilityError, ComplexField, DegenerateConfigurationError,
                           LatticeFrequency, WaveguideGeometry, mode, mode_profile)
from .quadrature import QuadraturePolicy, adaptive_moments
from .spectral_roots import (COINCIDENCE_TOL, RationalKernelData, _pair_product,
                             denominator_roots, kernel_data)

logger = logging.getLogger(__name__)

#: Evaluation points closer than this to a catalogued singularity use the local limit form.
NEAR_POLE = 1e-8
#: Condition number above which the pole-removal system is declared degenerate.
MAX_CONDITION = 1e14
_CIRCLE_POINTS = 48


def circle_mean(func: Callable[[np.ndarray], np.ndarray], centre: complex, radius: float,
                points: int = _CIRCLE_POINTS) -> np.ndarray:
    """Mean of ``func`` over a circle; the regular part of ``func`` at ``centre``."""
    t = np.exp(2j * np.pi * (np.arange(points) + 0.5) / points)
    vals = np.asarray(func(centre + radius * t))
    return vals.mean(axis=0)


def circle_residue(func: Callable[[np.ndarray], np.ndarray], centre: complex, radius: float,
                   points: int = 64) -> complex:
    """Residue of ``func`` at ``centre`` from a circle of the given radius."""
    t = np.exp(2j * np.pi * (np.arange(points) + 0.5) / points)
    x = centre + radius * t
    return complex(np.mean(np.asarray(func(x)) * (x - centre)))


def _separation(point: complex, others: np.ndarray) -> float:
    d = np.abs(np.asarray(others) - point)
    d = d[d > COINCIDENCE_TOL * max(1.0, abs(point))]
    return float(d.min()) if d.size else 1.0


# ---------------------------------------------------------------------------
# Split functions
# ---------------------------------------------------------------------------

@dataclass
class SplitFunctions:
    """Explicitly known functions of the additive splitting.

    All evaluators accept scalars or arrays.
    """

    l: int
    l0: int
    p: int
    frequency: LatticeFrequency
    k0: RationalKernelData
    k1: RationalKernelData
    x_p: complex
    theta_p: float
    incident_on_k1_pole: bool = False

    # -- incident data ------------------------------------------------------
    @property
    def N(self) -> int:
        return 2 * self.l + self.l0 - 1

    def s_p(self, k: int) -> complex:
        """``s_p(k) = 2i sin(theta_p k)`` with exact zeros."""
        if (self.p * k) % self.N == 0:
            return 0j
        return 2j * np.sin(self.theta_p * k)

    @property
    def s_p_lm1(self) -> complex:
        """``s_p(l-1)``, exactly zero on the incident-on-pole branch."""
        return 0j if self.incident_on_k1_pole else self.s_p(self.l - 1)

    # -- kernels ------------------------------------------------------------
    def K0(self, x):
        return self.k0.evaluate(x)

    def K1(self, x):
        return self.k1.evaluate(x)

    def K1_at_xp(self) -> complex:
        """``K1(x_p) = s_p(l0-1) / (s_p(1) - s_p(l0))`` (infinite on the pole branch)."""
        den = self.s_p(1) - self.s_p(self.l0)
        if self.incident_on_k1_pole or den == 0:
            return complex(np.inf)
        return self.s_p(self.l0 - 1) / den

    def C0(self, x):
        """Principal parts of ``K0`` at its inside poles."""
        return self.k0.inside_part(x)

    def C1(self, x):
        """Principal parts of ``K1`` at its inside poles (equal to ``[K1]_+``)."""
        return self.k1.inside_part(x)

    K1_plus = C1

    def K1_minus(self, x):
        return self.K1(x) - self.C1(x)

    # -- incident factor ----------------------------------------------------
    def Pi(self, x):
        x = np.asarray(x, dtype=complex)
        xp = self.x_p
        out = (x * x - 1.0) / ((x - xp) * (x - 1.0 / xp))
        return complex(out) if out.ndim == 0 else out

    def Upsilon(self, x):
        return 1.0 + self.Pi(x)

    def Pi_minus(self, x):
        x = np.asarray(x, dtype=complex)
        out = x / (x - 1.0 / self.x_p)
        return complex(out) if out.ndim == 0 else out

    def Pi_plus(self, x):
        x = np.asarray(x, dtype=complex)
        out = self.x_p / (x - self.x_p)
        return complex(out) if out.ndim == 0 else out

    def _pi_lam1(self) -> np.ndarray:
        if self.incident_on_k1_pole:
            return np.zeros(self.k1.J, dtype=complex)
        return np.asarray(self.Pi(self.k1.lam_in), dtype=complex).reshape(-1)

    def PiK1_plus(self, x):
        """``[Pi K1]_+``: principal parts of ``Pi K1`` at ``x_p`` and the inside ``K1`` poles."""
        if self.incident_on_k1_pole:
            raise DegenerateConfigurationError("Pi*K1 has a double pole at x_p on this branch")
        x = np.asarray(x, dtype=complex)
        li = self.k1.lam_in
        out = (self.K1_at_xp() * self.x_p / (x - self.x_p)
               + np.sum(self._pi_lam1() * self.k1.b_in * li / (x[..., None] - li), axis=-1))
        return complex(out) if np.ndim(out) == 0 else out

    def PiK1_minus(self, x):
        return self.Pi(x) * self.K1(x) - self.PiK1_plus(x)

    @property
    def f_star(self) -> complex:
        return complex(np.sum(self.k1.b_in))

    @property
    def f_p(self) -> complex:
        if self.incident_on_k1_pole:
            return complex(np.inf)
        return complex(self.K1_at_xp() + np.sum(self._pi_lam1() * self.k1.b_in))

    @property
    def sp_fp(self) -> complex:
        """Product ``s_p(l-1) f_p`` (zero on the incident-on-pole branch)."""
        return 0j if self.incident_on_k1_pole else self.s_p_lm1 * self.f_p

    # -- pole-removal building blocks --------------------------------------
    def F1(self, x):
        """``F^(1)_j(x)``, stacked on the last axis."""
        x = np.asarray(x, dtype=complex)[..., None]
        k = self.k1
        return k.b_in * k.lam_in / (x - k.lam_in) + k.b_out * k.lam_out / (x - k.lam_out)

    def F0(self, x):
        """``F^(0)_j(x)``, stacked on the last axis."""
        x = np.asarray(x, dtype=complex)[..., None]
        k = self.k0
        return k.b_in * x / (x - k.lam_in) - k.b_out * x / (x - k.lam_out)

    def G0(self, x):
        x = np.asarray(x, dtype=complex)
        k = self.k0
        out = self.s_p(self.l) * np.sum(k.b_in * x[..., None] / (x[..., None] - k.lam_in), axis=-1)
        return complex(out) if out.ndim == 0 else out

    @property
    def p_kappa(self) -> complex:
        """Coefficient of ``x_p / (x - x_p)`` left in ``P`` after the removable singularity."""
        if self.incident_on_k1_pole:
            return self.s_p(self.l)
        return 0j

    def P(self, x):
        """``P(x)``; its singularity at ``x_p`` is removable except on the pole branch."""
        x = np.asarray(x, dtype=complex)
        out = self.s_p(self.l) + self.p_kappa * self.x_p / (x - self.x_p) if self.p_kappa else \
            np.full(x.shape, self.s_p(self.l), dtype=complex)
        return complex(out) if np.ndim(out) == 0 else out

    def P_raw(self, x):
        """``P`` from its defining quotient (test oracle; loses accuracy near ``x_p``)."""
        x = np.asarray(x, dtype=complex)
        num = x * self.s_p(self.l) + self.x_p * self.s_p_lm1 * (
            0 if self.incident_on_k1_pole else self.K1_at_xp())
        return num / (x - self.x_p)

    def G1(self, x):
        x = np.asarray(x, dtype=complex)
        k = self.k1
        li = k.lam_in
        tail = np.sum(self._pi_lam1() * k.b_in * li / (x[..., None] - li), axis=-1)
        out = -np.asarray(self.P(x)) - self.s_p_lm1 * tail
        return complex(out) if out.ndim == 0 else out

    def F(self, x, u_star: complex):
        """Forcing ``s_p(l) (Pi + 1) + (Pi s_p(l-1) - u*) K1``."""
        x = np.asarray(x, dtype=complex)
        return self.s_p(self.l) * (self.Pi(x) + 1.0) + (self.Pi(x) * self.s_p_lm1 - u_star) * self.K1(x)


def _normal_form(g: WaveguideGeometry) -> tuple[int, int]:
    if not g.symmetric:
        raise AdmissibilityError("the pole-removal solver needs a symmetric geometry (l1 == l2)")
    return g.l1, g.l0


def split_functions(p: int, g: WaveguideGeometry, f: LatticeFrequency,
                    k0: Optional[RationalKernelData] = None,
                    k1: Optional[RationalKernelData] = None) -> SplitFunctions:
    """Build the split-function bundle for incident mode ``p``."""
    l, l0 = _normal_form(g)
    if p % 2 == 0:
        raise AdmissibilityError("the pole-removal solver supports odd incident modes only")
    gn = WaveguideGeometry.symmetric_normal_form(l, l0)
    md = mode(p, gn, f)
    if not md.propagating:
        raise AdmissibilityError(f"incident mode p={p} is below cut-off")
    k0 = k0 or kernel_data("K0", gn, f)
    k1 = k1 or kernel_data("K1", gn, f)
    sf = SplitFunctions(l=l, l0=l0, p=p, frequency=f, k0=k0, k1=k1,
                        x_p=md.x_factor, theta_p=md.theta)
    on_pole = bool(k1.J) and np.min(np.abs(k1.lam_in - md.x_factor)) <= COINCIDENCE_TOL
    if on_pole:
        if sf.s_p(l - 1) != 0:
            raise DegenerateConfigurationError(
                f"incident factor x_p coincides with a K1 pole while s_p(l-1) != 0 (p={p})")
        logger.info("incident mode p=%d sits on a K1 pole; s_p(l-1) terms vanish", p)
        sf.incident_on_k1_pole = True
    else:
        # removable singularity of P: s_p(l) + s_p(l-1) K1(x_p) must vanish
        kappa = sf.s_p(l) + sf.s_p(l - 1) * sf.K1_at_xp()
        scale = max(1.0, abs(sf.s_p(l - 1) * sf.K1_at_xp()))
        if abs(kappa) > 1e-8 * scale:
            raise DegenerateConfigurationError(
                f"P(x) singularity at x_p is not removable (residual {abs(kappa):.2e})")
    return sf


@dataclass
class ForcingSplit:
    """``F = F_- + F_+`` for a given ``u*``."""

    sf: SplitFunctions
    u_star: complex

    def F_minus(self, x):
        sf = self.sf
        out = sf.s_p(sf.l) * sf.Pi_minus(x) - self.u_star * sf.K1_minus(x)
        if not sf.incident_on_k1_pole:
            out = out + sf.s_p_lm1 * sf.PiK1_minus(x)
        return out

    def F_plus(self, x):
        sf = self.sf
        out = sf.s_p(sf.l) * (1.0 + sf.Pi_plus(x)) - self.u_star * sf.K1_plus(x)
        if not sf.incident_on_k1_pole:
            out = out + sf.s_p_lm1 * sf.PiK1_plus(x)
        return out

    def F(self, x):
        return self.sf.F(x, self.u_star)

    @property
    def F_minus_at_zero(self) -> complex:
        """Limit ``s_p(l-1) f_p - u* f_*``."""
        return self.sf.sp_fp - self.u_star * self.sf.f_star

    @property
    def F_plus_at_infinity(self) -> complex:
        return self.sf.s_p(self.sf.l)


def forcing_split(sf: SplitFunctions, u_star: complex) -> ForcingSplit:
    return ForcingSplit(sf, complex(u_star))


# ---------------------------------------------------------------------------
# Solution
# ---------------------------------------------------------------------------

@dataclass
class SplitCoefficients:
    w0_plus: np.ndarray
    w1_plus: np.ndarray
    u_star: complex
    f_p: complex
    f_star: complex


@dataclass
class SpectralSolution:
    """Solved pole-removal system and evaluators of the spectral unknowns."""

    coefficients: SplitCoefficients
    split: SplitFunctions
    nu: list
    geometry: WaveguideGeometry
    frequency: LatticeFrequency
    p: int
    condition_number: float
    completion: list = field(default_factory=list)

    # -- basic data ---------------------------------------------------------
    @property
    def l(self) -> int:
        return self.split.l

    @property
    def l0(self) -> int:
        return self.split.l0

    @property
    def J(self) -> int:
        return len(self.nu)

    @property
    def u_star(self) -> complex:
        return self.coefficients.u_star

    @property
    def kernels(self) -> tuple[RationalKernelData, RationalKernelData]:
        return self.split.k0, self.split.k1

    @property
    def nu_in(self) -> np.ndarray:
        return np.array([v.x_in for v in self.nu], dtype=complex)

    @property
    def nu_out(self) -> np.ndarray:
        return np.array([v.x_out for v in self.nu], dtype=complex)

    def singular_points(self) -> np.ndarray:
        sf = self.split
        pts = [sf.k0.lam_in, sf.k0.lam_out, sf.k1.lam_in, sf.k1.lam_out,
               self.nu_in, self.nu_out, [sf.x_p, 1.0 / sf.x_p, 0.0]]
        return np.concatenate([np.asarray(a, dtype=complex).reshape(-1) for a in pts])

    # -- U+ evaluators ------------------------------------------------------
    def _denominator_inverse(self, x):
        """``1 / (1 + K0 K1) = Q0 Q1 / W`` with ``W`` the monic product over ``nu`` pairs."""
        sf = self.split
        return sf.k0.Q(x) * sf.k1.Q(x) / _pair_product(x, self.nu)

    def _u1_raw(self, x):
        sf = self.split
        c = self.coefficients
        num = (sf.K0(x) * (sf.F1(x) @ c.w1_plus) + sf.F0(x) @ c.w0_plus
               + sf.G0(x) + sf.K0(x) * sf.G1(x))
        return num * self._denominator_inverse(x)

    def _u0_raw(self, x):
        sf = self.split
        c = self.coefficients
        return -self._u1_raw(x) * sf.K1(x) + sf.F1(x) @ c.w1_plus + sf.G1(x)

    def _guarded(self, raw: Callable, x):
        x = np.asarray(x, dtype=complex)
        flat = x.reshape(-1)
        with np.errstate(divide="ignore", invalid="ignore"):   # exact hits are replaced below
            out = np.asarray(raw(flat), dtype=complex)
        sing = self.singular_points()
        d = np.abs(flat[:, None] - sing[None, :])
        near = np.nonzero(np.min(d, axis=1) < NEAR_POLE * np.maximum(1.0, np.abs(flat)))[0]
        for i in near:
            c = flat[i]
            radius = min(1e-4, 0.25 * _separation(c, sing))
            out[i] = circle_mean(raw, c, radius)
        out = out.reshape(x.shape)
        return complex(out) if out.ndim == 0 else out

    def U1_plus(self, x):
        return self._guarded(self._u1_raw, x)

    def U0_plus(self, x):
        return self._guarded(self._u0_raw, x)

    def U0_minus(self, x):
        x = np.asarray(x, dtype=complex)
        return self.U0_plus(1.0 / x) + self.split.s_p(self.l)

    def U1_minus(self, x):
        x = np.asarray(x, dtype=complex)
        return self.U1_plus(1.0 / x) - self.u_star

    def Phi0(self, x):
        return self.U0_minus(x) + self.U0_plus(x)

    def Phi1(self, x):
        return self.U1_minus(x) + self.U1_plus(x)

    def Psi0(self, x):
        return self.U0_minus(x) - self.U0_plus(x)

    def Psi1(self, x):
        return self.U1_minus(x) - self.U1_plus(x)

    # -- consistency checks -------------------------------------------------
    def liouville_C1(self) -> complex:
        """Assembled Liouville constant of the first equation (vanishes for a correct solve)."""
        c = self.coefficients
        k1 = self.split.k1
        w1_minus = c.w1_plus - c.u_star
        return complex(np.sum(w1_minus * k1.b_in) + np.sum(c.w1_plus * k1.b_out)
                       - self.split.sp_fp + c.u_star * c.f_star)

    def liouville_C0(self) -> complex:
        """Assembled Liouville constant of the second equation (equals ``u*``)."""
        c = self.coefficients
        k0 = self.split.k0
        w0_minus = c.w0_plus + self.split.s_p(self.l)
        return complex(np.sum(w0_minus * k0.b_in) - np.sum(c.w0_plus * k0.b_out))

    # -- transforms on each row --------------------------------------------
    def spectral_field(self, t: int) -> Callable[[np.ndarray], np.ndarray]:
        """Transform of the scattered field on internal row ``t`` (``-l <= t <= l0 - 1``).

        Gap rows return ``Phi(x, t)``, screen rows ``Psi(x, t)``.
        """
        if not (-self.l <= t <= self.l0 - 1):
            raise AdmissibilityError(f"row t={t} outside [-l, l0-1]; use the mirror rule")

        def evaluate(x):
            x = np.atleast_1d(np.asarray(x, dtype=complex))
            vals = self._row_transforms(x, [t])[0]
            return vals
        return evaluate

    def _row_transforms(self, x: np.ndarray, rows: Sequence[int]) -> np.ndarray:
        """Stack of transforms for the requested internal rows at nodes ``x``."""
        sf = self.split
        l, l0 = self.l, self.l0
        L = l0 - 1
        f = self.frequency
        lam = f.omega_sq - 4.0 + x + 1.0 / x
        z = -lam / 2.0
        V = cheb_v_table(z, max(l, l0) + 1)          # column k+1 holds V_k

        def Vk(k):
            if k == -2:
                return -np.ones_like(z)
            return V[:, k + 1]

        xi = 1.0 / x
        u1p, u1m = self.U1_plus(x), self.U1_plus(xi)
        u0p, u0m = self.U0_plus(x), self.U0_plus(xi)
        us, spl = self.u_star, sf.s_p(l)
        phi1 = u1m + u1p - us
        phi0 = u0m + u0p + spl
        psi0 = u0m - u0p + spl
        psi1 = u1m - us - u1p
        scale1 = np.abs(u1p) + np.abs(u1m) + abs(us)
        scale0 = np.abs(u0p) + np.abs(u0m) + abs(spl)
        ups = 1.0 + np.asarray(sf.Pi(x))

        out = np.zeros((len(rows), x.shape[0]), dtype=complex)
        for i, t in enumerate(rows):
            if t == -l:
                continue
            if t < 0:
                num = Vk(l + t - 1)
                ra, rb = num / Vk(l - 2), num / Vk(l - 1)
                ea, eb = scale1 * np.abs(ra), scale0 * np.abs(rb)
                out[i] = np.where(ea <= eb, phi1 * ra, phi0 * rb)
                continue
            h0 = psi0 - ups * spl
            if t == 0:
                out[i] = psi0
                continue
            ratio = (Vk(t - 1) + Vk(L - t - 1)) / Vk(L - 1)
            sym = h0 * ratio + ups * sf.s_p(l + t)
            r0 = ups * (lam * spl + sf.s_p(l + 1) + sf.s_p(l - 1)) - (sf.s_p(l - 1) + us)
            psi_1 = r0 - lam * psi0 - psi1
            h1 = psi_1 - ups * sf.s_p(l + 1)
            two = ups * sf.s_p(l + t) + h1 * Vk(t - 1) - h0 * Vk(t - 2)
            s_h0 = scale0 * (1.0 + np.abs(ups))
            s_h1 = (np.abs(lam) * s_h0 + scale1 + np.abs(ups) * (np.abs(lam) + 2.0) * 2.0 + 2.0
                    + abs(us))
            e_sym = s_h0 * np.abs(ratio)
            e_two = s_h1 * np.abs(Vk(t - 1)) + s_h0 * np.abs(Vk(t - 2))
            out[i] = np.where(e_sym <= e_two, sym, two)
        return out

    # -- modal amplitudes ---------------------------------------------------
    def modal_amplitudes(self, include_evanescent: bool = False) -> dict:
        """Residue amplitudes ``M_q`` for odd ``q`` (propagating unless requested).

        Returns a mapping ``q -> (M_q, propagating)``.
        """
        gn = WaveguideGeometry.symmetric_normal_form(self.l, self.l0)
        N = gn.N
        sing = self.singular_points()
        out = {}
        for q in range(1, N, 2):
            md = mode(q, gn, self.frequency)
            if not (md.propagating or include_evanescent):
                continue
            xq = md.x_factor
            s_lm1 = np.sin(md.theta * (self.l - 1))
            s_l = np.sin(md.theta * self.l)
            radius = 0.25 * _separation(xq, sing)
            if abs(s_lm1) >= abs(s_l):
                res = circle_residue(lambda x: self._u1_raw(x) / x, xq, radius)
                amp = res / (2j * s_lm1)
            else:
                res = circle_residue(lambda x: self._u0_raw(x) / x, xq, radius)
                amp = res / (2j * s_l)
            out[q] = (complex(amp), md.propagating)
        return out

    # -- physical field ------------------------------------------------------
    def field(self, m_values: Sequence[int], method: str = "quadrature",
              policy: QuadraturePolicy = QuadraturePolicy()) -> ComplexField:
        """Scattered field on the given columns in user coordinates."""
        g = self.geometry
        l, l0 = self.l, self.l0
        m_values = np.asarray(m_values, dtype=int)
        mabs = np.abs(m_values)
        mmax = int(mabs.max()) if mabs.size else 0
        t_all = np.arange(-l, l + l0)
        own = [t for t in t_all if -l < t <= l0 - 1]
        if method == "quadrature":
            res = adaptive_moments(lambda x: self._row_transforms(x, own), mmax, policy)
            moments = res.moments
            meta = {"nodes": res.nodes, "achieved": res.achieved, "delta": res.delta}
        elif method == "residue":
            moments = self._residue_moments(own, mmax)
            meta = {"nodes": 0}
        else:
            raise ValueError(f"unknown method {method!r}")
        row_of = {t: i for i, t in enumerate(own)}
        vals = np.zeros((len(m_values), len(t_all)), dtype=complex)
        for k, t in enumerate(t_all):
            src = t if t <= l0 - 1 else l0 - 1 - t
            if src == -l or t == l + l0 - 1:
                continue
            col = moments[row_of[src], mabs]
            if method == "quadrature" and 0 <= src <= l0 - 1:
                col = col - 2.0 * self.split.s_p(l + src) * (mabs == 0)
            vals[:, k] = col
        return ComplexField(m_values, -g.N1, g.N2, vals, g, meta)

    def _residue_moments(self, rows: Sequence[int], mmax: int) -> np.ndarray:
        gn = WaveguideGeometry.symmetric_normal_form(self.l, self.l0)
        amps = self.modal_amplitudes(include_evanescent=True)
        out = np.zeros((len(rows), mmax + 1), dtype=complex)
        ms = np.arange(mmax + 1)
        for q, (amp, _) in amps.items():
            xq = mode(q, gn, self.frequency).x_factor
            prof = mode_profile(q, gn)
            for i, t in enumerate(rows):
                out[i] += amp * prof[t + self.l] * xq ** ms
        return out


def _completion_rows(sf: SplitFunctions, nu: list, sing: np.ndarray):
    """Rows of the pole-removal system, one per outside denominator root."""
    k0, k1 = sf.k0, sf.k1
    J0, J1 = k0.J, k1.J

    def c_vec(x):
        x = np.asarray(x, dtype=complex)
        return np.concatenate([np.asarray(sf.K0(x))[..., None] * sf.F1(x), sf.F0(x)], axis=-1)

    def d_val(x):
        return sf.G0(x) + sf.K0(x) * sf.G1(x)

    def dinv(x):
        return k0.Q(x) * k1.Q(x) / _pair_product(x, nu)

    A = np.zeros((len(nu), J1 + J0), dtype=complex)
    rhs = np.zeros(len(nu), dtype=complex)
    kinds = []
    for i, v in enumerate(nu):
        r = v.x_out
        tol = COINCIDENCE_TOL * max(1.0, abs(r))
        hit0 = np.nonzero(np.abs(k0.lam_out - r) <= tol)[0]
        hit1 = np.nonzero(np.abs(k1.lam_out - r) <= tol)[0]
        radius = 0.25 * _separation(r, sing)
        if hit0.size:
            A[i] = circle_mean(lambda x: (x - r)[:, None] * c_vec(x), r, radius)
            rhs[i] = -circle_mean(lambda x: (x - r) * d_val(x), r, radius)
            kinds.append(("K0", int(hit0[0])))
        elif hit1.size:
            A[i] = -circle_mean(lambda x: c_vec(x) * dinv(x)[:, None], r, radius)
            A[i, hit1[0]] += 1.0
            rhs[i] = circle_mean(lambda x: d_val(x) * dinv(x), r, radius)
            kinds.append(("K1", int(hit1[0])))
        else:
            A[i] = c_vec(r)
            rhs[i] = -d_val(r)
            kinds.append(("nu", i))
    return A, rhs, kinds


def assemble_and_solve_system(g: WaveguideGeometry, f: LatticeFrequency, p: int) -> SpectralSolution:
    """Assemble and solve the J x J pole-removal system."""
    l, l0 = _normal_form(g)
    sf = split_functions(p, g, f)
    gn = WaveguideGeometry.symmetric_normal_form(l, l0)
    nu = denominator_roots(gn, f)
    J0, J1 = sf.k0.J, sf.k1.J
    if len(nu) != J0 + J1:
        raise DegenerateConfigurationError(
            f"denominator root count {len(nu)} != J0 + J1 = {J0 + J1}")
    sing = np.concatenate([sf.k0.lam_in, sf.k0.lam_out, sf.k1.lam_in, sf.k1.lam_out,
                           [v.x_in for v in nu], [v.x_out for v in nu],
                           [sf.x_p, 1.0 / sf.x_p, 0.0]]).astype(complex)
    A, rhs, kinds = _completion_rows(sf, nu, sing)
    completion = [k for k in kinds if k[0] != "nu"]
    for kind, j in completion:
        logger.info("completion equation used at cancelled %s pole j=%d", kind, j)
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise DegenerateConfigurationError(
            f"degenerate configuration: pole-removal system condition number {cond:.3e}")
    lu = scipy.linalg.lu_factor(A)
    w = scipy.linalg.lu_solve(lu, rhs)
    if cond > 1e10:
        w = w + scipy.linalg.lu_solve(lu, rhs - A @ w)
    w1, w0 = w[:J1], w[J1:]
    u_star = complex(np.sum(w0 * (sf.k0.b_in - sf.k0.b_out)) + sf.s_p(l) * np.sum(sf.k0.b_in))
    coeffs = SplitCoefficients(w0_plus=w0, w1_plus=w1, u_star=u_star,
                               f_p=sf.f_p, f_star=sf.f_star)
    return SpectralSolution(coefficients=coeffs, split=sf, nu=nu, geometry=g, frequency=f,
                            p=p, condition_number=cond, completion=completion)


def u_plus_evaluators(sol: SpectralSolution) -> dict:
    """``{"U0_plus": ..., "U1_plus": ...}``."""
    return {"U0_plus": sol.U0_plus, "U1_plus": sol.U1_plus}


def spectral_field(sol: SpectralSolution, n: int) -> Callable:
    """Transform on user row ``n`` (mirror rule applied above the screen)."""
    t = n + sol.geometry.n1
    if t > sol.l0 - 1:
        t = sol.l0 - 1 - t
    return sol.spectral_field(t)


def field_wh(sol: SpectralSolution, m_values: Sequence[int], method: str = "quadrature",
             policy: QuadraturePolicy = QuadraturePolicy()) -> ComplexField:
    """Scattered field from the spectral solution."""
    return sol.field(m_values, method=method, policy=policy)


def modal_amplitudes(sol: SpectralSolution, include_evanescent: bool = False) -> dict:
    return sol.modal_amplitudes(include_evanescent)
