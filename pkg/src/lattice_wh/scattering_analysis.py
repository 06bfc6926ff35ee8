"""Reflection and transmission coefficients, group velocities and energy balance.

Far from the screen the scattered field is a sum of duct modes,

.. math::

    u^{sc}(m, n) = \\sum_q M_q\\, x_q^{|m|}\\, s_q(n + N_1),

so ``R_q = M_q``, ``T_p = 1 + M_p`` and ``T_q = M_q`` for ``q != p``.
Coefficients weighted by group velocity, ``T~_q = sqrt(v_q / v_p) T_q``,
satisfy ``sum_q |T~_q|^2 + |R~_q|^2 = 1``.

Time dependence is ``exp(-i Omega t)``, so the energy flux through column
``m`` is

.. math::

    E(m) = \\tfrac12 \\Omega\\, \\mathrm{Im} \\sum_n u_{m+1,n}\\, \\overline{u_{m,n}},

which is positive for a right-going mode.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .lattice_core import (AdmissibilityError, ComplexField, LatticeFrequency,
                           WaveguideGeometry, incident_field, mode, mode_inner_product,
                           mode_norm, mode_profile)

logger = logging.getLogger(__name__)

#: Even-mode projections above this flag a broken symmetry in symmetric runs.
EVEN_MODE_TOL = 1e-9


def group_velocity(q: int, f: LatticeFrequency, g: WaveguideGeometry) -> float:
    """``v_q = dOmega/dK_q = sin(K_q) / Omega`` for a propagating mode."""
    md = mode(q, g, f)
    if not md.propagating:
        raise AdmissibilityError(f"mode q={q} is not propagating at omega={f.omega}")
    K = float(np.real(md.K)) % (2.0 * np.pi)
    return float(np.sin(K) / f.omega)


@dataclass
class ModeCoefficients:
    q: int
    R: complex
    T: complex
    group_velocity: float
    R_weighted: float
    T_weighted: float


@dataclass
class ScatteringCoefficients:
    """Coefficients for each reported propagating mode."""

    p: int
    omega: float
    modes: list
    energy_residual: float
    suppressed_max: float = 0.0
    meta: dict = field(default_factory=dict)

    def by_mode(self, q: int) -> ModeCoefficients:
        for mc in self.modes:
            if mc.q == q:
                return mc
        raise KeyError(q)

    @property
    def R_p(self) -> complex:
        return self.by_mode(self.p).R

    @property
    def T_p(self) -> complex:
        return self.by_mode(self.p).T


def _assemble(p: int, g: WaveguideGeometry, f: LatticeFrequency, R: dict, T: dict,
              suppressed: float = 0.0, meta: Optional[dict] = None) -> ScatteringCoefficients:
    vp = group_velocity(p, f, g)
    rows = []
    total = 0.0
    for q in sorted(R):
        vq = group_velocity(q, f, g)
        w = np.sqrt(vq / vp)
        rt, tt = float(w * abs(R[q])), float(w * abs(T[q]))
        total += rt * rt + tt * tt
        rows.append(ModeCoefficients(q, complex(R[q]), complex(T[q]), vq, rt, tt))
    return ScatteringCoefficients(p=p, omega=f.omega, modes=rows,
                                  energy_residual=float(abs(total - 1.0)),
                                  suppressed_max=suppressed, meta=meta or {})


def coefficients_analytic(sol) -> ScatteringCoefficients:
    """Coefficients from the residue amplitudes of a spectral solution."""
    amps = sol.modal_amplitudes()
    g = sol.geometry
    R, T = {}, {}
    for q, (amp, _) in amps.items():
        R[q] = amp
        T[q] = amp + (1.0 if q == sol.p else 0.0)
    return _assemble(sol.p, g, sol.frequency, R, T, meta={"method": "residue"})


def coefficients_numeric(scattered: ComplexField, p: int, m_r: int,
                         f: LatticeFrequency,
                         g: Optional[WaveguideGeometry] = None) -> ScatteringCoefficients:
    """Coefficients by projecting the field onto the duct modes at columns ``+-m_r``.

    The incident mode is added for the transmitted side.  Mode factors are
    evaluated at the real frequency.
    """
    g = g or scattered.geometry
    if g is None:
        raise ValueError("geometry required")
    if m_r < 1:
        raise AdmissibilityError("m_r must be >= 1")
    if m_r not in scattered.m_values or -m_r not in scattered.m_values:
        raise AdmissibilityError(f"columns +-{m_r} are not in the field window")
    f_real = LatticeFrequency(f.omega)
    tot_right = scattered.column(m_r) + incident_field(p, g, f_real, [m_r]).column(m_r)
    left = scattered.column(-m_r)
    symmetric_odd = g.symmetric and p % 2 == 1
    R, T = {}, {}
    suppressed = 0.0
    for q in range(1, g.N):
        md = mode(q, g, f_real)
        if not md.propagating:
            continue
        norm = mode_norm(q, g)
        dep = md.x_factor ** (-m_r)
        tq = mode_inner_product(tot_right, q, g) / norm * dep
        rq = mode_inner_product(left, q, g) / norm * dep
        if symmetric_odd and q % 2 == 0:
            suppressed = max(suppressed, abs(tq), abs(rq))
            continue
        R[q], T[q] = rq, tq
    if suppressed > EVEN_MODE_TOL:
        logger.warning("even-mode projection %.2e exceeds %.0e in a symmetric run",
                       suppressed, EVEN_MODE_TOL)
    return _assemble(p, g, f_real, R, T, suppressed, {"method": "projection", "m_r": m_r})


def energy_flux(u: ComplexField, m: int, f: LatticeFrequency) -> float:
    """Energy flux through column ``m`` (needs columns ``m`` and ``m + 1``)."""
    a, b = u.column(m + 1), u.column(m)
    return float(0.5 * f.omega * np.imag(np.sum(a * np.conj(b))))


def incident_flux(p: int, g: WaveguideGeometry, f: LatticeFrequency) -> float:
    """Flux of the unit-amplitude incident mode, ``Omega^2 v_p ||s_p||^2 / 2``."""
    return float(0.5 * f.omega ** 2 * group_velocity(p, f, g) * mode_norm(p, g))


def flux_balance(scattered: ComplexField, p: int, m_r: int, f: LatticeFrequency) -> dict:
    """Energy balance from flux integrals at columns ``+-m_r``.

    Returns incident, reflected and transmitted fluxes and the residual
    ``|(E_T + E_R) / E_in - 1|``.
    """
    g = scattered.geometry
    tot = scattered + incident_field(p, g, f, scattered.m_values)
    e_in = incident_flux(p, g, f)
    e_t = energy_flux(tot, m_r, f)
    e_r = e_in - energy_flux(tot, -m_r - 1, f)
    return {"incident": e_in, "transmitted": e_t, "reflected": e_r,
            "residual": float(abs((e_t + e_r) / e_in - 1.0))}


def mode_field(q: int, g: WaveguideGeometry, f: LatticeFrequency, m_values,
               amplitude: complex = 1.0) -> ComplexField:
    """``amplitude * x_q^m s_q(n + N1)`` on the given columns."""
    md = mode(q, g, f)
    m_values = np.asarray(m_values, dtype=int)
    vals = amplitude * md.x_factor ** m_values.astype(float)[:, None] * mode_profile(q, g)[None, :]
    return ComplexField(m_values, -g.N1, g.N2, vals, g)
