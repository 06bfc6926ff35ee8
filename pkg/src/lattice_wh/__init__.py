"""Exact Wiener-Hopf and boundary algebraic solvers for a lattice duct with a screen.

A square-lattice waveguide with Dirichlet walls contains a rigid screen on
one column.  Two independent solvers compute the scattered field of an
incident duct mode:

* ``wh_pole_removal``: exact Wiener-Hopf solution by pole removal
  (symmetric geometry, odd incident mode);
* ``lattice_green_bae``: tailored Green's function and boundary algebraic
  equations (any geometry, any propagating mode).

``scattering_analysis`` turns either field into reflection and transmission
coefficients and checks the energy balance.  ``lattice_core`` and
``spectral_roots`` hold the shared building blocks; ``kernels`` selects the
compiled inner loops when they are built.
"""
from .kernels import BACKEND
from .lattice_core import (AdmissibilityError, ComplexField, ConvergenceError,
                           DegenerateConfigurationError, LatticeError, LatticeFrequency,
                           ResonantFrequencyError, WaveguideGeometry, WaveguideMode,
                           chebyshev_T, chebyshev_V, cutoff_frequency, helmholtz_residual,
                           incident_field, mode, mode_inner_product, mode_norm, mode_profile,
                           modes)
from .lattice_green_bae import (TailoredGreen, field_bae, green, green_hat, solve_bae,
                                total_field)
from .quadrature import QuadraturePolicy
from .scattering_analysis import (ScatteringCoefficients, coefficients_analytic,
                                  coefficients_numeric, energy_flux, group_velocity)
from .spectral_roots import denominator_roots, kernel_data, roots_of_one_minus_V, roots_of_V
from .wh_pole_removal import (SpectralSolution, assemble_and_solve_system, field_wh,
                              modal_amplitudes, split_functions)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "AdmissibilityError", "ComplexField", "ConvergenceError",
    "DegenerateConfigurationError", "LatticeError", "LatticeFrequency",
    "ResonantFrequencyError", "WaveguideGeometry", "WaveguideMode", "chebyshev_T",
    "chebyshev_V", "cutoff_frequency", "helmholtz_residual", "incident_field", "mode",
    "mode_inner_product", "mode_norm", "mode_profile", "modes", "TailoredGreen",
    "field_bae", "green", "green_hat", "solve_bae", "total_field", "QuadraturePolicy",
    "ScatteringCoefficients", "coefficients_analytic", "coefficients_numeric",
    "energy_flux", "group_velocity", "denominator_roots", "kernel_data",
    "roots_of_one_minus_V", "roots_of_V", "SpectralSolution", "assemble_and_solve_system",
    "field_wh", "modal_amplitudes", "split_functions",
]
