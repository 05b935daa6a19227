"""Spectral laboratory for the Galerkin-truncated inviscid Burgers equation."""
__version__ = "0.1.0"

from . import backend
from .dynamics import (BlowUpError, IntegratorConfig, Trajectory, characteristic, default_dt, integrate, rhs,
                       subspace_run, time_reverse_run, truncation_force)
from .invariants import (DiagnosticRecord, diagnostics, energy, energy_total, hamiltonian, lagrange_multiplier,
                         passive_invariants)
from .peaks import NoPeakError, peak_position
from .soliton import (FitParams, SolitonSolution, basis_matrix, double_soliton_seed, energy_scaling,
                      fit_empirical, make_traveling, solve_static)
from .spectral import (GridSpec, SpectralField1D, direct_quadratic_product, evaluate, galilean,
                       quadratic_product, translate)

__all__ = [
    "__version__", "backend",
    "SpectralField1D", "GridSpec", "evaluate", "quadratic_product", "direct_quadratic_product",
    "translate", "galilean",
    "energy", "energy_total", "hamiltonian", "lagrange_multiplier", "diagnostics", "DiagnosticRecord",
    "passive_invariants",
    "IntegratorConfig", "Trajectory", "BlowUpError", "rhs", "default_dt", "integrate", "time_reverse_run",
    "characteristic", "truncation_force", "subspace_run",
    "SolitonSolution", "FitParams", "solve_static", "make_traveling", "fit_empirical", "energy_scaling",
    "double_soliton_seed", "basis_matrix",
    "peak_position", "NoPeakError",
]
