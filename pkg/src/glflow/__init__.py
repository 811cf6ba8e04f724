"""Gauged Ginzburg-Landau gradient flow on a flat torus, with a self-dual
diagnostics suite for the two convergence regimes around the area threshold
4 pi N."""

from .backend import active as kernel_backend
from .bundle import (BundleConnection, apply_gauge, holomorphic_section,
                     make_bundle, random_divfree_oneform, random_section)
from .calculus import (coulomb_project, covariant_derivative, curl, dbar, div,
                       flux, magnetic_field, poisson_solve)
from .diagnostics import (DiagnosticsRecord, RateFit, VortexReport,
                          bogomolny_vars, energy, energy_bogomolny, fit_rate,
                          locate_vortices, quadratic_forms,
                          subcritical_residual)
from .errors import (BlowUpError, ConfigurationError, FormatError, GlflowError,
                     InsufficientDataError, ResolutionError, SolvabilityError)
from .flow import (FlowState, RunResult, StepPolicy, energy_gradient,
                   grad_norm, run, solve_a0, step)
from .geometry import (Regime, TorusGeometry, area, background_field_strength,
                       make_geometry, regime, v_min)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
