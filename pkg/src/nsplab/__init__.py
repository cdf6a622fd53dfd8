"""Numerical laboratory for the coupled compressible-flow perturbation system:
spectral toolkit, dyadic/Besov machinery, exact linearized propagation with
whole-space decay quadrature, a nonlinear torus solver, time-weighted decay
functionals, and randomized inequality stress tests.
"""

__version__ = "0.1.0"

from .errors import (CflError, ConfigError, DivergenceError, DomainError,
                     GridMismatchError, VacuumError)
from .spectral import (Annulus, Ball, Grid, SpectralField, apply_multiplier,
                       curl, div, grad, inv_neg_laplacian, lambda_op,
                       leray_complement, leray_project, lp_norm,
                       lp_norm_multi, random_field, transform_roundtrip)
from .littlewood_paley import (BesovSpec, DyadicPartition, besov_norm,
                               besov_norm_multi, build_partition,
                               chemin_lerner_norm, chi, dyadic_block,
                               low_cutoff, phi)
from .propagator import (RadialProfile, SemigroupReport, degenerate_radius,
                         mode_eigenvalues, mode_exponential, mode_matrix,
                         propagate_linear, radial_decay_quadrature,
                         verify_semigroup_bound)
from .solver import (FluidState, Integrator, PhysicalParams, Tracker,
                     cfl_limit, compute_nonlinearities, effective_velocity,
                     poisson_potential, simulate, step)
from .decay import (DecayParams, fit_decay_slope, functional_D, functional_E,
                    rate_report, weighted_norm_series)
from .series import NormSeries
