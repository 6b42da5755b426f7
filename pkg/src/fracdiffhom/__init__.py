"""Time-fractional diffusion in periodic media.

Mittag-Leffler evaluation, discrete fractional calculus, cell problems and
effective coefficients, forward solvers, and coefficient recovery.
"""

from __future__ import annotations

from fracdiffhom.cell import (
    HomogenizedTensor,
    LayeredMatrix,
    PeriodicCoefficient1D,
    arithmetic_mean,
    corrector_1d,
    harmonic_mean,
    homogenize_layered,
    oscillate,
    verify_against_definition,
)
from fracdiffhom.errors import *  # noqa: F401,F403
from fracdiffhom.forward import (
    CylinderDomain,
    Field,
    IntervalDomain,
    Point,
    Region,
    SpectralSolution,
    Trace,
    dirichlet_eigs,
    eigenvalue_ordering_holds,
    fdm_solve,
    homogenization_study,
    l2_space_time_distance,
    layered_rates,
    observe,
    reduce_layered_to_1d,
    spectral_solve,
    spectral_solve_layered,
)
from fracdiffhom.fracalc import TimeGrid, caputo_l1, l1_weights, rl_integral, verify_inverse_pair
from fracdiffhom.inverse import (
    ForwardModel,
    RecoveryResult,
    RecoverySpec,
    asymptotic_coeffs,
    contamination_bound,
    counterexample_demo,
    cross_recover_homogenized,
    cross_recover_periodic,
    forward_data,
    l1_distance,
    recover_from_trace,
    recover_monotone,
    sandwich_check,
)
from fracdiffhom.mlf import MlfOrder, ml, ml_asymptotic, ml_series, ml_table

__version__ = "0.1.0"
