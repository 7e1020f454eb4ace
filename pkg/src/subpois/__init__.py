"""Counting processes with random integer jumps driven by Bernstein functions.

The package computes the exact laws of subordinated Poisson processes
(state probabilities, generating functions, hitting-time densities,
conditional structures), simulates them by three routes, and cross-validates
analytic results against independent numerical oracles and Monte Carlo.
"""

__version__ = "0.1.0"

from .errors import (
    AccuracyError,
    BinningError,
    BudgetError,
    CancellationError,
    DivergentIntegralError,
    DomainError,
    InfiniteMomentError,
    ParameterError,
    SubpoisError,
    SupportCapError,
)
from .families import (
    BernsteinSpec,
    ProcessParams,
    eval_f,
    eval_f_derivative,
    jump_rate,
    jump_size_pmf,
    jump_size_tail_bound,
    levy_exp_moment,
)
from .polyexp import PolyExpForm, complete_bell
from .distributions import (
    DistTable,
    central_moment,
    conditional_gamma_stats,
    conditional_pmf_gamma,
    conditional_pmf_spacefractional,
    factorial_moment,
    gamma_moments,
    jump_times_density_gamma,
    jump_times_density_spacefractional,
    ode_pmf,
    pgf,
    pmf,
    pmf_negative_binomial,
    pmf_polyexp,
    pmf_series_dirac,
    pmf_series_spacefractional,
    pmf_series_tempered,
    pmf_table,
    raw_moment,
    skellam_gamma_pmf,
    spacefractional_coeffs,
    tempered_moments,
)
from .hitting import (
    HittingDensityForm,
    hitting_density,
    hitting_density_form,
    hitting_density_t2,
    hitting_equation_residual,
    hitting_gf,
    hitting_gf_partial_sum,
    hitting_recurrence_check,
    hitting_survival,
)
from .sampling import (
    PathRecord,
    RngStream,
    batch_counts,
    conditional_bridge_paths,
    conditional_bridge_sample,
    empirical_hitting_time,
    sample_hitting_times,
    sample_jump_size,
    sample_jump_sizes,
    sample_subordinator,
    simulate_counts,
    simulate_counts_at,
    simulate_ctrw,
    simulate_ctrw_counts,
    simulate_path,
    simulate_time_changed,
    simulate_time_changed_counts,
)
from .validation import (
    ValidationReport,
    chi_square_density,
    moment_z,
    run_suite,
    tv_distance,
    two_sample_chisquare,
)
