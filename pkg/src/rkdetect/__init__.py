"""Randomized Kaczmarz solvers with multi-round detection of sparse
right-hand-side corruptions."""

from .bounds import (
    BoundInputs,
    BoundReport,
    bound_report,
    compute_k_star,
    max_rounds,
    mrkwor_success_lb,
    mrkworus_success_lb,
    noisy_rk_bound,
    rk_expected_error_bound,
    single_round_success_lb,
)
from .detect import (
    WITH_REMOVAL,
    WITHOUT_REMOVAL,
    WITHOUT_REMOVAL_UNIQUE,
    DetectionConfig,
    DetectionOutcome,
    detect,
    in_detection_horizon,
    mrk_with_removal,
    mrk_without_removal,
    mrk_without_removal_unique,
    top_d_residual_indices,
)
from .estimator import KaczmarzCorruptionDetector
from .linalg import (
    least_squares_solve,
    normalize_rows,
    residual,
    smallest_singular_value,
    subsystem,
)
from .rk import RkTrace, make_rng, rk_run, rk_step, sample_row_index
from .systems import (
    CorruptedSystem,
    CorruptionLaw,
    GenSpec,
    brute_force_l0_oracle,
    epsilon_star,
    generate,
    load_system,
    save_system,
)

__version__ = "0.1.0"
