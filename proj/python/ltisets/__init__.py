"""Set-consistency analysis and one-step prediction for linear systems from
noisy input-state data."""

from ._core import (
    apply_transform,
    build_batch,
    feasible_output_set,
    interp_exists,
    load_trajectory,
    membership,
    min_gain,
    min_noise,
    num_rank,
    pinv,
    psd_check,
    reachable_noisefree,
    reachable_union,
    safety_check,
    simulate,
    sqrt_psd,
    tradeoff_curve,
    trs_max,
    verify,
    worst_case_cost,
)

__all__ = [
    "apply_transform",
    "build_batch",
    "feasible_output_set",
    "interp_exists",
    "load_trajectory",
    "membership",
    "min_gain",
    "min_noise",
    "num_rank",
    "pinv",
    "psd_check",
    "reachable_noisefree",
    "reachable_union",
    "safety_check",
    "simulate",
    "sqrt_psd",
    "tradeoff_curve",
    "trs_max",
    "verify",
    "worst_case_cost",
]
