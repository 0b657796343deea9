"""Time-sliced supersymmetric path integral kernels and diagnostics."""

from ._core import (
    Grid,
    Manifold,
    approximate_kernel,
    euler_characteristic_estimate,
    gbc_limit_scan,
    pfaffian_curvature,
    run_experiment,
    semigroup_defect,
    set_num_threads,
    supertrace,
    supertrace_berezin,
    t_norm,
)

__all__ = [
    "Grid",
    "Manifold",
    "approximate_kernel",
    "euler_characteristic_estimate",
    "gbc_limit_scan",
    "pfaffian_curvature",
    "run_experiment",
    "semigroup_defect",
    "set_num_threads",
    "supertrace",
    "supertrace_berezin",
    "t_norm",
]
