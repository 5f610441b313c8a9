"""Numerical convex analysis on grids: power-mean convolutions of s-concave
functions, Legendre transforms, set sums, quermassintegrals, and a
verification harness for the inequalities tying them together."""

from lpsum.core import (
    GridFn,
    LpCoeffs,
    MeanParams,
    extremal_coeff_combination,
    grid_eval,
    grid_from_callable,
    lp_coeffs,
    ms_mean,
    read_grid_fn,
    resample,
    total_mass,
    write_grid_fn,
)

__all__ = [
    "GridFn",
    "LpCoeffs",
    "MeanParams",
    "extremal_coeff_combination",
    "grid_eval",
    "grid_from_callable",
    "lp_coeffs",
    "ms_mean",
    "read_grid_fn",
    "resample",
    "total_mass",
    "write_grid_fn",
]
