"""Curtailment rules and line-investment equilibria for shared grid connections."""

from ._gridshare import (
    ConfigError,
    DataError,
    NumericError,
    allocate,
    correlation_weight,
    expected_curtailment_uniform,
    fit_beta,
    fit_weibull,
    knots_to_ms,
    profits,
    run,
    sample_wind,
    shear_factor,
    simulate,
    solve_equilibrium,
    wind_to_power,
)

__all__ = [
    "ConfigError",
    "DataError",
    "NumericError",
    "allocate",
    "correlation_weight",
    "expected_curtailment_uniform",
    "fit_beta",
    "fit_weibull",
    "knots_to_ms",
    "profits",
    "run",
    "sample_wind",
    "shear_factor",
    "simulate",
    "solve_equilibrium",
    "wind_to_power",
]
