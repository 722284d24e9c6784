"""Weak KAM toolkit for u-dependent Hamilton-Jacobi equations on the torus."""

from ._core import (
    ConfigError,
    DomainError,
    Model,
    NumericError,
    converge,
    critical_value,
    fixed_point,
    flow,
    lax_friedrichs,
    min_action,
    num_threads,
    run,
    set_num_threads,
    step,
    weak_kam_residual,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "Model",
    "NumericError",
    "converge",
    "critical_value",
    "fixed_point",
    "flow",
    "lax_friedrichs",
    "min_action",
    "num_threads",
    "run",
    "set_num_threads",
    "step",
    "weak_kam_residual",
]
