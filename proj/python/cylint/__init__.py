"""Simulation and verification engine for stochastic integrals driven by
cylindrical Levy noise in truncated Hilbert-space bases."""

from ._core import (
    LevyModel,
    gauss_dom_constant,
    increment_cf,
    model_from_json,
    p_metric,
    prokhorov_distance,
    radonify_samples,
    refine_exp_decay,
    run_experiment,
    validate_config,
)

__all__ = [
    "LevyModel",
    "gauss_dom_constant",
    "increment_cf",
    "model_from_json",
    "p_metric",
    "prokhorov_distance",
    "radonify_samples",
    "refine_exp_decay",
    "run_experiment",
    "validate_config",
]
