"""Pole-based analysis of impedance and frequency-response measurements."""

from ._vfshm import (
    ConfigError,
    DataError,
    IllConditionedError,
    NumericError,
    assess,
    emi_impedance,
    evaluate_model,
    lscf_fit,
    mdof_frf,
    mdof_poles,
    modal_parameters,
    order_sweep,
    rmsd,
    run_cli,
    vector_fit,
    windowed_metric,
    xcorr,
)

__all__ = [
    "ConfigError",
    "DataError",
    "IllConditionedError",
    "NumericError",
    "assess",
    "emi_impedance",
    "evaluate_model",
    "lscf_fit",
    "mdof_frf",
    "mdof_poles",
    "modal_parameters",
    "order_sweep",
    "rmsd",
    "run_cli",
    "vector_fit",
    "windowed_metric",
    "xcorr",
]
