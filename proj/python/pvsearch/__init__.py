"""Projected-volume multidimensional binary search."""

import json

from ._pvsearch import (
    ExperimentConfig,
    Polytope,
    RunRecord,
    chebyshev_center,
    ellipsoid_volume_ratio,
    fit_regret_constant,
    regret_bound,
    run_experiment,
    verify,
    width,
)


def run(**settings):
    """Run one experiment; keyword names follow the CLI flags."""
    cfg = ExperimentConfig()
    for key, value in settings.items():
        cfg.set(key, str(value))
    return run_experiment(cfg)


def summary(record):
    return json.loads(record.summary_json())


__all__ = [
    "ExperimentConfig",
    "Polytope",
    "RunRecord",
    "chebyshev_center",
    "ellipsoid_volume_ratio",
    "fit_regret_constant",
    "regret_bound",
    "run",
    "run_experiment",
    "summary",
    "verify",
    "width",
]
