"""Python bindings for the fairdec C++ core.

The heavy lifting lives in the compiled extension; this package re-exports
its surface and adds a dict-returning wrapper around the fairness report.
"""

import json as _json

from ._fairdec import (  # noqa: F401
    FairdecConfigError,
    FairdecDataError,
    FairdecNumericError,
    LogisticFit,
    Marginal,
    TransitionMatrix,
    attenuation_factor,
    bernoulli,
    bernoulli_threshold,
    bootstrap_ci,
    build_latent_correlation,
    calibrate_threshold,
    confusion,
    disparate_impact,
    fit_transition,
    fit_weighted_logistic,
    group_metrics_json,
    imbalance_ratio,
    mean_ci,
    metric_set,
    normal,
    pseudo_table,
    roc_auc,
    simulate_replicate,
    std_normal_cdf,
    std_normal_quantile,
    student_t_quantile,
    uniform,
)


def group_metrics(y_true, y_pred, groups, positive_label=1):
    """Fairness report as nested dicts (see group_metrics_json)."""
    return _json.loads(group_metrics_json(y_true, y_pred, groups, positive_label))


__all__ = [name for name in dir() if not name.startswith("_")]
