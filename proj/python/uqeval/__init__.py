"""Uncertainty evaluation for stochastic classifiers (MC dropout, ensembles, EMCD)."""

from ._uqeval import (
    AlignmentError,
    Error,
    IoError,
    ParseError,
    ValidationError,
    accuracy,
    aggregate,
    auc_binary,
    bin_assign,
    build_ucm,
    calibration_report,
    classify_outcome,
    paired_t_test,
    predictive_entropy,
    predictive_mean,
    run_demo,
    separation_report,
    student_t_cdf,
    threshold_grid,
    threshold_sweep,
)

__version__ = "0.1.0"
