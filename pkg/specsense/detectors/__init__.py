"""Test statistics for multi-antenna spectrum sensing."""

from specsense.detectors.statistics import (
    DegenerateInput,
    DetectorKind,
    Orientation,
    Statistic,
    compute_statistics,
    decide,
    decide_batch,
    statistic_from_covariance,
    t_er,
    t_john,
    t_le,
    t_sle,
    t_st,
)

__all__ = [
    "DegenerateInput",
    "DetectorKind",
    "Orientation",
    "Statistic",
    "compute_statistics",
    "decide",
    "decide_batch",
    "statistic_from_covariance",
    "t_er",
    "t_john",
    "t_le",
    "t_sle",
    "t_st",
]
