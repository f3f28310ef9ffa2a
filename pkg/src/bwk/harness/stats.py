"""Concentration widths and summary statistics."""
from __future__ import annotations

import math

import numpy as np


def azuma_halfwidth(T: float, c: float, delta: float) -> float:
    """sqrt(2 T c^2 ln(1/delta)): deviation of a T-step martingale with increments in [-c, c]."""
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    return math.sqrt(2.0 * T * c * c * math.log(1.0 / delta))


def chernoff_halfwidth(sum_of_means: float, c: float, delta: float) -> float:
    """3 sqrt(sum_t E[Z_t] c^2 ln(1/delta)) for independent Z_t in [0, c]."""
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    return 3.0 * math.sqrt(max(sum_of_means, 0.0) * c * c * math.log(1.0 / delta))


def mean_std_stderr(values) -> tuple[float, float, float]:
    """Mean, sample standard deviation and standard error, independent of order."""
    v = np.sort(np.asarray(values, dtype=float))
    n = len(v)
    if n == 0:
        raise ValueError("no values")
    mean = float(np.sum(v) / n)
    std = float(np.sqrt(np.sum((v - mean) ** 2) / (n - 1))) if n > 1 else 0.0
    return mean, std, std / math.sqrt(n)
