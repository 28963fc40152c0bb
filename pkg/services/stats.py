"""
Rank statistics
"""

import logging
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import StatisticsError
from .models import PairedSample

logger = logging.getLogger(__name__)

MIN_SAMPLE_SIZE = 3


def rank_transform(values: Sequence[float]) -> np.ndarray:
    """Ranks 1..n, tied values share the mean of their positions"""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise StatisticsError("cannot rank an empty sample")
    if np.isnan(values).any():
        raise StatisticsError("cannot rank a sample containing NaN")
    return rankdata(values, method='average')


def spearman(sample: PairedSample) -> float:
    """
    Spearman rho as the Pearson correlation of fractional ranks.

    Raises:
        StatisticsError: fewer than 3 pairs, or a side with a single distinct value
    """
    if sample.n < MIN_SAMPLE_SIZE:
        raise StatisticsError(f"Spearman correlation needs at least {MIN_SAMPLE_SIZE} pairs, got {sample.n}")

    rx = rank_transform(sample.x)
    ry = rank_transform(sample.y)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise StatisticsError("correlation is undefined for a constant sample")

    rho = float(np.dot(dx, dy) / np.sqrt(sxx * syy))
    return float(np.clip(rho, -1.0, 1.0))
