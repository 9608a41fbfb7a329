import logging
import math
from typing import Sequence, Tuple

import numpy as np
from scipy import integrate, stats

from app.exception.exception import MetricError

from .models import WelchResult

logger = logging.getLogger(__name__)

KDE_GRID_POINTS = 512


def _sample(values: Sequence[float], name: str) -> np.ndarray:
    array = np.asarray(values, dtype=np.float64)
    if array.ndim != 1 or array.size < 2:
        raise MetricError(f"{name} needs at least 2 values")
    if not np.all(np.isfinite(array)):
        raise MetricError(f"{name} contains non-finite values")
    return array


def welch_t_test(a: Sequence[float], b: Sequence[float]) -> WelchResult:
    """Two-sided Welch unequal-variance t-test."""
    x, y = _sample(a, "sample a"), _sample(b, "sample b")
    mean_diff = float(x.mean() - y.mean())
    se2 = x.var(ddof=1) / x.size + y.var(ddof=1) / y.size
    # scipy returns nan when both samples are constant
    if se2 == 0:
        if mean_diff == 0:
            return WelchResult(t=0.0, p=1.0, df=float(x.size + y.size - 2))
        return WelchResult(t=math.copysign(math.inf, mean_diff), p=0.0, df=float(x.size + y.size - 2))
    result = stats.ttest_ind(x, y, equal_var=False)
    t, p = float(result.statistic), float(result.pvalue)
    if t == 0:
        p = 1.0
    return WelchResult(t=t, p=min(max(p, 0.0), 1.0), df=float(result.df))


def _kde(sample: np.ndarray, name: str) -> stats.gaussian_kde:
    if np.ptp(sample) == 0:
        raise MetricError(f"{name} has zero variance; KDE is undefined")
    return stats.gaussian_kde(sample, bw_method="scott")


def kde_grid(a: Sequence[float], b: Sequence[float]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Shared evaluation grid and both densities, for plotting elsewhere."""
    x, y = _sample(a, "sample a"), _sample(b, "sample b")
    kde_a, kde_b = _kde(x, "sample a"), _kde(y, "sample b")
    h = max(math.sqrt(kde_a.covariance[0, 0]), math.sqrt(kde_b.covariance[0, 0]))
    low = min(x.min(), y.min()) - 3 * h
    high = max(x.max(), y.max()) + 3 * h
    grid = np.linspace(low, high, KDE_GRID_POINTS)
    return grid, kde_a(grid), kde_b(grid)


def kde_overlap(a: Sequence[float], b: Sequence[float]) -> float:
    """Percent of shared area under the two Gaussian KDEs."""
    grid, f, g = kde_grid(a, b)
    overlap = 100.0 * float(integrate.trapezoid(np.minimum(f, g), grid))
    return min(max(overlap, 0.0), 100.0)


def pearson_r(x: Sequence[float], y: Sequence[float]) -> float:
    xs, ys = _sample(x, "x"), _sample(y, "y")
    if xs.size != ys.size:
        raise MetricError(f"pearson_r needs equal lengths, got {xs.size} and {ys.size}")
    if np.ptp(xs) == 0 or np.ptp(ys) == 0:
        raise MetricError("pearson_r is undefined for constant input")
    r = float(stats.pearsonr(xs, ys)[0])
    return min(max(r, -1.0), 1.0)
