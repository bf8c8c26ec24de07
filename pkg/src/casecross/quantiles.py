"""Order-statistic (type-1) empirical quantiles.

Every quantile computed anywhere in this package (trimming thresholds, knot
placement, contrast levels, credible-interval endpoints) goes through
``type1_quantile`` so results are bit-reproducible and order statistics
commute with monotone transforms.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["type1_quantile", "type1_index"]

# Guards against q*n landing an ulp above an exact integer (e.g. 0.95*1000).
_FUZZ = 1e-9


def type1_index(n: int, q: float) -> int:
    """0-based index of the type-1 quantile order statistic in a sorted sample."""
    if not 0.0 < q <= 1.0:
        raise ValueError(f"quantile must be in (0, 1], got {q}")
    if n <= 0:
        raise ValueError("empty sample has no quantiles")
    k = math.ceil(q * n - _FUZZ)
    return min(max(k, 1), n) - 1


def type1_quantile(values, q: float) -> float:
    """Empirical quantile as the order statistic at 1-based index ceil(q*n)."""
    xs = np.sort(np.asarray(values, dtype=float), kind="stable")
    if xs.ndim != 1:
        raise ValueError("expected a 1-d sample")
    return float(xs[type1_index(xs.size, q)])
