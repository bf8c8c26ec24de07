import numpy as np
import pytest

from casecross.quantiles import type1_index, type1_quantile


def test_order_statistic_rule_frozen_values():
    # ceil(q*n)-th smallest value, 1-based
    assert type1_quantile(range(1, 101), 0.95) == 95.0
    assert type1_quantile(range(1, 1001), 0.95) == 950.0
    assert type1_quantile(range(0, 100), 1 / 3) == 33.0
    assert type1_quantile(range(0, 100), 2 / 3) == 66.0
    assert type1_quantile([7.0], 0.5) == 7.0


def test_extremes():
    xs = [3.0, 1.0, 2.0]
    assert type1_quantile(xs, 1.0) == 3.0
    assert type1_quantile(xs, 1e-9) == 1.0


def test_matches_direct_enumeration():
    # oracle: walk the sorted sample and pick the first index with
    # rank/n >= q (the classic inverse-cdf definition)
    rng = np.random.default_rng(42)
    for _ in range(200):
        n = int(rng.integers(1, 60))
        xs = rng.normal(size=n)
        q = float(rng.uniform(0.01, 1.0))
        srt = np.sort(xs)
        want = next(srt[k] for k in range(n) if (k + 1) / n >= q - 1e-12)
        assert type1_quantile(xs, q) == want


def test_float_fuzz_at_exact_integer_products():
    # 0.95 * 1000 rounds above 950 in float arithmetic; the rule must not
    # slip to the 951st order statistic
    assert type1_index(1000, 0.95) == 949
    assert type1_index(100, 0.95) == 94
    assert type1_index(20, 0.05) == 0


def test_invalid_arguments():
    with pytest.raises(ValueError):
        type1_quantile([1.0, 2.0], 0.0)
    with pytest.raises(ValueError):
        type1_quantile([1.0, 2.0], 1.5)
    with pytest.raises(ValueError):
        type1_quantile([], 0.5)
