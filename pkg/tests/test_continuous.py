import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mixedgraph.continuous import pearson, spearman_rho, spearman_to_latent
from mixedgraph.errors import DegenerateError

from conftest import latent_pair

PEARSON_123_124 = 0.9819805060619657157  # mpmath
BRIDGE_HALF = 0.5176380902050415247  # 2 sin(pi / 12)


def test_pearson_examples():
    x = np.array([1.0, 2.0, 3.0, 4.5])
    assert pearson(x, x) == pytest.approx(1.0)
    assert pearson(x, -x) == pytest.approx(-1.0)
    assert pearson([1, 2, 3], [1, 2, 4]) == pytest.approx(PEARSON_123_124, abs=1e-15)
    with pytest.raises(DegenerateError):
        pearson([1, 1, 1], [1, 2, 3])


def test_spearman_examples():
    x = np.array([0.3, -1.0, 2.0, 5.0, 0.1])
    assert spearman_rho(x, np.exp(x)) == pytest.approx(1.0)
    assert spearman_rho(x, -x) == pytest.approx(-1.0)
    assert spearman_rho([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-15)


def test_spearman_ties_use_average_ranks():
    # ranks of (1, 1, 2) are (1.5, 1.5, 3)
    r = spearman_rho([1, 1, 2], [1, 2, 3])
    assert r == pytest.approx(pearson([1.5, 1.5, 3], [1, 2, 3]))


def test_bridge_values():
    assert spearman_to_latent(0.0) == 0.0
    assert spearman_to_latent(1.0) == 1 - 1e-6  # 2 sin(pi / 6) = 1, clamped
    assert spearman_to_latent(0.5) == pytest.approx(BRIDGE_HALF, abs=1e-15)


@given(st.floats(-1, 1))
def test_bridge_is_odd(r):
    assert spearman_to_latent(-r) == -spearman_to_latent(r)


@given(st.lists(st.floats(-100, 100), min_size=5, max_size=40, unique=True),
       st.sampled_from([np.exp, np.arctan, lambda v: v ** 3 + v]))
def test_bridge_monotone_invariance(xs, g):
    x = np.array(xs)
    y = np.sin(3 * x) + 0.1 * x
    gx, gy = g(x / 100), g(y)
    # the map must stay strictly increasing in floating point
    if np.ptp(y) == 0 or np.unique(gx).size != x.size or np.unique(gy).size != np.unique(y).size:
        return
    base = spearman_to_latent(spearman_rho(x, y))
    assert spearman_to_latent(spearman_rho(gx, y)) == base
    assert spearman_to_latent(spearman_rho(x, gy)) == base


def test_bridge_consistency():
    errs = [abs(spearman_to_latent(spearman_rho(*latent_pair(0.6, 5000, s).T)) - 0.6) for s in range(50)]
    assert np.median(errs) <= 0.02
