"""Continuous-continuous correlations: Pearson and the Spearman sine bridge."""

import numpy as np
from scipy.stats import rankdata

from ._numerics import clamp_corr
from .errors import DegenerateError, ValidationError


def _check_pair(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValidationError("correlation inputs must be 1-d vectors of equal length")
    if x.size < 2:
        raise ValidationError("correlation needs at least 2 observations")
    return x, y


def pearson(x, y):
    x, y = _check_pair(x, y)
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = xc @ xc
    syy = yc @ yc
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateError("zero variance column in correlation")
    r = (xc @ yc) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


def spearman_rho(x, y):
    """Pearson correlation of average ranks."""
    x, y = _check_pair(x, y)
    return pearson(rankdata(x), rankdata(y))


def spearman_to_latent(rho_sp):
    """Map Spearman's rho to the latent Gaussian correlation 2 sin(pi rho / 6)."""
    if abs(rho_sp) > 1.0:
        raise ValidationError("Spearman's rho must lie in [-1, 1]")
    return clamp_corr(2.0 * np.sin(np.pi * rho_sp / 6.0))
