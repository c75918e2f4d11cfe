"""Ordinal-continuous latent correlation.

Two estimators: the two-step polyserial MLE (correct under a latent
Gaussian model) and the rank-based ad hoc estimator built on the Winsorized
normal-scores transform (valid under the Gaussian copula).
"""

from dataclasses import dataclass

import numpy as np
from scipy import special

from ._numerics import DELTA_OPT, P_FLOOR, clamp_corr, maximize_bounded
from .continuous import pearson
from .errors import DegenerateError, NumericalError, ValidationError
from .special import std_normal_pdf
from .thresholds import Thresholds, estimate_thresholds, level_index
from .transform import estimate_transform

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass(frozen=True, eq=False)
class PolyserialProblem:
    """Sufficient data for the two-step polyserial likelihood.

    ``upper`` / ``lower`` hold, per observation, the latent thresholds that
    bracket its observed level (with +/-inf at the ends); ``x_std`` is the
    continuous column standardized by its mean and 1/n standard deviation.
    """

    x_std: np.ndarray
    upper: np.ndarray
    lower: np.ndarray
    thresholds: Thresholds

    @property
    def n(self):
        return self.x_std.size

    @classmethod
    def from_columns(cls, ordinal, levels, continuous, thresholds=None):
        ordinal = np.asarray(ordinal, dtype=float)
        x = np.asarray(continuous, dtype=float)
        if ordinal.shape != x.shape or x.ndim != 1:
            raise ValidationError("polyserial columns must be 1-d and of equal length")
        sd = x.std()
        if sd == 0.0:
            raise DegenerateError("continuous column has zero variance")
        if thresholds is None:
            thresholds = estimate_thresholds(ordinal, levels)
        idx = level_index(ordinal, thresholds.levels)
        padded = thresholds.padded
        return cls(
            x_std=(x - x.mean()) / sd,
            upper=padded[idx + 1],
            lower=padded[idx],
            thresholds=thresholds,
        )


def _conditional_terms(problem, sigma):
    root = np.sqrt(1.0 - sigma * sigma)
    shift = sigma * problem.x_std
    a = (problem.upper - shift) / root
    b = (problem.lower - shift) / root
    return a, b


def polyserial_loglik(problem, sigma):
    """Average log-likelihood of the two-step polyserial model at ``sigma``."""
    if not abs(sigma) <= 1.0 - DELTA_OPT + 1e-15:
        raise ValidationError(f"sigma {sigma!r} outside the optimization box")
    a, b = _conditional_terms(problem, sigma)
    # upper-tail form keeps precision when both arguments are large
    prob = np.where(b > 0.0, special.ndtr(-b) - special.ndtr(-a), special.ndtr(a) - special.ndtr(b))
    marginal = -_LOG_SQRT_2PI - 0.5 * problem.x_std ** 2
    value = np.mean(marginal + np.log(np.maximum(prob, P_FLOOR)))
    if np.isnan(value):
        raise NumericalError("polyserial log-likelihood is NaN")
    return float(value)


def polyserial_gradient(problem, sigma):
    """Derivative of :func:`polyserial_loglik` with respect to ``sigma``."""
    a, b = _conditional_terms(problem, sigma)
    prob = np.where(b > 0.0, special.ndtr(-b) - special.ndtr(-a), special.ndtr(a) - special.ndtr(b))
    x = problem.x_std
    with np.errstate(invalid="ignore"):
        top = np.where(np.isfinite(problem.upper), std_normal_pdf(a) * (problem.upper * sigma - x), 0.0)
        bot = np.where(np.isfinite(problem.lower), std_normal_pdf(b) * (problem.lower * sigma - x), 0.0)
    scale = (1.0 - sigma * sigma) ** -1.5
    return float(np.mean(scale * (top - bot) / np.maximum(prob, P_FLOOR)))


def polyserial_mle(problem):
    """Two-step polyserial maximum-likelihood correlation."""
    return maximize_bounded(
        lambda s: polyserial_loglik(problem, s),
        lambda s: polyserial_gradient(problem, s),
        label="polyserial MLE",
    )


def discrete_sd(column):
    column = np.asarray(column, dtype=float)
    sd = float(column.std())
    if sd == 0.0:
        raise DegenerateError("ordinal column has zero variance")
    return sd


def adhoc_denominator(gammas, levels):
    """sum_r (x^{r+1} - x^r) phi(Gamma^r): E[Z X] for standard-normal latent Z."""
    gammas = np.asarray(gammas, dtype=float)
    levels = np.asarray(levels, dtype=float)
    if gammas.size != levels.size - 1:
        raise ValidationError("need one threshold fewer than levels")
    if not np.all(np.isfinite(gammas)):
        raise ValidationError("thresholds must be finite")
    return float(np.diff(levels) @ std_normal_pdf(gammas))


def polyserial_adhoc(ordinal, continuous, thresholds=None, transform=None):
    """Rank-based Case II estimate r(f(X_k), X_j) * sd(X_j) / E[f(Z_j) X_j].

    ``thresholds`` and ``transform`` may be passed in when they are shared
    across many pairs.
    """
    ordinal = np.asarray(ordinal, dtype=float)
    if thresholds is None:
        levels = np.unique(ordinal)
        thresholds = estimate_thresholds(ordinal, levels)
    if transform is None:
        transform = estimate_transform(continuous)
    scores = transform(np.asarray(continuous, dtype=float))
    r = pearson(scores, ordinal)
    est = r * discrete_sd(ordinal) / adhoc_denominator(thresholds.gammas, thresholds.levels)
    return clamp_corr(est)
