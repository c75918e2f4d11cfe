"""Winsorized empirical normal-scores transform for continuous columns."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .special import std_normal_quantile


def truncation_constant(n):
    """delta_n = 1 / (4 n^{1/4} sqrt(pi log n))."""
    if n < 2:
        raise ValidationError("truncation constant needs n >= 2")
    return 1.0 / (4.0 * n ** 0.25 * math.sqrt(math.pi * math.log(n)))


class EmpiricalCDF:
    """Right-continuous step function F(x) = #{x_i <= x} / n."""

    def __init__(self, column):
        col = np.sort(np.asarray(column, dtype=float))
        if col.size < 2:
            raise ValidationError("empirical CDF needs at least 2 observations")
        col.setflags(write=False)
        self.sorted_values = col

    @property
    def n(self):
        return self.sorted_values.size

    def __call__(self, x):
        out = np.searchsorted(self.sorted_values, np.asarray(x, dtype=float), side="right") / self.n
        return float(out) if np.ndim(out) == 0 else out

    def mid_counts(self, x):
        """Integer numerator k of the midpoint ECDF k / (2n) = (#{x_i <= x} + #{x_i < x}) / (2n).

        Reflecting the sample maps k to 2n - k exactly.
        """
        x = np.asarray(x, dtype=float)
        s = self.sorted_values
        return np.searchsorted(s, x, side="right") + np.searchsorted(s, x, side="left")


def empirical_cdf(column):
    return EmpiricalCDF(column)


def winsorize(u, delta):
    u = np.asarray(u, dtype=float)
    if not 0.0 < delta < 0.5:
        raise ValidationError("winsorization level must lie in (0, 0.5)")
    if np.any((u < 0.0) | (u > 1.0)) or np.isnan(u).any():
        raise ValidationError("winsorize expects values in [0, 1]")
    out = np.clip(u, delta, 1.0 - delta)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class TransformEstimate:
    """x -> Phi^{-1}(W_delta(F(x))) with F the midpoint empirical CDF.

    Both tails are evaluated from integer counts, so the estimate built from
    the reflected sample is exactly the negated estimate.
    """

    ecdf: EmpiricalCDF
    delta_n: float

    @property
    def bound(self):
        """Largest attainable |f(x)|."""
        return -float(std_normal_quantile(self.delta_n))

    def __call__(self, x):
        k = self.ecdf.mid_counts(x)
        two_n = 2 * self.ecdf.n
        lower = k <= self.ecdf.n
        tail = np.where(lower, k, two_n - k) / two_n
        # winsorizing u to [delta, 1 - delta] is clamping the nearer tail at delta
        q = np.asarray(std_normal_quantile(np.maximum(tail, self.delta_n)))
        out = np.where(lower, q, -q)
        return float(out) if out.ndim == 0 else out


def estimate_transform(column):
    ecdf = EmpiricalCDF(column)
    return TransformEstimate(ecdf, truncation_constant(ecdf.n))


def evaluate_transform(t, x):
    return t(x)
