"""Latent-scale cut-points for ordinal columns from cumulative proportions."""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .special import std_normal_quantile

G_CAP = 8.0


@dataclass(frozen=True, eq=False)
class Thresholds:
    """Estimated thresholds for one ordinal column.

    ``gammas[r]`` separates level ``r`` from level ``r + 1`` on the latent
    standard-normal scale; the outer thresholds -inf / +inf are implicit.
    """

    levels: np.ndarray
    cum_props: np.ndarray
    gammas: np.ndarray

    @property
    def padded(self):
        """Thresholds with the implicit -inf and +inf attached."""
        return np.concatenate(([-np.inf], self.gammas, [np.inf]))


def level_index(column, levels):
    """Map observed codes to 0-based level positions."""
    column = np.asarray(column, dtype=float)
    levels = np.asarray(levels, dtype=float)
    idx = np.searchsorted(levels, column)
    idx_c = np.minimum(idx, levels.size - 1)
    bad = levels[idx_c] != column
    if bad.any():
        raise ValidationError(f"value {column[np.argmax(bad)]!r} is not a declared level")
    return idx_c


def cumulative_proportions(column, levels):
    """Empirical P(X <= level_r) for every level except the top one.

    Raises
    ------
    ValidationError
        If some declared level is never observed.
    """
    idx = level_index(column, levels)
    counts = np.bincount(idx, minlength=len(levels))
    if np.any(counts == 0):
        missing = [levels[r] for r in np.flatnonzero(counts == 0)]
        raise ValidationError(f"unobserved level(s) {missing}: every declared level needs positive frequency")
    return np.cumsum(counts)[:-1] / idx.size


def estimate_thresholds(column, levels):
    levels = np.asarray(levels, dtype=float)
    props = cumulative_proportions(column, levels)
    gammas = np.asarray(std_normal_quantile(props), dtype=float).reshape(-1)
    if np.any(np.abs(gammas) > G_CAP):
        warnings.warn(f"threshold(s) beyond +/-{G_CAP} clamped", RuntimeWarning, stacklevel=2)
        gammas = np.clip(gammas, -G_CAP, G_CAP)
    for a in (levels, props, gammas):
        a.setflags(write=False)
    return Thresholds(levels=levels, cum_props=props, gammas=gammas)


def estimate_threshold_set(dataset):
    """Thresholds for every ordinal column of ``dataset``, keyed by column index."""
    out = {}
    for j in dataset.ordinal_indices:
        try:
            out[j] = estimate_thresholds(dataset.column(j), dataset.kinds[j].levels)
        except ValidationError as exc:
            raise ValidationError(f"column {dataset.names[j]!r}: {exc}", column=dataset.names[j]) from exc
    return out
