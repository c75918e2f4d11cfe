"""Ordinal-ordinal latent correlation (two-step polychoric MLE)."""

from dataclasses import dataclass

import numpy as np

from ._numerics import DELTA_OPT, P_FLOOR, maximize_bounded
from .errors import ValidationError
from .special import bvn_cdf, bvn_pdf
from .thresholds import level_index


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    counts: np.ndarray
    row_levels: np.ndarray
    col_levels: np.ndarray

    @property
    def n(self):
        return int(self.counts.sum())

    def transpose(self):
        return ContingencyTable(self.counts.T.copy(), self.col_levels, self.row_levels)


def contingency_table(xj, xk, levels_j, levels_k):
    xj = np.asarray(xj, dtype=float)
    xk = np.asarray(xk, dtype=float)
    if xj.shape != xk.shape or xj.ndim != 1:
        raise ValidationError("contingency table needs two 1-d columns of equal length")
    levels_j = np.asarray(levels_j, dtype=float)
    levels_k = np.asarray(levels_k, dtype=float)
    rj = level_index(xj, levels_j)
    rk = level_index(xk, levels_k)
    flat = np.bincount(rj * levels_k.size + rk, minlength=levels_j.size * levels_k.size)
    return ContingencyTable(flat.reshape(levels_j.size, levels_k.size), levels_j, levels_k)


def _pad(g):
    return np.concatenate(([-np.inf], np.asarray(g, dtype=float), [np.inf]))


def _grid(gj, gk, rho, fn):
    # fn evaluated on all threshold corners, including infinite ones
    pj, pk = _pad(gj), _pad(gk)
    return fn(pj[:, None], pk[None, :], rho)


def _rectangles(corners):
    return corners[1:, 1:] - corners[:-1, 1:] - corners[1:, :-1] + corners[:-1, :-1]


def cell_probabilities(gj, gk, rho):
    """Matrix of cell probabilities for thresholds ``gj`` (rows) and ``gk`` (columns)."""
    if abs(rho) > 1.0 - DELTA_OPT + 1e-15:
        raise ValidationError(f"rho {rho!r} outside the optimization box")
    return np.clip(_rectangles(_grid(gj, gk, rho, bvn_cdf)), 0.0, 1.0)


def cell_probability(gj, gk, r, s, rho):
    """Probability of row level ``r`` and column level ``s`` (0-based)."""
    pj, pk = _pad(gj), _pad(gk)
    corners = bvn_cdf(
        np.array([[pj[r], pj[r]], [pj[r + 1], pj[r + 1]]]),
        np.array([[pk[s], pk[s + 1]], [pk[s], pk[s + 1]]]),
        rho,
    )
    return float(np.clip(_rectangles(corners)[0, 0], 0.0, 1.0))


def polychoric_loglik(table, gj, gk, rho):
    """Average log-likelihood sum n_rs log pi_rs / n (constant dropped)."""
    probs = cell_probabilities(gj, gk, rho)
    return float(np.sum(table.counts * np.log(np.maximum(probs, P_FLOOR))) / table.n)


def polychoric_gradient(table, gj, gk, rho):
    """Derivative of :func:`polychoric_loglik`; uses d Phi2 / d rho = phi2."""
    probs = cell_probabilities(gj, gk, rho)
    dens = _rectangles(_grid(gj, gk, rho, bvn_pdf))
    return float(np.sum(table.counts * dens / np.maximum(probs, P_FLOOR)) / table.n)


def polychoric_mle(table, gj, gk):
    return maximize_bounded(
        lambda r: polychoric_loglik(table, gj, gk, r),
        lambda r: polychoric_gradient(table, gj, gk, r),
        label="polychoric MLE",
    )
