"""Nearest correlation matrix by Dykstra-corrected alternating projections (Higham 2002)."""

import numpy as np

from ._numerics import DELTA_NUM
from .errors import ConvergenceError, ValidationError

PSD_TOL = 1e-8


def _project_psd(a):
    vals, vecs = np.linalg.eigh(a)
    out = (vecs * np.maximum(vals, 0.0)) @ vecs.T
    return (out + out.T) / 2.0


def nearest_psd_correlation(matrix, tol=1e-7, max_iter=200):
    """Nearest (Frobenius) unit-diagonal PSD matrix to a symmetric input.

    Alternates between the PSD cone and the unit-diagonal set with Dykstra's
    correction on the cone step. A final diagonal rescaling of the last PSD
    iterate makes the diagonal exactly one without leaving the cone.

    Raises
    ------
    ConvergenceError
        If the iterates have not settled to ``tol`` after ``max_iter`` rounds.
    """
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError("expected a square matrix")
    if not np.allclose(a, a.T, atol=1e-12, rtol=0):
        raise ValidationError("matrix is not symmetric")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    a = (a + a.T) / 2.0
    np.fill_diagonal(a, 1.0)
    if np.linalg.eigvalsh(a)[0] >= 0.0:
        return _finish(a)

    y = a.copy()
    correction = np.zeros_like(a)
    change = np.inf
    for _ in range(max_iter):
        r = y - correction
        x = _project_psd(r)
        correction = x - r
        y_new = x.copy()
        np.fill_diagonal(y_new, 1.0)
        change = np.max(np.abs(y_new - y))
        y = y_new
        if change <= tol:
            break
    else:
        raise ConvergenceError(
            f"nearest correlation projection did not converge in {max_iter} iterations "
            f"(last change {change:.3g})",
            residual=change,
        )
    scale = 1.0 / np.sqrt(np.diag(x))
    return _finish(x * scale[:, None] * scale[None, :])


def _finish(c):
    c = np.clip((c + c.T) / 2.0, -1.0 + DELTA_NUM, 1.0 - DELTA_NUM)
    np.fill_diagonal(c, 1.0)
    return c
