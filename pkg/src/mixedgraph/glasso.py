"""Graphical lasso by block coordinate descent, lambda paths and eBIC selection.

The diagonal of the precision matrix is not penalized, so the fitted
covariance keeps ``W_jj == sigma_jj`` throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import ConvergenceError, NumericalError, ValidationError

EDGE_EPS = 1e-8
KKT_TOL = 1e-4
RIDGE = 1e-8
MAX_SWEEPS = 500
INNER_TOL = 1e-12
INNER_MAX_ITER = 10_000
REFIT_TOL = 1e-10
REFIT_MAX_SWEEPS = 1000


@njit(cache=True)
def _lasso_block(W, s, j, beta, lam, tol, max_iter):
    # coordinate descent for min_b 0.5 b'W11 b - s12'b + lam |b|_1, W11 = W without row/col j
    d = W.shape[0]
    wb = np.zeros(d)
    for k in range(d):
        if k != j and beta[k] != 0.0:
            for l in range(d):
                wb[l] += W[l, k] * beta[k]
    for _ in range(max_iter):
        max_delta = 0.0
        for k in range(d):
            if k == j:
                continue
            wkk = W[k, k]
            z = s[k] - wb[k] + wkk * beta[k]
            if z > lam:
                new = (z - lam) / wkk
            elif z < -lam:
                new = (z + lam) / wkk
            else:
                new = 0.0
            delta = new - beta[k]
            if delta != 0.0:
                for l in range(d):
                    wb[l] += W[l, k] * delta
                beta[k] = new
                ad = abs(delta) * wkk
                if ad > max_delta:
                    max_delta = ad
        if max_delta < tol:
            break
    return wb


@njit(cache=True)
def _sweep(S, W, B, lam, tol, max_iter):
    d = S.shape[0]
    max_change = 0.0
    for j in range(d):
        beta = B[:, j].copy()
        beta[j] = 0.0
        wb = _lasso_block(W, S[:, j], j, beta, lam, tol, max_iter)
        for k in range(d):
            B[k, j] = beta[k]
            if k == j:
                continue
            ch = abs(wb[k] - W[k, j])
            if ch > max_change:
                max_change = ch
            W[k, j] = wb[k]
            W[j, k] = wb[k]
    return max_change


@njit(cache=True)
def _refit_sweeps(S, support, tol, max_sweeps):
    # covariance completion: W matches S on the diagonal and on the support, inv(W) vanishes elsewhere
    d = S.shape[0]
    W = S.copy()
    change = np.inf
    for sweep in range(max_sweeps):
        change = 0.0
        for j in range(d):
            nb = np.nonzero(support[:, j])[0]
            m = nb.size
            new = np.zeros(d)
            if m > 0:
                A = np.empty((m, m))
                b = np.empty(m)
                for a in range(m):
                    b[a] = S[nb[a], j]
                    for c in range(m):
                        A[a, c] = W[nb[a], nb[c]]
                beta = np.linalg.solve(A, b)
                for l in range(d):
                    acc = 0.0
                    for a in range(m):
                        acc += W[l, nb[a]] * beta[a]
                    new[l] = acc
            for l in range(d):
                if l == j:
                    continue
                ch = abs(new[l] - W[l, j])
                if ch > change:
                    change = ch
                W[l, j] = new[l]
                W[j, l] = new[l]
        if change <= tol:
            return W, sweep + 1, change
    return W, max_sweeps, change


def _precision_from_blocks(W, B):
    d = W.shape[0]
    omega = -B.copy()
    np.fill_diagonal(omega, 0.0)
    # omega_jj = 1 / (w_jj - w12' beta)
    diag = 1.0 / (np.diag(W) - np.einsum("kj,kj->j", W, B * (1.0 - np.eye(d))))
    omega *= diag[None, :]
    omega[np.diag_indices(d)] = diag
    return (omega + omega.T) / 2.0


def glasso_objective(sigma, omega, lam):
    sign, logdet = np.linalg.slogdet(omega)
    if sign <= 0:
        return np.inf
    off = np.abs(omega).sum() - np.abs(np.diag(omega)).sum()
    return float(np.sum(sigma * omega) - logdet + lam * off)


def kkt_residual(sigma, w, omega, lam, edge_eps=EDGE_EPS):
    """Largest violation of the glasso stationarity conditions.

    Off-diagonal zeros need ``|sigma_jk - w_jk| <= lam``; nonzeros need
    ``sigma_jk - w_jk == -lam * sign(omega_jk)``; the diagonal needs
    ``w_jj == sigma_jj``.
    """
    d = sigma.shape[0]
    diff = sigma - w
    nz = np.abs(omega) > edge_eps
    off = ~np.eye(d, dtype=bool)
    res_zero = np.where(off & ~nz, np.maximum(np.abs(diff) - lam, 0.0), 0.0)
    res_nz = np.where(off & nz, np.abs(diff + lam * np.sign(omega)), 0.0)
    res_diag = np.abs(np.diag(diff))
    return float(max(res_zero.max(initial=0.0), res_nz.max(initial=0.0), res_diag.max(initial=0.0)))


def edge_set(omega, edge_eps=EDGE_EPS):
    j, k = np.nonzero(np.tril(np.abs(omega) > edge_eps, -1))
    return frozenset(zip(k.tolist(), j.tolist()))


@dataclass(frozen=True, eq=False)
class GlassoSolution:
    lam: float
    omega: np.ndarray
    w: np.ndarray
    edges: frozenset
    sweeps: int = 0
    kkt: float = 0.0
    objective_trace: tuple = ()
    _blocks: np.ndarray = field(default=None, repr=False)

    @property
    def n_edges(self):
        return len(self.edges)

    def edge_list(self):
        """Sorted ``(j, k, omega_jk)`` triples with ``j < k``."""
        return [(j, k, float(self.omega[j, k])) for j, k in sorted(self.edges)]


def _check_sigma(sigma):
    sigma = np.array(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise ValidationError("sigma must be square")
    if not np.allclose(sigma, sigma.T, atol=1e-12, rtol=0):
        raise ValidationError("sigma must be symmetric")
    sigma = (sigma + sigma.T) / 2.0
    min_eig = np.linalg.eigvalsh(sigma)[0]
    if min_eig < -1e-8:
        raise ValidationError(f"sigma is not PSD (min eigenvalue {min_eig:.3g}); repair it first")
    if min_eig <= 1e-8:
        sigma = sigma + RIDGE * np.eye(sigma.shape[0])
    return sigma


def graphical_lasso(sigma, lam, warm_start=None, *, max_sweeps=MAX_SWEEPS, kkt_tol=KKT_TOL,
                    trace=False, _checked=False):
    """Fit the l1-penalized precision matrix for one penalty ``lam``.

    Parameters
    ----------
    sigma : (d, d) array
        Correlation matrix, PSD up to 1e-8 (a tiny ridge is added when it is
        only semidefinite).
    lam : float
        Off-diagonal penalty, > 0.
    warm_start : GlassoSolution, optional
        Previous solution on the same ``sigma`` to start from.
    trace : bool
        Record the objective after each sweep.
    """
    if not lam > 0:
        raise ValidationError("lambda must be positive")
    s = sigma if _checked else _check_sigma(sigma)
    d = s.shape[0]
    if warm_start is not None and warm_start._blocks is not None:
        W = np.array(warm_start.w, dtype=float, order="C")
        B = np.array(warm_start._blocks, dtype=float, order="F")
    else:
        W = np.diag(np.diag(s)).astype(float)
        B = np.zeros((d, d), order="F")

    off = ~np.eye(d, dtype=bool)
    tol = 1e-4 * max(np.abs(s[off]).mean(), 1e-12) if d > 1 else 1e-4
    objective_trace = []
    sweeps = 0
    kkt = np.inf
    omega = None
    while sweeps < max_sweeps:
        change = _sweep(s, W, B, lam, INNER_TOL, INNER_MAX_ITER)
        sweeps += 1
        if trace:
            objective_trace.append(glasso_objective(s, _precision_from_blocks(W, B), lam))
        if change <= tol:
            omega = _precision_from_blocks(W, B)
            kkt = kkt_residual(s, W, omega, lam)
            if kkt <= kkt_tol:
                break
            tol /= 10.0
    else:
        omega = _precision_from_blocks(W, B)
        kkt = kkt_residual(s, W, omega, lam)
        if kkt > kkt_tol:
            raise ConvergenceError(
                f"graphical lasso (lambda={lam:.6g}) did not converge in {max_sweeps} sweeps "
                f"(KKT residual {kkt:.3g})",
                residual=kkt,
            )
    if not np.all(np.isfinite(omega)) or np.linalg.eigvalsh(omega)[0] <= 0.0:
        raise NumericalError(f"graphical lasso (lambda={lam:.6g}) returned a non-PD precision matrix")
    omega = np.where(np.abs(omega) > EDGE_EPS, omega, 0.0)
    return GlassoSolution(
        lam=float(lam), omega=omega, w=W.copy(), edges=edge_set(omega), sweeps=sweeps,
        kkt=kkt, objective_trace=tuple(objective_trace), _blocks=B.copy(order="F"),
    )


def lambda_grid(sigma, count=30):
    """Log-spaced descending penalties from max |off-diagonal| to 1/100 of it."""
    if count < 2:
        raise ValidationError("lambda grid needs at least 2 points")
    sigma = np.asarray(sigma, dtype=float)
    off = ~np.eye(sigma.shape[0], dtype=bool)
    lam_max = float(np.abs(sigma[off]).max()) if off.any() else 0.0
    if lam_max <= 0.0:
        raise ValidationError("sigma is already diagonal; the lambda grid is degenerate")
    return np.logspace(np.log10(lam_max), np.log10(lam_max / 100.0), count)


def refit_precision(sigma, edges, *, tol=REFIT_TOL, max_sweeps=REFIT_MAX_SWEEPS):
    """Unpenalized Gaussian MLE of the precision matrix with zeros off ``edges``.

    ``edges`` holds ``(j, k)`` pairs; ``sigma`` must be positive definite.
    """
    sigma = np.ascontiguousarray(sigma, dtype=float)
    d = sigma.shape[0]
    support = np.zeros((d, d), dtype=np.bool_)
    for j, k in edges:
        support[j, k] = support[k, j] = True
    w, _, change = _refit_sweeps(sigma, support, tol, max_sweeps)
    if not change <= tol:
        raise ConvergenceError(
            f"constrained refit on {len(edges)} edges did not converge (last change {change:.3g})",
            residual=change,
        )
    omega = np.linalg.inv(w)
    omega = (omega + omega.T) / 2.0
    omega[~(support | np.eye(d, dtype=bool))] = 0.0
    return omega


def gaussian_loglik(sigma, omega, n):
    """(n/2) [log det omega - tr(sigma omega)]."""
    sign, logdet = np.linalg.slogdet(omega)
    if sign <= 0:
        raise NumericalError("precision matrix is not positive definite")
    return 0.5 * n * (logdet - float(np.sum(sigma * omega)))


def ebic_score(solution, sigma, n, d=None, theta=0.5, loglik=None):
    """Extended BIC: -2 loglik + |E| log n + 4 |E| theta log d.

    The log-likelihood is the maximized one for the solution's graph, i.e.
    evaluated at :func:`refit_precision` on its edge set. Pass ``loglik`` to
    reuse a value computed earlier.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValidationError("theta must lie in [0, 1]")
    d = solution.omega.shape[0] if d is None else d
    e = solution.n_edges
    if loglik is None:
        loglik = gaussian_loglik(sigma, refit_precision(sigma, solution.edges), n)
    return -2.0 * loglik + e * np.log(n) + 4.0 * e * theta * np.log(d)


@dataclass(frozen=True, eq=False)
class PrecisionPath:
    lambdas: np.ndarray
    solutions: tuple
    ebic: np.ndarray
    selected: int
    theta: float

    @property
    def best(self):
        return self.solutions[self.selected]

    def to_dict(self):
        return {
            "theta": self.theta,
            "selected": self.selected,
            "path": [
                {
                    "lambda": sol.lam,
                    "ebic": float(score),
                    "selected": i == self.selected,
                    "edges": [[j, k, w] for j, k, w in sol.edge_list()],
                }
                for i, (sol, score) in enumerate(zip(self.solutions, self.ebic))
            ],
        }


def select_model(sigma, n, theta, grid=None):
    """Fit the whole grid with warm starts and pick the eBIC minimizer.

    Ties go to the larger penalty (the sparser graph).
    """
    s = _check_sigma(sigma)
    if grid is None:
        grid = lambda_grid(s)
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) >= 0):
        raise ValidationError("lambda grid must be strictly decreasing")
    sols, logliks = [], []
    prev = None
    for lam in grid:
        try:
            prev = graphical_lasso(s, lam, warm_start=prev, _checked=True)
            logliks.append(gaussian_loglik(s, refit_precision(s, prev.edges), n))
        except (ConvergenceError, NumericalError) as exc:
            raise type(exc)(f"at lambda={lam:.6g}: {exc}") from exc
        sols.append(prev)
    d = s.shape[0]
    scores = np.array([ebic_score(sol, s, n, d, theta, loglik=ll) for sol, ll in zip(sols, logliks)])
    # argmin returns the first minimum, i.e. the largest lambda among ties
    best = int(np.argmin(scores))
    return PrecisionPath(grid, tuple(sols), scores, best, float(theta))
