"""Shared numerical constants and the bounded scalar maximizer."""

import numpy as np
from scipy import optimize

from .errors import ConvergenceError

# keeps off-diagonal correlations strictly inside (-1, 1)
DELTA_NUM = 1e-6
# optimization box is [-1 + DELTA_OPT, 1 - DELTA_OPT]
DELTA_OPT = 1e-3
P_FLOOR = 1e-300
OPT_XTOL = 1e-8
OPT_MAXITER = 200
FOC_TOL = 1e-6
# solutions this close to the box edge count as clamped
BOUNDARY_BAND = 1e-6


def clamp_corr(r):
    return float(np.clip(r, -1.0 + DELTA_NUM, 1.0 - DELTA_NUM))


def maximize_bounded(objective, gradient=None, *, lower=-1.0 + DELTA_OPT, upper=1.0 - DELTA_OPT,
                     xtol=OPT_XTOL, maxiter=OPT_MAXITER, foc_tol=FOC_TOL, label="objective"):
    """Maximize a smooth one-dimensional objective on ``[lower, upper]``.

    Brent's bounded golden-section/parabolic method locates the maximum.
    When ``gradient`` is given, an interior solution is then polished to the
    root of the gradient and the first-order condition is verified.
    """
    res = optimize.minimize_scalar(
        lambda x: -objective(x),
        bounds=(lower, upper),
        method="bounded",
        options={"xatol": xtol, "maxiter": maxiter},
    )
    if not res.success:
        raise ConvergenceError(
            f"{label}: bounded maximization did not converge after {res.nfev} evaluations "
            f"({res.message})",
            trace={"x": float(res.x), "fun": float(-res.fun), "nfev": int(res.nfev)},
        )
    x = float(res.x)
    edge = max(2 * xtol, BOUNDARY_BAND)
    if gradient is None or x - lower <= edge or upper - x <= edge:
        return x
    x = _polish_root(gradient, x, lower, upper)
    g = gradient(x)
    if abs(g) > foc_tol and lower + edge < x < upper - edge:
        raise ConvergenceError(
            f"{label}: first-order condition residual {g:.3g} exceeds {foc_tol:g}",
            residual=abs(g), trace={"x": x, "nfev": int(res.nfev)},
        )
    return x


def _polish_root(gradient, x, lower, upper):
    g0 = gradient(x)
    if g0 == 0.0:
        return x
    step = 1e-7
    while step < 1e-2:
        a, b = max(lower, x - step), min(upper, x + step)
        ga, gb = gradient(a), gradient(b)
        # maximum: gradient decreases through zero
        if ga >= 0.0 >= gb:
            if ga == 0.0:
                return a
            if gb == 0.0:
                return b
            return float(optimize.brentq(gradient, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=100))
        step *= 10.0
    return x
