"""Normal probability kernels.

The bivariate CDF follows Genz's BVND routine (Drezner & Wesolowsky's
one-dimensional integral, evaluated with Gauss-Legendre quadrature, plus an
asymptotic expansion for |rho| >= 0.925).
"""

from functools import lru_cache

import numpy as np
from scipy import special

from .errors import ValidationError

_INV_SQRT_2PI = 0.3989422804014327
_TWO_PI = 2.0 * np.pi


def _scalar_or_array(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def std_normal_pdf(x):
    x = np.asarray(x, dtype=float)
    return _scalar_or_array(_INV_SQRT_2PI * np.exp(-0.5 * x * x))


def std_normal_cdf(x):
    return _scalar_or_array(special.ndtr(np.asarray(x, dtype=float)))


def std_normal_quantile(p):
    """Inverse of :func:`std_normal_cdf` on the open unit interval.

    Raises
    ------
    ValidationError
        If any ``p`` lies outside (0, 1) or is NaN.
    """
    p = np.asarray(p, dtype=float)
    if not np.all((p > 0.0) & (p < 1.0)):
        raise ValidationError("normal quantile requires 0 < p < 1")
    return _scalar_or_array(special.ndtri(p))


def bvn_pdf(h, k, rho):
    """Standard bivariate normal density with correlation ``rho``."""
    h, k, rho = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (h, k, rho)))
    one_m = 1.0 - rho * rho
    with np.errstate(invalid="ignore", over="ignore"):
        q = (h * h - 2.0 * rho * h * k + k * k) / one_m
        out = np.exp(-0.5 * q) / (_TWO_PI * np.sqrt(one_m))
    # density vanishes whenever a coordinate is infinite
    out = np.where(np.isfinite(h) & np.isfinite(k), out, 0.0)
    return _scalar_or_array(out)


@lru_cache(maxsize=None)
def _legendre(order):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _upper_moderate(h, k, r):
    # P(X > h, Y > k) for |r| < 0.925; h, k, r are equal-length 1-d arrays
    out = np.empty_like(h)
    ar = np.abs(r)
    for order, mask in ((6, ar < 0.3), (12, (ar >= 0.3) & (ar < 0.75)), (20, ar >= 0.75)):
        if not mask.any():
            continue
        x, w = _legendre(order)
        hm, km, rm = h[mask], k[mask], r[mask]
        hk = (hm * km)[:, None]
        hs = ((hm * hm + km * km) / 2.0)[:, None]
        asr = np.arcsin(rm)
        sn = np.sin(asr[:, None] * (x[None, :] + 1.0) / 2.0)
        integral = np.exp((sn * hk - hs) / (1.0 - sn * sn)) @ w
        out[mask] = integral * asr / (2.0 * _TWO_PI) + special.ndtr(-hm) * special.ndtr(-km)
    return out


def _upper_strong(h, k, r):
    # P(X > h, Y > k) for 0.925 <= |r| < 1
    x, w = _legendre(20)
    k = np.where(r < 0, -k, k)
    hk = h * k
    as_ = 1.0 - r * r
    a = np.sqrt(as_)
    bs = (h - k) ** 2
    c = (4.0 - hk) / 8.0
    d = (12.0 - hk) / 16.0
    asr = -(bs / as_ + hk) / 2.0
    with np.errstate(under="ignore"):
        bvn = np.where(
            asr > -100.0,
            a * np.exp(asr) * (1.0 - c * (bs - as_) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as_ * as_ / 5.0),
            0.0,
        )
        b = np.sqrt(bs)
        tail = np.exp(-hk / 2.0) * np.sqrt(_TWO_PI) * special.ndtr(-b / a) * b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0)
        bvn = bvn - np.where(hk > -160.0, tail, 0.0)

        a2 = (a / 2.0)[:, None]
        xs = (a2 * (x[None, :] + 1.0)) ** 2
        rs = np.sqrt(1.0 - xs)
        asr_i = -(bs[:, None] / xs + hk[:, None]) / 2.0
        sp = 1.0 + c[:, None] * xs * (1.0 + d[:, None] * xs)
        ep = np.exp(-hk[:, None] * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs
        terms = np.where(asr_i > -100.0, np.exp(np.maximum(asr_i, -700.0)) * (ep - sp), 0.0)
    bvn = bvn + (a2[:, 0]) * (terms @ w)
    bvn = -bvn / _TWO_PI
    pos = bvn + special.ndtr(-np.maximum(h, k))
    neg = -bvn + np.maximum(0.0, special.ndtr(-h) - special.ndtr(-k))
    return np.where(r > 0, pos, neg)


def bvn_cdf(h, k, rho):
    """P(Z1 <= h, Z2 <= k) for a standard bivariate normal with correlation ``rho``.

    Accepts scalars or broadcastable arrays. ``h`` and ``k`` may be +/-inf;
    ``rho`` must lie in [-1, 1]. Degenerate correlations ``|rho| == 1`` are
    evaluated in closed form.
    """
    h, k, rho = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (h, k, rho)))
    if np.isnan(h).any() or np.isnan(k).any() or np.isnan(rho).any():
        raise ValidationError("bvn_cdf received NaN input")
    if np.any(np.abs(rho) > 1.0):
        raise ValidationError("bvn_cdf requires |rho| <= 1")
    shape = h.shape
    h, k, rho = h.ravel(), k.ravel(), rho.ravel()
    out = np.empty(h.shape)

    lo = (h == -np.inf) | (k == -np.inf)
    h_inf = (h == np.inf) & ~lo
    k_inf = (k == np.inf) & ~lo & ~h_inf
    out[lo] = 0.0
    out[h_inf] = special.ndtr(k[h_inf])
    out[k_inf] = special.ndtr(h[k_inf])
    finite = ~(lo | h_inf | k_inf)

    plus = finite & (rho == 1.0)
    minus = finite & (rho == -1.0)
    out[plus] = special.ndtr(np.minimum(h[plus], k[plus]))
    out[minus] = np.maximum(0.0, special.ndtr(h[minus]) - special.ndtr(-k[minus]))

    general = finite & ~plus & ~minus
    ar = np.abs(rho)
    moderate = general & (ar < 0.925)
    strong = general & (ar >= 0.925)
    # lower-orthant CDF equals the upper-orthant probability at (-h, -k)
    if moderate.any():
        out[moderate] = _upper_moderate(-h[moderate], -k[moderate], rho[moderate])
    if strong.any():
        out[strong] = _upper_strong(-h[strong], -k[strong], rho[strong])
    return _scalar_or_array(np.clip(out, 0.0, 1.0).reshape(shape))
