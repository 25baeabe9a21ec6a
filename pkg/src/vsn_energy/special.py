"""Error function, its inverse, and the lower real branch of Lambert W."""
from __future__ import annotations

import math

import numpy as np
from scipy import special as _sp

from .core import DomainError

_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)
_INV_E = math.exp(-1.0)


def erf(x):
    """Error function for scalars or arrays."""
    if np.ndim(x) == 0:
        return math.erf(float(x))
    return _sp.erf(np.asarray(x, dtype=float))


def _erfinv_seed(y: np.ndarray) -> np.ndarray:
    # M. Giles' single-precision rational approximation.
    w = -np.log((1.0 - y) * (1.0 + y))
    central = w < 5.0
    wc = np.where(central, w - 2.5, 0.0)
    pc = 2.81022636e-08
    for c in (3.43273939e-07, -3.5233877e-06, -4.39150654e-06, 0.00021858087,
              -0.00125372503, -0.00417768164, 0.246640727, 1.50140941):
        pc = c + pc * wc
    wt = np.where(central, 0.0, np.sqrt(w) - 3.0)
    pt = -0.000200214257
    for c in (0.000100950558, 0.00134934322, -0.00367342844, 0.00573950773,
              -0.0076224613, 0.00943887047, 1.00167406, 2.83297682):
        pt = c + pt * wt
    return np.where(central, pc, pt) * y


def erfinv(y):
    """Inverse error function on (-1, 1); scalars or arrays.

    Seeded by a rational approximation and polished with Halley steps. For
    |y| > 0.5 the residual is taken on erfc so that tails keep full precision.
    """
    arr = np.asarray(y, dtype=float)
    if np.any(~(np.abs(arr) < 1.0)):
        raise DomainError("erfinv is defined on the open interval (-1, 1)")
    sign = np.sign(arr)
    a = np.abs(arr)
    x = _erfinv_seed(a)
    tail = a > 0.5
    q = 1.0 - a
    # the seed is single precision; far in the tail it needs several steps
    for _ in range(40):
        deriv = _TWO_OVER_SQRT_PI * np.exp(-x * x)
        resid = np.where(tail, q - _sp.erfc(x), _sp.erf(x) - a)
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.where(resid == 0.0, 0.0, resid / deriv)
        step = u / (1.0 + x * u)
        x = x - step
        if np.all(np.abs(step) <= 1e-16 * np.maximum(np.abs(x), 1e-300)):
            break
    out = sign * x
    if np.ndim(y) == 0:
        return float(out)
    return out


def lambert_w_lower(x: float) -> float:
    """Real branch W_{-1} of the Lambert W function, defined on [-1/e, 0).

    Returns w <= -1 with w * exp(w) = x.
    """
    x = float(x)
    if not (-_INV_E - 1e-17 <= x < 0.0) or math.isnan(x):
        raise DomainError(f"lower Lambert W branch needs -1/e <= x < 0, got {x!r}")
    if x <= -_INV_E:
        return -1.0
    # branch-point series in p = -sqrt(2(1 + e x)) near -1/e, asymptotic log form near 0
    if x < -0.25:
        p = -math.sqrt(max(2.0 * (1.0 + math.e * x), 0.0))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3
    else:
        l1 = math.log(-x)
        l2 = math.log(-l1)
        w = l1 - l2 + l2 / l1
    for _ in range(50):
        ew = math.exp(w)
        f = w * ew - x
        if f == 0.0:
            break
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w_new = w - step
        if w_new > -1.0:
            w_new = 0.5 * (w - 1.0)
        if abs(w_new - w) <= 4e-16 * abs(w):
            w = w_new
            break
        w = w_new
    return w
