"""Marginal models for the bits a node must move in one activation interval.

The aggregate stream of a node that processes ``k`` frames and relays ``d``
peers is drawn directly from one family whose location is set by the nominal
mean ``m = k * r * (d + 1)``. All functions broadcast over ``k`` and the
evaluation point.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .core import DomainError
from .special import erfinv

SQRT_PI = math.sqrt(math.pi)


class Family(str, enum.Enum):
    UNIFORM = "uniform"
    PARETO = "pareto"
    EXPONENTIAL = "exponential"
    HALF_GAUSSIAN = "half-gaussian"

    @classmethod
    def parse(cls, name: "str | Family") -> "Family":
        if isinstance(name, Family):
            return name
        key = str(name).strip().lower().replace("_", "-")
        aliases = {"halfgaussian": "half-gaussian", "half-normal": "half-gaussian",
                   "exp": "exponential", "u": "uniform", "p": "pareto",
                   "e": "exponential", "h": "half-gaussian"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise DomainError(f"unknown traffic family {name!r}") from None


@dataclass(frozen=True)
class TrafficModel:
    """Distribution family plus the mean bits per frame ``r``.

    Pareto needs a shape ``alpha > 1``. Its scale follows
    ``v = v_per_frame * k * (d + 1)``; leaving ``v_per_frame`` unset uses the
    mean-matched value ``(alpha - 1) / alpha * r``.
    """

    family: Family
    r: float
    alpha: float | None = None
    v_per_frame: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if not (math.isfinite(self.r) and self.r > 0):
            raise DomainError(f"mean bits per frame r must be > 0, got {self.r!r}")
        if self.family is Family.PARETO:
            if self.alpha is None or not self.alpha > 1:
                raise DomainError(f"Pareto shape alpha must be > 1, got {self.alpha!r}")
            if self.v_per_frame is not None and not self.v_per_frame > 0:
                raise DomainError("explicit Pareto scale must be > 0")
        elif self.alpha is not None or self.v_per_frame is not None:
            raise DomainError("alpha / v_per_frame only apply to the Pareto family")

    @property
    def mean_matched(self) -> bool:
        return self.family is not Family.PARETO or self.v_per_frame is None

    @property
    def scale_per_frame(self) -> float:
        """Pareto scale per frame and stream, ``v / (k (d+1))``."""
        if self.family is not Family.PARETO:
            raise DomainError("scale_per_frame is only defined for Pareto")
        if self.v_per_frame is None:
            return (self.alpha - 1.0) / self.alpha * self.r
        return self.v_per_frame

    def with_r(self, r: float) -> "TrafficModel":
        return TrafficModel(self.family, r, self.alpha, self.v_per_frame)

    def label(self) -> str:
        if self.family is not Family.PARETO:
            return self.family.value
        mode = "mean-matched" if self.v_per_frame is None else f"v={self.v_per_frame:g}/frame"
        return f"pareto(alpha={self.alpha:g},{mode})"


def _streams(d) -> np.ndarray:
    return np.asarray(d, dtype=float) + 1.0


def aggregate_mean(model: TrafficModel, k, d):
    """Nominal mean bits of own plus relayed streams, ``k r (d+1)``."""
    return _out(np.asarray(k, dtype=float) * model.r * _streams(d))


def pareto_scale(model: TrafficModel, k, d):
    return _out(model.scale_per_frame * np.asarray(k, dtype=float) * _streams(d))


def distribution_mean(model: TrafficModel, k, d):
    """Actual mean of the aggregate distribution (differs from nominal only for explicit-scale Pareto)."""
    if model.family is Family.PARETO and not model.mean_matched:
        a = model.alpha
        return a * pareto_scale(model, k, d) / (a - 1.0)
    return aggregate_mean(model, k, d)


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def density(model: TrafficModel, k, d, x):
    m = aggregate_mean(model, k, d)
    xs = np.asarray(x, dtype=float)
    fam = model.family
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if fam is Family.UNIFORM:
            f = np.where((xs >= 0) & (xs <= 2 * m), 1.0 / (2 * m), 0.0)
        elif fam is Family.EXPONENTIAL:
            f = np.where(xs >= 0, np.exp(-xs / m) / m, 0.0)
        elif fam is Family.HALF_GAUSSIAN:
            f = np.where(xs >= 0, 2.0 / (math.pi * m) * np.exp(-xs * xs / (math.pi * m * m)), 0.0)
        else:
            a = model.alpha
            v = pareto_scale(model, k, d)
            f = np.where(xs >= v, a * v ** a / np.maximum(xs, v) ** (a + 1.0), 0.0)
    return _out(f)


def cdf(model: TrafficModel, k, d, x):
    m = aggregate_mean(model, k, d)
    xs = np.asarray(x, dtype=float)
    fam = model.family
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if fam is Family.UNIFORM:
            F = np.clip(xs / (2 * m), 0.0, 1.0)
        elif fam is Family.EXPONENTIAL:
            F = np.where(xs > 0, -np.expm1(-np.maximum(xs, 0.0) / m), 0.0)
        elif fam is Family.HALF_GAUSSIAN:
            F = np.where(xs > 0, _sp.erf(np.maximum(xs, 0.0) / (SQRT_PI * m)), 0.0)
        else:
            v = pareto_scale(model, k, d)
            F = np.where(xs > v, -np.expm1(model.alpha * np.log(v / np.maximum(xs, v))), 0.0)
    return _out(F)


def quantile(model: TrafficModel, k, d, u):
    """Inverse CDF for ``u`` in [0, 1)."""
    m = aggregate_mean(model, k, d)
    us = np.asarray(u, dtype=float)
    fam = model.family
    if fam is Family.UNIFORM:
        q = 2 * m * us
    elif fam is Family.EXPONENTIAL:
        q = -m * np.log1p(-us)
    elif fam is Family.HALF_GAUSSIAN:
        q = SQRT_PI * m * erfinv(us)
    else:
        q = pareto_scale(model, k, d) * np.exp(-np.log1p(-us) / model.alpha)
    return _out(q)


def _pareto_shortfall(delta, a):
    """``t**a - a t + a - 1`` with ``t = 1 - delta = v / c``, accurate for small delta."""
    delta = np.asarray(delta, dtype=float)
    t = 1.0 - delta
    direct = t ** a - a * t + a - 1.0
    # (1 - delta)^a expanded; the k = 0, 1 terms cancel against the linear part
    series = np.zeros_like(delta)
    coef = a * (a - 1.0) / 2.0
    term_pow = delta * delta
    for i in range(2, 40):
        series = series + coef * term_pow
        coef = -coef * (a - i) / (i + 1)
        term_pow = term_pow * delta
    return np.where(delta < 0.05, series, direct)


def deficit_integral(model: TrafficModel, k, d, c):
    """Expected unused capacity ``int_0^c (c - x) P(x) dx`` for capacity ``c`` bits."""
    cs = np.asarray(c, dtype=float)
    if np.any(cs < 0):
        raise DomainError("capacity must be >= 0")
    m = aggregate_mean(model, k, d)
    fam = model.family
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if fam is Family.UNIFORM:
            out = np.where(cs <= 2 * m, cs * cs / (4 * m), cs - m)
        elif fam is Family.EXPONENTIAL:
            x = cs / m
            xs = np.minimum(x, 1e-2)
            series = np.zeros_like(xs)
            term = xs * xs / 2.0
            for i in range(3, 12):
                series = series + term
                term = -term * xs / i
            out = m * np.where(x < 1e-2, series, x + np.expm1(-x))
        elif fam is Family.HALF_GAUSSIAN:
            z = cs / (SQRT_PI * m)
            out = m * (SQRT_PI * z * _sp.erf(z) + np.expm1(-z * z))
        else:
            a = model.alpha
            v = pareto_scale(model, k, d)
            inside = cs >= v
            delta = np.where(inside, (cs - v) / np.where(inside, cs, 1.0), 0.0)
            out = np.where(inside, cs / (a - 1.0) * _pareto_shortfall(delta, a), 0.0)
    out = np.maximum(out, 0.0)
    return _out(out)


def overflow_integral(model: TrafficModel, k, d, c):
    """Expected overflow ``int_c^inf (x - c) P(x) dx``, via ``I(c) - c + E[X]``."""
    return _out(deficit_integral(model, k, d, c) - np.asarray(c, dtype=float)
                + distribution_mean(model, k, d))


# -- sampling ---------------------------------------------------------------

def _exp_pdf(x, mean):
    return np.exp(-x / mean) / mean


def _rejection(model: TrafficModel, k: float, d: int, rng: np.random.Generator, size: int) -> np.ndarray:
    m = float(aggregate_mean(model, k, d))
    fam = model.family
    if fam is Family.UNIFORM:
        env_mean, bound = m, math.e ** 2 / 2.0
        draw_env = lambda n: rng.exponential(env_mean, n)
        env_pdf = lambda x: _exp_pdf(x, env_mean)
    elif fam is Family.EXPONENTIAL:
        env_mean, bound = 2.0 * m, 2.0
        draw_env = lambda n: rng.exponential(env_mean, n)
        env_pdf = lambda x: _exp_pdf(x, env_mean)
    elif fam is Family.HALF_GAUSSIAN:
        env_mean, bound = m, 2.0 / math.pi * math.exp(math.pi / 4.0)
        draw_env = lambda n: rng.exponential(env_mean, n)
        env_pdf = lambda x: _exp_pdf(x, env_mean)
    else:
        v = float(pareto_scale(model, k, d))
        a_env = model.alpha / 2.0
        bound = 2.0
        draw_env = lambda n: v * (1.0 - rng.random(n)) ** (-1.0 / a_env)
        env_pdf = lambda x: a_env * v ** a_env / x ** (a_env + 1.0)
    out = np.empty(size)
    filled = 0
    while filled < size:
        want = size - filled
        batch = int(want * bound * 1.1) + 16
        x = draw_env(batch)
        u = rng.random(batch)
        with np.errstate(over="ignore", under="ignore"):
            keep = x[u * bound * env_pdf(x) <= density(model, k, d, x)]
        take = keep[:want]
        out[filled:filled + take.size] = take
        filled += take.size
    return out


def sample(model: TrafficModel, k: float, d: int, rng: np.random.Generator,
           size: int | None = None, method: str = "inverse"):
    """Draw aggregate interval sizes (bits).

    ``method="inverse"`` uses the inverse CDF (|Gaussian| draws for
    Half-Gaussian); ``method="rejection"`` uses family-specific envelopes.
    """
    n = 1 if size is None else int(size)
    m = float(aggregate_mean(model, k, d))
    if method == "rejection":
        x = _rejection(model, k, d, rng, n)
    elif method == "inverse":
        if model.family is Family.HALF_GAUSSIAN:
            x = np.abs(rng.standard_normal(n)) * (m * math.sqrt(math.pi / 2.0))
        else:
            x = quantile(model, k, d, rng.random(n))
    else:
        raise DomainError(f"unknown sampling method {method!r}")
    x = np.asarray(x, dtype=float)
    return float(x[0]) if size is None else x
