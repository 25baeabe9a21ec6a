"""Choose a traffic family by how well its energy surface explains measurements.

The per-frame mean is matched to the observed sizes; every candidate family is
then scored by the coefficient of determination of its analytic surface
against reference (n, k, joules) triples.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .core import DomainError, EnergyRates, TierConfig
from .energy import closed_form_total
from .traffic import Family, TrafficModel, cdf


def fit_mean(sizes, k: float, d: int = 0) -> float:
    """Bits per frame from interval sizes of ``k`` frames over ``d + 1`` streams."""
    xs = np.asarray(list(sizes), dtype=float)
    if xs.size == 0:
        raise DomainError("need at least one size")
    if not k >= 1:
        raise DomainError("k must be >= 1")
    if np.any(xs < 0) or not np.all(np.isfinite(xs)):
        raise DomainError("sizes must be finite and >= 0")
    return math.fsum(xs) / xs.size / (k * (d + 1))


def r_squared(observed, predicted) -> float | None:
    """``1 - SS_res / SS_tot``; ``None`` when the observations are constant."""
    o = np.asarray(observed, dtype=float)
    p = np.asarray(predicted, dtype=float)
    if o.shape != p.shape or o.ndim != 1:
        raise DomainError("observed and predicted must be 1-d and equally long")
    if o.size < 2:
        raise DomainError("need at least two points")
    mean = math.fsum(o) / o.size
    ss_tot = math.fsum((o - mean) ** 2)
    if ss_tot == 0:
        return None
    return 1.0 - math.fsum((o - p) ** 2) / ss_tot


def default_candidates(r_hat: float, alphas=(4.0,)) -> list[TrafficModel]:
    """All families at ``r_hat``; Pareto once per alpha in both mean-matched and ``v = k r`` form."""
    out = [TrafficModel(Family.UNIFORM, r_hat), TrafficModel(Family.EXPONENTIAL, r_hat),
           TrafficModel(Family.HALF_GAUSSIAN, r_hat)]
    for a in alphas:
        out.append(TrafficModel(Family.PARETO, r_hat, alpha=float(a)))
        out.append(TrafficModel(Family.PARETO, r_hat, alpha=float(a), v_per_frame=r_hat))
    return out


@dataclass(frozen=True)
class FitResult:
    model: TrafficModel
    r_squared: float | None
    ranking: tuple  # ((label, r_squared), ...), best first

    @property
    def family(self) -> Family:
        return self.model.family

    @property
    def r_hat(self) -> float:
        return self.model.r

    @property
    def alpha(self) -> float | None:
        return self.model.alpha

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "label": self.model.label(),
            "r_hat": self.r_hat,
            "alpha": self.alpha,
            "r_squared": self.r_squared,
            "ranking": [{"model": lab, "r_squared": r2} for lab, r2 in self.ranking],
        }


def select_family(reference, rates: EnergyRates, tier: TierConfig, r_hat: float,
                  candidates=None) -> FitResult:
    """Rank candidate models by R² of their analytic surface against ``(n, k, J)`` triples."""
    triples = [tuple(map(float, t)) for t in reference]
    if len(triples) < 3:
        raise DomainError("need at least 3 reference points to compare fits")
    if not r_hat > 0:
        raise DomainError("r_hat must be > 0")
    models = default_candidates(r_hat) if candidates is None else [
        m if isinstance(m, TrafficModel) else TrafficModel(Family.parse(m), r_hat) for m in candidates]
    if not models:
        raise DomainError("no candidate models")
    ns = np.array([t[0] for t in triples])
    ks = np.array([t[1] for t in triples])
    obs = np.array([t[2] for t in triples])
    scored = []
    for idx, model in enumerate(models):
        pred = closed_form_total(rates, tier, model, ns, ks)
        scored.append((r_squared(obs, pred), idx, model))
    # None (constant reference) sorts last; original order breaks ties
    scored.sort(key=lambda t: (t[0] is None, -(t[0] or 0.0), t[1]))
    best = scored[0]
    return FitResult(best[2], best[0], tuple((m.label(), r2) for r2, _, m in scored))


def ks_diagnostics(sizes, k: float, d: int, models) -> dict:
    """Kolmogorov-Smirnov statistic and p-value of the sizes under each model's aggregate law."""
    xs = np.asarray(list(sizes), dtype=float)
    if xs.size == 0:
        raise DomainError("need at least one size")
    out = {}
    for model in models:
        res = stats.kstest(xs, lambda x, m=model: cdf(m, k, d, x))
        out[model.label()] = {"statistic": float(res.statistic), "pvalue": float(res.pvalue)}
    return out


def _data_lines(path):
    try:
        fh = Path(path).open()
    except FileNotFoundError:
        raise DomainError(f"input file not found: {path}") from None
    with fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield lineno, line


def read_sizes(path) -> list[int]:
    """Newline-delimited non-negative integers; ``#`` starts a comment."""
    out = []
    for lineno, line in _data_lines(path):
        try:
            v = int(line)
        except ValueError:
            raise DomainError(f"{path}:{lineno}: expected a non-negative integer, got {line!r}") from None
        if v < 0:
            raise DomainError(f"{path}:{lineno}: size must be >= 0")
        out.append(v)
    if not out:
        raise DomainError(f"{path}: no sizes found")
    return out


def read_reference_surface(path) -> list[tuple[float, float, float]]:
    """CSV rows ``n,k,joules``; an optional header and ``#`` comments are skipped."""
    out = []
    for lineno, line in _data_lines(path):
        row = next(csv.reader([line]))
        if len(row) != 3:
            raise DomainError(f"{path}:{lineno}: expected 3 columns n,k,joules")
        try:
            vals = tuple(float(x) for x in row)
        except ValueError:
            if not out and [c.strip().lower() for c in row] == ["n", "k", "joules"]:
                continue
            raise DomainError(f"{path}:{lineno}: non-numeric value in {line!r}") from None
        if not all(math.isfinite(v) for v in vals) or vals[0] <= 0 or vals[1] <= 0:
            raise DomainError(f"{path}:{lineno}: n and k must be > 0 and values finite")
        out.append(vals)
    return out
