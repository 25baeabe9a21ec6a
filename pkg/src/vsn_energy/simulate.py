"""Monte-Carlo accounting of per-node energy, interval by interval.

Each interval draws the node's own bitstream, the relayed bitstreams and the
aggregate the receiver sees, then charges every cost directly: no integrals
and no add-subtract identity. Two couplings are supported:

* ``marginal``: the aggregate is an independent draw from the (d+1)-stream
  family, which is exactly what the closed forms assume;
* ``compositional``: the aggregate is the actual sum of own and relayed
  draws, each relayed stream an independent single-stream draw.

Random streams are keyed by ``(seed, cell_i, cell_j, block)`` with a fixed
block size, so results do not depend on how blocks are scheduled.
"""
from __future__ import annotations

import csv
import enum
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (COMPONENTS, DomainError, EnergyBreakdown, EnergyRates, Normalization,
                   OperatingPoint, TierConfig)
from .energy import closed_form_total
from .fitting import r_squared
from .traffic import TrafficModel, sample

BLOCK = 65536
_Z99 = 2.5758293035489004  # two-sided 99% normal quantile


class Coupling(str, enum.Enum):
    MARGINAL = "marginal"
    COMPOSITIONAL = "compositional"


def _check_integer_point(point: OperatingPoint) -> tuple[int, int]:
    n, k = point.n, point.k
    if int(n) != n or int(k) != k or n < 1 or k < 1:
        raise DomainError(f"simulation needs integer n >= 1 and k >= 1, got n={n}, k={k}")
    return int(n), int(k)


def _draw_block(rates: EnergyRates, tier: TierConfig, traffic: TrafficModel, n: int, k: int,
                rng: np.random.Generator, size: int, mode: Coupling, method: str) -> dict:
    d = tier.d
    x_own = sample(traffic, k, 0, rng, size, method)
    if mode is Coupling.MARGINAL:
        x_rel = sample(traffic, k, d - 1, rng, size, method) if d > 0 else np.zeros(size)
        x_agg = sample(traffic, k, d, rng, size, method)
    else:
        if d > 0:
            x_rel = sample(traffic, k, 0, rng, size * d, method).reshape(size, d).sum(axis=1)
        else:
            x_rel = np.zeros(size)
        x_agg = x_own + x_rel
    c = tier.s / n
    return {
        "acquisition": np.full(size, k * rates.a),
        "processing": rates.g * x_own,
        "transmit": rates.j * (x_own + x_rel),
        "receive_relay": rates.h * x_rel,
        "buffering": rates.p * np.maximum(x_agg - c, 0.0),
        "idle": rates.b * np.maximum(c - x_agg, 0.0),
    }


def _totals(parts: dict) -> np.ndarray:
    return np.sum([parts[c] for c in COMPONENTS], axis=0)


def simulate_interval(rates: EnergyRates, tier: TierConfig, traffic: TrafficModel,
                      point: OperatingPoint, rng: np.random.Generator,
                      mode: Coupling | str = Coupling.MARGINAL, method: str = "inverse") -> EnergyBreakdown:
    """Energy of a single interval at integer ``(n, k)``."""
    n, k = _check_integer_point(point)
    parts = _draw_block(rates, tier, traffic, n, k, rng, 1, Coupling(mode), method)
    return EnergyBreakdown(total=float(_totals(parts)[0]), **{c: float(v[0]) for c, v in parts.items()})


@dataclass(frozen=True)
class CellStats:
    n: int
    k: int
    intervals: int
    mean: float
    sd: float
    ci99: tuple
    components: EnergyBreakdown


def _block_stats(rates, tier, traffic, n, k, seed, cell, block, size, mode, method):
    ss = np.random.SeedSequence(seed, spawn_key=(*cell, block))
    parts = _draw_block(rates, tier, traffic, n, k, np.random.default_rng(ss), size, mode, method)
    total = _totals(parts)
    s = math.fsum(total)
    mu = s / size
    m2 = math.fsum((total - mu) ** 2)
    comp = {c: math.fsum(parts[c]) for c in COMPONENTS}
    return size, mu, m2, comp


def run_monte_carlo(rates: EnergyRates, tier: TierConfig, traffic: TrafficModel,
                    point: OperatingPoint, intervals: int, seed: int,
                    mode: Coupling | str = Coupling.MARGINAL, cell: tuple = (0, 0),
                    workers: int | None = None, method: str = "inverse") -> CellStats:
    """Mean, sample SD and 99% normal-approximation CI of the interval energy."""
    n, k = _check_integer_point(point)
    if int(intervals) != intervals or intervals < 1:
        raise DomainError("intervals must be a positive integer")
    intervals = int(intervals)
    mode = Coupling(mode)
    sizes = [min(BLOCK, intervals - i) for i in range(0, intervals, BLOCK)]
    args = [(rates, tier, traffic, n, k, seed, cell, b, sz, mode, method) for b, sz in enumerate(sizes)]
    if workers and workers > 1 and len(args) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(lambda a: _block_stats(*a), args))
    else:
        blocks = [_block_stats(*a) for a in args]
    # merge block moments in block order (Chan et al.) so the result is schedule-independent
    count, mean, m2 = 0, 0.0, 0.0
    for sz, mu, bm2, _ in blocks:
        delta = mu - mean
        tot = count + sz
        mean += delta * sz / tot
        m2 += bm2 + delta * delta * count * sz / tot
        count = tot
    sd = math.sqrt(m2 / (count - 1)) if count > 1 else 0.0
    half = _Z99 * sd / math.sqrt(count)
    comp = {c: math.fsum(b[3][c] for b in blocks) / count for c in COMPONENTS}
    return CellStats(n, k, count, mean, sd, (mean - half, mean + half),
                     EnergyBreakdown.from_components(**comp))


@dataclass(frozen=True)
class CellComparison:
    n: int
    k: int
    analytic: float
    sim_mean: float
    sim_sd: float
    intervals: int

    @property
    def err_pct(self) -> float:
        return abs(self.sim_mean - self.analytic) / abs(self.analytic) * 100.0


@dataclass(frozen=True)
class SimulationReport:
    cells: tuple
    mean_abs_err_pct: float
    max_err_pct: float
    r_squared: float | None
    seed: int
    mode: Coupling
    intervals: int
    T: float

    def _scale(self, normalization) -> tuple[float, float]:
        """(energy factor, frame factor) for the requested display units."""
        if Normalization(normalization) is Normalization.PER_SECOND:
            return 1.0 / self.T, 1.0 / self.T
        return 1.0, 1.0

    def to_dict(self, normalization: Normalization | str = Normalization.PER_SECOND) -> dict:
        ef, kf = self._scale(normalization)
        return {
            "seed": self.seed,
            "mode": self.mode.value,
            "intervals": self.intervals,
            "normalization": Normalization(normalization).value,
            "mean_abs_err_pct": self.mean_abs_err_pct,
            "max_err_pct": self.max_err_pct,
            "r_squared": self.r_squared,
            "cells": [{"n": c.n, "k": c.k * kf, "analytic_J": c.analytic * ef,
                       "sim_mean_J": c.sim_mean * ef, "sim_sd_J": c.sim_sd * ef,
                       "err_pct": c.err_pct, "intervals": c.intervals} for c in self.cells],
        }

    def to_json(self, normalization: Normalization | str = Normalization.PER_SECOND) -> str:
        return json.dumps(self.to_dict(normalization), indent=2)

    def write_csv(self, path, normalization: Normalization | str = Normalization.PER_SECOND) -> None:
        ef, kf = self._scale(normalization)
        with Path(path).open("w", newline="") as fh:
            fh.write(f"# seed={self.seed} mode={self.mode.value} intervals={self.intervals} "
                     f"normalization={Normalization(normalization).value}\n")
            w = csv.writer(fh)
            w.writerow(("n", "k", "analytic_J", "sim_mean_J", "sim_sd_J", "err_pct"))
            for c in self.cells:
                w.writerow((c.n, repr(c.k * kf), repr(c.analytic * ef), repr(c.sim_mean * ef),
                            repr(c.sim_sd * ef), repr(c.err_pct)))


def validate_surface(rates: EnergyRates, tier: TierConfig, traffic: TrafficModel,
                     n_values, k_values, intervals: int, seed: int,
                     mode: Coupling | str = Coupling.MARGINAL, workers: int | None = None,
                     method: str = "inverse") -> SimulationReport:
    """Simulate every (n, k) cell and compare against the closed-form expected energy.

    ``k_values`` are integer frames per interval.
    """
    ns, ks = list(n_values), list(k_values)
    if not ns or not ks:
        raise DomainError("validation grid is empty")
    mode = Coupling(mode)
    cells = []
    for i, n in enumerate(ns):
        for j, k in enumerate(ks):
            pt = OperatingPoint(n, k)
            st = run_monte_carlo(rates, tier, traffic, pt, intervals, seed, mode, (i, j), workers, method)
            analytic = float(closed_form_total(rates, tier, traffic, n, k))
            cells.append(CellComparison(int(n), int(k), analytic, st.mean, st.sd, st.intervals))
    errs = [c.err_pct for c in cells]
    r2 = r_squared([c.sim_mean for c in cells], [c.analytic for c in cells]) if len(cells) >= 2 else None
    return SimulationReport(tuple(cells), math.fsum(errs) / len(errs), max(errs), r2,
                            int(seed), mode, int(intervals), tier.T)
