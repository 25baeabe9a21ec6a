"""Constrained minimisation of the expected node energy over (n, k).

Along the node axis the energy has a single interior minimum at ``n = beta/k``
and along the frame axis (when it has one at all) at ``k = gamma/n``. The
constrained optimum is then one of four pieces chosen by where ``k_min``
falls relative to ``gamma/n_max``, ``beta/n_max`` and ``beta/n_min``. The
continuous optimum is rounded by checking the admissible floor/ceil corners.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import (CoverageConstraints, DomainError, EnergyRates, Normalization, OperatingPoint,
                   PreconditionError, TierConfig)
from .energy import closed_form_total, per_frame_cost
from .special import erfinv, lambert_w_lower
from .traffic import SQRT_PI, Family, TrafficModel


class Branch(str, enum.Enum):
    GAMMA_INTERIOR = "gamma-interior"
    MAX_MIN = "max-min"
    BETA_INTERIOR = "beta-interior"
    MIN_MIN = "min-min"


@dataclass(frozen=True)
class OptimumResult:
    family: Family
    beta: float
    gamma: float | None
    branch: Branch
    continuous_point: OperatingPoint
    discrete_point: OperatingPoint
    energy_at_discrete: float
    candidates: tuple = ()

    def report(self, tier: TierConfig, normalization: Normalization | str = Normalization.PER_SECOND) -> dict:
        """JSON-ready summary; per-second mode divides k, beta, gamma and energy by T."""
        mode = Normalization(normalization)
        f = 1.0 / tier.T if mode is Normalization.PER_SECOND else 1.0
        return {
            "family": self.family.value,
            "beta": self.beta * f,
            "gamma": None if self.gamma is None else self.gamma * f,
            "branch": self.branch.value,
            "continuous": {"n": self.continuous_point.n, "k": self.continuous_point.k * f},
            "discrete": {"n": int(self.discrete_point.n), "k": self.discrete_point.k * f},
            "energy_J": self.energy_at_discrete * f,
            "normalization": mode.value,
        }


def _check_exponential(rates: EnergyRates) -> None:
    if not rates.p > rates.b:
        raise PreconditionError(
            f"Exponential traffic needs buffering cost p > idle cost b (p={rates.p}, b={rates.b})")


def beta(rates: EnergyRates, tier: TierConfig, traffic: TrafficModel,
         paper_literal_beta_e: bool = False) -> float:
    """Node-axis constant: for fixed k the energy is minimised at ``n = beta / k``.

    ``paper_literal_beta_e`` switches the Exponential log argument from
    (b+p)/b, which solves the first-order condition, to (b+p)/p.
    """
    s, d, r = tier.s, tier.d, traffic.r
    b, p = rates.b, rates.p
    if b + p == 0:
        raise PreconditionError("b + p must be positive for the node-axis optimum to exist")
    fam = traffic.family
    if fam is Family.UNIFORM:
        return math.inf if p == 0 else s * (b + p) / (2.0 * p * r * (d + 1))
    if fam is Family.PARETO:
        return s / (traffic.scale_per_frame * (d + 1)) * (b / (b + p)) ** (1.0 / traffic.alpha)
    if fam is Family.EXPONENTIAL:
        _check_exponential(rates)
        ratio = (b + p) / p if paper_literal_beta_e else (b + p) / b
        return s / (r * (d + 1) * math.log(ratio)) if b > 0 else 0.0
    if p == 0:
        return math.inf
    if b == 0:
        return 0.0
    return s / (SQRT_PI * r * (d + 1) * erfinv(p / (b + p)))


def idle_dominance(rates: EnergyRates, traffic: TrafficModel, d: int) -> float:
    """``r[(b - j)(d+1) - h d - g] - a``; positive only when idling costs more than producing and sending."""
    return traffic.r * ((rates.b - rates.j) * (d + 1) - rates.h * d - rates.g) - rates.a


def gamma(rates: EnergyRates, tier: TierConfig, traffic: TrafficModel) -> float | None:
    """Frame-axis constant: for fixed n the energy is stationary at ``k = gamma / n``.

    Pareto, Exponential and Half-Gaussian only have such a point when idling
    dominates (per-frame cost below ``(b+p) r (d+1)``); otherwise the energy
    increases in k and ``None`` is returned. The Uniform value is always
    returned, although its stationary point lies inside the Uniform support
    only under the same condition.
    """
    s, d, r = tier.s, tier.d, traffic.r
    b, p = rates.b, rates.p
    A = per_frame_cost(rates, traffic, d)
    fam = traffic.family
    if fam is Family.UNIFORM:
        return s / 2.0 * math.sqrt((b + p) / (r * (d + 1) * A))
    if fam is Family.PARETO:
        al = traffic.alpha
        u = traffic.scale_per_frame
        ratio = 1.0 - A * (al - 1.0) / (al * u * (d + 1) * (b + p))
        if ratio <= 0:
            return None
        return s / (u * (d + 1)) * ratio ** (1.0 / (al - 1.0))
    if b + p == 0:
        return None
    q = 1.0 - A / ((b + p) * r * (d + 1))
    if q <= 0:
        return None
    if fam is Family.HALF_GAUSSIAN:
        # dE/dk = A + (b+p) r (d+1) (exp(-z^2) - 1) with z = s / (sqrt(pi) n k r (d+1))
        return s / (SQRT_PI * r * (d + 1) * math.sqrt(-math.log(q)))
    w = lambert_w_lower(-q / math.e)
    if w >= -1.0:
        return None
    return -s / (r * (d + 1) * (w + 1.0))


def interior_gamma(rates: EnergyRates, tier: TierConfig, traffic: TrafficModel) -> float | None:
    """``gamma`` when its stationary point is a genuine frame-axis minimum of the energy."""
    g = gamma(rates, tier, traffic)
    if g is None:
        return None
    if traffic.family is Family.UNIFORM:
        # stationary point of the in-support form lies at s/(n m) = 2 sqrt(A / ((b+p) r (d+1)))
        A = per_frame_cost(rates, traffic, tier.d)
        if A >= (rates.b + rates.p) * traffic.r * (tier.d + 1):
            return None
    return g


def select_branch(beta_value: float, gamma_value: float | None, constraints: CoverageConstraints,
                  family: Family) -> tuple[Branch, OperatingPoint]:
    K = constraints.k_min
    n_lo, n_hi = constraints.n_min, constraints.n_max
    if family is Family.HALF_GAUSSIAN and gamma_value is None:
        if K <= beta_value / n_hi:
            return Branch.MAX_MIN, OperatingPoint(n_hi, K)
        if K <= beta_value / n_lo:
            return Branch.BETA_INTERIOR, OperatingPoint(beta_value / K, K)
        return Branch.MIN_MIN, OperatingPoint(n_lo, K)
    if gamma_value is not None and K <= gamma_value / n_hi:
        return Branch.GAMMA_INTERIOR, OperatingPoint(n_hi, gamma_value / n_hi)
    if K < beta_value / n_hi:
        return Branch.MAX_MIN, OperatingPoint(n_hi, K)
    if K <= beta_value / n_lo:
        return Branch.BETA_INTERIOR, OperatingPoint(beta_value / K, K)
    return Branch.MIN_MIN, OperatingPoint(n_lo, K)


def _rank(energy: float, n: int, k: float) -> tuple:
    return (energy, n, k)


def _clip_n(x: float, constraints: CoverageConstraints) -> float:
    return min(max(x, constraints.n_min), constraints.n_max)


def discretize(rates: EnergyRates, tier: TierConfig, traffic: TrafficModel,
               constraints: CoverageConstraints, point: OperatingPoint,
               beta_value: float | None = None, gamma_value: float | None = None):
    """Best admissible integer point near a continuous optimum; ties go to smaller n, then k.

    Starts from the floor/ceil corners of ``point``. When ``beta_value`` (and
    optionally an interior ``gamma_value``) are given, each rounded n also gets
    its own best frame count ``max(k_min, gamma/n)`` and each rounded k its own
    node count ``beta/k``, because rounding one coordinate shifts the optimum
    of the other.
    """
    K = constraints.k_min

    def k_round(x):
        return [k for k in {math.floor(x), math.ceil(x)} if k >= K and k >= 1]

    def n_round(x):
        return [n for n in {math.floor(x), math.ceil(x)}
                if constraints.n_min <= n <= constraints.n_max]

    pairs = {(n, k) for n in n_round(point.n) for k in k_round(point.k)}
    if beta_value is not None:
        ns = set(n_round(point.n))
        ks = set(k_round(point.k))
        for n in list(ns):
            ks.update(k_round(max(K, gamma_value / n) if gamma_value is not None else K))
        for k in ks:
            for n in n_round(_clip_n(beta_value / k, constraints)):
                pairs.add((n, k))
            for n in ns:
                pairs.add((n, k))
    cands = []
    for n, k in sorted(pairs):
        e = float(closed_form_total(rates, tier, traffic, n, k))
        cands.append((e, int(n), float(k)))
    if not cands:
        raise DomainError(f"no admissible integer point around {point}")
    best = min(cands, key=lambda t: _rank(*t))
    return OperatingPoint(best[1], best[2]), best[0], tuple(cands)


def _check_constraints(constraints: CoverageConstraints):
    if constraints.n_min > constraints.n_max:
        raise DomainError("infeasible constraints: n_min > n_max")


def optimize(rates: EnergyRates, tier: TierConfig, traffic: TrafficModel,
             constraints: CoverageConstraints, paper_literal_beta_e: bool = False) -> OptimumResult:
    _check_constraints(constraints)
    if traffic.family is Family.EXPONENTIAL:
        _check_exponential(rates)
    b_val = beta(rates, tier, traffic, paper_literal_beta_e)
    g_val = gamma(rates, tier, traffic)
    g_int = interior_gamma(rates, tier, traffic)
    branch, cont = select_branch(b_val, g_int, constraints, traffic.family)
    disc, energy, cands = discretize(rates, tier, traffic, constraints, cont, b_val, g_int)
    return OptimumResult(traffic.family, b_val, g_val, branch, cont, disc, energy, cands)


def default_k_cap(beta_value: float, gamma_value: float | None, constraints: CoverageConstraints) -> float:
    scale = beta_value / constraints.n_min
    if not math.isfinite(scale):
        scale = (gamma_value or 0.0) / constraints.n_min
    return 4.0 * max(1.0, constraints.k_min, scale)


def brute_force_optimum(rates: EnergyRates, tier: TierConfig, traffic: TrafficModel,
                        constraints: CoverageConstraints, grid_step: float = 1.0,
                        k_cap: float | None = None, max_cells: int = 50_000_000) -> OptimumResult:
    """Exhaustive search over integer n and frames ``k_start + i * grid_step`` up to ``k_cap``."""
    _check_constraints(constraints)
    if not grid_step > 0:
        raise DomainError("grid_step must be > 0")
    if traffic.family is Family.EXPONENTIAL:
        _check_exponential(rates)
    b_val = beta(rates, tier, traffic)
    g_val = gamma(rates, tier, traffic)
    if k_cap is None:
        k_cap = default_k_cap(b_val, g_val, constraints)
    k_start = max(1.0, float(math.ceil(constraints.k_min)))
    k_cap = max(k_cap, k_start)
    count = int(math.floor((k_cap - k_start) / grid_step + 1e-9)) + 1
    ns = np.arange(constraints.n_min, constraints.n_max + 1)
    if count * ns.size > max_cells:
        raise DomainError(f"brute-force grid of {count * ns.size} cells exceeds max_cells={max_cells}")
    ks = k_start + grid_step * np.arange(count)
    totals = closed_form_total(rates, tier, traffic, ns[:, None], ks[None, :])
    # rows are n ascending, columns k ascending: first flat argmin already honours the tie order
    flat = int(np.argmin(totals))
    i, j = divmod(flat, ks.size)
    n_best, k_best = int(ns[i]), float(ks[j])
    if n_best == constraints.n_max and j > 0:
        branch = Branch.GAMMA_INTERIOR
    elif j == 0 and n_best == constraints.n_max:
        branch = Branch.MAX_MIN
    elif j == 0 and n_best == constraints.n_min:
        branch = Branch.MIN_MIN
    else:
        branch = Branch.BETA_INTERIOR
    pt = OperatingPoint(n_best, k_best)
    return OptimumResult(traffic.family, b_val, g_val, branch, pt, pt, float(totals[i, j]))


@dataclass(frozen=True)
class Comparison:
    optimum: OptimumResult
    adhoc_point: OperatingPoint
    adhoc_energy: float

    @property
    def gain(self) -> float:
        """Fraction of the ad-hoc energy saved by the optimum."""
        return (self.adhoc_energy - self.optimum.energy_at_discrete) / self.adhoc_energy

    def report(self, tier: TierConfig, normalization: Normalization | str = Normalization.PER_SECOND) -> dict:
        out = self.optimum.report(tier, normalization)
        f = 1.0 / tier.T if Normalization(normalization) is Normalization.PER_SECOND else 1.0
        return {
            "optimum": out,
            "adhoc": {"n": int(self.adhoc_point.n), "k": self.adhoc_point.k * f,
                      "energy_J": self.adhoc_energy * f},
            "gain": self.gain,
            "gain_pct": 100.0 * self.gain,
            "normalization": out["normalization"],
        }


def compare(rates: EnergyRates, tier: TierConfig, traffic: TrafficModel,
            constraints: CoverageConstraints, adhoc: OperatingPoint | None = None,
            paper_literal_beta_e: bool = False) -> Comparison:
    """Energy saved by the optimum over an ad-hoc point (default: the least-resources corner).

    The ad-hoc frame count is rounded up to whole frames, matching the
    optimizer's discretization.
    """
    opt = optimize(rates, tier, traffic, constraints, paper_literal_beta_e)
    if adhoc is None:
        adhoc = OperatingPoint(constraints.n_min, constraints.k_min)
    if int(adhoc.n) != adhoc.n:
        raise DomainError("ad-hoc node count must be an integer")
    k = float(math.ceil(adhoc.k))
    point = OperatingPoint(int(adhoc.n), k)
    energy = float(closed_form_total(rates, tier, traffic, point.n, point.k))
    return Comparison(opt, point, energy)
