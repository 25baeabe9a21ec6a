"""Expected per-node energy over one activation interval.

The total follows the add-subtract form

    E(n, k) = k a + [(p + j)(d + 1) + h d + g] k r - p s/n + (b + p) I(s/n)

where ``I`` is the deficit integral of the aggregate traffic model. Each
family has a closed form; the Uniform form only holds while ``s/n <= 2m`` and
the Pareto form while ``s/n >= v``, outside of which the exact piecewise
deficit is used instead.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import integrate
from scipy import special as _sp

from .core import (COMPONENTS, DomainError, EnergyBreakdown, EnergyRates, Normalization,
                   OperatingPoint, TierConfig, frames_to_display, normalize)
from .traffic import (SQRT_PI, Family, TrafficModel, aggregate_mean, deficit_integral,
                      pareto_scale)


def per_frame_cost(rates: EnergyRates, traffic: TrafficModel, d: int) -> float:
    """Linear energy per frame, ``a + r[(p + j)(d + 1) + h d + g]``."""
    return rates.a + traffic.r * ((rates.p + rates.j) * (d + 1) + rates.h * d + rates.g)


def _check_point(n, k):
    if np.any(~(np.asarray(n) > 0)) or np.any(~(np.asarray(k) > 0)):
        raise DomainError("energy is only defined for n > 0 and k > 0")


def closed_form_total(rates: EnergyRates, tier: TierConfig, traffic: TrafficModel, n, k):
    """Total expected energy from the family closed forms; broadcasts over ``n`` and ``k``."""
    _check_point(n, k)
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    a, b, p = rates.a, rates.b, rates.p
    s, d, r = tier.s, tier.d, traffic.r
    lin = k * per_frame_cost(rates, traffic, d)
    c = s / n
    m = k * r * (d + 1)
    fam = traffic.family
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if fam is Family.UNIFORM:
            inside = lin - p * s / n + s * s * (b + p) / (4.0 * n * n * k * r * (d + 1))
            outside = lin - p * c + (b + p) * (c - m)
            out = np.where(c <= 2.0 * m, inside, outside)
        elif fam is Family.PARETO:
            al = traffic.alpha
            v = pareto_scale(traffic, k, d)
            inside = (lin + b * s / n
                      + (b + p) * (v ** al * n ** (al - 1.0) / (s ** (al - 1.0) * (al - 1.0))
                                   - al * v / (al - 1.0)))
            outside = lin - p * c
            out = np.where(c >= v, inside, outside)
        elif fam is Family.EXPONENTIAL:
            out = lin + b * s / n + (b + p) * m * np.expm1(-s / (n * m))
        else:
            out = (lin - p * s / n
                   + (b + p) * (m * np.expm1(-(s * s) / (math.pi * m * m * n * n))
                                + s / n * _sp.erf(s / (SQRT_PI * m * n))))
    return float(out) if out.ndim == 0 else out


def energy_components(rates: EnergyRates, tier: TierConfig, traffic: TrafficModel, n, k) -> dict:
    """Per-cause expected energies (arrays broadcast over ``n``, ``k``)."""
    _check_point(n, k)
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    d, r = tier.d, traffic.r
    n, k = np.broadcast_arrays(n, k)
    c = tier.s / n
    m = aggregate_mean(traffic, k, d)
    idle_bits = np.asarray(deficit_integral(traffic, k, d, c))
    # overflow via the add-subtract identity, referenced to the nominal mean
    buffered_bits = idle_bits - c + m
    return {
        "acquisition": k * rates.a,
        "processing": rates.g * k * r,
        "transmit": rates.j * k * r * (d + 1),
        "receive_relay": rates.h * k * r * d,
        "buffering": rates.p * buffered_bits,
        "idle": rates.b * idle_bits,
    }


def expected_energy(rates: EnergyRates, tier: TierConfig, traffic: TrafficModel,
                    point: OperatingPoint) -> EnergyBreakdown:
    parts = energy_components(rates, tier, traffic, point.n, point.k)
    total = closed_form_total(rates, tier, traffic, point.n, point.k)
    return EnergyBreakdown(total=float(total), **{name: float(v) for name, v in parts.items()})


def expected_energy_direct(rates: EnergyRates, tier: TierConfig, traffic: TrafficModel,
                           point: OperatingPoint) -> float:
    """Total from the component form: buffering and idle charged separately."""
    parts = energy_components(rates, tier, traffic, point.n, point.k)
    return math.fsum(float(parts[c]) for c in COMPONENTS)


def _quad(f, lo, hi, **kw):
    val, _ = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=1e-13, limit=400, **kw)
    return val


def _unit_density(traffic: TrafficModel, v_over_m: float):
    """Scalar density of the aggregate measured in units of its nominal mean."""
    fam = traffic.family
    if fam is Family.UNIFORM:
        return lambda y: 0.5 if 0.0 <= y <= 2.0 else 0.0
    if fam is Family.EXPONENTIAL:
        return lambda y: math.exp(-y) if y >= 0.0 else 0.0
    if fam is Family.HALF_GAUSSIAN:
        return lambda y: 2.0 / math.pi * math.exp(-y * y / math.pi) if y >= 0.0 else 0.0
    al, v = traffic.alpha, v_over_m
    return lambda y: al * v ** al / y ** (al + 1.0) if y >= v else 0.0


def expected_energy_quadrature(rates: EnergyRates, tier: TierConfig, traffic: TrafficModel,
                               point: OperatingPoint) -> float:
    """Numerically integrated total, charging overflow at p and shortfall at b.

    Independent of the closed forms: it integrates the family density directly
    (in units of the nominal mean). Matches :func:`expected_energy` whenever
    the distribution mean equals ``k r (d+1)``.
    """
    n, k = point.n, point.k
    if not (n > 0 and k > 0):
        raise DomainError("energy is only defined for n > 0 and k > 0")
    d, r = tier.d, traffic.r
    m = aggregate_mean(traffic, k, d)
    c = tier.s / n / m
    fam = traffic.family
    v = pareto_scale(traffic, k, d) / m if fam is Family.PARETO else 0.0
    pdf = _unit_density(traffic, v)
    if fam is Family.UNIFORM:
        idle = _quad(lambda y: (c - y) * pdf(y), 0.0, min(c, 2.0))
        over = _quad(lambda y: (y - c) * pdf(y), c, 2.0) if c < 2.0 else 0.0
    elif fam is Family.PARETO:
        al = traffic.alpha
        idle = _quad(lambda y: (c - y) * pdf(y), v, c) if c > v else 0.0
        # y = L/u maps [L, inf) onto (0, 1]; the u^(al-2) factor is passed as an algebraic weight
        L = max(c, v)
        coef = al * (v / L) ** al
        over = coef * _quad(lambda u: L - c * u, 0.0, 1.0, weight="alg", wvar=(al - 2.0, 0.0))
    else:
        idle = _quad(lambda y: (c - y) * pdf(y), 0.0, c)
        over = _quad(lambda y: (y - c) * pdf(y), c, np.inf)
    own = k * r
    relayed = k * r * d
    return math.fsum([k * rates.a, (rates.g + rates.j) * own, (rates.h + rates.j) * relayed,
                      rates.p * over * m, rates.b * idle * m])


@dataclass(frozen=True)
class EnergySurface:
    """Breakdowns on an (n, k) grid; ``cells[i][j]`` is at ``(n_values[i], k_values[j])``."""

    n_values: tuple
    k_values: tuple
    cells: tuple
    rates: EnergyRates
    tier: TierConfig
    traffic: TrafficModel

    def totals(self) -> np.ndarray:
        return np.array([[cell.total for cell in row] for row in self.cells])

    def rows(self, normalization: Normalization | str = Normalization.PER_INTERVAL):
        mode = Normalization(normalization)
        for n, row in zip(self.n_values, self.cells):
            for k, cell in zip(self.k_values, row):
                shown = normalize(cell, self.tier, mode)
                yield (n, frames_to_display(k, self.tier, mode),
                       *(getattr(shown, c) for c in COMPONENTS), shown.total)

    def write_csv(self, dest, normalization: Normalization | str = Normalization.PER_SECOND) -> None:
        """Write to a path or an open text stream, with a ``# normalization=`` comment line first."""
        mode = Normalization(normalization)
        if hasattr(dest, "write"):
            self._write(dest, mode)
        else:
            with Path(dest).open("w", newline="") as fh:
                self._write(fh, mode)

    def _write(self, fh, mode: Normalization) -> None:
        fh.write(f"# normalization={mode.value}\n")
        w = csv.writer(fh)
        w.writerow(("n", "k", *COMPONENTS, "total"))
        for row in self.rows(mode):
            w.writerow([repr(float(x)) if not isinstance(x, int) else x for x in row])


def _strictly_increasing(values, name):
    vals = [float(x) for x in values]
    if not vals:
        raise DomainError(f"{name} axis is empty")
    if any(x <= 0 for x in vals):
        raise DomainError(f"{name} axis must be positive")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise DomainError(f"{name} axis must be strictly increasing")
    return vals


def energy_surface(rates: EnergyRates, tier: TierConfig, traffic: TrafficModel,
                   n_values, k_values) -> EnergySurface:
    ns = _strictly_increasing(n_values, "n")
    ks = _strictly_increasing(k_values, "k")
    N, K = np.meshgrid(np.array(ns), np.array(ks), indexing="ij")
    try:
        parts = energy_components(rates, tier, traffic, N, K)
        totals = closed_form_total(rates, tier, traffic, N, K)
    except DomainError:
        # locate the offending cell for the message
        for n in ns:
            for k in ks:
                try:
                    expected_energy(rates, tier, traffic, OperatingPoint(n, k))
                except DomainError as exc:
                    raise DomainError(f"cell (n={n}, k={k}): {exc}") from exc
        raise
    bad = ~np.isfinite(totals)
    if bad.any():
        i, j = map(int, np.argwhere(bad)[0])
        raise DomainError(f"cell (n={ns[i]}, k={ks[j]}): non-finite energy")
    cells = tuple(
        tuple(EnergyBreakdown(total=float(totals[i, j]),
                              **{name: float(parts[name][i, j]) for name in COMPONENTS})
              for j in range(len(ks)))
        for i in range(len(ns)))
    n_out = tuple(int(x) if float(x).is_integer() else x for x in ns)
    return EnergySurface(n_out, tuple(ks), cells, rates, tier, traffic)
