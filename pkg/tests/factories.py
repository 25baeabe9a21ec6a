"""Shared scenario builders for the test suite."""
import numpy as np

from vsn_energy import CoverageConstraints, EnergyRates, TierConfig, TrafficModel
from vsn_energy.optimizer import beta, interior_gamma

T_TESTBED = 154.0
FAMILIES = ("uniform", "exponential", "half-gaussian", "pareto")

TESTBED_RATES = EnergyRates(a=0.019, g=4.4e-8, j=2.2e-7, p=2.86e-7, b=1.9e-7, h=2.92e-6)
FEATURES_RATES = EnergyRates(a=0.005 + 0.00779, g=1.9e-8, j=2.2e-7, p=2.86e-7, b=1.9e-7, h=2.92e-6)


def make_tier(d=0):
    return TierConfig.from_rate(144_000, T_TESTBED, d)


def make_constraints(n_min=2, n_max=16, k_fps=2.0):
    return CoverageConstraints.from_rate(n_min, n_max, k_fps, T_TESTBED)


def make_traffic(family, r=5200.0, alpha=4.0, v_per_frame=None):
    if family == "pareto":
        return TrafficModel(family, r, alpha=alpha, v_per_frame=v_per_frame)
    return TrafficModel(family, r)


def random_rates(rng, family, idle_dominant=False):
    """Admissible rates; ``idle_dominant`` makes idling costlier than producing so k has an interior optimum."""
    b = float(rng.uniform(1e-7, 1e-6))
    if idle_dominant:
        j, h, g = (float(rng.uniform(0, b / 4)), float(rng.uniform(0, b / 10)), float(rng.uniform(0, b / 10)))
    else:
        j, h, g = float(rng.uniform(0, 5e-7)), float(rng.uniform(0, 5e-6)), float(rng.uniform(0, 1e-7))
    if family == "exponential":
        p = float(rng.uniform(1.01 * b, 3e-6))
    else:
        p = float(rng.uniform(1e-8, 3e-6))
    return b, j, h, g, p


def random_case(rng, family, idle_dominant=False):
    """A random (rates, tier, traffic, constraints) tuple with k_min spread across branches."""
    b, j, h, g, p = random_rates(rng, family, idle_dominant)
    r = float(rng.uniform(500, 20000))
    a = float(rng.uniform(1e-5, 0.3 * b * r)) if idle_dominant else float(rng.uniform(1e-3, 0.05))
    rates = EnergyRates(a=a, g=g, j=j, p=p, b=b, h=h)
    tier = TierConfig(s=float(rng.uniform(1e5, 1e8)), T=1.0, d=int(rng.integers(0, 3)))
    alpha = float(rng.uniform(1.3, 5.0))
    traffic = TrafficModel(family, r, alpha=alpha) if family == "pareto" else TrafficModel(family, r)
    n_min = int(rng.integers(1, 5))
    n_max = n_min + int(rng.integers(0, 20))
    bv = beta(rates, tier, traffic)
    gv = interior_gamma(rates, tier, traffic)
    ref = gv if (idle_dominant and gv) else bv
    k_min = float(max(1.0, ref / n_max * rng.uniform(0.2, 3.0)))
    return rates, tier, traffic, CoverageConstraints(n_min, n_max, k_min)


def random_energy_case(rng, family):
    """Rates, tier, traffic and a real (n, k) point covering both sides of the support guards."""
    b, j, h, g, p = random_rates(rng, family, bool(rng.integers(0, 2)))
    rates = EnergyRates(a=float(rng.uniform(1e-4, 0.05)), g=g, j=j, p=p, b=b, h=h)
    r = float(rng.uniform(100, 50000))
    d = int(rng.integers(0, 4))
    tier = TierConfig(s=float(rng.uniform(1e4, 1e8)), T=float(rng.uniform(1, 300)), d=d)
    traffic = TrafficModel(family, r, alpha=float(rng.uniform(1.1, 6.0))) if family == "pareto" \
        else TrafficModel(family, r)
    k = float(rng.uniform(0.5, 500))
    # capacity per node between 0.05 and 5 aggregate means
    m = k * r * (d + 1)
    n = tier.s / (m * float(np.exp(rng.uniform(np.log(0.05), np.log(5.0)))))
    return rates, tier, traffic, n, k
