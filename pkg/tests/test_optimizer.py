import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from factories import (FAMILIES, T_TESTBED, TESTBED_RATES, make_constraints, make_tier, make_traffic,
                       random_case)
from vsn_energy import (Branch, CoverageConstraints, DomainError, EnergyRates, OperatingPoint,
                        PreconditionError, TierConfig, TrafficModel, beta, brute_force_optimum,
                        closed_form_total, compare, gamma, optimize)
from vsn_energy.optimizer import interior_gamma

IDLE_HEAVY = EnergyRates(a=1e-4, g=1e-9, j=1e-8, p=4e-7, b=3e-7, h=1e-8)


def _dE(rates, tier, traffic, n, k, wrt):
    """Central difference of the closed form along n or k."""
    if wrt == "n":
        h = 1e-6 * n
        return (closed_form_total(rates, tier, traffic, n + h, k)
                - closed_form_total(rates, tier, traffic, n - h, k)) / (2 * h)
    h = 1e-6 * k
    return (closed_form_total(rates, tier, traffic, n, k + h)
            - closed_form_total(rates, tier, traffic, n, k - h)) / (2 * h)


def _root_n(rates, tier, traffic, k):
    return brentq(lambda n: _dE(rates, tier, traffic, n, k, "n"), 1e-3, 1e4, xtol=1e-14, rtol=1e-13)


def _root_k(rates, tier, traffic, n, lo, hi):
    return brentq(lambda k: _dE(rates, tier, traffic, n, k, "k"), lo, hi, xtol=1e-14, rtol=1e-13)


@pytest.mark.parametrize("family,expected", [("uniform", 23.04), ("half-gaussian", 26.206), ("exponential", 30.15)])
def test_beta_testbed_values_per_second(family, expected):
    b = beta(TESTBED_RATES, make_tier(0), make_traffic(family)) / T_TESTBED
    assert b == pytest.approx(expected, abs=0.01)


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("d", [0, 2])
def test_beta_is_node_axis_stationary_point(family, d):
    tier, traffic = make_tier(d), make_traffic(family)
    k = 308.0
    n_root = _root_n(TESTBED_RATES, tier, traffic, k)
    assert beta(TESTBED_RATES, tier, traffic) / k == pytest.approx(n_root, rel=1e-8)


def test_beta_exponential_requires_p_above_b():
    rates = EnergyRates(a=0.019, g=4.4e-8, j=2.2e-7, p=1.9e-7, b=1.9e-7, h=2.92e-6)
    with pytest.raises(PreconditionError):
        beta(rates, make_tier(), make_traffic("exponential"))
    with pytest.raises(PreconditionError):
        optimize(rates, make_tier(), make_traffic("exponential"), make_constraints())


def test_beta_exponential_literal_flag_differs():
    tier, traffic = make_tier(0), make_traffic("exponential")
    corrected = beta(TESTBED_RATES, tier, traffic)
    literal = beta(TESTBED_RATES, tier, traffic, paper_literal_beta_e=True)
    b, p = TESTBED_RATES.b, TESTBED_RATES.p
    assert literal / corrected == pytest.approx(math.log((b + p) / b) / math.log((b + p) / p))
    res = optimize(TESTBED_RATES, tier, traffic, make_constraints(), paper_literal_beta_e=True)
    assert res.beta == literal


def test_beta_pareto_mean_matched_form():
    tier, traffic = make_tier(1), make_traffic("pareto", alpha=3.0)
    b, p = TESTBED_RATES.b, TESTBED_RATES.p
    expected = tier.s * 3.0 / (5200 * 2.0 * 2) * (b / (b + p)) ** (1 / 3)
    assert beta(TESTBED_RATES, tier, traffic) == pytest.approx(expected, rel=1e-14)


def test_gamma_uniform_testbed_value():
    assert gamma(TESTBED_RATES, make_tier(0), make_traffic("uniform")) / T_TESTBED == pytest.approx(4.66, abs=0.005)


@pytest.mark.parametrize("family", ["pareto", "exponential", "half-gaussian"])
def test_gamma_absent_for_testbed_rates(family):
    # idling is cheaper than transmitting (b < j), so energy rises with k
    assert gamma(TESTBED_RATES, make_tier(0), make_traffic(family)) is None


def test_uniform_gamma_not_interior_without_idle_dominance():
    assert interior_gamma(TESTBED_RATES, make_tier(0), make_traffic("uniform")) is None


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("d", [0, 1, 3])
def test_gamma_is_frame_axis_stationary_point(family, d):
    tier = TierConfig(s=1e7, T=1.0, d=d)
    traffic = make_traffic(family, r=2000.0, alpha=2.5)
    g = gamma(IDLE_HEAVY, tier, traffic)
    assert g is not None
    n = 7.0
    k_root = _root_k(IDLE_HEAVY, tier, traffic, n, 0.05 * g / n, 20 * g / n)
    assert g / n == pytest.approx(k_root, rel=1e-8)


def test_half_gaussian_energy_falls_in_k_under_idle_dominance():
    tier = TierConfig(s=1e7, T=1.0, d=0)
    traffic = make_traffic("half-gaussian", r=2000.0)
    g = gamma(IDLE_HEAVY, tier, traffic)
    n = 5.0
    assert _dE(IDLE_HEAVY, tier, traffic, n, 0.5 * g / n, "k") < 0
    assert _dE(IDLE_HEAVY, tier, traffic, n, 2.0 * g / n, "k") > 0


@pytest.mark.parametrize("family", FAMILIES)
@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_beta_exceeds_gamma(family, seed):
    rates, tier, traffic, _ = random_case(np.random.default_rng(seed), family, idle_dominant=seed % 2 == 0)
    g = interior_gamma(rates, tier, traffic)
    if g is not None:
        assert beta(rates, tier, traffic) > g


TABLE = [("uniform", 0, (12, 2)), ("uniform", 2, (4, 2)), ("half-gaussian", 0, (13, 2)),
         ("half-gaussian", 2, (4, 2)), ("exponential", 0, (15, 2)), ("exponential", 2, (5, 2))]


@pytest.mark.parametrize("family,d,expected", TABLE)
def test_testbed_optima(family, d, expected):
    res = optimize(TESTBED_RATES, make_tier(d), make_traffic(family), make_constraints())
    assert (res.discrete_point.n, res.discrete_point.k / T_TESTBED) == expected
    assert res.branch is Branch.BETA_INTERIOR


@pytest.mark.parametrize("d,printed", [(0, 16), (2, 6)])
def test_pareto_testbed_optimum_follows_brute_force(d, printed):
    args = (TESTBED_RATES, make_tier(d), make_traffic("pareto", alpha=4.0), make_constraints())
    res, bf = optimize(*args), brute_force_optimum(*args)
    assert res.discrete_point == bf.discrete_point
    assert res.discrete_point.n != printed


def test_brute_force_testbed_uniform():
    bf = brute_force_optimum(TESTBED_RATES, make_tier(0), make_traffic("uniform"), make_constraints())
    assert (bf.discrete_point.n, bf.discrete_point.k) == (12, 308.0)


@pytest.mark.parametrize("family", FAMILIES)
def test_min_min_branch_when_kmin_large(family):
    tier, traffic = make_tier(0), make_traffic(family)
    b = beta(TESTBED_RATES, tier, traffic)
    c = CoverageConstraints(2, 16, 1.5 * b / 2)
    res = optimize(TESTBED_RATES, tier, traffic, c)
    assert res.branch is Branch.MIN_MIN
    assert res.discrete_point == OperatingPoint(2, math.ceil(c.k_min))


@pytest.mark.parametrize("family", FAMILIES)
def test_all_branches_reachable(family):
    tier = TierConfig(s=1e7, T=1.0, d=1)
    traffic = make_traffic(family, r=2000.0, alpha=2.5)
    b = beta(IDLE_HEAVY, tier, traffic)
    g = interior_gamma(IDLE_HEAVY, tier, traffic)
    n_lo, n_hi = 2, 12
    cases = {
        Branch.GAMMA_INTERIOR: 0.5 * g / n_hi,
        Branch.MAX_MIN: 0.5 * (g / n_hi + b / n_hi),
        Branch.BETA_INTERIOR: 0.5 * (b / n_hi + b / n_lo),
        Branch.MIN_MIN: 2 * b / n_lo,
    }
    for branch, k_min in cases.items():
        c = CoverageConstraints(n_lo, n_hi, k_min)
        res = optimize(IDLE_HEAVY, tier, traffic, c)
        assert res.branch is branch
        assert res.discrete_point == brute_force_optimum(IDLE_HEAVY, tier, traffic, c).discrete_point


@pytest.mark.parametrize("family", FAMILIES)
def test_optimizer_agrees_with_brute_force_sample(family):
    rng = np.random.default_rng(100 + FAMILIES.index(family))
    for i in range(60):
        rates, tier, traffic, c = random_case(rng, family, idle_dominant=i % 2 == 0)
        res = optimize(rates, tier, traffic, c)
        bf = brute_force_optimum(rates, tier, traffic, c)
        assert res.discrete_point == bf.discrete_point
        assert res.energy_at_discrete == bf.energy_at_discrete


@pytest.mark.parametrize("family", FAMILIES)
def test_result_invariants(family):
    rng = np.random.default_rng(7 + FAMILIES.index(family))
    for i in range(100):
        rates, tier, traffic, c = random_case(rng, family, idle_dominant=i % 2 == 0)
        res = optimize(rates, tier, traffic, c)
        n, k = res.discrete_point.n, res.discrete_point.k
        assert c.n_min <= n <= c.n_max and k >= c.k_min and float(k).is_integer()
        assert all(res.energy_at_discrete <= e for e, _, _ in res.candidates)
        # no interior global minimum: the continuous point touches a constraint
        cont = res.continuous_point
        assert cont.k == c.k_min or cont.n in (c.n_min, c.n_max)


@pytest.mark.parametrize("family", FAMILIES)
def test_first_order_conditions_at_interior_points(family):
    tier = TierConfig(s=1e7, T=1.0, d=1)
    traffic = make_traffic(family, r=2000.0, alpha=2.5)
    b = beta(IDLE_HEAVY, tier, traffic)
    g = interior_gamma(IDLE_HEAVY, tier, traffic)
    res = optimize(IDLE_HEAVY, tier, traffic, CoverageConstraints(2, 12, 0.5 * (b / 12 + b / 2)))
    p = res.continuous_point
    scale = abs(_dE(IDLE_HEAVY, tier, traffic, 2 * p.n, p.k, "n"))
    assert abs(_dE(IDLE_HEAVY, tier, traffic, p.n, p.k, "n")) < 1e-4 * scale
    res = optimize(IDLE_HEAVY, tier, traffic, CoverageConstraints(2, 12, 0.5 * g / 12))
    p = res.continuous_point
    scale = abs(_dE(IDLE_HEAVY, tier, traffic, p.n, 0.5 * p.k, "k"))
    assert abs(_dE(IDLE_HEAVY, tier, traffic, p.n, p.k, "k")) < 1e-4 * scale


@pytest.mark.parametrize("family", FAMILIES)
@given(lam=st.floats(0.1, 10.0))
@settings(max_examples=30, deadline=None)
def test_optimum_location_scale_invariant(family, lam):
    tier, traffic, c = make_tier(0), make_traffic(family), make_constraints()
    base = optimize(TESTBED_RATES, tier, traffic, c).continuous_point.n
    tier_l = TierConfig(s=tier.s * lam, T=tier.T, d=tier.d)
    scaled_r = optimize(TESTBED_RATES, tier_l, traffic.with_r(traffic.r * lam), c).continuous_point.n
    scaled_k = optimize(TESTBED_RATES, tier_l, traffic, CoverageConstraints(2, 16, c.k_min * lam)).continuous_point.n
    assert scaled_r == pytest.approx(base, rel=1e-9)
    assert scaled_k == pytest.approx(base, rel=1e-9)


def test_brute_force_single_column():
    c = CoverageConstraints(5, 5, 307.2)
    bf = brute_force_optimum(TESTBED_RATES, make_tier(0), make_traffic("uniform"), c)
    assert bf.discrete_point == OperatingPoint(5, 308.0)


def test_brute_force_argument_checks():
    args = (TESTBED_RATES, make_tier(0), make_traffic("uniform"), make_constraints())
    with pytest.raises(DomainError):
        brute_force_optimum(*args, grid_step=0)
    with pytest.raises(DomainError):
        brute_force_optimum(*args, k_cap=1e9, max_cells=1000)


def test_infeasible_constraints_rejected():
    with pytest.raises(DomainError):
        CoverageConstraints(5, 4, 1.0)


def test_report_layout():
    res = optimize(TESTBED_RATES, make_tier(0), make_traffic("exponential"), make_constraints())
    rep = json.loads(json.dumps(res.report(make_tier(0))))
    assert set(rep) == {"family", "beta", "gamma", "branch", "continuous", "discrete", "energy_J", "normalization"}
    assert rep["gamma"] is None and rep["discrete"] == {"n": 15, "k": 2.0}
    assert rep["energy_J"] == pytest.approx(res.energy_at_discrete / T_TESTBED)
    per_interval = res.report(make_tier(0), "per-interval")
    assert per_interval["discrete"]["k"] == 308.0


def test_compare_identity_and_default_adhoc():
    args = (TESTBED_RATES, make_tier(0), make_traffic("uniform"), make_constraints())
    res = optimize(*args)
    same = compare(*args, adhoc=res.discrete_point)
    assert same.gain == 0.0
    default = compare(*args)
    assert default.adhoc_point == OperatingPoint(2, 308.0)
    assert 0 < default.gain < 1
    assert compare(*args).report(make_tier(0))["gain_pct"] == pytest.approx(100 * default.gain)
