"""JSON scenario files.

Layout (per-second quantities are converted to per-interval on load)::

    {
      "rates": {"a": 0.019, "g": 4.4e-8, "j": 2.2e-7, "p": 2.86e-7, "b": 1.9e-7, "h": 2.92e-6},
      "tier": {"s_bits_per_second": 144000, "T_seconds": 154, "d": 0},
      "traffic": {"family": "pareto", "r_bits": 20600, "alpha": 4, "v_mode": "kr"},
      "constraints": {"n_min": 2, "n_max": 10, "k_min_per_second": 0.7}
    }

``v_mode`` (Pareto only) is ``"mean-matched"`` (default), ``"kr"`` for a
scale of r bits per frame and stream, or a number of bits per frame.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .core import CoverageConstraints, DomainError, EnergyRates, TierConfig
from .traffic import Family, TrafficModel


class ScenarioError(DomainError):
    """The scenario file is missing, malformed or violates a model invariant."""


@dataclass(frozen=True)
class Scenario:
    rates: EnergyRates
    tier: TierConfig
    traffic: TrafficModel
    constraints: CoverageConstraints


def _section(doc: dict, key: str) -> dict:
    sec = doc.get(key)
    if not isinstance(sec, dict):
        raise ScenarioError(f"scenario needs an object {key!r}")
    return sec


def _num(sec: dict, key: str, where: str, default=None) -> float:
    if key not in sec:
        if default is not None:
            return default
        raise ScenarioError(f"missing {where}.{key}")
    val = sec[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ScenarioError(f"{where}.{key} must be a number, got {val!r}")
    return float(val)


def _traffic(sec: dict) -> TrafficModel:
    if "family" not in sec:
        raise ScenarioError("missing traffic.family")
    family = Family.parse(sec["family"])
    r = _num(sec, "r_bits", "traffic")
    alpha = _num(sec, "alpha", "traffic") if "alpha" in sec else None
    v_mode = sec.get("v_mode", "mean-matched")
    if family is not Family.PARETO:
        if alpha is not None or "v_mode" in sec:
            raise ScenarioError("alpha and v_mode only apply to the pareto family")
        return TrafficModel(family, r)
    if v_mode == "mean-matched":
        v = None
    elif v_mode == "kr":
        v = r
    elif isinstance(v_mode, (int, float)) and not isinstance(v_mode, bool):
        v = float(v_mode)
    else:
        raise ScenarioError(f"traffic.v_mode must be 'mean-matched', 'kr' or a number, got {v_mode!r}")
    return TrafficModel(family, r, alpha=alpha, v_per_frame=v)


def scenario_from_dict(doc) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")
    try:
        r = _section(doc, "rates")
        rates = EnergyRates(**{k: _num(r, k, "rates") for k in ("a", "g", "j", "p", "b", "h")})
        t = _section(doc, "tier")
        T = _num(t, "T_seconds", "tier")
        d = _num(t, "d", "tier", default=0.0)
        if not d.is_integer():
            raise ScenarioError("tier.d must be an integer")
        tier = TierConfig.from_rate(_num(t, "s_bits_per_second", "tier"), T, int(d))
        traffic = _traffic(_section(doc, "traffic"))
        c = _section(doc, "constraints")
        n_min, n_max = _num(c, "n_min", "constraints"), _num(c, "n_max", "constraints")
        constraints = CoverageConstraints.from_rate(n_min, n_max, _num(c, "k_min_per_second", "constraints"), T)
    except ScenarioError:
        raise
    except DomainError as exc:
        raise ScenarioError(str(exc)) from exc
    return Scenario(rates, tier, traffic, constraints)


def load_scenario(path) -> Scenario:
    p = Path(path)
    try:
        text = p.read_text()
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {p}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{p}: invalid JSON ({exc})") from exc
    return scenario_from_dict(doc)


def scenario_to_dict(sc: Scenario) -> dict:
    traffic = {"family": sc.traffic.family.value, "r_bits": sc.traffic.r}
    if sc.traffic.family is Family.PARETO:
        traffic["alpha"] = sc.traffic.alpha
        traffic["v_mode"] = "mean-matched" if sc.traffic.v_per_frame is None else sc.traffic.v_per_frame
    return {
        "rates": {k: getattr(sc.rates, k) for k in ("a", "g", "j", "p", "b", "h")},
        "tier": {"s_bits_per_second": sc.tier.s_per_second, "T_seconds": sc.tier.T, "d": sc.tier.d},
        "traffic": traffic,
        "constraints": {"n_min": sc.constraints.n_min, "n_max": sc.constraints.n_max,
                        "k_min_per_second": sc.constraints.k_min / sc.tier.T},
    }
