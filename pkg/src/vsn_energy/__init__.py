"""Expected energy and optimal (node count, frame rate) for one tier of a visual sensor network."""
from .core import (COMPONENTS, CoverageConstraints, DomainError, EnergyBreakdown, EnergyRates,
                   Normalization, OperatingPoint, PreconditionError, TierConfig, denormalize, normalize)
from .energy import (EnergySurface, closed_form_total, energy_components, energy_surface,
                     expected_energy, expected_energy_direct, expected_energy_quadrature)
from .fitting import FitResult, fit_mean, ks_diagnostics, r_squared, select_family
from .optimizer import (Branch, Comparison, OptimumResult, beta, brute_force_optimum, compare, gamma,
                        optimize)
from .scenario import Scenario, ScenarioError, load_scenario, scenario_from_dict
from .simulate import (CellStats, Coupling, SimulationReport, run_monte_carlo, simulate_interval,
                       validate_surface)
from .special import erf, erfinv, lambert_w_lower
from .traffic import Family, TrafficModel, cdf, deficit_integral, density, quantile, sample

__all__ = [
    "COMPONENTS", "Branch", "CellStats", "Comparison", "CoverageConstraints", "Coupling", "DomainError",
    "EnergyBreakdown", "EnergyRates", "EnergySurface", "Family", "FitResult", "Normalization",
    "OperatingPoint", "OptimumResult", "PreconditionError", "Scenario", "ScenarioError",
    "SimulationReport", "TierConfig", "TrafficModel", "beta", "brute_force_optimum", "cdf",
    "closed_form_total", "compare", "deficit_integral", "denormalize", "density", "energy_components",
    "energy_surface", "erf", "erfinv", "expected_energy", "expected_energy_direct",
    "expected_energy_quadrature", "fit_mean", "gamma", "ks_diagnostics", "lambert_w_lower",
    "load_scenario", "normalize", "optimize", "quantile", "r_squared", "run_monte_carlo", "sample",
    "scenario_from_dict", "select_family", "simulate_interval", "validate_surface",
]
