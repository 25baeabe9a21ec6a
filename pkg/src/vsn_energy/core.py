"""Domain records shared across the package.

Canonical internal units are bits, joules and seconds, with ``k`` counted
in frames per activation interval and ``s`` in bits per interval.
Per-second quantities only appear at the I/O boundary (see ``normalize``).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields, replace


class DomainError(ValueError):
    """An argument lies outside the domain of a model operation."""


class PreconditionError(DomainError):
    """A model-level precondition (e.g. p > b for Exponential traffic) fails."""


def _check_finite_nonneg(name: str, value: float) -> None:
    if not math.isfinite(value) or value < 0:
        raise DomainError(f"{name} must be finite and >= 0, got {value!r}")


@dataclass(frozen=True)
class EnergyRates:
    """Per-frame and per-bit energy constants of one node.

    a: J per acquired frame (acquisition + processing start-up)
    g: J per produced bit
    j: J per transmitted bit
    p: J per buffered bit (receiver overload penalty)
    b: J per idle bit-interval (beaconing)
    h: J per received-and-relayed bit
    """

    a: float
    g: float
    j: float
    p: float
    b: float
    h: float

    def __post_init__(self):
        for f in fields(self):
            _check_finite_nonneg(f.name, getattr(self, f.name))
        if self.a <= 0:
            raise DomainError("acquisition energy a must be > 0")


@dataclass(frozen=True)
class TierConfig:
    """Receiver capacity ``s`` (bits per interval), interval ``T`` (s) and relay degree ``d``."""

    s: float
    T: float
    d: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.s) and self.s > 0):
            raise DomainError(f"s must be > 0, got {self.s!r}")
        if not (math.isfinite(self.T) and self.T > 0):
            raise DomainError(f"T must be > 0, got {self.T!r}")
        if int(self.d) != self.d or self.d < 0:
            raise DomainError(f"d must be a non-negative integer, got {self.d!r}")
        object.__setattr__(self, "d", int(self.d))

    @classmethod
    def from_rate(cls, s_bits_per_second: float, T: float, d: int = 0) -> "TierConfig":
        return cls(s=s_bits_per_second * T, T=T, d=d)

    @property
    def s_per_second(self) -> float:
        return self.s / self.T


@dataclass(frozen=True)
class OperatingPoint:
    n: float
    k: float

    def __post_init__(self):
        if not (self.n > 0 and self.k > 0):
            raise DomainError(f"operating point needs n > 0 and k > 0, got n={self.n!r}, k={self.k!r}")


@dataclass(frozen=True)
class CoverageConstraints:
    """Spatial bounds on nodes per tier and the temporal lower bound on frames per interval."""

    n_min: int
    n_max: int
    k_min: float

    def __post_init__(self):
        if int(self.n_min) != self.n_min or int(self.n_max) != self.n_max:
            raise DomainError("node-count bounds must be integers")
        if not 1 <= self.n_min <= self.n_max:
            raise DomainError(f"need 1 <= n_min <= n_max, got n_min={self.n_min}, n_max={self.n_max}")
        if not (math.isfinite(self.k_min) and self.k_min > 0):
            raise DomainError(f"k_min must be > 0, got {self.k_min!r}")
        object.__setattr__(self, "n_min", int(self.n_min))
        object.__setattr__(self, "n_max", int(self.n_max))

    @classmethod
    def from_rate(cls, n_min: int, n_max: int, k_min_per_second: float, T: float) -> "CoverageConstraints":
        k = k_min_per_second * T
        # 2.1 fps * 10 s must stay 21 frames, not 21.000000000000004
        if abs(k - round(k)) <= 1e-9 * max(1.0, abs(k)):
            k = float(round(k))
        return cls(n_min=n_min, n_max=n_max, k_min=k)


COMPONENTS = ("acquisition", "processing", "transmit", "receive_relay", "buffering", "idle")


@dataclass(frozen=True)
class EnergyBreakdown:
    """Expected (or realised) energy of one node over one interval, split by cause."""

    acquisition: float
    processing: float
    transmit: float
    receive_relay: float
    buffering: float
    idle: float
    total: float

    @classmethod
    def from_components(cls, **parts: float) -> "EnergyBreakdown":
        total = math.fsum(parts[c] for c in COMPONENTS)
        return cls(total=total, **parts)

    def component_sum(self) -> float:
        return math.fsum(getattr(self, c) for c in COMPONENTS)

    def scaled(self, factor: float) -> "EnergyBreakdown":
        return replace(self, **{f.name: getattr(self, f.name) * factor for f in fields(self)})

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


class Normalization(str, enum.Enum):
    PER_INTERVAL = "per-interval"
    PER_SECOND = "per-second"


def normalize(breakdown: EnergyBreakdown, tier: TierConfig,
              mode: Normalization | str) -> EnergyBreakdown:
    """Express an interval breakdown per second (divide by T) or leave it per interval."""
    mode = Normalization(mode)
    if mode is Normalization.PER_SECOND:
        return breakdown.scaled(1.0 / tier.T)
    return breakdown


def denormalize(breakdown: EnergyBreakdown, tier: TierConfig,
                mode: Normalization | str) -> EnergyBreakdown:
    """Inverse of :func:`normalize`."""
    mode = Normalization(mode)
    if mode is Normalization.PER_SECOND:
        return breakdown.scaled(tier.T)
    return breakdown


def frames_to_display(k: float, tier: TierConfig, mode: Normalization | str) -> float:
    return k / tier.T if Normalization(mode) is Normalization.PER_SECOND else k


def frames_from_display(k: float, tier: TierConfig, mode: Normalization | str) -> float:
    return k * tier.T if Normalization(mode) is Normalization.PER_SECOND else k
