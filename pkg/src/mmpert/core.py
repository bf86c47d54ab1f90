"""Shared domain types and parameter validation."""

from __future__ import annotations

import math
from dataclasses import dataclass


class DomainError(ValueError):
    """Raised when an input lies outside the domain of an operation."""


@dataclass(frozen=True)
class MarketEnv:
    """Single-asset market parameters and penalty weights.

    Attributes:
        A: order-arrival intensity scale (events per unit time).
        k: intensity decay rate (1/price).
        z: half market spread.
        sigma: mid-price volatility (price/sqrt(time)).
        alpha: per-share transaction cost; negative values are rebates.
        epsilon: inventory-risk perturbation parameter.
        eta: weight of the terminal spread penalty.
        nu: weight of the running volatility penalty.
    """

    A: float = 1000.0
    k: float = 1.0
    z: float = 0.5
    sigma: float = 0.5
    alpha: float = 0.05
    epsilon: float = 0.001
    eta: float = 1.0
    nu: float = 1.0


def validate_env(env: MarketEnv) -> list[str]:
    """Return the list of violated constraints; empty means usable."""
    report = []
    for name in ("A", "k", "sigma"):
        value = getattr(env, name)
        if not (math.isfinite(value) and value > 0):
            report.append(f"{name} must be > 0")
    for name in ("z", "epsilon", "eta", "nu"):
        value = getattr(env, name)
        if not (math.isfinite(value) and value >= 0):
            report.append(f"{name} must be >= 0")
    if not math.isfinite(env.alpha):
        report.append("alpha must be finite")
    return report


@dataclass(frozen=True)
class Horizon:
    T: float = 1.0

    def __post_init__(self):
        if not self.T > 0:
            raise DomainError("T must be > 0")


@dataclass(frozen=True)
class MarketState:
    """Market-maker state: time, mid-price, inventory and cash."""

    t: float
    s: float
    q: int = 0
    x: float = 0.0

    def __post_init__(self):
        if int(self.q) != self.q:
            raise DomainError("q must be an integer")
        if self.t < 0:
            raise DomainError("t must be >= 0")


@dataclass(frozen=True)
class ControlSet:
    """Two-sided quote at a given mid-price.

    ``psi`` is the quoted spread and ``r`` its centre. Build with
    :meth:`from_deltas` so that both are derived from the half spreads.
    """

    delta_plus: float
    delta_minus: float
    psi: float
    r: float
    s: float

    @classmethod
    def from_deltas(cls, delta_plus: float, delta_minus: float, s: float) -> ControlSet:
        return cls(
            delta_plus=delta_plus,
            delta_minus=delta_minus,
            psi=delta_plus + delta_minus,
            r=s + (delta_plus - delta_minus) / 2,
            s=s,
        )

    @classmethod
    def from_spread(cls, psi: float, r: float, s: float) -> ControlSet:
        half_tilt = r - s
        return cls.from_deltas(psi / 2 + half_tilt, psi / 2 - half_tilt, s)

    @property
    def ask(self) -> float:
        return self.s + self.delta_plus

    @property
    def bid(self) -> float:
        return self.s - self.delta_minus


def check_time(t: float, T: float) -> None:
    if t > T:
        raise DomainError(f"t={t} exceeds horizon T={T}")
