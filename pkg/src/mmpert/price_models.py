"""Mid-price processes: arithmetic Brownian motion and Ornstein-Uhlenbeck.

The OU process is the mean-reverting one, ``dS = a (mu - S) dt + sigma dW``,
whose conditional mean is ``s e^{-a tau} + mu (1 - e^{-a tau})``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import DomainError


class ModelKind(str, enum.Enum):
    MARTINGALE = "martingale"
    OU = "ou"


@dataclass(frozen=True)
class PriceModel:
    kind: ModelKind
    sigma: float
    a: float = 0.0
    mu: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if not self.sigma > 0:
            raise DomainError("sigma must be > 0")
        if self.kind is ModelKind.OU and not self.a > 0:
            raise DomainError("OU mean-reversion speed a must be > 0")

    @classmethod
    def martingale(cls, sigma: float) -> PriceModel:
        return cls(ModelKind.MARTINGALE, sigma)

    @classmethod
    def ou(cls, sigma: float, a: float, mu: float) -> PriceModel:
        return cls(ModelKind.OU, sigma, a, mu)

    @property
    def is_martingale(self) -> bool:
        return self.kind is ModelKind.MARTINGALE

    @property
    def drift_speed(self) -> float:
        """Mean-reversion speed used by the Euler step (0 for the martingale)."""
        return 0.0 if self.is_martingale else self.a


@dataclass(frozen=True)
class GaussianLaw:
    mean: float
    var: float


def _check(t: float, later: float, what: str) -> float:
    if later < t:
        raise DomainError(f"{what}={later} precedes t={t}")
    return later - t


def expected_terminal(model: PriceModel, t: float, s: float, T: float) -> float:
    tau = _check(t, T, "T")
    if model.is_martingale:
        return s
    decay = math.exp(-model.a * tau)
    return s * decay + model.mu * (1 - decay)


def bet_coefficient(model: PriceModel, tau: float) -> float:
    """Factor c with directional bet = c * (mu - s); zero for the martingale."""
    if model.is_martingale:
        return 0.0
    return -math.expm1(-model.a * tau)


def directional_bet(model: PriceModel, t: float, s, T: float):
    """Expected terminal mid-price minus the current one.

    Accepts a scalar or an array of mid-prices.
    """
    tau = _check(t, T, "T")
    if model.is_martingale:
        return 0.0 * s
    return bet_coefficient(model, tau) * (model.mu - s)


def transition_law(model: PriceModel, t: float, s: float, xi: float) -> GaussianLaw:
    """Exact Gaussian law of S(xi) given S(t) = s."""
    h = _check(t, xi, "xi")
    if model.is_martingale:
        return GaussianLaw(s, model.sigma**2 * h)
    decay = math.exp(-model.a * h)
    var = model.sigma**2 * -math.expm1(-2 * model.a * h) / (2 * model.a)
    return GaussianLaw(s * decay + model.mu * (1 - decay), var)


def step(model: PriceModel, s, dt: float, g):
    """One Euler-Maruyama step; works elementwise on arrays."""
    if not dt > 0:
        raise DomainError("dt must be > 0")
    noise = model.sigma * math.sqrt(dt) * g
    if model.is_martingale:
        return s + noise
    return s + model.a * (model.mu - s) * dt + noise


def simulate_terminal(model: PriceModel, s: float, tau: float, n_steps: int,
                      rng: np.random.Generator, n_paths: int) -> np.ndarray:
    """Euler paths of length ``tau``; returns the terminal prices."""
    dt = tau / n_steps
    x = np.full(n_paths, float(s))
    for _ in range(n_steps):
        x = step(model, x, dt, rng.standard_normal(n_paths))
    return x
