"""Closed-form optimal quotes.

Three layers share one assembly routine:

* zero order (no inventory risk): ``delta_pm = 1/k +- Delta``;
* first order in epsilon, with the unitary inventory penalty ``pi`` and the
  directional-bet integral ``E[int H pi]``;
* transaction costs, which add ``alpha`` to both half spreads and shift the
  intensity prefactor of ``H`` from ``e^{-kz}`` to ``e^{-k(z+alpha)}``.

Conditional expectations over the mid-price are Gaussian for both price
models, so ``E[sinh(k Delta(xi, S(xi)))]`` and its cosh counterpart are
evaluated in closed form and only the time integral uses Gauss-Legendre.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import ControlSet, MarketEnv, MarketState, check_time
from .price_models import PriceModel, bet_coefficient, directional_bet

DEFAULT_QUAD_NODES = 32
_FOUR_OVER_E = 4.0 / math.e


class Mode(str, enum.Enum):
    FULL = "full"
    SIMPLIFIED = "simplified"


@dataclass(frozen=True)
class PenaltyTerms:
    pi_tilde: float
    bias_integral: float


@dataclass(frozen=True)
class ValueDecomposition:
    u_hold: float
    u_mm: float

    @property
    def total(self) -> float:
        return self.u_hold + self.u_mm


@dataclass(frozen=True)
class BiasTable:
    """Quadrature table for ``sum_j weights[j] * f(slopes[j] * (mu - s))``.

    ``weights`` already include the quadrature weight, the intensity
    prefactor, the penalty at the node and the Gaussian variance factor.
    """

    weights: np.ndarray
    slopes: np.ndarray
    mu: float

    def __len__(self):
        return len(self.weights)

    def sinh_sum(self, s: float) -> float:
        x = self.mu - s
        acc = 0.0
        for w, b in zip(self._w, self._b):
            acc += w * math.sinh(b * x)
        return acc

    def cosh_sum(self, s: float) -> float:
        x = self.mu - s
        acc = 0.0
        for w, b in zip(self._w, self._b):
            acc += w * math.cosh(b * x)
        return acc

    @property
    def _w(self):
        return self.weights.tolist()

    @property
    def _b(self):
        return self.slopes.tolist()


_EMPTY = np.zeros(0)


@lru_cache(maxsize=16)
def _legendre(n: int):
    return np.polynomial.legendre.leggauss(n)


def intensity(env: MarketEnv, delta):
    """Fill intensity ``A exp(-k (z + delta))``; extrapolated for delta < -z."""
    if isinstance(delta, np.ndarray):
        return env.A * np.exp(-env.k * (env.z + delta))
    return env.A * math.exp(-env.k * (env.z + delta))


def _gaussian_tables(model: PriceModel, k: float, t: float, T: float, quad_nodes: int):
    """Nodes, scaled weights, slopes of the mean of kDelta, and its variance."""
    if quad_nodes < 2:
        raise ValueError("quad_nodes must be >= 2")
    x, w = _legendre(quad_nodes)
    half = (T - t) / 2
    xi = t + half * (x + 1)
    wq = w * half
    a = model.a
    coef = -np.expm1(-a * (T - xi))
    decay = np.exp(-a * (xi - t))
    var_s = model.sigma**2 * -np.expm1(-2 * a * (xi - t)) / (2 * a)
    slopes = k * coef * decay
    x_var = (k * coef) ** 2 * var_s
    return xi, wq, slopes, x_var


def bias_table(A: float, k: float, z_eff: float, pen_terminal: float, pen_rate: float,
               model: PriceModel, t: float, T: float,
               quad_nodes: int = DEFAULT_QUAD_NODES) -> BiasTable:
    """Table for ``E[int_t^T (4/e) A e^{-k z_eff} sinh(k Delta) pi(xi) dxi]``.

    The penalty along the horizon is ``pi(xi) = pen_terminal + pen_rate (T - xi)``.
    Empty for a martingale, where the integral vanishes identically.
    """
    check_time(t, T)
    if model.is_martingale:
        return BiasTable(_EMPTY, _EMPTY, 0.0)
    xi, wq, slopes, x_var = _gaussian_tables(model, k, t, T, quad_nodes)
    pen = pen_terminal + pen_rate * (T - xi)
    weights = wq * (_FOUR_OVER_E * A * math.exp(-k * z_eff)) * pen * np.exp(x_var / 2)
    return BiasTable(weights, slopes, model.mu)


def unitary_penalty(env: MarketEnv, t: float, T: float, mode: Mode = Mode.FULL) -> float:
    """Penalty per unit of squared inventory: ``eta z + nu sigma^2 (T - t)``."""
    check_time(t, T)
    if Mode(mode) is Mode.SIMPLIFIED:
        return env.eta * env.z
    return env.eta * env.z + env.nu * env.sigma**2 * (T - t)


def bias_integral(env: MarketEnv, model: PriceModel, t: float, s: float, T: float,
                  quad_nodes: int = DEFAULT_QUAD_NODES, z_shift: float = 0.0) -> float:
    table = bias_table(env.A, env.k, env.z + z_shift, env.eta * env.z,
                       env.nu * env.sigma**2, model, t, T, quad_nodes)
    return table.sinh_sum(s)


def assemble(inv_k: float, alpha: float, delta: float, eps: float, bias: float,
             pen_q: float, pen_diag: float, s: float) -> ControlSet:
    """Combine the pieces into half spreads.

    The simulation kernels use this exact operation order.
    """
    dp = inv_k + alpha + delta + eps * (-bias - 2.0 * pen_q + pen_diag)
    dm = inv_k + alpha - delta + eps * (bias + 2.0 * pen_q + pen_diag)
    return ControlSet.from_deltas(dp, dm, s)


def quotes_zero_order(env: MarketEnv, model: PriceModel, t: float, s: float,
                      T: float) -> ControlSet:
    check_time(t, T)
    delta = directional_bet(model, t, s, T)
    return assemble(1.0 / env.k, 0.0, delta, 0.0, 0.0, 0.0, 0.0, s)


def _first_order(env, model, state, T, mode, alpha, quad_nodes):
    check_time(state.t, T)
    mode = Mode(mode)
    delta = directional_bet(model, state.t, state.s, T)
    pi = unitary_penalty(env, state.t, T, mode)
    if mode is Mode.FULL:
        bias = bias_integral(env, model, state.t, state.s, T, quad_nodes, z_shift=alpha)
    else:
        bias = 0.0
    return assemble(1.0 / env.k, alpha, delta, env.epsilon, bias, pi * state.q, pi, state.s)


def quotes_first_order(env: MarketEnv, model: PriceModel, state: MarketState, T: float,
                       mode: Mode = Mode.FULL,
                       quad_nodes: int = DEFAULT_QUAD_NODES) -> ControlSet:
    """First-order quotes without transaction costs.

    ``Mode.SIMPLIFIED`` drops the sinh integral and the volatility part of
    the penalty, keeping only ``pi = eta z``.
    """
    return _first_order(env, model, state, T, mode, 0.0, quad_nodes)


def quotes_with_costs(env: MarketEnv, model: PriceModel, state: MarketState, T: float,
                      mode: Mode = Mode.FULL,
                      quad_nodes: int = DEFAULT_QUAD_NODES) -> ControlSet:
    return _first_order(env, model, state, T, mode, env.alpha, quad_nodes)


def penalty_terms(env: MarketEnv, model: PriceModel, t: float, s: float, T: float,
                  quad_nodes: int = DEFAULT_QUAD_NODES) -> PenaltyTerms:
    return PenaltyTerms(unitary_penalty(env, t, T),
                        bias_integral(env, model, t, s, T, quad_nodes))


def value_function_zero(env: MarketEnv, model: PriceModel, t: float, s: float, q: int,
                        x: float, T: float,
                        quad_nodes: int = DEFAULT_QUAD_NODES) -> ValueDecomposition:
    """Exact value at zero inventory risk, split into buy-and-hold and market making."""
    check_time(t, T)
    u_hold = x + q * (s + directional_bet(model, t, s, T))
    base = (2.0 / math.e) * (env.A / env.k) * math.exp(-env.k * env.z)
    if model.is_martingale:
        return ValueDecomposition(u_hold, base * (T - t))
    _, wq, slopes, x_var = _gaussian_tables(model, env.k, t, T, quad_nodes)
    table = BiasTable(wq * np.exp(x_var / 2), slopes, model.mu)
    return ValueDecomposition(u_hold, base * table.cosh_sum(s))


def theta_first_order(env: MarketEnv, model: PriceModel, t: float, s: float, T: float,
                      quad_nodes: int = DEFAULT_QUAD_NODES) -> tuple[float, float]:
    """First-order coefficients of q^2 and q in the value expansion."""
    terms = penalty_terms(env, model, t, s, T, quad_nodes)
    return -terms.pi_tilde, -terms.bias_integral


def bet_coefficients(model: PriceModel, times: np.ndarray, T: float) -> np.ndarray:
    """Vector of directional-bet factors for a grid of times."""
    return np.array([bet_coefficient(model, T - t) for t in times])
