"""Brute-force cross-checks of the closed-form quotes and value expansion.

* grid search of the one-sided jump Hamiltonian;
* Monte Carlo of the Feynman-Kac expectations behind the closed forms;
* direct backward integration of the verification ODE system (martingale
  mid-price, single asset), compared with the first-order expansion.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .core import DomainError, MarketEnv, MarketState, check_time
from .price_models import PriceModel, expected_terminal
from .quotes import (quotes_first_order, theta_first_order, unitary_penalty,
                     value_function_zero)
from .stats import VERIFY_FIELDS, write_csv


class InconclusiveError(RuntimeError):
    """The grid search hit the edge of its search interval."""


class NumericError(ArithmeticError):
    """Non-finite values appeared while integrating."""


class Target(str, enum.Enum):
    THETA1_ZERO = "Theta1Zero"
    U_MM = "U_mm"
    THETA1_1 = "Theta1_1"


@dataclass(frozen=True)
class McEstimate:
    estimate: float
    std_error: float

    def agrees(self, reference: float, n_se: float = 3.0, floor: float = 1e-9) -> bool:
        return abs(self.estimate - reference) <= max(n_se * self.std_error, floor)


@dataclass(frozen=True)
class OdeGrid:
    Q: int
    n_time: int
    T: float
    times: np.ndarray
    values: np.ndarray  # (2Q+1, n_time+1), column j at times[j]

    @property
    def q(self) -> np.ndarray:
        return np.arange(-self.Q, self.Q + 1)

    def at(self, q: int, j: int = 0) -> float:
        return float(self.values[q + self.Q, j])


@dataclass(frozen=True)
class CheckResult:
    check: str
    computed: float
    reference: float
    tolerance: float
    passed: bool

    def row(self) -> dict:
        return dict(check=self.check, computed=self.computed, reference=self.reference,
                    tolerance=self.tolerance, passed=self.passed)


# ---------------------------------------------------------------- argmax

def argmax_grid(env: MarketEnv, s: float, theta1: float, grid_lo: float, grid_hi: float,
                grid_step: float, side: str = "ask") -> float:
    """Maximise the one-sided Hamiltonian over a uniform grid.

    Ask side: ``A e^{-k(z+d)} (s + d - theta1)``, closed-form maximiser
    ``1/k - s + theta1``. Bid side mirrors it: ``A e^{-k(z+d)} (theta1 - s + d)``.
    """
    if not grid_step > 0 or not grid_hi > grid_lo:
        raise DomainError("need grid_lo < grid_hi and grid_step > 0")
    n = int(math.floor((grid_hi - grid_lo) / grid_step + 1e-9)) + 1
    d = grid_lo + grid_step * np.arange(n)
    gain = s + d - theta1 if side == "ask" else theta1 - s + d
    f = env.A * np.exp(-env.k * (env.z + d)) * gain
    i = int(np.argmax(f))
    if i == 0 or i == n - 1:
        raise InconclusiveError(f"maximum at grid edge {d[i]:.6g}")
    return float(d[i])


# ---------------------------------------------------------- Feynman-Kac MC

def _ou_paths_chunk(model: PriceModel, s: float, dt: float, n_steps: int, rng, n: int):
    """Yield the state at each grid time for ``n`` Euler paths (time index, S)."""
    S = np.full(n, float(s))
    a, mu, sd = model.drift_speed, model.mu, model.sigma * math.sqrt(dt)
    yield 0, S
    for j in range(1, n_steps + 1):
        S = S + a * (mu - S) * dt + sd * rng.standard_normal(n)
        yield j, S


def feynman_kac_mc(env: MarketEnv, model: PriceModel, target, t: float, s: float, T: float,
                   n_mc: int, seed: int, n_steps: int = 1000, chunk: int = 20000) -> McEstimate:
    """Monte Carlo estimate of the expectation defining ``target``.

    Theta1Zero: ``E[S(T)]``.
    U_mm: ``(2/e)(A/k) e^{-kz} int cosh(k Delta(xi, S(xi))) dxi``.
    Theta1_1: ``-(4/e) A e^{-kz} int sinh(k Delta(xi, S(xi))) pi(xi) dxi``.
    Time integrals use the trapezoid rule on the Euler grid.
    """
    target = Target(target)
    check_time(t, T)
    if n_mc < 100:
        raise DomainError("n_mc must be >= 100")
    tau = T - t
    dt = tau / n_steps
    times = t + dt * np.arange(n_steps + 1)
    trap = np.full(n_steps + 1, dt)
    trap[[0, -1]] = dt / 2
    a = model.drift_speed
    coef = -np.expm1(-a * (T - times))  # Delta(xi, S) = coef * (mu - S)
    if target is Target.U_MM:
        scale = (2.0 / math.e) * (env.A / env.k) * math.exp(-env.k * env.z)
    else:
        scale = -(4.0 / math.e) * env.A * math.exp(-env.k * env.z)
    pen = np.array([unitary_penalty(env, x, T) for x in times])

    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n_mc:
        n = min(chunk, n_mc - done)
        acc = np.zeros(n)
        last = None
        for j, S in _ou_paths_chunk(model, s, dt, n_steps, rng, n):
            last = S
            if target is Target.THETA1_ZERO:
                continue
            kd = env.k * coef[j] * (model.mu - S)
            if target is Target.U_MM:
                acc += trap[j] * np.cosh(kd)
            else:
                acc += trap[j] * pen[j] * np.sinh(kd)
        y = last if target is Target.THETA1_ZERO else scale * acc
        total += float(y.sum())
        total_sq += float((y * y).sum())
        done += n
    mean = total / n_mc
    var = max(total_sq / n_mc - mean * mean, 0.0) * n_mc / (n_mc - 1)
    return McEstimate(mean, math.sqrt(var / n_mc))


def closed_form(env: MarketEnv, model: PriceModel, target, t: float, s: float, T: float,
                quad_nodes: int = 32) -> float:
    """Quadrature value matching a :func:`feynman_kac_mc` target."""
    target = Target(target)
    if target is Target.THETA1_ZERO:
        return expected_terminal(model, t, s, T)
    if target is Target.U_MM:
        return value_function_zero(env, model, t, s, 0, 0.0, T, quad_nodes).u_mm
    return theta_first_order(env, model, t, s, T, quad_nodes)[1]


# ------------------------------------------------------- verification ODE

def _ode_rhs(env: MarketEnv, s: float, eps: float, q: np.ndarray, boundary: str):
    A, k, z = env.A, env.k, env.z
    run = eps * env.nu * env.sigma**2 * q * q
    extrapolate = boundary == "extrapolate"

    def rhs(v):
        # returns -dv/dt, so that stepping backward in time is v += h * rhs
        if extrapolate:
            lo = 3 * v[0] - 3 * v[1] + v[2]
            hi = 3 * v[-1] - 3 * v[-2] + v[-3]
        else:
            lo, hi = v[0], v[-1]  # placeholders; those terms are zeroed below
        v_dn = np.concatenate(([lo], v[:-1]))
        v_up = np.concatenate((v[1:], [hi]))
        h_sell = (A / k) * np.exp(-k * (z + 1 / k - s + v - v_dn))
        h_buy = (A / k) * np.exp(-k * (z + 1 / k + s + v - v_up))
        if not extrapolate:
            h_sell[0] = 0.0
            h_buy[-1] = 0.0
        return h_sell + h_buy - run

    return rhs


def solve_verification_ode(env: MarketEnv, s_frozen: float, Q: int, n_time: int, T: float,
                           boundary: str = "extrapolate") -> OdeGrid:
    """Integrate the inventory-indexed ODE system backward with classical RK4.

    The optimal controls are substituted from the current layer, so the
    system is nonlinear. ``boundary`` selects how the neighbours of ``q = +-Q``
    are treated: ``"extrapolate"`` continues ``v`` quadratically past the
    edge, ``"reflect"`` switches off the fill that would leave the grid.

    The scheme is explicit: with fill rates near ``A e^{-kz-1}`` it needs
    roughly ``T / n_time < 2.8 / (2 k A e^{-kz-1})``, or values blow up and
    :class:`NumericError` is raised.
    """
    min_q = 3 if boundary == "extrapolate" else 1
    if Q < min_q:
        raise DomainError(f"Q must be >= {min_q} with the {boundary!r} boundary")
    if n_time < 1:
        raise DomainError("n_time must be >= 1")
    if boundary not in ("extrapolate", "reflect"):
        raise DomainError(f"unknown boundary {boundary!r}")
    if not T >= 0:
        raise DomainError("T must be >= 0")
    eps = env.epsilon
    q = np.arange(-Q, Q + 1, dtype=float)
    out = np.empty((2 * Q + 1, n_time + 1))
    v = s_frozen * q - eps * env.eta * env.z * q * q
    out[:, n_time] = v
    rhs = _ode_rhs(env, s_frozen, eps, q, boundary)
    h = T / n_time
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(n_time - 1, -1, -1):
            k1 = rhs(v)
            k2 = rhs(v + h / 2 * k1)
            k3 = rhs(v + h / 2 * k2)
            k4 = rhs(v + h * k3)
            v = v + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.all(np.isfinite(v)):
                bad = int(np.flatnonzero(~np.isfinite(v))[0]) - Q
                raise NumericError(f"non-finite value at q={bad}, step {j} of {n_time} (h={h:g})")
            out[:, j] = v
    return OdeGrid(Q, n_time, T, np.linspace(0.0, T, n_time + 1), out)


def expansion(env: MarketEnv, s_frozen: float, q, t: float, T: float):
    """First-order value ``v0 + eps v1`` for a martingale mid-price."""
    q = np.asarray(q, dtype=float)
    tau = T - t
    base = (2.0 * env.A / math.e) * math.exp(-env.k * env.z)
    v0 = s_frozen * q + base / env.k * tau
    pi = unitary_penalty(env, t, T)
    theta0 = -base * (env.eta * env.z * tau + env.nu * env.sigma**2 * tau**2 / 2)
    return v0 + env.epsilon * (theta0 - q * q * pi)


def expansion_order_check(env: MarketEnv, s_frozen: float, eps_list: Sequence[float], Q: int,
                          n_time: int, T: float, boundary: str = "extrapolate",
                          ) -> list[tuple[float, float]]:
    """Max ``|ODE - expansion|`` at t=0 over ``|q| <= Q//3`` for each epsilon."""
    eps_list = list(eps_list)
    if len(eps_list) < 2:
        raise DomainError("eps_list needs at least two entries")
    if any(e <= 0 for e in eps_list) or any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise DomainError("eps_list must be positive and strictly decreasing")
    return [(e, expansion_error(env, e, s_frozen, Q, n_time, T, boundary)) for e in eps_list]


def expansion_error(env: MarketEnv, eps: float, s_frozen: float, Q: int, n_time: int,
                    T: float, boundary: str = "extrapolate") -> float:
    e = replace(env, epsilon=eps)
    grid = solve_verification_ode(e, s_frozen, Q, n_time, T, boundary)
    inner = np.abs(grid.q) <= Q // 3
    diff = grid.values[:, 0] - expansion(e, s_frozen, grid.q, 0.0, T)
    return float(np.max(np.abs(diff[inner])))


# ---------------------------------------------------------------- report

def verification_suite(env: MarketEnv, ou: PriceModel, s: float = 3000.0, T: float = 1.0,
                       n_mc: int = 20000, seed: int = 0, tol_scale: float = 1.0,
                       n_fk_steps: int = 1000) -> list[CheckResult]:
    """The full battery of oracle checks behind ``mmpert verify``.

    ``tol_scale`` multiplies every tolerance; values below 1 tighten them.
    """
    results: list[CheckResult] = []
    bm = PriceModel.martingale(env.sigma)

    # argmax of the jump Hamiltonian, both sides
    step = 1e-4
    for side in ("ask", "bid"):
        theta1 = s + 0.3
        closed = 1 / env.k - s + theta1 if side == "ask" else 1 / env.k + s - theta1
        grid = argmax_grid(env, s, theta1, closed - 2, closed + 2, step, side)
        results.append(CheckResult(f"argmax_{side}", grid, closed, step * tol_scale,
                                   abs(grid - closed) <= step * tol_scale))

    # Feynman-Kac expectations
    for mname, model in (("martingale", bm), ("ou", ou)):
        for i, target in enumerate(Target):
            est = feynman_kac_mc(env, model, target, 0.0, s, T, n_mc, seed + i, n_fk_steps)
            ref = closed_form(env, model, target, 0.0, s, T)
            tol = max(3 * est.std_error, 1e-9) * tol_scale
            results.append(CheckResult(f"fk_{target.value}_{mname}", est.estimate, ref, tol,
                                       abs(est.estimate - ref) <= tol))

    # first-order spread identity
    c = quotes_first_order(env, bm, MarketState(0.0, s, 0), T)
    ref = 2 / env.k + 2 * env.epsilon * unitary_penalty(env, 0.0, T)
    tol = 1e-12 * tol_scale
    results.append(CheckResult("spread_first_order", c.psi, ref, tol, abs(c.psi - ref) <= tol))

    # expansion at eps = 0 and the eps-halving ratio
    err0 = expansion_error(replace(env, epsilon=0.0), 0.0, s, 30, 2000, T)
    tol = 1e-6 * tol_scale
    results.append(CheckResult("ode_expansion_eps0", err0, 0.0, tol, err0 <= tol))
    (_, e2), (_, e1) = expansion_order_check(env, s, [2 * env.epsilon, env.epsilon], 30, 2000, T)
    ratio = e2 / e1
    half_width = 1.25 * tol_scale
    results.append(CheckResult("ode_expansion_ratio", ratio, 4.25, half_width,
                               abs(ratio - 4.25) <= half_width))
    return results


def write_report(results: Sequence[CheckResult], path) -> None:
    write_csv([r.row() for r in results], path, VERIFY_FIELDS)

