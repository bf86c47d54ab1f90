"""Monte Carlo simulation of a trading day under a quoting policy.

Each step of size ``dt = T / n_steps``:

1. quotes are computed from the state at the start of the step;
2. each side fills at most once, with probability ``1 - exp(-lambda(delta) dt)``;
3. cash and inventory are updated (transaction costs only under ``WITH_COSTS``);
4. the mid-price takes one Euler step.

Everything the quotes need that does not depend on the path (directional
bet factors, penalty matrices, quadrature tables) is tabulated per step once
and handed to the path kernel.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import DomainError, MarketEnv
from .kernel import get_kernel
from .multi import MultiEnv, asset_bias_tables, penalty_matrix
from .price_models import PriceModel, bet_coefficient
from .quotes import DEFAULT_QUAD_NODES, Mode

CHUNK_PATHS = 256


class Policy(str, enum.Enum):
    ZERO_ORDER = "zero_order"
    FIRST_ORDER_FULL = "first_order_full"
    FIRST_ORDER_SIMPLIFIED = "first_order_simplified"
    WITH_COSTS = "with_costs"

    @property
    def mode(self) -> Mode:
        return Mode.SIMPLIFIED if self is Policy.FIRST_ORDER_SIMPLIFIED else Mode.FULL

    @property
    def charges_costs(self) -> bool:
        return self is Policy.WITH_COSTS


@dataclass(frozen=True)
class SimConfig:
    n_steps: int = 1000
    T: float = 1.0
    n_paths: int = 10000
    seed: int = 0
    policy: Policy = Policy.FIRST_ORDER_FULL
    record_paths: bool = False
    s0: float | Sequence[float] = 3000.0
    quad_nodes: int = DEFAULT_QUAD_NODES

    def __post_init__(self):
        object.__setattr__(self, "policy", Policy(self.policy))
        if self.n_steps < 1:
            raise DomainError("n_steps must be >= 1")
        if self.n_paths < 1:
            raise DomainError("n_paths must be >= 1")
        if not self.T > 0:
            raise DomainError("T must be > 0")
        if self.seed < 0:
            raise DomainError("seed must be a non-negative integer")

    @property
    def dt(self) -> float:
        return self.T / self.n_steps


@dataclass
class PathResult:
    terminal_pnl: float
    q_min: int | np.ndarray
    q_max: int | np.ndarray
    n_buy_fills: int | np.ndarray
    n_sell_fills: int | np.ndarray
    timeseries: dict | None = None

    @property
    def q_final(self):
        return self.n_buy_fills - self.n_sell_fills


@dataclass
class PnlSample:
    """Columnar batch of simulated days, indexable as :class:`PathResult`."""

    config: SimConfig
    seeds: np.ndarray
    terminal_pnl: np.ndarray
    q_min: np.ndarray
    q_max: np.ndarray
    n_buy_fills: np.ndarray
    n_sell_fills: np.ndarray
    timeseries: dict | None = None
    n_assets: int = 1
    label: str = ""

    def __len__(self):
        return len(self.terminal_pnl)

    def __getitem__(self, i) -> PathResult:
        return PathResult(
            terminal_pnl=float(self.terminal_pnl[i]),
            q_min=self._pick(self.q_min[i]),
            q_max=self._pick(self.q_max[i]),
            n_buy_fills=self._pick(self.n_buy_fills[i]),
            n_sell_fills=self._pick(self.n_sell_fills[i]),
            timeseries=self.timeseries if i == 0 else None,
        )

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def _pick(self, value):
        return int(value) if self.n_assets == 1 else np.array(value)

    @property
    def inventory_range(self) -> np.ndarray:
        return self.q_max - self.q_min

    def records(self) -> list[dict]:
        """One row per path (single asset) in the paths CSV schema."""
        if self.n_assets != 1:
            rows = []
            for i in range(len(self)):
                row = {"path_id": i, "terminal_pnl": float(self.terminal_pnl[i])}
                for a in range(self.n_assets):
                    row[f"q_min_{a}"] = int(self.q_min[i, a])
                    row[f"q_max_{a}"] = int(self.q_max[i, a])
                    row[f"n_buy_fills_{a}"] = int(self.n_buy_fills[i, a])
                    row[f"n_sell_fills_{a}"] = int(self.n_sell_fills[i, a])
                rows.append(row)
            return rows
        return [
            {
                "path_id": i,
                "terminal_pnl": float(self.terminal_pnl[i]),
                "q_min": int(self.q_min[i]),
                "q_max": int(self.q_max[i]),
                "n_buy_fills": int(self.n_buy_fills[i]),
                "n_sell_fills": int(self.n_sell_fills[i]),
            }
            for i in range(len(self))
        ]


def path_seed(master_seed: int, index: int) -> int:
    """Independent 64-bit seed for path ``index`` of a batch."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, np.uint64)[0])


def draw_path_noise(seed: int, n_steps: int, n_assets: int):
    """Gaussian price shocks (n_steps, M) and fill uniforms (n_steps, M, 2)."""
    rng = np.random.default_rng(seed)
    gauss = rng.standard_normal((n_steps, n_assets))
    unif = rng.random((n_steps, n_assets, 2))
    return gauss, unif


@dataclass
class _Tables:
    s0: np.ndarray
    chol_sd: np.ndarray
    drift_a: np.ndarray
    drift_mu: np.ndarray
    pmu: np.ndarray
    dcoef: np.ndarray
    pen: np.ndarray
    bias_w: np.ndarray
    bias_b: np.ndarray
    inv_k: np.ndarray
    A: np.ndarray
    k: np.ndarray
    z: np.ndarray
    alpha_quote: np.ndarray
    alpha_cash: np.ndarray
    eps: float
    dt: float
    times: np.ndarray = field(repr=False)


def build_tables(menv: MultiEnv, price_models: Sequence[PriceModel],
                 policy_models: Sequence[PriceModel], config: SimConfig,
                 price_vol: float | None = None) -> _Tables:
    """Tabulate the path-independent parts of the policy.

    Price shocks use the Cholesky factor of ``menv.Lambda``, or
    ``price_vol`` for a single asset whose price model carries its own
    volatility.
    """
    M = menv.M
    if len(price_models) != M or len(policy_models) != M:
        raise DomainError(f"expected {M} price models")
    N, T, dt = config.n_steps, config.T, config.dt
    policy = config.policy
    times = np.arange(N) * dt

    dcoef = np.array([[bet_coefficient(pm, T - t) for pm in policy_models] for t in times])
    dcoef = dcoef.reshape(N, M)
    pen = np.zeros((N, M, M))
    tables = [[] for _ in range(N)]
    if policy is not Policy.ZERO_ORDER:
        for n, t in enumerate(times):
            pen[n] = penalty_matrix(menv, t, T, policy.mode).pi
            tables[n] = asset_bias_tables(menv, policy_models, t, T, policy.mode,
                                          policy.charges_costs, config.quad_nodes)
    K = max((len(tb) for row in tables for tb in row), default=0)
    bias_w = np.zeros((N, M, K))
    bias_b = np.zeros((N, M, K))
    for n, row in enumerate(tables):
        for i, tb in enumerate(row):
            bias_w[n, i, : len(tb)] = tb.weights
            bias_b[n, i, : len(tb)] = tb.slopes

    s0 = np.asarray(config.s0, dtype=float)
    if s0.ndim == 0:
        s0 = np.full(M, float(s0))
    if s0.shape != (M,):
        raise DomainError(f"s0 must have length {M}")
    alpha = menv.alpha if policy.charges_costs else np.zeros(M)
    if price_vol is not None:
        # same rounding as price_models.step
        chol_sd = np.array([[price_vol * math.sqrt(dt)]])
    else:
        chol_sd = menv.cholesky * math.sqrt(dt)
    return _Tables(
        s0=s0,
        chol_sd=np.ascontiguousarray(chol_sd),
        drift_a=np.array([pm.drift_speed for pm in price_models]),
        drift_mu=np.array([pm.mu for pm in price_models]),
        pmu=np.array([pm.mu for pm in policy_models]),
        dcoef=np.ascontiguousarray(dcoef),
        pen=pen,
        bias_w=bias_w,
        bias_b=bias_b,
        inv_k=1.0 / menv.k,
        A=menv.A.copy(),
        k=menv.k.copy(),
        z=menv.z.copy(),
        alpha_quote=np.array(alpha, dtype=float),
        alpha_cash=np.array(alpha, dtype=float),
        eps=0.0 if policy is Policy.ZERO_ORDER else float(menv.epsilon),
        dt=dt,
        times=times,
    )


def simulate_draws(tables: _Tables, gauss: np.ndarray, unif: np.ndarray,
                   record: bool = False, backend: str | None = None):
    """Run the kernel on explicit draws; returns the raw output arrays."""
    gauss = np.ascontiguousarray(gauss, dtype=float)
    unif = np.ascontiguousarray(unif, dtype=float)
    P, N, M = gauss.shape
    out = {
        "pnl": np.zeros(P),
        "qmin": np.zeros((P, M), dtype=np.int64),
        "qmax": np.zeros((P, M), dtype=np.int64),
        "nbuy": np.zeros((P, M), dtype=np.int64),
        "nsell": np.zeros((P, M), dtype=np.int64),
    }
    rec = np.zeros((N, M, 5) if record else (0, M, 5))
    _run_kernel(tables, gauss, unif, out["pnl"], out["qmin"], out["qmax"], out["nbuy"],
                out["nsell"], rec, backend)
    out["rec"] = rec if record else None
    return out


def _run_kernel(tb, gauss, unif, pnl, qmin, qmax, nbuy, nsell, rec, backend):
    get_kernel(backend)(
        tb.s0, gauss, unif, tb.chol_sd, tb.drift_a, tb.drift_mu, tb.pmu, tb.dcoef, tb.pen,
        tb.bias_w, tb.bias_b, tb.inv_k, tb.A, tb.k, tb.z, tb.alpha_quote, tb.alpha_cash,
        tb.eps, tb.dt, pnl, qmin, qmax, nbuy, nsell, rec,
    )


def _timeseries(tables: _Tables, rec: np.ndarray, M: int) -> dict:
    ts = {
        "t": tables.times.copy(),
        "s": rec[:, :, 0].copy(),
        "delta_plus": rec[:, :, 1].copy(),
        "delta_minus": rec[:, :, 2].copy(),
        "q": rec[:, :, 3].astype(np.int64),
        "x": rec[:, 0, 4].copy(),
    }
    if M == 1:
        for key in ("s", "delta_plus", "delta_minus", "q"):
            ts[key] = ts[key][:, 0]
    return ts


def _batch(menv, price_models, policy_models, config, backend, workers, label,
           price_vol=None):
    tables = build_tables(menv, price_models, policy_models, config, price_vol)
    M, N, P = menv.M, config.n_steps, config.n_paths
    seeds = np.array([path_seed(config.seed, i) for i in range(P)], dtype=np.uint64)
    pnl = np.zeros(P)
    qmin = np.zeros((P, M), dtype=np.int64)
    qmax = np.zeros((P, M), dtype=np.int64)
    nbuy = np.zeros((P, M), dtype=np.int64)
    nsell = np.zeros((P, M), dtype=np.int64)
    rec = np.zeros((N, M, 5) if config.record_paths else (0, M, 5))

    def work(start):
        stop = min(start + CHUNK_PATHS, P)
        gauss = np.empty((stop - start, N, M))
        unif = np.empty((stop - start, N, M, 2))
        for j, i in enumerate(range(start, stop)):
            gauss[j], unif[j] = draw_path_noise(int(seeds[i]), N, M)
        chunk_rec = rec if start == 0 else np.zeros((0, M, 5))
        _run_kernel(tables, gauss, unif, pnl[start:stop], qmin[start:stop],
                    qmax[start:stop], nbuy[start:stop], nsell[start:stop], chunk_rec, backend)

    starts = range(0, P, CHUNK_PATHS)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, starts))
    else:
        for start in starts:
            work(start)

    squeeze = (lambda a: a[:, 0]) if M == 1 else (lambda a: a)
    return PnlSample(
        config=config,
        seeds=seeds,
        terminal_pnl=pnl,
        q_min=squeeze(qmin),
        q_max=squeeze(qmax),
        n_buy_fills=squeeze(nbuy),
        n_sell_fills=squeeze(nsell),
        timeseries=_timeseries(tables, rec, M) if config.record_paths else None,
        n_assets=M,
        label=label or config.policy.value,
    )


def run_batch(env: MarketEnv, model: PriceModel, config: SimConfig,
              policy_model: PriceModel | None = None, backend: str | None = None,
              workers: int | None = None, label: str = "") -> PnlSample:
    """Simulate ``config.n_paths`` independent days of a single asset.

    ``model`` drives the mid-price; the policy uses ``policy_model`` for its
    directional bet (defaults to ``model``). Path ``i`` always consumes the
    draws of :func:`path_seed` ``(seed, i)``, whatever the worker count.
    """
    menv = MultiEnv.from_single(env)
    return _batch(menv, [model], [policy_model or model], config, backend, workers, label,
                  price_vol=model.sigma)


def run_path(env: MarketEnv, model: PriceModel, config: SimConfig, path_seed_value: int,
             policy_model: PriceModel | None = None, backend: str | None = None,
             record: bool | None = None) -> PathResult:
    """Simulate one day from an explicit path seed."""
    record = config.record_paths if record is None else record
    menv = MultiEnv.from_single(env)
    tables = build_tables(menv, [model], [policy_model or model], config, model.sigma)
    gauss, unif = draw_path_noise(path_seed_value, config.n_steps, 1)
    out = simulate_draws(tables, gauss[None], unif[None], record=record, backend=backend)
    return PathResult(
        terminal_pnl=float(out["pnl"][0]),
        q_min=int(out["qmin"][0, 0]),
        q_max=int(out["qmax"][0, 0]),
        n_buy_fills=int(out["nbuy"][0, 0]),
        n_sell_fills=int(out["nsell"][0, 0]),
        timeseries=_timeseries(tables, out["rec"], 1) if record else None,
    )


def run_batch_multi(menv: MultiEnv, models: Sequence[PriceModel], config: SimConfig,
                    policy_models: Sequence[PriceModel] | None = None,
                    backend: str | None = None, workers: int | None = None,
                    label: str = "") -> PnlSample:
    """Multi-asset batch: correlated prices, per-asset fills, vector quotes."""
    models = list(models)
    if len(models) != menv.M:
        raise DomainError(f"expected {menv.M} price models, got {len(models)}")
    policy_models = list(policy_models) if policy_models is not None else models
    return _batch(menv, models, policy_models, config, backend, workers, label)
