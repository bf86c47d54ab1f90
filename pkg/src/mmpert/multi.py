"""Multi-asset quotes, the penalty matrix and iso-risk ranking."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import ControlSet, DomainError, MarketEnv, check_time
from .price_models import PriceModel, directional_bet
from .quotes import _EMPTY, DEFAULT_QUAD_NODES, BiasTable, Mode, assemble, bias_table


def _vector(value, M, name):
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(M, float(arr))
    if arr.shape != (M,):
        raise DomainError(f"{name} must have length {M}, got shape {arr.shape}")
    return arr


def _is_spd(mat: np.ndarray) -> bool:
    if not np.allclose(mat, mat.T, rtol=0, atol=1e-12 * max(1.0, np.abs(mat).max())):
        return False
    try:
        np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        return False
    return True


@dataclass(frozen=True)
class MultiEnv:
    """Parameters of an M-asset book.

    ``Lambda`` is the instantaneous covariance of the mid-prices and
    ``Omega`` weights the terminal liquidation penalty. Scalars given for
    ``A``, ``k``, ``z`` or ``alpha`` are broadcast to all assets.
    """

    Lambda: np.ndarray
    Omega: np.ndarray
    A: np.ndarray = 1000.0
    k: np.ndarray = 1.0
    z: np.ndarray = 0.5
    alpha: np.ndarray = 0.0
    epsilon: float = 0.001
    eta: float = 1.0
    nu: float = 1.0
    _chol: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lam = np.atleast_2d(np.asarray(self.Lambda, dtype=float))
        om = np.atleast_2d(np.asarray(self.Omega, dtype=float))
        M = lam.shape[0]
        if lam.shape != (M, M) or om.shape != (M, M):
            raise DomainError(f"Lambda {lam.shape} and Omega {om.shape} must both be {M}x{M}")
        set_ = object.__setattr__
        set_(self, "Lambda", lam)
        set_(self, "Omega", om)
        for name in ("A", "k", "z", "alpha"):
            set_(self, name, _vector(getattr(self, name), M, name))
        try:
            chol = np.linalg.cholesky(lam)
        except np.linalg.LinAlgError:
            chol = None
        set_(self, "_chol", chol)

    @property
    def M(self) -> int:
        return self.Lambda.shape[0]

    @property
    def cholesky(self) -> np.ndarray:
        if self._chol is None:
            raise DomainError("Lambda is not positive-definite; Cholesky factorisation failed")
        return self._chol

    @classmethod
    def from_single(cls, env: MarketEnv) -> MultiEnv:
        return cls(Lambda=[[env.sigma**2]], Omega=[[env.z]], A=env.A, k=env.k, z=env.z,
                   alpha=env.alpha, epsilon=env.epsilon, eta=env.eta, nu=env.nu)


def validate_multi_env(menv: MultiEnv) -> list[str]:
    report = []
    if not _is_spd(menv.Lambda):
        report.append("Lambda must be symmetric positive-definite")
    if not _is_spd(menv.Omega):
        report.append("Omega must be symmetric positive-definite")
    if not np.all(menv.A > 0):
        report.append("A must be > 0")
    if not np.all(menv.k > 0):
        report.append("k must be > 0")
    if not np.all(menv.z >= 0):
        report.append("z must be >= 0")
    for name in ("epsilon", "eta", "nu"):
        if not getattr(menv, name) >= 0:
            report.append(f"{name} must be >= 0")
    return report


@dataclass(frozen=True)
class PenaltyMatrix:
    pi: np.ndarray


@dataclass(frozen=True)
class VectorControls:
    delta_plus: np.ndarray
    delta_minus: np.ndarray
    psi: np.ndarray
    r: np.ndarray


def penalty_matrix(menv: MultiEnv, t: float, T: float, mode: Mode = Mode.FULL) -> PenaltyMatrix:
    """``eta Omega + nu Lambda (T - t)`` for constant matrices."""
    check_time(t, T)
    if Mode(mode) is Mode.SIMPLIFIED:
        return PenaltyMatrix(menv.eta * menv.Omega)
    return PenaltyMatrix(menv.eta * menv.Omega + menv.nu * menv.Lambda * (T - t))


def _check_models(menv, models):
    if len(models) != menv.M:
        raise DomainError(f"expected {menv.M} price models, got {len(models)}")


def asset_bias_tables(menv: MultiEnv, models: Sequence[PriceModel], t: float, T: float,
                      mode: Mode = Mode.FULL, with_costs: bool = True,
                      quad_nodes: int = DEFAULT_QUAD_NODES):
    """One bias table per asset, weighted by the row sums of the penalty matrix."""
    _check_models(menv, models)
    if Mode(mode) is Mode.SIMPLIFIED:
        check_time(t, T)
        return [BiasTable(_EMPTY, _EMPTY, 0.0) for _ in models]
    om_rows = menv.Omega.sum(axis=1)
    lam_rows = menv.Lambda.sum(axis=1)
    tables = []
    for i, model in enumerate(models):
        z_eff = menv.z[i] + menv.alpha[i] if with_costs else menv.z[i]
        tables.append(bias_table(menv.A[i], menv.k[i], z_eff, menv.eta * om_rows[i],
                                 menv.nu * lam_rows[i], model, t, T, quad_nodes))
    return tables


def vector_quotes(menv: MultiEnv, models: Sequence[PriceModel], t: float, s, q, T: float,
                  mode: Mode = Mode.FULL,
                  quad_nodes: int = DEFAULT_QUAD_NODES) -> VectorControls:
    """Per-asset optimal quotes with transaction costs.

    Spreads depend only on the diagonal of the penalty matrix; the
    off-diagonal terms move the centres through ``pi q`` and the bias.
    """
    s = _vector(s, menv.M, "s")
    q = np.asarray(q)
    if q.shape != (menv.M,):
        raise DomainError(f"q must have length {menv.M}")
    pi = penalty_matrix(menv, t, T, mode).pi
    pen_q = pi @ q.astype(float)
    tables = asset_bias_tables(menv, models, t, T, mode, True, quad_nodes)
    out = []
    for i, model in enumerate(models):
        delta = directional_bet(model, t, s[i], T)
        out.append(assemble(1.0 / menv.k[i], menv.alpha[i], delta, menv.epsilon,
                            tables[i].sinh_sum(s[i]), pen_q[i], pi[i, i], s[i]))
    return VectorControls(
        delta_plus=np.array([c.delta_plus for c in out]),
        delta_minus=np.array([c.delta_minus for c in out]),
        psi=np.array([c.psi for c in out]),
        r=np.array([c.r for c in out]),
    )


def controls_for_asset(vc: VectorControls, i: int, s: float) -> ControlSet:
    return ControlSet.from_deltas(vc.delta_plus[i], vc.delta_minus[i], s)


def iso_risk(menv: MultiEnv, q, t: float, T: float) -> float:
    """Inventory risk ``eps q'(eta Omega + nu (T-t) Lambda) q`` with q held fixed."""
    q = np.asarray(q, dtype=float)
    if q.shape != (menv.M,):
        raise DomainError(f"q must have length {menv.M}")
    check_time(t, T)
    form = menv.eta * menv.Omega + menv.nu * (T - t) * menv.Lambda
    return float(menv.epsilon * (q @ form @ q))


def rank_inventory_configs(menv: MultiEnv, configs, t: float, T: float):
    """Sort inventory vectors by risk, ties broken lexicographically."""
    configs = [tuple(int(v) for v in c) for c in configs]
    if not configs:
        raise DomainError("no inventory configurations to rank")
    scored = [(iso_risk(menv, c, t, T), c) for c in configs]
    return sorted(scored, key=lambda item: (item[0], item[1]))


def correlated_step(menv: MultiEnv, models: Sequence[PriceModel], s, dt: float, g) -> np.ndarray:
    """Euler step with per-asset drift and Cholesky-correlated diffusion."""
    _check_models(menv, models)
    s = _vector(s, menv.M, "s")
    g = _vector(g, menv.M, "gaussian_draws")
    noise = (menv.cholesky * math.sqrt(dt)) @ g
    out = np.empty(menv.M)
    for i, model in enumerate(models):
        out[i] = s[i] + model.drift_speed * (model.mu - s[i]) * dt + noise[i]
    return out
